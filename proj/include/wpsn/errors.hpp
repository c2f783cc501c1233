#pragma once

#include <stdexcept>
#include <string>

namespace wpsn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotHermitian : public Error {
 public:
  explicit NotHermitian(double residual)
      : Error("matrix is not Hermitian (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class NotPsd : public Error {
 public:
  explicit NotPsd(double min_eigenvalue)
      : Error("matrix is not positive semidefinite (min eigenvalue " +
              std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class Singular : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ZeroIrChannel : public Error {
 public:
  ZeroIrChannel() : Error("downlink channel of the information receiver is zero") {}
};

/// The downlink rate threshold exceeds what the H-AP can deliver at all.
class Infeasible : public Error {
 public:
  Infeasible(double r_i, double r_up)
      : Error("downlink rate threshold " + std::to_string(r_i) +
              " bits exceeds the feasibility ceiling " + std::to_string(r_up) + " bits"),
        r_i_(r_i),
        r_up_(r_up) {}
  double r_i() const noexcept { return r_i_; }
  double r_up() const noexcept { return r_up_; }

 private:
  double r_i_;
  double r_up_;
};

/// The threshold is reachable, but not with this downlink duration.
class InfeasibleAtTau : public Error {
 public:
  InfeasibleAtTau(double tau0, double r_i, double ceiling)
      : Error("downlink duration " + std::to_string(tau0) + " supports at most " +
              std::to_string(ceiling) + " bits, threshold is " + std::to_string(r_i)),
        tau0_(tau0),
        ceiling_(ceiling) {}
  double tau0() const noexcept { return tau0_; }
  double ceiling() const noexcept { return ceiling_; }

 private:
  double tau0_;
  double ceiling_;
};

class AllInfeasible : public Error {
 public:
  AllInfeasible() : Error("objective is infeasible at every probed point") {}
};

class BracketNotFound : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, double residual)
      : Error(what + " did not converge (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& reason)
      : Error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpsn

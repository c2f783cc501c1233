#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wpsn/outer_search.hpp"

// Configuration ingestion, seeded experiment sweeps and CSV output.
namespace wpsn::harness {

enum class ExperimentKind { ConvergenceTrace, GoldenTrace, SweepPb, SweepRi, SweepTau0 };

std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

// Which per-instance thresholds a relative r_i is measured against.
//   mi:         frac * R_mi
//   up:         frac * R_up
//   mi_up:      R_mi + frac * (R_up - R_mi)      (frac 0.5 is the midpoint)
//   mi_half_up: R_mi + frac * (R_up / 2 - R_mi)
enum class RiRef { Mi, Up, MiUp, MiHalfUp };

std::string to_string(RiRef r);
RiRef parse_ri_ref(const std::string& s);

struct RiPolicy {
  bool absolute = false;
  double bits = 0.0;  // when absolute
  RiRef ref = RiRef::MiUp;
  double frac = 0.5;

  static RiPolicy Bits(double b) { return {true, b, RiRef::MiUp, 0.0}; }
  static RiPolicy Relative(RiRef ref, double frac) { return {false, 0.0, ref, frac}; }

  // The thresholds passed in are global (over all tau0) for one scheme and instance.
  double resolve(double r_mi, double r_up) const;
};

struct ExperimentSpec {
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::SweepPb;
  std::vector<Scheme> schemes{Scheme::Sdma, Scheme::Tdma};
  std::vector<Benchmark> variants{Benchmark::None, Benchmark::Mdr, Benchmark::FixedTau};
  double fixed_tau = 0.5;
  std::vector<std::uint64_t> seeds;
  // P_B in dBm (SweepPb), r_i policy value (SweepRi: bits or fraction), tau0 (SweepTau0)
  std::vector<double> grid;
  RiPolicy ri = RiPolicy::Relative(RiRef::MiUp, 0.5);
  double tau0 = 0.5;  // downlink time of ConvergenceTrace
  double kappa = 1e-4;
  std::vector<InitKind> inits{InitKind::Uniform, InitKind::RateMatched};

  // Throws ValidationError with an "experiment." field path.
  void validate() const;
};

struct LoadedConfig {
  SystemConfig system;
  ExperimentSpec experiment;
  bool has_experiment = false;
};

// JSON object with optional flat keys n_b, n_u, k, p_b_dbm, p_i_dbm, sigma2_dbm, eps, pathloss_coeff,
// alpha, radius_m, min_distance_m and an optional "experiment" object. Missing keys keep the defaults.
LoadedConfig parse_config(const std::string& json_text);
// Throws IoError when the file cannot be read, ParseError / ValidationError for bad content.
LoadedConfig load_config(const std::string& path);

enum class RowStatus { Ok, Infeasible, Error };

std::string to_string(RowStatus s);

struct Row {
  std::string experiment;
  std::string kind;
  std::string scheme;
  std::string variant;
  std::string init;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  double r_i = 0.0;
  double r_mi = 0.0;
  double r_up = 0.0;
  double tau0 = 0.0;
  double uplink_rate = 0.0;
  double downlink_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  double beta = 0.0;
  double mu_mean = 0.0;
  double gamma = 0.0;
  RowStatus status = RowStatus::Ok;
  std::string message;
  double wall_ms = 0.0;
};

struct SweepResult {
  std::vector<Row> rows;
};

struct RunOptions {
  int jobs = 1;
  // wall_ms stays 0 unless set, so reruns produce identical bytes
  bool timing = false;
};

// sweep_pb resolves r_i once per seed and scheme, at the smallest P_B of the grid; the r_mi and r_up
// columns still describe each row's own P_B.
// One task per (seed, grid point, scheme, variant); a failing task yields a row with status Error or
// Infeasible and never aborts the sweep. Row order is independent of the job count.
SweepResult run_experiment(const ExperimentSpec& spec, const SystemConfig& config, const RunOptions& opts = {});

// Solves one instance and fills a row, as the sweeps do.
Row solve_row(const SolveRequest& request, const std::string& experiment, std::uint64_t seed, double sweep_value,
              double r_mi, bool timing = false);

const std::vector<std::string>& csv_header();
std::vector<std::string> csv_fields(const Row& r);
void write_csv(const SweepResult& result, std::ostream& out);
// Throws IoError.
void emit_csv(const SweepResult& result, const std::string& path);
// RFC-4180 reader used for round trips; returns the records including the header.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

}  // namespace wpsn::harness

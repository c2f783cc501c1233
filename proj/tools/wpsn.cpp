// wpsn: solve one instance, run an experiment sweep, or audit a solution.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wpsn/errors.hpp"
#include "wpsn/harness.hpp"
#include "wpsn/oracle.hpp"
#include "wpsn/outer_search.hpp"

namespace {

using namespace wpsn;

constexpr int kExitOk = 0;
constexpr int kExitAuditFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_st("wpsn");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("WPSN_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string scheme = "sdma";
  std::string benchmark = "none";
  std::optional<double> ri_bits;
  std::optional<double> ri_frac;
  std::string ri_ref = "mi_up";
  double kappa = 1e-4;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration");
  cmd->add_option("--seed", c.seed, "channel seed");
  cmd->add_option("--scheme", c.scheme, "sdma or tdma")->check(CLI::IsMember({"sdma", "tdma"}, CLI::ignore_case));
  cmd->add_option("--benchmark", c.benchmark, "none, mdr or fixed-tau=V");
  auto* bits = cmd->add_option("--ri-bits", c.ri_bits, "downlink threshold in bits");
  auto* frac = cmd->add_option("--ri-frac", c.ri_frac, "threshold as a fraction of --ri-ref");
  bits->excludes(frac);
  cmd->add_option("--ri-ref", c.ri_ref, "mi, up, mi_up or mi_half_up")
      ->check(CLI::IsMember({"mi", "up", "mi_up", "mi_half_up"}, CLI::ignore_case));
  cmd->add_option("--kappa", c.kappa, "golden-section width tolerance");
}

SystemConfig system_config(const Common& c) {
  return c.config_path.empty() ? SystemConfig{} : harness::load_config(c.config_path).system;
}

Scheme scheme_of(const Common& c) {
  std::string s = c.scheme;
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s == "tdma" ? Scheme::Tdma : Scheme::Sdma;
}

void apply_benchmark(const std::string& spec, SolveRequest& req) {
  if (spec == "none" || spec == "optimal") {
    req.benchmark = Benchmark::None;
  } else if (spec == "mdr") {
    req.benchmark = Benchmark::Mdr;
  } else if (spec.rfind("fixed-tau=", 0) == 0) {
    req.benchmark = Benchmark::FixedTau;
    try {
      std::size_t used = 0;
      const std::string v = spec.substr(10);
      req.fixed_tau = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw ValidationError("--benchmark", "fixed-tau needs a number, e.g. fixed-tau=0.5");
    }
  } else {
    throw ValidationError("--benchmark", "expected none, mdr or fixed-tau=V");
  }
}

struct Prepared {
  SolveRequest request;
  double r_mi = 0.0;
};

// With a fixed downlink time, relative thresholds refer to that subproblem.
Prepared prepare(const Common& c, std::optional<double> tau0 = std::nullopt) {
  Prepared p;
  SolveRequest& r = p.request;
  r.config = system_config(c);
  r.scheme = scheme_of(c);
  r.kappa = c.kappa;
  r.channels = generate_channels(r.config, c.seed);
  apply_benchmark(c.benchmark, r);
  SolverOptions opts;
  opts.pin_matched_filter = r.benchmark == Benchmark::Mdr;
  const Thresholds th = tau0 ? subproblem_thresholds(r.scheme, *tau0, r.channels, r.config, opts)
                             : downlink_thresholds(r.scheme, r.channels, r.config, c.kappa);
  p.r_mi = th.r_mi;
  if (c.ri_bits) {
    r.r_i = *c.ri_bits;
  } else {
    const double frac = c.ri_frac.value_or(0.0);
    if (!(frac >= 0.0 && frac <= 1.0)) throw ValidationError("--ri-frac", "must lie in [0, 1]");
    r.r_i = harness::RiPolicy::Relative(harness::parse_ri_ref(c.ri_ref), frac).resolve(th.r_mi, th.r_up);
  }
  spdlog::info("seed {} scheme {} r_i {:.6g} bits (R_mi {:.6g}, R_up {:.6g})", c.seed, c.scheme, r.r_i, th.r_mi,
               th.r_up);
  return p;
}

void write_result(const harness::SweepResult& res, const std::string& out) {
  if (out.empty() || out == "-") {
    harness::write_csv(res, std::cout);
    std::cout.flush();
  } else {
    harness::emit_csv(res, out);
    spdlog::info("wrote {} rows to {}", res.rows.size(), out);
  }
}

int run_solve(const Common& c, const std::string& out, bool timing) {
  const Prepared p = prepare(c);
  harness::SweepResult res;
  res.rows.push_back(harness::solve_row(p.request, "cli", c.seed, 0.0, p.r_mi, timing));
  const harness::Row& row = res.rows.front();
  if (row.status == harness::RowStatus::Infeasible) throw Infeasible(row.r_i, row.r_up);
  if (row.status == harness::RowStatus::Error) spdlog::error("{}", row.message);
  write_result(res, out);
  return row.status == harness::RowStatus::Ok ? kExitOk : kExitAuditFailed;
}

int run_sweep(const Common& c, const std::string& out, int jobs, bool timing, bool seed_given) {
  if (c.config_path.empty()) throw ValidationError("--config", "sweep needs a configuration with an experiment");
  const harness::LoadedConfig cfg = harness::load_config(c.config_path);
  if (!cfg.has_experiment) throw ValidationError("experiment", "missing from " + c.config_path);
  harness::ExperimentSpec spec = cfg.experiment;
  if (seed_given) spec.seeds = {c.seed};
  const harness::SweepResult res = harness::run_experiment(spec, cfg.system, {jobs, timing});
  std::size_t failed = 0;
  for (const auto& r : res.rows)
    if (r.status != harness::RowStatus::Ok) {
      ++failed;
      spdlog::warn("seed {} {} {} at {}: {}", r.seed, r.scheme, r.variant, r.sweep_value, r.message);
    }
  spdlog::info("{} rows, {} not ok", res.rows.size(), failed);
  write_result(res, out);
  return kExitOk;
}

void print_entries(const char* group, const std::vector<oracle::KktEntry>& v) {
  for (const auto& e : v)
    std::cout << "  " << group << ' ' << e.name << ": " << e.value << " (scale " << e.scale << ", relative "
              << e.relative() << ")\n";
}

int run_audit(const Common& c, std::optional<double> tau0, bool with_oracle) {
  const Prepared p = prepare(c, tau0);
  const SolveRequest& r = p.request;
  FixedTauSolution sol;
  double t = 0.0;
  if (tau0) {
    SolverOptions opts;
    opts.pin_matched_filter = r.benchmark == Benchmark::Mdr;
    if (rate_upper_bound(r.channels, r.config).r_up * (1.0 + 1e-12) < r.r_i)
      throw Infeasible(r.r_i, rate_upper_bound(r.channels, r.config).r_up);
    sol = solve_fixed_tau(r.scheme, *tau0, r.r_i, r.channels, r.config, opts);
    t = *tau0;
  } else {
    const SolveResult res = solve(r);
    sol = res.solution;
    t = res.tau0;
  }
  const oracle::KktReport rep = std::visit([&](const auto& s) { return oracle::kkt_audit(s, r.channels, r.config); }, sol);
  std::cout << "scheme " << c.scheme << " seed " << c.seed << " tau0 " << t << " r_i " << r.r_i << " uplink "
            << uplink_rate_of(sol) << " bits\n";
  print_entries("primal", rep.primal);
  print_entries("slackness", rep.slackness);
  print_entries("stationarity", rep.stationarity);
  std::cout << "  rank_gap " << rep.rank_gap << "\n";
  bool ok = rep.pass();
  if (with_oracle) {
    if (r.benchmark == Benchmark::Mdr) throw ValidationError("--oracle", "the oracle optimizes W_B; drop --benchmark mdr");
    if (t > 0.0 && t < 1.0) {
      const oracle::OracleSolution o = oracle::oracle_solve(r.scheme, t, r.r_i, r.channels, r.config);
      const double gap = std::abs(uplink_rate_of(sol) - o.objective) / std::max(o.objective, 1e-9);
      std::cout << "  oracle " << o.objective << " bits, relative gap " << gap << "\n";
      ok = ok && gap <= 1e-3;
    } else {
      std::cout << "  oracle skipped: tau0 on the boundary\n";
    }
  }
  std::cout << (ok ? "PASS" : "FAIL") << " worst " << rep.worst_name() << " " << rep.worst() << "\n";
  return ok ? kExitOk : kExitAuditFailed;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Beamforming, power and time allocation for partially wireless-powered sensor networks"};
  app.require_subcommand(1);

  Common solve_c;
  std::string solve_out;
  bool solve_timing = false;
  auto* solve_cmd = app.add_subcommand("solve", "solve one channel draw and print a CSV row");
  add_common(solve_cmd, solve_c);
  solve_cmd->add_option("--out", solve_out, "CSV path (default stdout)");
  solve_cmd->add_flag("--timing", solve_timing, "record wall time");

  Common sweep_c;
  std::string sweep_out;
  int jobs = 1;
  bool sweep_timing = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "run the experiment of a configuration file");
  sweep_cmd->add_option("--config", sweep_c.config_path, "JSON configuration with an experiment object")->required();
  auto* seed_opt = sweep_cmd->add_option("--seed", sweep_c.seed, "run only this seed");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));
  sweep_cmd->add_flag("--timing", sweep_timing, "record wall time (output is then not reproducible)");

  Common audit_c;
  std::optional<double> audit_tau;
  bool with_oracle = false;
  auto* audit_cmd = app.add_subcommand("audit", "KKT audit of a solution, optionally against the oracle");
  add_common(audit_cmd, audit_c);
  audit_cmd->add_option("--tau0", audit_tau, "audit the subproblem at this downlink time")->check(CLI::Range(0.0, 1.0));
  audit_cmd->add_flag("--oracle", with_oracle, "also compare with the independent oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*solve_cmd) return run_solve(solve_c, solve_out, solve_timing);
    if (*sweep_cmd) return run_sweep(sweep_c, sweep_out, jobs, sweep_timing, seed_opt->count() > 0);
    if (*audit_cmd) return run_audit(audit_c, audit_tau, with_oracle);
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kExitIo;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const Infeasible& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const InfeasibleAtTau& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const DomainError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitAuditFailed;
  }
  return kExitOk;
}

#include "wpsn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wpsn/errors.hpp"

namespace wpsn::harness {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ValidationError(field, "expected an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) throw ValidationError(field, "expected a string");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field, "expected an array");
  return j;
}

Scheme parse_scheme(const std::string& s, const std::string& field) {
  const std::string l = lower(s);
  if (l == "sdma") return Scheme::Sdma;
  if (l == "tdma") return Scheme::Tdma;
  throw ValidationError(field, "unknown scheme '" + s + "'");
}

Benchmark parse_variant(const std::string& s, const std::string& field) {
  const std::string l = lower(s);
  if (l == "optimal" || l == "none") return Benchmark::None;
  if (l == "mdr") return Benchmark::Mdr;
  if (l == "fixed_tau" || l == "fixed-tau") return Benchmark::FixedTau;
  throw ValidationError(field, "unknown variant '" + s + "'");
}

InitKind parse_init(const std::string& s, const std::string& field) {
  const std::string l = lower(s);
  if (l == "uniform") return InitKind::Uniform;
  if (l == "rate_matched" || l == "rate-matched") return InitKind::RateMatched;
  throw ValidationError(field, "unknown initialization '" + s + "'");
}

std::string init_name(InitKind k) { return k == InitKind::Uniform ? "uniform" : "rate_matched"; }

// {"start": a, "stop": b, "count": n} -> n evenly spaced values, endpoints included
std::vector<double> linspace(const json& j, const std::string& field) {
  for (const char* key : {"start", "stop", "count"})
    if (!j.contains(key)) throw ValidationError(field + "." + key, "missing");
  const double a = number(j["start"], field + ".start");
  const double b = number(j["stop"], field + ".stop");
  const int n = integer(j["count"], field + ".count");
  if (n < 1) throw ValidationError(field + ".count", "must be >= 1");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> default_grid(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SweepPb: return {10.0, 15.0, 20.0, 25.0, 30.0};
    case ExperimentKind::SweepRi: {
      std::vector<double> v;
      for (int i = 0; i <= 20; ++i) v.push_back(i * 0.05);
      return v;
    }
    case ExperimentKind::SweepTau0: {
      std::vector<double> v;
      for (int i = 1; i < 50; ++i) v.push_back(i * 0.02);
      return v;
    }
    default: return {};
  }
}

ExperimentSpec parse_experiment(const json& e) {
  if (!e.is_object()) throw ValidationError("experiment", "expected an object");
  ExperimentSpec s;
  static const std::vector<std::string> known{"id",    "kind", "schemes", "variants", "fixed_tau", "seeds",
                                              "grid",  "ri",   "tau0",    "kappa",    "inits"};
  for (auto it = e.begin(); it != e.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ValidationError("experiment." + it.key(), "unknown key");
  if (e.contains("id")) s.id = text(e["id"], "experiment.id");
  if (e.contains("kind")) {
    try {
      s.kind = parse_kind(text(e["kind"], "experiment.kind"));
    } catch (const DomainError& err) {
      throw ValidationError("experiment.kind", err.what());
    }
  }
  if (s.kind == ExperimentKind::SweepPb) s.ri = RiPolicy::Relative(RiRef::Mi, 0.5);
  if (s.kind == ExperimentKind::SweepRi) s.ri = RiPolicy::Relative(RiRef::Up, 0.0);
  if (e.contains("schemes")) {
    s.schemes.clear();
    for (const auto& x : array(e["schemes"], "experiment.schemes"))
      s.schemes.push_back(parse_scheme(text(x, "experiment.schemes"), "experiment.schemes"));
  }
  if (e.contains("variants")) {
    s.variants.clear();
    for (const auto& x : array(e["variants"], "experiment.variants"))
      s.variants.push_back(parse_variant(text(x, "experiment.variants"), "experiment.variants"));
  }
  if (e.contains("fixed_tau")) s.fixed_tau = number(e["fixed_tau"], "experiment.fixed_tau");
  if (e.contains("seeds")) {
    const json& j = e["seeds"];
    if (j.is_object()) {
      const int start = j.contains("start") ? integer(j["start"], "experiment.seeds.start") : 0;
      if (!j.contains("count")) throw ValidationError("experiment.seeds.count", "missing");
      const int count = integer(j["count"], "experiment.seeds.count");
      if (start < 0 || count < 0) throw ValidationError("experiment.seeds", "start and count must be >= 0");
      for (int i = 0; i < count; ++i) s.seeds.push_back(static_cast<std::uint64_t>(start + i));
    } else {
      for (const auto& x : array(j, "experiment.seeds")) {
        if (!x.is_number_unsigned()) throw ValidationError("experiment.seeds", "expected nonnegative integers");
        s.seeds.push_back(x.get<std::uint64_t>());
      }
    }
  } else {
    for (std::uint64_t i = 0; i < 100; ++i) s.seeds.push_back(i);
  }
  if (e.contains("grid")) {
    const json& j = e["grid"];
    if (j.is_object()) {
      s.grid = linspace(j, "experiment.grid");
    } else {
      for (const auto& x : array(j, "experiment.grid")) s.grid.push_back(number(x, "experiment.grid"));
    }
  } else {
    s.grid = default_grid(s.kind);
  }
  if (e.contains("ri")) {
    const json& r = e["ri"];
    if (!r.is_object()) throw ValidationError("experiment.ri", "expected an object");
    if (r.contains("bits")) {
      s.ri = RiPolicy::Bits(number(r["bits"], "experiment.ri.bits"));
    } else {
      RiRef ref = RiRef::MiUp;
      if (r.contains("ref")) {
        try {
          ref = parse_ri_ref(text(r["ref"], "experiment.ri.ref"));
        } catch (const DomainError& err) {
          throw ValidationError("experiment.ri.ref", err.what());
        }
      }
      const double frac = r.contains("frac") ? number(r["frac"], "experiment.ri.frac") : 0.5;
      s.ri = RiPolicy::Relative(ref, frac);
    }
  }
  if (e.contains("tau0")) s.tau0 = number(e["tau0"], "experiment.tau0");
  if (e.contains("kappa")) s.kappa = number(e["kappa"], "experiment.kappa");
  if (e.contains("inits")) {
    s.inits.clear();
    for (const auto& x : array(e["inits"], "experiment.inits"))
      s.inits.push_back(parse_init(text(x, "experiment.inits"), "experiment.inits"));
  }
  s.validate();
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void fill_from(Row& row, const FixedTauSolution& sol) {
  std::visit(
      [&](const auto& s) {
        row.uplink_rate = s.uplink_rate;
        row.downlink_rate = s.downlink_rate;
        row.iterations = s.iterations;
        row.converged = s.converged;
        row.lambda = s.duals.lambda;
        row.beta = s.duals.beta;
        row.mu_mean = mean(s.duals.mu);
        row.gamma = s.duals.gamma;
      },
      sol);
  if (const auto* s = std::get_if<SdmaSolution>(&sol)) row.tau0 = s->tau0;
  if (const auto* s = std::get_if<TdmaSolution>(&sol)) row.tau0 = s->tau.tau0;
}

void mark_failure(Row& row, RowStatus status, const std::string& message) {
  row.status = status;
  row.message = message;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Task {
  std::uint64_t seed = 0;
  double grid_value = 0.0;
  Scheme scheme = Scheme::Sdma;
  Benchmark variant = Benchmark::None;
  InitKind init = InitKind::Uniform;
};

std::vector<Task> make_tasks(const ExperimentSpec& spec) {
  std::vector<Task> tasks;
  const bool gridded = spec.kind == ExperimentKind::SweepPb || spec.kind == ExperimentKind::SweepRi ||
                       spec.kind == ExperimentKind::SweepTau0;
  const std::vector<double> grid = gridded ? spec.grid : std::vector<double>{spec.tau0};
  for (std::uint64_t seed : spec.seeds)
    for (double g : grid)
      for (Scheme s : spec.schemes) {
        if (spec.kind == ExperimentKind::ConvergenceTrace) {
          for (InitKind i : spec.inits) tasks.push_back({seed, g, s, Benchmark::None, i});
          continue;
        }
        for (Benchmark v : spec.variants) {
          // a fixed downlink time has nothing to search over
          if (v == Benchmark::FixedTau &&
              (spec.kind == ExperimentKind::SweepTau0 || spec.kind == ExperimentKind::GoldenTrace))
            continue;
          tasks.push_back({seed, g, s, v, InitKind::Uniform});
        }
      }
  return tasks;
}

std::vector<Row> run_task(const ExperimentSpec& spec, const SystemConfig& base, const Task& t, bool timing) {
  const auto t0 = Clock::now();
  Row row;
  row.experiment = spec.id;
  row.kind = to_string(spec.kind);
  row.scheme = to_string(t.scheme);
  row.variant = to_string(t.variant);
  row.init = spec.kind == ExperimentKind::ConvergenceTrace ? init_name(t.init) : "";
  row.seed = t.seed;
  row.sweep_value = t.grid_value;
  std::vector<Row> rows;
  try {
    SystemConfig cfg = base;
    if (spec.kind == ExperimentKind::SweepPb) cfg.p_b = dbm_to_watt(t.grid_value);
    cfg.validate();
    const ChannelSet ch = generate_channels(cfg, t.seed);
    SolverOptions opts;
    opts.init = t.init;
    opts.pin_matched_filter = t.variant == Benchmark::Mdr;

    if (spec.kind == ExperimentKind::ConvergenceTrace) {
      const Thresholds th = subproblem_thresholds(t.scheme, spec.tau0, ch, cfg);
      row.r_mi = th.r_mi;
      row.r_up = th.r_up;
      row.r_i = spec.ri.resolve(th.r_mi, th.r_up);
      const FixedTauSolution sol = solve_fixed_tau(t.scheme, spec.tau0, row.r_i, ch, cfg, opts);
      fill_from(row, sol);
      const std::vector<double>& trace = std::visit([](const auto& s) -> const std::vector<double>& { return s.trace; }, sol);
      row.wall_ms = timing ? elapsed_ms(t0) : 0.0;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        Row r = row;
        r.sweep_value = static_cast<double>(i + 1);
        r.uplink_rate = trace[i];
        rows.push_back(std::move(r));
      }
      return rows;
    }

    const Thresholds th = downlink_thresholds(t.scheme, ch, cfg, spec.kappa);
    row.r_mi = th.r_mi;
    row.r_up = th.r_up;
    if (spec.kind == ExperimentKind::SweepRi) {
      RiPolicy p = spec.ri;
      if (p.absolute)
        p.bits = t.grid_value;
      else
        p.frac = t.grid_value;
      row.r_i = p.resolve(th.r_mi, th.r_up);
    } else if (spec.kind == ExperimentKind::SweepPb) {
      // one threshold per seed, taken at the weakest P_B, so the curve compares like with like
      SystemConfig ref = cfg;
      ref.p_b = dbm_to_watt(*std::min_element(spec.grid.begin(), spec.grid.end()));
      const Thresholds rt = downlink_thresholds(t.scheme, ch, ref, spec.kappa);
      row.r_i = spec.ri.resolve(rt.r_mi, rt.r_up);
    } else {
      row.r_i = spec.ri.resolve(th.r_mi, th.r_up);
    }

    if (spec.kind == ExperimentKind::SweepTau0) {
      if (row.r_i > th.r_up * (1.0 + 1e-12)) throw Infeasible(row.r_i, th.r_up);
      row.tau0 = t.grid_value;
      fill_from(row, solve_fixed_tau(t.scheme, t.grid_value, row.r_i, ch, cfg, opts));
      row.wall_ms = timing ? elapsed_ms(t0) : 0.0;
      return {row};
    }

    SolveRequest req;
    req.scheme = t.scheme;
    req.r_i = row.r_i;
    req.config = cfg;
    req.channels = ch;
    req.benchmark = t.variant;
    req.fixed_tau = spec.fixed_tau;
    req.kappa = spec.kappa;
    const SolveResult res = solve(req);
    fill_from(row, res.solution);
    row.wall_ms = timing ? elapsed_ms(t0) : 0.0;
    if (spec.kind == ExperimentKind::GoldenTrace && res.golden) {
      int i = 0;
      for (const GoldenStep& g : res.golden->steps) {
        Row r = row;
        r.sweep_value = ++i;
        r.tau0 = 0.5 * (g.lo + g.hi);
        r.uplink_rate = g.best;
        rows.push_back(std::move(r));
      }
      return rows;
    }
    return {row};
  } catch (const Infeasible& e) {
    mark_failure(row, RowStatus::Infeasible, e.what());
  } catch (const InfeasibleAtTau& e) {
    mark_failure(row, RowStatus::Infeasible, e.what());
  } catch (const std::exception& e) {
    mark_failure(row, RowStatus::Error, e.what());
  }
  row.wall_ms = timing ? elapsed_ms(t0) : 0.0;
  return {row};
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::ConvergenceTrace: return "convergence_trace";
    case ExperimentKind::GoldenTrace: return "golden_trace";
    case ExperimentKind::SweepPb: return "sweep_pb";
    case ExperimentKind::SweepRi: return "sweep_ri";
    case ExperimentKind::SweepTau0: return "sweep_tau0";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& s) {
  for (ExperimentKind k : {ExperimentKind::ConvergenceTrace, ExperimentKind::GoldenTrace, ExperimentKind::SweepPb,
                           ExperimentKind::SweepRi, ExperimentKind::SweepTau0})
    if (lower(s) == to_string(k)) return k;
  throw DomainError("unknown experiment kind '" + s + "'");
}

std::string to_string(RiRef r) {
  switch (r) {
    case RiRef::Mi: return "mi";
    case RiRef::Up: return "up";
    case RiRef::MiUp: return "mi_up";
    case RiRef::MiHalfUp: return "mi_half_up";
  }
  return "?";
}

RiRef parse_ri_ref(const std::string& s) {
  for (RiRef r : {RiRef::Mi, RiRef::Up, RiRef::MiUp, RiRef::MiHalfUp})
    if (lower(s) == to_string(r)) return r;
  throw DomainError("unknown r_i reference '" + s + "' (mi, up, mi_up, mi_half_up)");
}

double RiPolicy::resolve(double r_mi, double r_up) const {
  if (absolute) return bits;
  switch (ref) {
    case RiRef::Mi: return frac * r_mi;
    case RiRef::Up: return frac * r_up;
    case RiRef::MiUp: return r_mi + frac * (r_up - r_mi);
    case RiRef::MiHalfUp: return r_mi + frac * (0.5 * r_up - r_mi);
  }
  return 0.0;
}

void ExperimentSpec::validate() const {
  if (schemes.empty()) throw ValidationError("experiment.schemes", "must not be empty");
  if (seeds.empty()) throw ValidationError("experiment.seeds", "must not be empty");
  const bool gridded =
      kind == ExperimentKind::SweepPb || kind == ExperimentKind::SweepRi || kind == ExperimentKind::SweepTau0;
  if (gridded && grid.empty()) throw ValidationError("experiment.grid", "must not be empty");
  if (kind != ExperimentKind::ConvergenceTrace && variants.empty())
    throw ValidationError("experiment.variants", "must not be empty");
  if (kind == ExperimentKind::ConvergenceTrace && inits.empty())
    throw ValidationError("experiment.inits", "must not be empty");
  if (!(fixed_tau >= 0.0 && fixed_tau <= 1.0)) throw ValidationError("experiment.fixed_tau", "must lie in [0, 1]");
  if (!(tau0 > 0.0 && tau0 < 1.0)) throw ValidationError("experiment.tau0", "must lie in (0, 1)");
  if (!(kappa > 0.0 && kappa < 1.0)) throw ValidationError("experiment.kappa", "must lie in (0, 1)");
  if (ri.absolute && !(ri.bits >= 0.0)) throw ValidationError("experiment.ri.bits", "must be >= 0");
  if (!ri.absolute && !(ri.frac >= 0.0 && ri.frac <= 1.0))
    throw ValidationError("experiment.ri.frac", "must lie in [0, 1]");
  for (double g : grid) {
    if (kind == ExperimentKind::SweepRi && !ri.absolute && !(g >= 0.0 && g <= 1.0))
      throw ValidationError("experiment.grid", "relative r_i fractions must lie in [0, 1]");
    if (kind == ExperimentKind::SweepRi && ri.absolute && !(g >= 0.0))
      throw ValidationError("experiment.grid", "r_i must be >= 0");
    if (kind == ExperimentKind::SweepTau0 && !(g > 0.0 && g < 1.0))
      throw ValidationError("experiment.grid", "tau0 values must lie in (0, 1)");
  }
}

LoadedConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  LoadedConfig out;
  SystemConfig& c = out.system;
  bool eps_given = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "n_b") c.n_b = integer(v, key);
    else if (key == "n_u") c.n_u = integer(v, key);
    else if (key == "k") c.k = integer(v, key);
    else if (key == "p_b_dbm") c.p_b = dbm_to_watt(number(v, key));
    else if (key == "p_i_dbm") c.p_i = dbm_to_watt(number(v, key));
    else if (key == "sigma2_dbm") c.sigma2 = dbm_to_watt(number(v, key));
    else if (key == "pathloss_coeff") c.pathloss_coeff = number(v, key);
    else if (key == "alpha") c.alpha = number(v, key);
    else if (key == "radius_m") c.radius_m = number(v, key);
    else if (key == "min_distance_m") c.min_distance_m = number(v, key);
    else if (key == "eps") {
      eps_given = true;
      c.eps.clear();
      for (const auto& x : array(v, key)) c.eps.push_back(number(x, key));
    } else if (key == "experiment") {
      out.has_experiment = true;
    } else {
      throw ValidationError(key, "unknown key");
    }
  }
  if (!eps_given && c.k >= 1) c.eps.assign(c.k, 1.0);
  c.validate();
  if (out.has_experiment) out.experiment = parse_experiment(j["experiment"]);
  return out;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config '" + path + "'");
  return parse_config(ss.str());
}

std::string to_string(RowStatus s) {
  switch (s) {
    case RowStatus::Ok: return "ok";
    case RowStatus::Infeasible: return "infeasible";
    case RowStatus::Error: return "error";
  }
  return "?";
}

Row solve_row(const SolveRequest& request, const std::string& experiment, std::uint64_t seed, double sweep_value,
              double r_mi, bool timing) {
  const auto t0 = Clock::now();
  Row row;
  row.experiment = experiment;
  row.kind = "solve";
  row.scheme = to_string(request.scheme);
  row.variant = to_string(request.benchmark);
  row.seed = seed;
  row.sweep_value = sweep_value;
  row.r_i = request.r_i;
  row.r_mi = r_mi;
  try {
    row.r_up = rate_upper_bound(request.channels, request.config).r_up;
    const SolveResult res = solve(request);
    fill_from(row, res.solution);
  } catch (const Infeasible& e) {
    mark_failure(row, RowStatus::Infeasible, e.what());
  } catch (const InfeasibleAtTau& e) {
    mark_failure(row, RowStatus::Infeasible, e.what());
  } catch (const std::exception& e) {
    mark_failure(row, RowStatus::Error, e.what());
  }
  row.wall_ms = timing ? elapsed_ms(t0) : 0.0;
  return row;
}

SweepResult run_experiment(const ExperimentSpec& spec, const SystemConfig& config, const RunOptions& opts) {
  spec.validate();
  const std::vector<Task> tasks = make_tasks(spec);
  std::vector<std::vector<Row>> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) out[i] = run_task(spec, config, tasks[i], opts.timing);
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  SweepResult r;
  for (auto& rows : out)
    for (auto& row : rows) r.rows.push_back(std::move(row));
  return r;
}

const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h{
      "experiment", "kind",       "scheme", "variant",  "init",      "seed",   "sweep_value", "r_i",
      "r_mi",       "r_up",       "tau0",   "uplink_rate", "downlink_rate", "iterations", "converged", "lambda",
      "beta",       "mu_mean",    "gamma",  "status",   "message",   "wall_ms"};
  return h;
}

std::vector<std::string> csv_fields(const Row& r) {
  const bool ok = r.status == RowStatus::Ok;
  auto result = [&](double v) { return ok ? fmt(v) : std::string(); };
  return {r.experiment,
          r.kind,
          r.scheme,
          r.variant,
          r.init,
          std::to_string(r.seed),
          fmt(r.sweep_value),
          fmt(r.r_i),
          fmt(r.r_mi),
          fmt(r.r_up),
          result(r.tau0),
          result(r.uplink_rate),
          result(r.downlink_rate),
          ok ? std::to_string(r.iterations) : std::string(),
          ok ? std::string(r.converged ? "1" : "0") : std::string(),
          result(r.lambda),
          result(r.beta),
          result(r.mu_mean),
          result(r.gamma),
          to_string(r.status),
          r.message,
          fmt(r.wall_ms)};
}

void write_csv(const SweepResult& result, std::ostream& out) {
  auto line = [&](const std::vector<std::string>& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out << ',';
      out << quote(f[i]);
    }
    out << '\n';
  };
  line(csv_header());
  for (const Row& r : result.rows) line(csv_fields(r));
}

void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(result, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace wpsn::harness

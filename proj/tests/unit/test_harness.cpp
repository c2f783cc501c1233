#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "wpsn/errors.hpp"
#include "wpsn/harness.hpp"

using namespace wpsn;
using namespace wpsn::harness;

namespace {

std::string csv_text(const SweepResult& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("wpsn_test_" + name);
}

ExperimentSpec small_sweep() {
  ExperimentSpec s;
  s.id = "pb";
  s.kind = ExperimentKind::SweepPb;
  s.seeds = {0, 1, 2};
  s.grid = {10.0, 15.0, 20.0, 25.0};
  s.ri = RiPolicy::Relative(RiRef::Mi, 0.5);
  return s;
}

}  // namespace

TEST_CASE("empty config gives the default network") {
  const LoadedConfig c = parse_config("{}");
  CHECK(c.system.n_b == 6);
  CHECK(c.system.n_u == 3);
  CHECK(c.system.k == 3);
  CHECK(c.system.eps == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(c.system.p_b == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c.system.sigma2 == doctest::Approx(1e-13).epsilon(1e-14));
  CHECK(c.system.alpha == 3.0);
  CHECK(c.system.radius_m == 10.0);
  CHECK_FALSE(c.has_experiment);
}

TEST_CASE("config keys and errors") {
  CHECK(parse_config(R"({"p_b_dbm": 20})").system.p_b == doctest::Approx(0.1).epsilon(1e-14));
  const LoadedConfig k2 = parse_config(R"({"k": 2, "n_b": 4})");
  CHECK(k2.system.eps.size() == 2);
  CHECK(k2.system.n_b == 4);
  try {
    parse_config(R"({"eps": [1.2]})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "eps[0]");
  }
  CHECK_THROWS_AS(parse_config(R"({"eps": [1.0]})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"n_b": "six"})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"nb": 6})"), ValidationError);
  CHECK_THROWS_AS(parse_config("{"), ParseError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/wpsn.json"), IoError);
}

TEST_CASE("experiment section") {
  const LoadedConfig c = parse_config(R"({
    "experiment": {"id": "ri", "kind": "sweep_ri", "schemes": ["sdma"], "variants": ["optimal", "mdr"],
                   "seeds": {"start": 5, "count": 3}, "grid": {"start": 0, "stop": 1, "count": 5},
                   "ri": {"ref": "up"}}})");
  CHECK(c.has_experiment);
  const ExperimentSpec& e = c.experiment;
  CHECK(e.kind == ExperimentKind::SweepRi);
  CHECK(e.seeds == std::vector<std::uint64_t>{5, 6, 7});
  CHECK(e.grid == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(e.ri.ref == RiRef::Up);
  CHECK(e.variants.size() == 2);
  try {
    parse_config(R"({"experiment": {"kind": "sweep_ri", "grid": [0.5, 1.5]}})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& err) {
    CHECK(err.field() == "experiment.grid");
  }
  CHECK_THROWS_AS(parse_config(R"({"experiment": {"kind": "fig9"}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": {"seeds": []}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": {"ri": {"ref": "mi", "frac": 2}}})"), ValidationError);
  const LoadedConfig pb = parse_config(R"({"experiment": {"kind": "sweep_pb"}})");
  CHECK(pb.experiment.seeds.size() == 100);
  CHECK(pb.experiment.grid == std::vector<double>{10.0, 15.0, 20.0, 25.0, 30.0});
  CHECK(pb.experiment.ri.ref == RiRef::Mi);
}

TEST_CASE("r_i policies") {
  CHECK(RiPolicy::Bits(2.5).resolve(1.0, 10.0) == 2.5);
  CHECK(RiPolicy::Relative(RiRef::Mi, 0.5).resolve(2.0, 10.0) == 1.0);
  CHECK(RiPolicy::Relative(RiRef::Up, 0.95).resolve(2.0, 10.0) == doctest::Approx(9.5));
  CHECK(RiPolicy::Relative(RiRef::MiUp, 0.5).resolve(2.0, 10.0) == 6.0);
  CHECK(RiPolicy::Relative(RiRef::MiHalfUp, 0.5).resolve(2.0, 10.0) == 3.5);
}

TEST_CASE("P_B sweep: row count, determinism across job counts, CSV round trip") {
  const SystemConfig c;
  const ExperimentSpec spec = small_sweep();
  const SweepResult one = run_experiment(spec, c, {1, false});
  CHECK(one.rows.size() == 72);
  for (const Row& r : one.rows) {
    CAPTURE(r.message);
    CHECK(r.status == RowStatus::Ok);
  }
  const SweepResult three = run_experiment(spec, c, {3, false});
  const std::string text = csv_text(one);
  CHECK(text == csv_text(three));

  std::istringstream in(text);
  const auto records = read_csv(in);
  REQUIRE(records.size() == 73);
  CHECK(records.front() == csv_header());
  for (std::size_t i = 0; i < one.rows.size(); ++i) CHECK(records[i + 1] == csv_fields(one.rows[i]));
  // numbers survive a reparse at 12 significant digits
  for (std::size_t i = 1; i < records.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", std::stod(records[i][11]));
    CHECK(records[i][11] == buf);
  }
  CHECK(text.find('\r') == std::string::npos);

  // the threshold is fixed per seed and scheme, and curves do not fall with P_B
  std::map<std::string, const Row*> first;
  for (const Row& r : one.rows) {
    const std::string key = r.scheme + "/" + r.variant + "/" + std::to_string(r.seed);
    auto [it, fresh] = first.emplace(key, &r);
    if (fresh) continue;
    CAPTURE(key);
    CHECK(r.r_i == it->second->r_i);
    CHECK(r.uplink_rate >= it->second->uplink_rate * (1.0 - 1e-9));
    it->second = &r;
  }
}

TEST_CASE("emit_csv writes header-only files for empty results") {
  const auto p = temp_path("empty.csv");
  emit_csv({}, p.string());
  std::ifstream in(p);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string header;
  for (std::size_t i = 0; i < csv_header().size(); ++i) header += (i ? "," : "") + csv_header()[i];
  CHECK(all == header + "\n");
  std::filesystem::remove(p);
  CHECK_THROWS_AS(emit_csv({}, "/nonexistent-dir/out.csv"), IoError);
}

TEST_CASE("one row with awkward text round-trips") {
  SweepResult r;
  Row row;
  row.experiment = "a,\"b\"\nc";
  row.scheme = "sdma";
  row.uplink_rate = 1.0 / 3.0;
  r.rows.push_back(row);
  const std::string text = csv_text(r);
  std::istringstream in(text);
  const auto records = read_csv(in);
  REQUIRE(records.size() == 2);
  CHECK(records[1][0] == row.experiment);
  CHECK(records[1][11] == "0.333333333333");
}

TEST_CASE("one failing point does not abort the sweep") {
  ExperimentSpec s;
  s.id = "ri";
  s.kind = ExperimentKind::SweepRi;
  s.schemes = {Scheme::Sdma};
  s.variants = {Benchmark::None};
  s.seeds = {0, 1};
  s.ri = RiPolicy::Bits(0.0);
  s.grid = {1.0, 1000.0, 2.0};
  const SweepResult res = run_experiment(s, SystemConfig{});
  REQUIRE(res.rows.size() == 6);
  for (const Row& r : res.rows) CHECK((r.status == RowStatus::Infeasible) == (r.sweep_value == 1000.0));
  const auto fields = csv_fields(res.rows[1]);
  CHECK(fields[19] == "infeasible");
  CHECK(fields[11].empty());
}

TEST_CASE("convergence trace: both initializations converge to the same value") {
  ExperimentSpec s;
  s.id = "conv";
  s.kind = ExperimentKind::ConvergenceTrace;
  s.schemes = {Scheme::Sdma, Scheme::Tdma};
  s.seeds = {4};
  s.tau0 = 0.5;
  const SweepResult res = run_experiment(s, SystemConfig{});
  for (const char* scheme : {"sdma", "tdma"}) {
    double last_u = 0.0;
    double last_r = 0.0;
    for (const Row& r : res.rows) {
      if (r.scheme != scheme) continue;
      CHECK(r.status == RowStatus::Ok);
      (r.init == "uniform" ? last_u : last_r) = r.uplink_rate;
    }
    CHECK(last_u > 0.0);
    CHECK(std::abs(last_u - last_r) <= 1e-6 * last_u);
  }
}

TEST_CASE("golden trace and tau0 sweep") {
  ExperimentSpec g;
  g.kind = ExperimentKind::GoldenTrace;
  g.schemes = {Scheme::Sdma};
  g.variants = {Benchmark::None};
  g.seeds = {2};
  const SweepResult gt = run_experiment(g, SystemConfig{});
  CHECK(gt.rows.size() == 20);
  for (std::size_t i = 1; i < gt.rows.size(); ++i) CHECK(gt.rows[i].uplink_rate >= gt.rows[i - 1].uplink_rate);

  ExperimentSpec t;
  t.kind = ExperimentKind::SweepTau0;
  t.schemes = {Scheme::Tdma};
  t.variants = {Benchmark::None, Benchmark::FixedTau};
  t.seeds = {2};
  t.grid = {0.1, 0.6, 0.9};
  const SweepResult ts = run_experiment(t, SystemConfig{});
  REQUIRE(ts.rows.size() == 3);
  CHECK(ts.rows[0].status == RowStatus::Infeasible);  // below tau0_min at the midpoint threshold
  CHECK(ts.rows[1].status == RowStatus::Ok);
  CHECK(ts.rows[1].tau0 == 0.6);
  CHECK(ts.rows[2].status == RowStatus::Ok);
}

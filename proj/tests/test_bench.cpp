#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "scanforge/bench.hpp"
#include "scanforge/error.hpp"
#include "scanforge/experiments.hpp"

using namespace scanforge;
using namespace scanforge::bench;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::filesystem::path temp_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Rows of a scaling CSV whose rep column reads "mean".
std::vector<std::vector<std::string>> mean_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : lines_of(csv)) {
    auto f = fields(line);
    if (std::find(f.begin(), f.end(), "mean") != f.end()) rows.push_back(f);
  }
  return rows;
}

}  // namespace

TEST_CASE("config files: comments, blank lines and key spellings") {
  std::istringstream in(
      "# experiment\n"
      "\n"
      "kind = kogge-stone, sklansky   # two kinds\n"
      "cost_c = 2.5\n"
      "cost.sigma=0.75\n"
      "p = 1..8\n");
  ExperimentSpec spec;
  for (const auto& [k, v] : parse_config(in)) apply_setting(spec, k, v);
  CHECK(spec.kinds == std::vector<ScanKind>{ScanKind::KoggeStone, ScanKind::Sklansky});
  CHECK(spec.cost_c == 2.5);
  CHECK(spec.cost_sigma == 0.75);
  CHECK(spec.p_list == std::vector<std::size_t>{1, 2, 4, 8});
}

TEST_CASE("config errors name the problem") {
  ExperimentSpec spec;
  CHECK_THROWS_AS(apply_setting(spec, "colour", "blue"), ConfigError);
  CHECK_THROWS_AS(apply_setting(spec, "n", "12x"), ConfigError);
  CHECK_THROWS_AS(apply_setting(spec, "n", "-3"), ConfigError);
  CHECK_THROWS_AS(apply_setting(spec, "cost-c", ""), ConfigError);
  CHECK_THROWS_AS(apply_setting(spec, "kind", "bubble"), ConfigError);
  CHECK_THROWS_AS(apply_setting(spec, "variant", "general,nope"), ConfigError);
  std::istringstream bad("n = 4\nthis line has no equals\n");
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("every documented key is accepted") {
  ExperimentSpec spec;
  for (const KeyInfo& k : spec_keys()) {
    std::string value = "1";
    const std::string name = k.name;
    if (name == "kind") value = "all";
    if (name == "variant") value = "all";
    if (name == "mode") value = "weak";
    if (name == "runner") value = "threads";
    if (name == "cost") value = "uniform";
    if (name == "widths" || name == "p") value = "1..4";
    CHECK_NOTHROW(apply_setting(spec, name, value));
  }
}

TEST_CASE("seed precedence: default, config, environment, flag") {
  const auto dir = temp_dir("scanforge_test_bench_seed");
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "seed = 11\nn = 64\n";

  CHECK(assemble_spec("simulate", "", std::nullopt, nullptr, {}).seed == 0);
  CHECK(assemble_spec("simulate", cfg.string(), std::nullopt, nullptr, {}).seed == 11);
  CHECK(assemble_spec("simulate", cfg.string(), std::nullopt, "22", {}).seed == 22);
  CHECK(assemble_spec("simulate", cfg.string(), std::string("33"), "22", {}).seed == 33);
  CHECK(assemble_spec("simulate", cfg.string(), std::nullopt, "", {}).seed == 11);
  CHECK_THROWS_AS(assemble_spec("simulate", "", std::nullopt, "x1", {}), ConfigError);

  CHECK(resolve_seed(std::nullopt, nullptr) == std::nullopt);
  CHECK(resolve_seed(std::string("5"), "6") == 5u);
  CHECK(resolve_seed(std::nullopt, "6") == 6u);

  // Flags override the config file too.
  const auto spec = assemble_spec("simulate", cfg.string(), std::nullopt, nullptr, {{"n", "128"}});
  CHECK(spec.n == 128);
  CHECK_THROWS_AS(assemble_spec("simulate", (dir / "missing.cfg").string(), std::nullopt, nullptr, {}),
                  IoError);
  CHECK_THROWS_AS(assemble_spec("simulate", "", std::nullopt, nullptr, {{"bogus", "1"}}), ConfigError);
}

TEST_CASE("size lists") {
  CHECK(parse_size_list("1..16") == std::vector<std::size_t>{1, 2, 4, 8, 16});
  CHECK(parse_size_list("3,5..20") == std::vector<std::size_t>{3, 5, 10, 20});
  CHECK(parse_size_list("2..2") == std::vector<std::size_t>{2});
  CHECK(parse_size_list(" 7 ") == std::vector<std::size_t>{7});
  CHECK_THROWS_AS(parse_size_list("0..4"), ConfigError);
  CHECK_THROWS_AS(parse_size_list("8..2"), ConfigError);
  CHECK_THROWS_AS(parse_size_list("x"), ConfigError);
  CHECK_THROWS_AS(parse_size_list("4,,8"), ConfigError);
}

TEST_CASE("validation rejects unusable specs") {
  auto invalid = [](const char* key, const char* value) {
    ExperimentSpec s;
    apply_setting(s, key, value);
    CHECK_THROWS_AS(s.validate(), ConfigError);
  };
  CHECK_NOTHROW(ExperimentSpec{}.validate());
  invalid("n", "0");
  invalid("p", "0,4");
  invalid("mode", "medium");
  invalid("runner", "cluster");
  invalid("repetitions", "0");
  invalid("cost", "gamma");
  invalid("cost-c", "0");
  invalid("cost", "trace");
  invalid("frames", "1");
  invalid("m0", "9");
  invalid("armijo-sigma", "1.5");
  invalid("latency", "-1");
}

TEST_CASE("counts: examples and formula equality") {
  const CountsRow ks = count_kind(ScanKind::KoggeStone, 8);
  CHECK(ks.span == 3);
  CHECK(ks.work == 17);
  CHECK(ks.match());
  const CountsRow serial = count_kind(ScanKind::Serial, 2);
  CHECK(serial.span == 1);
  CHECK(serial.work == 1);
  std::vector<CountsRow> rows;
  for (ScanKind kind : kAllScanKinds) rows.push_back(count_kind(kind, 1024));
  std::ostringstream out;
  CHECK(write_counts(out, rows));
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == kCountsCsvHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(fields(lines[i]).back() == "yes");

  CountsRow broken = ks;
  broken.work = 16;
  CHECK_FALSE(write_counts(out, {broken}));
  CHECK_THROWS_AS(count_kind(ScanKind::Sklansky, 12), SizeError);
}

TEST_CASE("verify: generated networks pass, n = 1 is trivially valid") {
  ExperimentSpec spec;
  spec.kinds = {kAllScanKinds.begin(), kAllScanKinds.end()};
  const auto rows = run_verify(spec);
  CHECK(rows.size() == 5 * 9);
  for (const VerifyRow& r : rows) {
    CHECK(r.valid);
    CHECK(r.formula_ok);
    CHECK(r.deficiency <= 0);
    if (r.name == "serial") CHECK(r.deficiency == 0);
    if (r.n == 1) CHECK(r.size == 0);
  }
  std::ostringstream out;
  CHECK(write_verify(out, rows));
}

TEST_CASE("verify: a corrupted network file yields a lane report") {
  ScanNetwork net = build_network(ScanKind::KoggeStone, 8);
  // Redirect one combine of the last step to read the wrong lane.
  Node& node = net.steps.back().back();
  node.src = node.src == 0 ? 1 : node.src - 1;
  const auto dir = temp_dir("scanforge_test_bench_verify");
  const auto path = dir / "bad.net";
  {
    std::ofstream out(path);
    write_network(out, net);
  }
  ExperimentSpec spec;
  spec.network = path.string();
  const auto rows = run_verify(spec);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].valid);
  REQUIRE_FALSE(rows[0].bad_lanes.empty());
  CHECK(rows[0].bad_lanes.front().lane == node.dst);
  std::ostringstream out;
  CHECK_FALSE(write_verify(out, rows));
  CHECK(out.str().find("lane " + std::to_string(node.dst) + ": computed") != std::string::npos);

  spec.network = (dir / "missing.net").string();
  CHECK_THROWS_AS(run_verify(spec), IoError);
}

TEST_CASE("simulate: constant cost matches the theoretical speedup") {
  ExperimentSpec spec;
  spec.n = 4096;
  spec.cost_c = 3.0;
  spec.kinds = {kAllScanKinds.begin(), kAllScanKinds.end()};
  spec.variants = {std::begin(kAllVariants), std::end(kAllVariants)};
  spec.p_list = parse_size_list("1..512");
  const auto rows = run_simulate(spec);
  CHECK(rows.size() == 5 * 4 * 10);
  for (const SimRow& r : rows) {
    REQUIRE(r.theoretical_speedup.has_value());
    CHECK(std::fabs(r.speedup - *r.theoretical_speedup) <= 0.01 * *r.theoretical_speedup);
    CHECK(r.makespan == static_cast<double>(*r.total_span) * 3.0);
    if (r.p == 1) CHECK(r.speedup == 1.0);
  }
  std::ostringstream out;
  write_simulate_csv(out, rows);
  const auto lines = lines_of(out.str());
  CHECK(lines.front() == kSimulateCsvHeader);
  CHECK(lines.size() == rows.size() + 1);
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(fields(lines[i]).size() == 13);
}

TEST_CASE("simulate: non power-of-two p leaves the theory columns empty for tree kinds") {
  ExperimentSpec spec;
  spec.n = 120;
  spec.kinds = {ScanKind::Sklansky, ScanKind::Serial};
  spec.p_list = {6};
  const auto rows = run_simulate(spec);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].theoretical_speedup.has_value());
  CHECK(rows[1].theoretical_speedup.has_value());
  std::ostringstream out;
  write_simulate_csv(out, rows);
  CHECK(fields(lines_of(out.str())[1]).size() == 13);
}

TEST_CASE("simulate: lognormal costs lower efficiency at high p") {
  ExperimentSpec spec;
  spec.n = 4096;
  spec.kinds = {ScanKind::KoggeStone};
  spec.p_list = {256};
  const auto constant = run_simulate(spec);
  spec.cost = "lognormal";
  spec.cost_mu = -0.5;  // mean exp(mu + sigma^2 / 2) = 1 with sigma = 1
  spec.cost_sigma = 1.0;
  spec.seed = 9;
  const auto noisy = run_simulate(spec);
  CHECK(noisy[0].efficiency < constant[0].efficiency);

  // Same seed, same table.
  std::ostringstream a, b;
  write_simulate_csv(a, noisy);
  write_simulate_csv(b, run_simulate(spec));
  CHECK(a.str() == b.str());
}

TEST_CASE("gnuplot script refers to the CSV") {
  std::ostringstream out;
  write_simulate_gnuplot(out, "sweep.csv");
  CHECK(out.str().find("'sweep.csv'") != std::string::npos);
  CHECK(out.str().find("using 4:7") != std::string::npos);
}

TEST_CASE("scaling: golden headers and the trivial p list") {
  ExperimentSpec spec;
  spec.n = 64;
  spec.p_list = {1};
  std::ostringstream strong;
  run_scaling(spec, strong);
  const auto lines = lines_of(strong.str());
  CHECK(lines.front() == "variant,kind,n,p,rep,t_serial,t_parallel,speedup,sigma");
  const auto means = mean_rows(strong.str());
  REQUIRE(means.size() == 1);
  CHECK(means[0][7] == "1");
  CHECK(lines.size() == 1 + spec.repetitions + 1);

  spec.mode = "weak";
  std::ostringstream weak;
  run_scaling(spec, weak);
  CHECK(lines_of(weak.str()).front() == "variant,kind,k,n,p,rep,t_parallel,sigma,growth_pct");
}

TEST_CASE("scaling: weak growth equals the growth of the span formula") {
  for (ScanKind kind : {ScanKind::Serial, ScanKind::Blelloch, ScanKind::KoggeStone}) {
    ExperimentSpec spec;
    spec.mode = "weak";
    spec.k = 8;
    spec.kinds = {kind};
    spec.p_list = parse_size_list("2..64");
    spec.repetitions = 2;
    std::ostringstream out;
    run_scaling(spec, out);
    const auto rows = mean_rows(out.str());
    REQUIRE(rows.size() == spec.p_list.size());
    const double base = static_cast<double>(
        distributed_span(kind, 16, 2, StrategyVariant::GeneralExclusive).total_span);
    for (const auto& row : rows) {
      const std::size_t p = std::stoul(row[4]);
      const double t = static_cast<double>(
          distributed_span(kind, 8 * p, p, StrategyVariant::GeneralExclusive).total_span);
      CHECK(std::stod(row[8]) == doctest::Approx(100.0 * (t / base - 1.0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("scaling: span-optimal kinds peak at P = 256 for N = 512") {
  // Messages cost 1.5 applications; without latency the peak moves to P = N.
  for (ScanKind kind : {ScanKind::KoggeStone, ScanKind::Sklansky}) {
    for (StrategyVariant v : kAllVariants) {
      ExperimentSpec spec;
      spec.n = 512;
      spec.kinds = {kind};
      spec.variants = {v};
      spec.latency = 1.5;
      spec.p_list = parse_size_list("1..512");
      spec.repetitions = 1;
      std::ostringstream out;
      run_scaling(spec, out);
      const auto rows = mean_rows(out.str());
      const auto best = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::stod(a[7]) < std::stod(b[7]);
      });
      CHECK((*best)[3] == "256");
    }
  }
}

TEST_CASE("scaling: the threads runner produces a real table") {
  ExperimentSpec spec;
  spec.runner = "threads";
  spec.unit_ms = 0.0;
  spec.n = 64;
  spec.kinds = {ScanKind::Sklansky};
  spec.p_list = {1, 2};
  spec.repetitions = 2;
  std::ostringstream out;
  run_scaling(spec, out);
  const auto rows = mean_rows(out.str());
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) CHECK(std::stod(r[6]) > 0.0);
}

TEST_CASE("register: two frames need a single A call") {
  ExperimentSpec spec;
  spec.series.frames = 2;
  spec.seed = 4;
  spec.p_list = {1};
  const RegisterReport r = run_register(spec);
  CHECK(r.preprocess_timing.size() == 1);
  CHECK(r.scan_timing.empty());
  REQUIRE(r.cumulative.size() == 2);
  CHECK(r.cumulative[0] == reg::RigidDeformation::identity());
  CHECK(r.cumulative[1] == r.neighbors[0].phi);
  REQUIRE(r.max_error_pixels.has_value());
  CHECK(*r.max_error_pixels < 0.5);
}

TEST_CASE("register: a still, noise-free series maps to the identity") {
  ExperimentSpec spec;
  spec.series.frames = 5;
  spec.series.snr = 0.0;
  spec.series.drift_sigma_t = 0.0;
  spec.series.drift_sigma_alpha = 0.0;
  spec.p_list = {2};
  const RegisterReport r = run_register(spec);
  REQUIRE(r.cumulative.size() == 5);
  for (const auto& phi : r.cumulative) {
    CHECK(reg::max_displacement(phi, reg::RigidDeformation::identity()) < 1e-6);
  }
}

TEST_CASE("register: serial and distributed runs agree and outputs round-trip") {
  ExperimentSpec spec;
  spec.series.frames = 6;
  spec.seed = 17;
  spec.kinds = {ScanKind::Serial};
  spec.p_list = {1};
  const RegisterReport serial = run_register(spec);
  spec.kinds = {ScanKind::KoggeStone};
  spec.variants = {StrategyVariant::Alternative};
  spec.p_list = {4};
  const RegisterReport dist = run_register(spec);
  CHECK(dist.p == 4);
  const double h = std::ldexp(1.0, -spec.ml.m1);
  REQUIRE(serial.cumulative.size() == dist.cumulative.size());
  for (std::size_t i = 0; i < serial.cumulative.size(); ++i) {
    CHECK(reg::approx_eq(serial.cumulative[i], dist.cumulative[i], h));
  }
  CHECK(*serial.max_error_pixels < 0.5);
  CHECK(*dist.max_error_pixels < 0.5);

  const auto dir = temp_dir("scanforge_test_bench_register");
  write_register_outputs(dir, dist);
  for (const char* name : {"deformations.txt", "timing.csv", "preprocess_timing.csv", "mean.pgm"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  std::ifstream defs(dir / "deformations.txt");
  const auto back = reg::read_deformations(defs);
  REQUIRE(back.size() == dist.cumulative.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == dist.cumulative[i]);

  // The timing trace feeds the trace cost model.
  ExperimentSpec sim;
  sim.cost = "trace";
  sim.cost_trace = (dir / "timing.csv").string();
  sim.n = 64;
  sim.p_list = {4};
  const auto rows = run_simulate(sim);
  CHECK(rows[0].makespan > 0.0);

  const reg::GridImage mean = reg::read_pgm(dir / "mean.pgm");
  CHECK(mean.level() == spec.series.level);
}

TEST_CASE("register: manifest input and frame errors") {
  const auto dir = temp_dir("scanforge_test_bench_manifest");
  reg::SeriesSpec s;
  s.frames = 3;
  const reg::Series series = reg::generate_series(s, 3);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < series.frames.size(); ++i) {
    paths.push_back(dir / ("f" + std::to_string(i) + ".raw"));
    reg::write_raw(paths.back(), series.frames[i]);
  }
  reg::write_manifest(dir / "frames.txt", paths);
  ExperimentSpec spec;
  spec.manifest = (dir / "frames.txt").string();
  spec.p_list = {1};
  const RegisterReport r = run_register(spec);
  CHECK(r.cumulative.size() == 3);
  CHECK_FALSE(r.max_error_pixels.has_value());

  std::filesystem::remove(paths[1]);
  try {
    run_register(spec);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
  }
}

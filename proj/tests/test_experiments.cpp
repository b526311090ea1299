#include <cmath>
#include <sstream>

#include "doctest.h"
#include "scanforge/error.hpp"
#include "scanforge/experiments.hpp"

using namespace scanforge;

TEST_CASE("speedup standard deviation") {
  const auto s = speedup_stats({99.0, 100.0, 101.0}, {9.5, 10.0, 10.5});
  CHECK(s.speedup == doctest::Approx(10.0));
  CHECK(s.sigma == doctest::Approx(10.0 * std::sqrt(0.0001 + 0.0025)));
  CHECK(s.sigma == doctest::Approx(0.51).epsilon(0.01));
  CHECK_THROWS_AS(speedup_stats({1.0, 2.0}, {1.0}), Error);
  CHECK(speedup_stats({4.0}, {2.0}).sigma == 0.0);
}

TEST_CASE("strong scaling under constant cost reproduces the theory") {
  const auto runner = simulated_runner(StrategyVariant::GeneralExclusive, ScanKind::Blelloch,
                                       CostModel::constant(1.0));
  std::vector<std::size_t> ps;
  for (std::size_t p = 1; p <= 512; p <<= 1) ps.push_back(p);
  const auto table = strong_scaling_experiment(4096, ps, 3, runner);
  for (const auto& row : table.rows) {
    const double theory =
        theoretical_speedup(ScanKind::Blelloch, 4096, row.p, StrategyVariant::GeneralExclusive);
    CHECK(std::fabs(row.stats.speedup / theory - 1.0) < 0.01);
    CHECK(row.stats.sigma == 0.0);
  }
  const auto single = strong_scaling_experiment(64, {1}, 5, runner);
  CHECK(single.rows[0].stats.speedup == 1.0);
  CHECK(single.rows[0].stats.sigma == 0.0);
}

TEST_CASE("weak scaling growth follows the span formula") {
  const auto ks = simulated_runner(StrategyVariant::GeneralInclusive, ScanKind::KoggeStone,
                                   CostModel::constant(1.0));
  const auto table = weak_scaling_experiment(8, {512, 16, 64}, 2, ks);
  REQUIRE(table.rows.front().p == 16);
  const double first = static_cast<double>(
      distributed_span(ScanKind::KoggeStone, 128, 16, StrategyVariant::GeneralInclusive).total_span);
  const double last = static_cast<double>(
      distributed_span(ScanKind::KoggeStone, 4096, 512, StrategyVariant::GeneralInclusive).total_span);
  CHECK(table.rows.back().growth_pct == doctest::Approx((last / first - 1.0) * 100.0));
  // Printed limit for this range is 27.7 (truncated).
  CHECK(table.rows.back().growth_pct >= 27.7);
  CHECK(table.rows.back().growth_pct < 27.8);

  const auto ks32 = weak_scaling_experiment(32, {4, 128}, 1, ks);
  CHECK(std::floor(ks32.rows.back().growth_pct * 10.0) / 10.0 == doctest::Approx(7.8));

  const auto bl = simulated_runner(StrategyVariant::GeneralExclusive, ScanKind::Blelloch,
                                   CostModel::constant(1.0));
  const auto b32 = weak_scaling_experiment(32, {4, 8, 16, 32, 64, 128}, 1, bl);
  CHECK(b32.rows.back().growth_pct <= 14.93);
  CHECK(std::round(b32.rows.back().growth_pct * 10.0) / 10.0 == doctest::Approx(14.9));

  const auto flat = weak_scaling_experiment(16, {1, 1}, 1, bl);
  CHECK(flat.rows.back().growth_pct == 0.0);
}

TEST_CASE("csv schema") {
  const auto runner = simulated_runner(StrategyVariant::Alternative, ScanKind::Sklansky,
                                       CostModel::uniform(0.5, 1.5, 3));
  auto table = strong_scaling_experiment(64, {2, 4}, 3, runner);
  table.variant = "alternative";
  table.kind = "sklansky";
  std::ostringstream os;
  table.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "variant,kind,n,p,rep,t_serial,t_parallel,speedup,sigma");
  std::vector<double> t1, t2;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.push_back("");
    REQUIRE(f.size() == 9);
    if (f[4] == "mean") {
      const double sp = std::stod(f[7]);
      const double sigma = std::stod(f[8]);
      const auto ref = speedup_stats(t1, t2);
      CHECK(sp == ref.speedup);
      CHECK(sigma == ref.sigma);
      t1.clear();
      t2.clear();
    } else {
      CHECK(f[8].empty());
      t1.push_back(std::stod(f[5]));
      t2.push_back(std::stod(f[6]));
    }
  }
  CHECK(rows == 8);
}

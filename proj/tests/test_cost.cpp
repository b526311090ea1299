#include <cmath>
#include <sstream>

#include "doctest.h"
#include "scanforge/cost.hpp"
#include "scanforge/network.hpp"
#include "support.hpp"

using namespace scanforge;

TEST_CASE("table values") {
  CHECK(work(ScanKind::KoggeStone, 8) == 17);
  CHECK(span(ScanKind::KoggeStone, 8) == 3);
  CHECK(span(ScanKind::Blelloch, 8) == 6);
  CHECK(work(ScanKind::Blelloch, 8) == 14);
  CHECK(work(ScanKind::Serial, 2) == 1);
  CHECK(span(ScanKind::Serial, 2) == 1);
  CHECK_THROWS_AS(span(ScanKind::Sklansky, 12), SizeError);
  CHECK_THROWS_AS(work(ScanKind::Sklansky, 1), SizeError);
  for (std::size_t n : testing_support::powers_of_two(2, 1 << 20)) {
    for (ScanKind kind : kAllScanKinds) CHECK(span(kind, n) <= work(kind, n));
  }
}

TEST_CASE("snir deficiency examples") {
  CHECK(snir_deficiency(7, 7, 8) == 0);
  CHECK(snir_deficiency(12, 3, 8) == -1);
  CHECK(snir_deficiency(2, 2, 2) == -2);
  const auto b2 = build_network(ScanKind::Blelloch, 2);
  CHECK(snir_deficiency(b2.size(), b2.depth(), 2) == -2);
}

TEST_CASE("distributed span examples") {
  auto f = distributed_span(ScanKind::Blelloch, 64, 8, StrategyVariant::GeneralExclusive);
  CHECK(f.local1_span == 7);
  CHECK(f.global_span == 6);
  CHECK(f.local2_span == 8);
  CHECK(f.total_span == 21);
  CHECK(f.even);

  for (ScanKind kind : kAllScanKinds) {
    for (StrategyVariant v : kAllVariants) {
      const auto one = distributed_span(kind, 100, 1, v);
      CHECK(one.total_span == 99);
      CHECK(one.total_work == 99);
      CHECK(theoretical_speedup(kind, 100, 1, v) <= 1.0);
    }
  }

  auto corner = distributed_span(ScanKind::KoggeStone, 512, 512, StrategyVariant::GeneralInclusive);
  CHECK(corner.local1_span == 0);
  CHECK(corner.local2_span == 0);
  CHECK(corner.global_span == 9);
  CHECK(corner.total_span == 9);

  CHECK_THROWS_AS(distributed_span(ScanKind::Serial, 4, 8, StrategyVariant::GeneralExclusive),
                  SizeError);
}

TEST_CASE("printed totals agree with the stage sums") {
  for (std::size_t n : testing_support::powers_of_two(2, 4096)) {
    for (std::size_t p : testing_support::powers_of_two(2, n)) {
      for (ScanKind kind : kAllScanKinds) {
        const StrategyVariant v = (kind == ScanKind::KoggeStone || kind == ScanKind::Sklansky)
                                      ? StrategyVariant::GeneralInclusive
                                      : StrategyVariant::GeneralExclusive;
        const auto ref = reference_total_span(kind, static_cast<double>(n), static_cast<double>(p));
        if (!ref) continue;
        CAPTURE(n);
        CAPTURE(p);
        CAPTURE(to_string(kind));
        CHECK(static_cast<double>(distributed_span(kind, n, p, v).total_span) == *ref);
      }
    }
  }
}

TEST_CASE("global-stage closed forms match the per-worker finish times") {
  for (std::size_t p : testing_support::powers_of_two(1, 1024)) {
    for (ScanKind kind : kAllScanKinds) {
      for (GlobalMode mode : {GlobalMode::Exclusive, GlobalMode::Inclusive}) {
        const auto finish = global_stage_finish_times(kind, p, mode);
        CAPTURE(p);
        CAPTURE(to_string(kind));
        CAPTURE(static_cast<int>(mode));
        CHECK(*std::max_element(finish.begin(), finish.end()) == global_stage_span(kind, p, mode));
      }
    }
  }
  for (std::size_t p = 1; p <= 40; ++p) {
    const auto finish = global_stage_finish_times(ScanKind::Serial, p, GlobalMode::Exclusive);
    CHECK(*std::max_element(finish.begin(), finish.end()) ==
          global_stage_span(ScanKind::Serial, p, GlobalMode::Exclusive));
  }
}

TEST_CASE("global-stage work") {
  CHECK(global_stage_work(ScanKind::KoggeStone, 8, GlobalMode::Inclusive) == 17);
  CHECK(global_stage_work(ScanKind::KoggeStone, 8, GlobalMode::Exclusive) == 14);
  CHECK(global_stage_work(ScanKind::Blelloch, 8, GlobalMode::Exclusive) == 14);
  CHECK(global_stage_work(ScanKind::Serial, 5, GlobalMode::Exclusive) == 3);
  CHECK(global_stage_work(ScanKind::Serial, 1, GlobalMode::Inclusive) == 0);
  CHECK_THROWS_AS(global_stage_work(ScanKind::Sklansky, 6, GlobalMode::Inclusive), SizeError);
}

TEST_CASE("optimal worker count") {
  CHECK(optimal_workers(ScanKind::Serial, 512).p0 == doctest::Approx(32.0));
  CHECK_FALSE(optimal_workers(ScanKind::Serial, 512).saturates);
  CHECK(optimal_workers(ScanKind::Serial, 2).p0 == doctest::Approx(2.0));
  const auto b = optimal_workers(ScanKind::Blelloch, 4096);
  CHECK(b.p0 == doctest::Approx(2839.0).epsilon(1e-4));
  CHECK(b.saturates);
  CHECK(optimal_workers(ScanKind::KoggeStone, 64).p0 == doctest::Approx(2 * 64 * std::log(2.0)));

  // Integer sweep over all p: serial global stage peaks at sqrt(2N).
  std::size_t best = 0;
  double best_sp = 0.0;
  for (std::size_t p = 1; p <= 512; ++p) {
    const double sp = theoretical_speedup(ScanKind::Serial, 512, p, StrategyVariant::GeneralExclusive);
    if (sp > best_sp) {
      best_sp = sp;
      best = p;
    }
  }
  CHECK(best == 32);

  // Saturating kinds: p = n is never beaten on the p | n grid.
  for (ScanKind kind : {ScanKind::Blelloch, ScanKind::KoggeStone, ScanKind::Sklansky}) {
    const auto v = kind == ScanKind::Blelloch ? StrategyVariant::GeneralExclusive
                                              : StrategyVariant::GeneralInclusive;
    const double at_n = theoretical_speedup(kind, 4096, 4096, v);
    for (std::size_t p : testing_support::powers_of_two(1, 4096)) {
      CHECK(theoretical_speedup(kind, 4096, p, v) <= at_n);
    }
  }
}

TEST_CASE("serial argmax on the power-of-two grid sits next to the stationary point") {
  for (std::size_t n : testing_support::powers_of_two(8, 1 << 16)) {
    const double p0 = optimal_workers(ScanKind::Serial, n).p0;
    std::size_t best = 1;
    double best_sp = 0.0;
    for (std::size_t p : testing_support::powers_of_two(1, n)) {
      const double sp = theoretical_speedup(ScanKind::Serial, n, p, StrategyVariant::GeneralExclusive);
      if (sp > best_sp) {
        best_sp = sp;
        best = p;
      }
    }
    const auto lo = std::size_t{1} << static_cast<std::size_t>(std::floor(std::log2(p0)));
    CAPTURE(n);
    CHECK((best == lo || best == 2 * lo));
  }
}

TEST_CASE("uneven partitions report an upper bound") {
  const auto f = distributed_span(ScanKind::Serial, 10, 4, StrategyVariant::GeneralExclusive);
  CHECK_FALSE(f.even);
  CHECK(f.local1_span == 2);
  CHECK(f.global_span == 2);
  CHECK(f.local2_span == 3);
  CHECK(f.total_work == 6 + 2 + 7);
}

TEST_CASE("variant names and csv") {
  for (StrategyVariant v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
  CHECK(parse_variant("general") == StrategyVariant::GeneralExclusive);
  CHECK(parse_variant("inclusive-optimized") == StrategyVariant::GeneralInclusive);
  CHECK_FALSE(parse_variant("bogus").has_value());

  std::ostringstream os;
  write_cost_csv_header(os);
  write_cost_csv_row(os, ScanKind::Blelloch, StrategyVariant::GeneralExclusive,
                     distributed_span(ScanKind::Blelloch, 64, 8, StrategyVariant::GeneralExclusive));
  CHECK(os.str() ==
        "kind,variant,N,P,local1,global,local2,total_span,total_work,speedup\n"
        "blelloch,general-exclusive,64,8,7,6,8,21,126,3\n");
}

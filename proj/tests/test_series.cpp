#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "doctest.h"
#include "scanforge/error.hpp"
#include "scanforge/registration/io.hpp"
#include "scanforge/registration/series.hpp"
#include "scanforge/runtime.hpp"
#include "scanforge/scan.hpp"
#include "scanforge/simulate.hpp"

using namespace scanforge;
using namespace scanforge::reg;

namespace {

struct Fixture {
  Series series;
  std::shared_ptr<const FrameStore> store;
  std::vector<SeriesDeformation> neighbors;
  GradientFlowConfig gf;
  double h = 0.0;
};

// One 8-frame series shared by the slow cases.
const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    SeriesSpec spec;
    spec.frames = 8;
    x.series = generate_series(spec, 2024);
    x.store = std::make_shared<const FrameStore>(x.series.frames, MultilevelConfig{});
    x.neighbors = preprocess_series(*x.store, x.gf).neighbors;
    x.h = x.store->fine_spacing();
    return x;
  }();
  return f;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "scanforge_test_series";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generator") {
  SUBCASE("no noise and no drift gives identical frames") {
    SeriesSpec spec;
    spec.frames = 4;
    spec.level = 5;
    spec.snr = 0.0;
    spec.drift_sigma_t = 0.0;
    spec.drift_sigma_alpha = 0.0;
    const Series s = generate_series(spec, 1);
    for (const auto& f : s.frames) CHECK(f.values() == s.frames[0].values());
    CHECK(s.truth.noise_sigma == 0.0);
  }
  SUBCASE("deterministic per seed") {
    SeriesSpec spec;
    spec.frames = 3;
    spec.level = 5;
    const Series a = generate_series(spec, 99), b = generate_series(spec, 99),
                 c = generate_series(spec, 100);
    CHECK(a.frames[2].values() == b.frames[2].values());
    CHECK(a.truth.drift[1] == b.truth.drift[1]);
    CHECK(a.frames[2].values() != c.frames[2].values());
  }
  SUBCASE("cumulative truth is the composition of drifts") {
    SeriesSpec spec;
    spec.frames = 6;
    spec.level = 4;
    const Series s = generate_series(spec, 5);
    RigidDeformation acc = RigidDeformation::identity();
    for (std::size_t k = 1; k < spec.frames; ++k) {
      acc = compose(s.truth.drift[k], acc);
      CHECK(max_displacement(acc, s.truth.cumulative[k]) < 1e-15);
    }
  }
  SUBCASE("noise level follows the SNR") {
    SeriesSpec spec;
    spec.frames = 2;
    spec.level = 7;
    spec.snr = 5.0;
    const Series s = generate_series(spec, 8);
    SeriesSpec clean = spec;
    clean.snr = 0.0;
    const Series c = generate_series(clean, 8);
    CHECK(s.truth.noise_sigma == doctest::Approx(image_std(c.frames[0]) / 5.0));
    GridImage diff = s.frames[0];
    for (std::size_t n = 0; n < diff.size(); ++n) diff.values()[n] -= c.frames[0].values()[n];
    CHECK(image_std(diff) == doctest::Approx(s.truth.noise_sigma).epsilon(0.05));
  }
  SUBCASE("default drift magnitudes sit in the neighbor-frame range") {
    SeriesSpec spec;
    spec.frames = 200;
    spec.level = 2;
    const Series s = generate_series(spec, 6);
    double ma = 0.0, mt = 0.0;
    for (std::size_t k = 1; k < spec.frames; ++k) {
      ma += std::fabs(s.truth.drift[k].alpha);
      mt += std::hypot(s.truth.drift[k].t[0], s.truth.drift[k].t[1]);
    }
    ma /= static_cast<double>(spec.frames - 1);
    mt /= static_cast<double>(spec.frames - 1);
    CHECK(ma > 1e-4);
    CHECK(ma < 1e-3);
    CHECK(mt > 5e-4);
    CHECK(mt < 5e-3);
  }
  SUBCASE("invalid spec") {
    SeriesSpec spec;
    spec.frames = 1;
    CHECK_THROWS_AS(generate_series(spec, 0), ConfigError);
  }
}

TEST_CASE("preprocessing recovers per-frame drift") {
  const Fixture& fx = fixture();
  REQUIRE(fx.neighbors.size() == 7);
  for (std::size_t i = 0; i < fx.neighbors.size(); ++i) {
    CHECK(fx.neighbors[i].from == static_cast<int>(i));
    CHECK(fx.neighbors[i].to == static_cast<int>(i + 1));
    CHECK(max_displacement(fx.neighbors[i].phi, fx.series.truth.drift[i + 1]) < 0.5 * fx.h);
  }
}

TEST_CASE("parallel preprocessing equals sequential exactly") {
  SeriesSpec spec;
  spec.frames = 5;
  spec.level = 7;
  const Series s = generate_series(spec, 31);
  const FrameStore store(s.frames, MultilevelConfig{5, 7});
  const auto seq = preprocess_series(store, {}, 1);
  const auto par = preprocess_series(store, {}, 3);
  REQUIRE(seq.neighbors.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(seq.neighbors[i].phi == par.neighbors[i].phi);
  CHECK(par.seconds.size() == 4);

  const FrameStore two(std::vector<GridImage>(s.frames.begin(), s.frames.begin() + 2),
                       MultilevelConfig{5, 7});
  CHECK(preprocess_series(two, {}).neighbors.size() == 1);
}

TEST_CASE("function B") {
  const Fixture& fx = fixture();
  SUBCASE("identity extension") {
    // f_k == f_j and phi_jk = identity: B(phi_ij, phi_jk) stays at phi_ij.
    std::vector<GridImage> frames{fx.series.frames[0], fx.series.frames[1], fx.series.frames[1]};
    const FrameStore store(frames, MultilevelConfig{});
    const SeriesDeformation a = fx.neighbors[0];
    const SeriesDeformation b{1, 2, RigidDeformation::identity()};
    const SeriesDeformation ab = refine(store, a, b, fx.gf);
    CHECK(ab.from == 0);
    CHECK(ab.to == 2);
    CHECK(approx_eq(ab.phi, a.phi, fx.h));
  }
  SUBCASE("identity element") {
    const auto op = registration_operator(fx.store, fx.gf);
    const SeriesDeformation x = fx.neighbors[3];
    CHECK(op.apply(op.identity(), x).phi == x.phi);
    CHECK(op.apply(x, op.identity()).phi == x.phi);
  }
  SUBCASE("index inconsistency") {
    CHECK_THROWS_AS(refine(*fx.store, fx.neighbors[0], fx.neighbors[2], fx.gf), RegistrationError);
    CHECK_THROWS_AS(refine(*fx.store, fx.neighbors[1], fx.neighbors[0], fx.gf), RegistrationError);
    const SeriesDeformation bad{0, 20, RigidDeformation::identity()};
    const SeriesDeformation tail{20, 21, RigidDeformation::identity()};
    CHECK_THROWS_AS(refine(*fx.store, bad, tail, fx.gf), RegistrationError);
  }
  SUBCASE("parenthesizations agree below one fine pixel") {
    const auto& n = fx.neighbors;
    for (std::size_t i = 0; i + 2 < n.size(); ++i) {
      const auto left = refine(*fx.store, refine(*fx.store, n[i], n[i + 1], fx.gf), n[i + 2], fx.gf);
      const auto right = refine(*fx.store, n[i], refine(*fx.store, n[i + 1], n[i + 2], fx.gf), fx.gf);
      CHECK(left.from == right.from);
      CHECK(left.to == right.to);
      CHECK(max_displacement(left.phi, right.phi) < fx.h);
    }
  }
}

TEST_CASE("prefix sums of B agree with the serial scan") {
  const Fixture& fx = fixture();
  const auto op = registration_operator(fx.store, fx.gf);
  const auto serial = serial_scan(fx.neighbors, op);
  REQUIRE(serial.size() == 7);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].from == 0);
    CHECK(serial[i].to == static_cast<int>(i + 1));
    CHECK(max_displacement(serial[i].phi, fx.series.truth.cumulative[i + 1]) < 0.5 * fx.h);
  }
  ScanOptions pad;
  pad.pad_to_power_of_two = true;
  for (ScanKind kind : kAllScanKinds) {
    CAPTURE(to_string(kind));
    const auto out = inclusive_scan(kind, fx.neighbors, op, pad);
    REQUIRE(out.size() == serial.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(op.approx_eq(out[i], serial[i]));
  }
  for (StrategyVariant v : kAllVariants) {
    CAPTURE(to_string(v));
    const auto run = run_distributed(fx.neighbors, op, v, ScanKind::Blelloch, 4);
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(op.approx_eq(run.values[i], serial[i]));
  }
}

TEST_CASE("energy line probe") {
  const Fixture& fx = fixture();
  const auto& r = fx.store->frame(0);
  const auto& t = fx.store->frame(2);
  const RigidDeformation a = fx.series.truth.cumulative[2];
  const RigidDeformation b{a.alpha + 1e-3, {a.t[0] + 2e-3, a.t[1] - 1e-3}};
  const auto line = energy_line_probe(r, t, a, b, 0.1);
  REQUIRE(line.size() == 21);
  CHECK(line.front().s == 0.0);
  CHECK(line.back().s == 1.0);
  CHECK(line.front().energy == energy(r, t, b, 0.1));
  CHECK(line.back().energy == energy(r, t, a, 0.1));
  CHECK_THROWS_AS(energy_line_probe(r, t, a, b, 0.1, 1), ConfigError);
}

TEST_CASE("mean aligned frame") {
  SeriesSpec spec;
  spec.frames = 4;
  spec.level = 6;
  spec.snr = 0.0;
  const Series s = generate_series(spec, 3);
  const GridImage mean = mean_aligned_frame(s.frames, s.truth.cumulative);
  // Aligned frames reproduce f_0 away from the border.
  for (std::size_t j = 8; j + 8 < mean.side(); ++j) {
    for (std::size_t i = 8; i + 8 < mean.side(); ++i) {
      CHECK(mean.at(i, j) == doctest::Approx(s.frames[0].at(i, j)).epsilon(0.05).scale(1.0));
    }
  }
}

TEST_CASE("frame io") {
  const auto dir = temp_dir();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  GridImage f(4);
  for (double& v : f.values()) v = u(rng);

  SUBCASE("raw float32 round trip") {
    write_raw(dir / "a.raw", f);
    CHECK(std::filesystem::file_size(dir / "a.raw") == 16 + 4 * f.size());
    const GridImage g = read_frame(dir / "a.raw");
    REQUIRE(g.level() == 4);
    for (std::size_t n = 0; n < f.size(); ++n) {
      CHECK(g.values()[n] == static_cast<double>(static_cast<float>(f.values()[n])));
    }
  }
  SUBCASE("pgm round trip, 8 and 16 bit") {
    for (int maxval : {255, 65535}) {
      write_pgm(dir / "a.pgm", f, maxval, -2.0, 3.0);
      const GridImage g = read_frame(dir / "a.pgm");
      REQUIRE(g.level() == 4);
      for (std::size_t n = 0; n < f.size(); ++n) {
        const double expect = (f.values()[n] + 2.0) / 5.0;
        CHECK(std::fabs(g.values()[n] - expect) <= 0.5 / maxval + 1e-12);
      }
    }
  }
  SUBCASE("bad files") {
    {
      std::ofstream out(dir / "bad.pgm", std::ios::binary);
      out << "P5\n10 10\n255\n";
    }
    CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), IoError);
    {
      std::ofstream out(dir / "bad.raw", std::ios::binary);
      out << "NOTAGRID........";
    }
    CHECK_THROWS_AS(read_raw(dir / "bad.raw"), IoError);
    CHECK_THROWS_AS(read_raw(dir / "missing.raw"), IoError);
  }
  SUBCASE("manifest resolves relative paths") {
    write_manifest(dir / "list.txt", {"a.raw", "# comment", "", "/abs/b.raw"});
    const auto paths = read_manifest(dir / "list.txt");
    REQUIRE(paths.size() == 2);
    CHECK(paths[0] == dir / "a.raw");
    CHECK(paths[1] == std::filesystem::path("/abs/b.raw"));
  }
}

TEST_CASE("deformation text round trip") {
  const std::vector<RigidDeformation> phis{{1e-4, {-4.5e-4, -4.9e-3}}, {0.0, {0.0, 0.0}},
                                           {-0.3, {1.0 / 3.0, 2.0 / 7.0}}};
  std::stringstream ss;
  write_deformations(ss, phis);
  CHECK(read_deformations(ss) == phis);
  std::stringstream bad("0.1 0.2\n");
  CHECK_THROWS_AS(read_deformations(bad), IoError);
}

TEST_CASE("timing csv feeds the trace cost model") {
  const std::vector<TimingRecord> recs{{0, 0, 1, 0.25}, {1, 1, 2, 0.5}, {2, 0, 2, 0.125}};
  std::stringstream ss;
  write_timing_csv(ss, recs);
  CHECK(ss.str().rfind("index,from,to,seconds\n", 0) == 0);
  const auto back = read_timing_csv(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[2].to == 2);
  CHECK(back[1].seconds == 0.5);
  const CostModel model = CostModel::from_trace(timing_costs(back), 1);
  CHECK(model.mean() == doctest::Approx((0.25 + 0.5 + 0.125) / 3));
  std::stringstream bad("a,b\n");
  CHECK_THROWS_AS(read_timing_csv(bad), IoError);
}

#include "scanforge/registration/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "scanforge/error.hpp"

namespace scanforge::reg {

void SeriesSpec::validate() const {
  if (frames < 2) throw ConfigError("a series needs at least 2 frames");
  side_for_level(level);
  if (!(drift_sigma_t >= 0.0) || !(drift_sigma_alpha >= 0.0)) {
    throw ConfigError("drift sigmas must be >= 0");
  }
  if (!std::isfinite(snr)) throw ConfigError("snr must be finite");
}

double series_pattern(Point x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double k = two_pi * 6.0;
  // Hexagonal lattice of bright spots.
  const double lattice = std::cos(k * x[0]) +
                         std::cos(k * (0.5 * x[0] + 0.8660254037844386 * x[1])) +
                         std::cos(k * (-0.5 * x[0] + 0.8660254037844386 * x[1]));
  const double slow = 0.8 * std::sin(two_pi * (0.8 * x[0] + 0.3 * x[1]) + 0.5) +
                      0.6 * std::cos(two_pi * (-0.4 * x[0] + 1.1 * x[1]) + 1.3);
  return lattice + slow;
}

Series generate_series(const SeriesSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Series s;
  s.truth.seed = seed;
  s.truth.drift.assign(spec.frames, RigidDeformation::identity());
  s.truth.cumulative.assign(spec.frames, RigidDeformation::identity());
  for (std::size_t k = 1; k < spec.frames; ++k) {
    RigidDeformation d;
    d.alpha = spec.drift_sigma_alpha * unit(rng);
    d.t[0] = spec.drift_sigma_t * unit(rng);
    d.t[1] = spec.drift_sigma_t * unit(rng);
    s.truth.drift[k] = d;
    s.truth.cumulative[k] = compose(d, s.truth.cumulative[k - 1]);
  }

  s.frames.reserve(spec.frames);
  for (std::size_t k = 0; k < spec.frames; ++k) {
    const RigidDeformation back = inverse(s.truth.cumulative[k]);
    GridImage f(spec.level);
    for (std::size_t j = 0; j < f.side(); ++j) {
      for (std::size_t i = 0; i < f.side(); ++i) f.at(i, j) = series_pattern(back(f.node(i, j)));
    }
    s.frames.push_back(std::move(f));
  }

  if (spec.snr > 0.0) {
    s.truth.noise_sigma = image_std(s.frames.front()) / spec.snr;
    for (GridImage& f : s.frames) {
      for (double& v : f.values()) v += s.truth.noise_sigma * unit(rng);
    }
  }
  return s;
}

FrameStore::FrameStore(std::vector<GridImage> frames, MultilevelConfig ml) : ml_(ml) {
  ml_.validate();
  pyramids_.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].level() < ml_.m1) {
      throw RegistrationError("frame " + std::to_string(k) + " has level " +
                              std::to_string(frames[k].level()) + ", below m1 = " +
                              std::to_string(ml_.m1));
    }
    pyramids_.push_back(registration_pyramid(frames[k], ml_));
  }
}

const Pyramid& FrameStore::pyramid(std::size_t frame) const {
  if (frame >= pyramids_.size()) {
    throw RegistrationError("frame " + std::to_string(frame) + " out of range (series has " +
                            std::to_string(pyramids_.size()) + " frames)");
  }
  return pyramids_[frame];
}

const GridImage& FrameStore::frame(std::size_t frame) const { return pyramid(frame).levels.back(); }

double FrameStore::fine_spacing() const noexcept { return std::ldexp(1.0, -ml_.m1); }

SeriesDeformation register_frames(const FrameStore& store, int from, int to,
                                  const RigidDeformation& phi0, const GradientFlowConfig& gf) {
  if (from < 0 || to < 0) {
    throw RegistrationError("negative frame index (" + std::to_string(from) + ", " +
                            std::to_string(to) + ")");
  }
  const Pyramid& r = store.pyramid(static_cast<std::size_t>(from));
  const Pyramid& t = store.pyramid(static_cast<std::size_t>(to));
  try {
    return {from, to, register_pyramids(r, t, phi0, store.multilevel(), gf).phi};
  } catch (const Error& e) {
    throw RegistrationError("registering frame " + std::to_string(to) + " to frame " +
                            std::to_string(from) + ": " + e.what());
  }
}

SeriesDeformation refine(const FrameStore& store, const SeriesDeformation& a,
                         const SeriesDeformation& b, const GradientFlowConfig& gf) {
  if (a.is_identity()) return b;
  if (b.is_identity()) return a;
  if (a.to != b.from || !(a.from < a.to) || !(b.from < b.to)) {
    throw RegistrationError("cannot combine phi_{" + std::to_string(a.from) + "," +
                            std::to_string(a.to) + "} with phi_{" + std::to_string(b.from) + "," +
                            std::to_string(b.to) + "}");
  }
  return register_frames(store, a.from, b.to, compose(b.phi, a.phi), gf);
}

Operator<SeriesDeformation> registration_operator(std::shared_ptr<const FrameStore> store,
                                                  GradientFlowConfig gf) {
  gf.validate();
  const double h = store->fine_spacing();
  return Operator<SeriesDeformation>(
      "registration",
      SeriesDeformation::identity(),
      [store, gf](const SeriesDeformation& a, const SeriesDeformation& b) {
        return refine(*store, a, b, gf);
      },
      [](const SeriesDeformation& a, const SeriesDeformation& b, double tol) {
        if (a.is_identity() || b.is_identity()) return a.is_identity() && b.is_identity();
        return a.from == b.from && a.to == b.to && approx_eq(a.phi, b.phi, tol);
      },
      h);
}

PreprocessResult preprocess_series(const FrameStore& store, const GradientFlowConfig& gf,
                                   unsigned threads) {
  if (store.size() < 2) throw RegistrationError("preprocessing needs at least 2 frames");
  const std::size_t pairs = store.size() - 1;
  PreprocessResult res;
  res.neighbors.resize(pairs);
  res.seconds.resize(pairs);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pairs)));

  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned id) {
    try {
      for (std::size_t i = id; i < pairs; i += threads) {
        const auto start = std::chrono::steady_clock::now();
        res.neighbors[i] = register_frames(store, static_cast<int>(i), static_cast<int>(i + 1),
                                           RigidDeformation::identity(), gf);
        res.seconds[i] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned id = 0; id < threads; ++id) pool.emplace_back(work, id);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return res;
}

std::vector<LinePoint> energy_line_probe(const GridImage& r, const GridImage& t,
                                         const RigidDeformation& a, const RigidDeformation& b,
                                         double lambda, std::size_t points) {
  if (points < 2) throw ConfigError("energy line probe needs at least 2 points");
  const EnergyProblem problem(r, t, lambda);
  std::vector<LinePoint> out;
  out.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(points - 1);
    const RigidDeformation phi{s * a.alpha + (1.0 - s) * b.alpha,
                               {s * a.t[0] + (1.0 - s) * b.t[0], s * a.t[1] + (1.0 - s) * b.t[1]}};
    out.push_back({s, problem.energy(phi)});
  }
  return out;
}

GridImage mean_aligned_frame(const std::vector<GridImage>& frames,
                             const std::vector<RigidDeformation>& cumulative) {
  if (frames.empty() || frames.size() != cumulative.size()) {
    throw ConfigError("mean frame needs one deformation per frame");
  }
  GridImage mean(frames.front().level());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const GridImage aligned = apply_deformation(frames[k], cumulative[k]).image;
    if (aligned.level() != mean.level()) throw SizeError("frames differ in level");
    for (std::size_t n = 0; n < mean.size(); ++n) mean.values()[n] += aligned.values()[n];
  }
  for (double& v : mean.values()) v /= static_cast<double>(frames.size());
  return mean;
}

}  // namespace scanforge::reg

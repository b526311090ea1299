#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "scanforge/operator.hpp"
#include "scanforge/registration/energy.hpp"
#include "scanforge/registration/grid_image.hpp"
#include "scanforge/registration/rigid.hpp"

namespace scanforge::reg {

struct SeriesSpec {
  std::size_t frames = 16;
  int level = 8;
  double drift_sigma_t = 1e-3;
  double drift_sigma_alpha = 4e-4;
  double snr = 5.0;  ///< pattern std / noise std; <= 0 disables noise

  void validate() const;
};

struct SeriesGroundTruth {
  std::vector<RigidDeformation> drift;       ///< drift[k] = phi_{k-1,k}; drift[0] is identity
  std::vector<RigidDeformation> cumulative;  ///< phi_{0,k}
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Series {
  std::vector<GridImage> frames;
  SeriesGroundTruth truth;
};

/// Smooth lattice-like test pattern, defined on the whole plane.
double series_pattern(Point x);

/// Frames f_k(y) = pattern(phi_{0,k}^{-1}(y)) + noise, so f_k o phi_{0,k} = f_0
/// up to noise. Deterministic per seed.
Series generate_series(const SeriesSpec& spec, std::uint64_t seed);

/// Read-only multilevel pyramids of a frame series, shared by all workers.
class FrameStore {
 public:
  FrameStore(std::vector<GridImage> frames, MultilevelConfig ml);

  std::size_t size() const noexcept { return pyramids_.size(); }
  const Pyramid& pyramid(std::size_t frame) const;
  /// Finest pyramid level, i.e. the frame at m1 after pre-smoothing.
  const GridImage& frame(std::size_t frame) const;
  const MultilevelConfig& multilevel() const noexcept { return ml_; }
  double fine_spacing() const noexcept;

 private:
  MultilevelConfig ml_;
  std::vector<Pyramid> pyramids_;
};

/// phi_{from,to} between two frames of a series; from < 0 marks the identity.
struct SeriesDeformation {
  int from = -1;
  int to = -1;
  RigidDeformation phi;

  bool is_identity() const noexcept { return from < 0; }
  static SeriesDeformation identity() { return {}; }
};

/// Function A for two frames of the store.
SeriesDeformation register_frames(const FrameStore& store, int from, int to,
                                  const RigidDeformation& phi0, const GradientFlowConfig& gf);

/// Function B: a = phi_{i,j}, b = phi_{j,k} -> A(f_i, f_k, b o a).
SeriesDeformation refine(const FrameStore& store, const SeriesDeformation& a,
                         const SeriesDeformation& b, const GradientFlowConfig& gf);

/// The prefix-sum operator over series deformations. approx_eq compares
/// deformations by maximum displacement against one fine grid spacing.
Operator<SeriesDeformation> registration_operator(std::shared_ptr<const FrameStore> store,
                                                  GradientFlowConfig gf);

struct PreprocessResult {
  std::vector<SeriesDeformation> neighbors;  ///< phi_{i,i+1}
  std::vector<double> seconds;               ///< wall time of each A call
};

/// phi_{i,i+1} = A(f_i, f_{i+1}, identity) for all i, spread over `threads` threads.
PreprocessResult preprocess_series(const FrameStore& store, const GradientFlowConfig& gf,
                                   unsigned threads = 1);

struct LinePoint {
  double s = 0.0;
  double energy = 0.0;
};

/// E[s a + (1 - s) b] for s evenly spaced in [0, 1]; the line is taken in
/// (alpha, t) parameter space.
std::vector<LinePoint> energy_line_probe(const GridImage& r, const GridImage& t,
                                         const RigidDeformation& a, const RigidDeformation& b,
                                         double lambda, std::size_t points = 21);

/// Mean of f_k o phi_{0,k} over all frames.
GridImage mean_aligned_frame(const std::vector<GridImage>& frames,
                             const std::vector<RigidDeformation>& cumulative);

}  // namespace scanforge::reg

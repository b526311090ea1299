#pragma once

#include <cstddef>
#include <vector>

#include "scanforge/registration/rigid.hpp"

namespace scanforge::reg {

/// Nodal image on the unit square with (2^level + 1)^2 nodes.
///
/// Node (i, j) sits at x = (i h, j h) with h = 2^-level and is stored at
/// values[j * side + i]; i runs along x0.
class GridImage {
 public:
  GridImage() = default;
  explicit GridImage(int level, double fill = 0.0);
  GridImage(int level, std::vector<double> values);

  int level() const noexcept { return level_; }
  std::size_t side() const noexcept { return side_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(std::size_t i, std::size_t j) { return values_[j * side_ + i]; }
  double at(std::size_t i, std::size_t j) const { return values_[j * side_ + i]; }
  Point node(std::size_t i, std::size_t j) const {
    return {static_cast<double>(i) * h_, static_cast<double>(j) * h_};
  }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  bool all_finite() const noexcept;

 private:
  int level_ = 0;
  std::size_t side_ = 1;
  double h_ = 1.0;
  std::vector<double> values_;
};

/// Side length for a level; throws SizeError outside [0, 14].
std::size_t side_for_level(int level);

/// Trapezoid weight of node (i, j); the weights of a level sum to |Ω| = 1.
double quadrature_weight(const GridImage& f, std::size_t i, std::size_t j);
std::vector<double> quadrature_weights(int level);

double image_mean(const GridImage& f);
double image_std(const GridImage& f);

/// Normalized cross-correlation. Throws DegenerateImageError when either
/// image is constant and SizeError on a level mismatch.
double ncc(const GridImage& r, const GridImage& t);

struct Sample {
  double value = 0.0;
  double d0 = 0.0;  ///< derivative along x0, zero when clamped in x0
  double d1 = 0.0;
  bool clamped = false;
};

/// Bilinear interpolation; coordinates outside [0, 1] are clamped.
Sample sample(const GridImage& f, Point x);
double sample_value(const GridImage& f, Point x);

struct WarpResult {
  GridImage image;
  double clamped_fraction = 0.0;
};

/// output(x) = f(phi(x)) on the nodes of f.
WarpResult apply_deformation(const GridImage& f, const RigidDeformation& phi);

/// Full-weighting restriction to level - 1; boundary nodes are injected.
GridImage restrict_image(const GridImage& f);

/// Bilinear prolongation to level + 1.
GridImage prolongate_image(const GridImage& f);

/// One pass of the separable [1 2 1]/4 kernel with mirrored edges.
GridImage smooth_image(const GridImage& f);

/// Levels from `coarsest` up to f.level(); index 0 is the coarsest.
struct Pyramid {
  std::vector<GridImage> levels;

  int coarsest() const noexcept { return levels.empty() ? 0 : levels.front().level(); }
  int finest() const noexcept { return levels.empty() ? 0 : levels.back().level(); }
  const GridImage& at(int level) const;
};

Pyramid build_pyramid(const GridImage& f, int coarsest);

}  // namespace scanforge::reg

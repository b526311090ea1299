#include "scanforge/registration/grid_image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scanforge/error.hpp"

namespace scanforge::reg {

std::size_t side_for_level(int level) {
  if (level < 0 || level > 14) {
    throw SizeError("grid level must be in [0, 14], got " + std::to_string(level));
  }
  return (std::size_t{1} << level) + 1;
}

GridImage::GridImage(int level, double fill)
    : level_(level),
      side_(side_for_level(level)),
      h_(std::ldexp(1.0, -level)),
      values_(side_ * side_, fill) {}

GridImage::GridImage(int level, std::vector<double> values)
    : level_(level), side_(side_for_level(level)), h_(std::ldexp(1.0, -level)),
      values_(std::move(values)) {
  if (values_.size() != side_ * side_) {
    throw SizeError("level " + std::to_string(level) + " needs " +
                    std::to_string(side_ * side_) + " values, got " +
                    std::to_string(values_.size()));
  }
}

bool GridImage::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double quadrature_weight(const GridImage& f, std::size_t i, std::size_t j) {
  const std::size_t last = f.side() - 1;
  const double wi = (i == 0 || i == last) ? 0.5 : 1.0;
  const double wj = (j == 0 || j == last) ? 0.5 : 1.0;
  return wi * wj * f.spacing() * f.spacing();
}

std::vector<double> quadrature_weights(int level) {
  const GridImage shape(level);
  std::vector<double> w(shape.size());
  for (std::size_t j = 0; j < shape.side(); ++j) {
    for (std::size_t i = 0; i < shape.side(); ++i) w[j * shape.side() + i] = quadrature_weight(shape, i, j);
  }
  return w;
}

double image_mean(const GridImage& f) {
  double sum = 0.0;
  for (std::size_t j = 0; j < f.side(); ++j) {
    for (std::size_t i = 0; i < f.side(); ++i) sum += quadrature_weight(f, i, j) * f.at(i, j);
  }
  return sum;
}

double image_std(const GridImage& f) {
  const double m = image_mean(f);
  double sum = 0.0;
  for (std::size_t j = 0; j < f.side(); ++j) {
    for (std::size_t i = 0; i < f.side(); ++i) {
      const double d = f.at(i, j) - m;
      sum += quadrature_weight(f, i, j) * d * d;
    }
  }
  return std::sqrt(sum);
}

namespace {

void require_nondegenerate(double std, double mean, const char* which) {
  if (!(std > 1e-12 * std::max(1.0, std::fabs(mean)))) {
    throw DegenerateImageError(std::string(which) + " image has zero standard deviation");
  }
}

}  // namespace

double ncc(const GridImage& r, const GridImage& t) {
  if (r.level() != t.level()) {
    throw SizeError("ncc needs images of the same level, got " + std::to_string(r.level()) +
                    " and " + std::to_string(t.level()));
  }
  const double mr = image_mean(r);
  const double mt = image_mean(t);
  double rr = 0.0, tt = 0.0, rt = 0.0;
  for (std::size_t j = 0; j < r.side(); ++j) {
    for (std::size_t i = 0; i < r.side(); ++i) {
      const double w = quadrature_weight(r, i, j);
      const double a = r.at(i, j) - mr;
      const double b = t.at(i, j) - mt;
      rr += w * a * a;
      tt += w * b * b;
      rt += w * a * b;
    }
  }
  require_nondegenerate(std::sqrt(rr), mr, "reference");
  require_nondegenerate(std::sqrt(tt), mt, "template");
  return rt / (std::sqrt(rr) * std::sqrt(tt));
}

Sample sample(const GridImage& f, Point x) {
  const auto last = static_cast<double>(f.side() - 1);
  // side - 1 is a power of two, so this scaling is exact.
  double u = x[0] * last;
  double v = x[1] * last;
  Sample s;
  bool c0 = false, c1 = false;
  if (u < 0.0) { u = 0.0; c0 = true; } else if (u > last) { u = last; c0 = true; }
  if (v < 0.0) { v = 0.0; c1 = true; } else if (v > last) { v = last; c1 = true; }
  const std::size_t i = std::min(static_cast<std::size_t>(u), f.side() - 2);
  const std::size_t j = std::min(static_cast<std::size_t>(v), f.side() - 2);
  const double fx = u - static_cast<double>(i);
  const double fy = v - static_cast<double>(j);
  const double f00 = f.at(i, j), f10 = f.at(i + 1, j);
  const double f01 = f.at(i, j + 1), f11 = f.at(i + 1, j + 1);
  s.value = (1.0 - fx) * (1.0 - fy) * f00 + fx * (1.0 - fy) * f10 + (1.0 - fx) * fy * f01 +
            fx * fy * f11;
  s.d0 = c0 ? 0.0 : ((1.0 - fy) * (f10 - f00) + fy * (f11 - f01)) * last;
  s.d1 = c1 ? 0.0 : ((1.0 - fx) * (f01 - f00) + fx * (f11 - f10)) * last;
  s.clamped = c0 || c1;
  return s;
}

double sample_value(const GridImage& f, Point x) { return sample(f, x).value; }

WarpResult apply_deformation(const GridImage& f, const RigidDeformation& phi) {
  WarpResult out{GridImage(f.level()), 0.0};
  std::size_t clamped = 0;
  for (std::size_t j = 0; j < f.side(); ++j) {
    for (std::size_t i = 0; i < f.side(); ++i) {
      const Sample s = sample(f, phi(f.node(i, j)));
      out.image.at(i, j) = s.value;
      clamped += s.clamped ? 1 : 0;
    }
  }
  out.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(f.size());
  return out;
}

GridImage restrict_image(const GridImage& f) {
  if (f.level() < 1) throw SizeError("cannot restrict a level 0 image");
  GridImage c(f.level() - 1);
  const std::size_t last = c.side() - 1;
  for (std::size_t J = 0; J <= last; ++J) {
    for (std::size_t I = 0; I <= last; ++I) {
      const std::size_t i = 2 * I, j = 2 * J;
      if (I == 0 || J == 0 || I == last || J == last) {
        c.at(I, J) = f.at(i, j);
        continue;
      }
      const double sum = 4.0 * f.at(i, j) +
                         2.0 * (f.at(i - 1, j) + f.at(i + 1, j) + f.at(i, j - 1) + f.at(i, j + 1)) +
                         f.at(i - 1, j - 1) + f.at(i + 1, j - 1) + f.at(i - 1, j + 1) +
                         f.at(i + 1, j + 1);
      c.at(I, J) = sum / 16.0;
    }
  }
  return c;
}

GridImage prolongate_image(const GridImage& f) {
  GridImage out(f.level() + 1);
  for (std::size_t j = 0; j < out.side(); ++j) {
    for (std::size_t i = 0; i < out.side(); ++i) {
      const std::size_t I = i / 2, J = j / 2;
      const bool odd_i = i % 2 == 1, odd_j = j % 2 == 1;
      double v;
      if (!odd_i && !odd_j) {
        v = f.at(I, J);
      } else if (odd_i && !odd_j) {
        v = 0.5 * (f.at(I, J) + f.at(I + 1, J));
      } else if (!odd_i && odd_j) {
        v = 0.5 * (f.at(I, J) + f.at(I, J + 1));
      } else {
        v = 0.25 * (f.at(I, J) + f.at(I + 1, J) + f.at(I, J + 1) + f.at(I + 1, J + 1));
      }
      out.at(i, j) = v;
    }
  }
  return out;
}

GridImage smooth_image(const GridImage& f) {
  const std::size_t n = f.side();
  if (n < 3) return f;
  auto mirror = [n](std::size_t k, int d) -> std::size_t {
    if (d < 0) return k == 0 ? 1 : k - 1;
    return k + 1 == n ? n - 2 : k + 1;
  };
  GridImage a(f.level()), b(f.level());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      a.at(i, j) = 0.25 * f.at(mirror(i, -1), j) + 0.5 * f.at(i, j) + 0.25 * f.at(mirror(i, 1), j);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      b.at(i, j) = 0.25 * a.at(i, mirror(j, -1)) + 0.5 * a.at(i, j) + 0.25 * a.at(i, mirror(j, 1));
    }
  }
  return b;
}

const GridImage& Pyramid::at(int level) const {
  if (levels.empty() || level < coarsest() || level > finest()) {
    throw SizeError("pyramid has no level " + std::to_string(level));
  }
  return levels[static_cast<std::size_t>(level - coarsest())];
}

Pyramid build_pyramid(const GridImage& f, int coarsest) {
  if (coarsest < 0 || coarsest > f.level()) {
    throw SizeError("coarsest level " + std::to_string(coarsest) + " outside [0, " +
                    std::to_string(f.level()) + "]");
  }
  Pyramid p;
  p.levels.resize(static_cast<std::size_t>(f.level() - coarsest + 1));
  p.levels.back() = f;
  for (std::size_t k = p.levels.size() - 1; k > 0; --k) p.levels[k - 1] = restrict_image(p.levels[k]);
  return p;
}

}  // namespace scanforge::reg

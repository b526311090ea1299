#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "scanforge/registration/grid_image.hpp"
#include "scanforge/registration/rigid.hpp"

namespace scanforge::reg {

using Gradient = std::array<double, 3>;  // (d alpha, d t0, d t1)

struct GradientFlowConfig {
  double epsilon = 1e-7;  ///< stop once an accepted step lowers the energy by less
  int iter_max = 200;     ///< per level
  double tau_max = 1.0;
  double sigma = 0.5;
  double lambda = 0.1;

  /// Throws ConfigError.
  void validate() const;
};

struct MultilevelConfig {
  int m0 = 6;
  int m1 = 8;
  /// Smoothing passes on the finest level before restriction. Damps the
  /// bias bilinear interpolation of noise puts on sub-pixel shifts.
  int presmooth = 2;

  void validate() const;
};

struct EnergyEval {
  double energy = 0.0;
  double ncc = 0.0;
  Gradient gradient{0.0, 0.0, 0.0};
  double clamped_fraction = 0.0;
};

/// Precomputed reference statistics for repeated evaluations of
/// E[phi] = -NCC(r, t o phi) + 2 lambda (1 - cos alpha).
///
/// The regularizer is the rigid form of the Dirichlet term: D(phi(x) - x)
/// is R(alpha) - I everywhere, so the integral collapses to
/// lambda/2 |Ω| ||R - I||_F^2.
class EnergyProblem {
 public:
  /// Keeps references to r and t; both must outlive the problem.
  EnergyProblem(const GridImage& r, const GridImage& t, double lambda);

  EnergyEval evaluate(const RigidDeformation& phi, bool with_gradient = true) const;
  double energy(const RigidDeformation& phi) const { return evaluate(phi, false).energy; }

  int level() const noexcept { return r_.level(); }
  double lambda() const noexcept { return lambda_; }

 private:
  const GridImage& r_;
  const GridImage& t_;
  double lambda_;
  std::vector<double> weights_;
  std::vector<double> r_centered_;  // w * (r - mean r)
  double r_std_ = 0.0;
  double r_centered_sum_ = 0.0;
  double t_shift_ = 0.0;  // subtracted from samples to keep the one-pass variance accurate
};

double energy(const GridImage& r, const GridImage& t, const RigidDeformation& phi, double lambda);
Gradient energy_gradient(const GridImage& r, const GridImage& t, const RigidDeformation& phi,
                         double lambda);
double regularizer(double alpha, double lambda);

struct ArmijoResult {
  bool accepted = false;
  bool ascent = false;  ///< slope0 >= 0, nothing tried
  double tau = 0.0;
  double value = 0.0;  ///< Phi(tau) when accepted
  int evaluations = 0;
};

/// Step selection with widening along a line Phi(tau).
///
/// Accepts tau when (Phi(tau) - Phi(0)) / (Phi'(0) tau) > sigma and
/// tau <= tau_max. Starting from tau_start the step doubles while the test
/// keeps passing (capped at tau_max) and halves on failure down to
/// 1e-12 tau_max.
ArmijoResult armijo_search(const std::function<double(double)>& phi, double phi0, double slope0,
                           double tau_start, const GradientFlowConfig& cfg);

inline bool armijo_condition(double phi0, double phi_tau, double slope0, double tau,
                             double sigma) {
  return (phi_tau - phi0) / (slope0 * tau) > sigma;
}

enum class StopReason : unsigned char { Converged, IterationLimit, StepFailure, ZeroGradient };
std::string_view to_string(StopReason reason) noexcept;

struct GradientFlowResult {
  RigidDeformation phi;
  std::vector<double> energies;  ///< energy of every accepted iterate, starting with phi0
  std::vector<double> taus;
  int iterations = 0;
  StopReason stop = StopReason::IterationLimit;
  double clamped_fraction = 0.0;  ///< at the returned phi
};

GradientFlowResult gradient_flow(const GridImage& r, const GridImage& t,
                                 const RigidDeformation& phi0, const GradientFlowConfig& cfg);

struct RegistrationResult {
  RigidDeformation phi;
  std::vector<GradientFlowResult> levels;  ///< coarsest first
};

/// Restrict f to m1, pre-smooth, then restrict down to m0.
Pyramid registration_pyramid(const GridImage& f, const MultilevelConfig& ml);

/// Function A: multilevel gradient flow from m0 to m1 minimizing
/// -NCC(r, t o phi). The pyramids must cover [m0, m1].
RegistrationResult register_pyramids(const Pyramid& r, const Pyramid& t,
                                     const RigidDeformation& phi0, const MultilevelConfig& ml,
                                     const GradientFlowConfig& gf);

/// Function A on images at level >= m1 (finer images are restricted first).
/// Returns phi with f_j o phi ~ f_i.
RigidDeformation register_pair(const GridImage& f_i, const GridImage& f_j,
                               const RigidDeformation& phi0 = RigidDeformation::identity(),
                               const MultilevelConfig& ml = {}, const GradientFlowConfig& gf = {});

}  // namespace scanforge::reg

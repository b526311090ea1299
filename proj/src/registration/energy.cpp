#include "scanforge/registration/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scanforge/error.hpp"

namespace scanforge::reg {

void GradientFlowConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (iter_max < 0) throw ConfigError("iter_max must be >= 0");
  if (!(tau_max > 0.0)) throw ConfigError("tau_max must be > 0");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
}

void MultilevelConfig::validate() const {
  if (m0 < 0) throw ConfigError("m0 must be >= 0");
  if (!(m0 < m1)) {
    throw ConfigError("multilevel needs m0 < m1, got m0=" + std::to_string(m0) +
                      " m1=" + std::to_string(m1));
  }
  side_for_level(m1);
  if (presmooth < 0) throw ConfigError("presmooth must be >= 0");
}

double regularizer(double alpha, double lambda) { return 2.0 * lambda * (1.0 - std::cos(alpha)); }

EnergyProblem::EnergyProblem(const GridImage& r, const GridImage& t, double lambda)
    : r_(r), t_(t), lambda_(lambda), weights_(quadrature_weights(r.level())) {
  if (r.level() != t.level()) {
    throw SizeError("reference and template levels differ: " + std::to_string(r.level()) +
                    " vs " + std::to_string(t.level()));
  }
  const double mean = image_mean(r);
  r_std_ = image_std(r);
  if (!(r_std_ > 1e-12 * std::max(1.0, std::fabs(mean)))) {
    throw DegenerateImageError("reference image has zero standard deviation");
  }
  r_centered_.resize(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) r_centered_[k] = weights_[k] * (r.values()[k] - mean);
  t_shift_ = image_mean(t);
  for (double v : r_centered_) r_centered_sum_ += v;
}

EnergyEval EnergyProblem::evaluate(const RigidDeformation& phi, bool with_gradient) const {
  const double c = std::cos(phi.alpha);
  const double s = std::sin(phi.alpha);
  const std::size_t side = r_.side();
  const double h = r_.spacing();

  // Weighted sums of g = t(phi(x)) - shift and of its parameter derivatives.
  double sg = 0.0, sgg = 0.0, srg = 0.0;
  double sgp[3] = {0, 0, 0}, sggp[3] = {0, 0, 0}, srgp[3] = {0, 0, 0};
  std::size_t clamped = 0;

  for (std::size_t j = 0; j < side; ++j) {
    const double x1 = static_cast<double>(j) * h;
    for (std::size_t i = 0; i < side; ++i) {
      const double x0 = static_cast<double>(i) * h;
      const std::size_t k = j * side + i;
      const Point y{c * x0 - s * x1 + phi.t[0], s * x0 + c * x1 + phi.t[1]};
      const Sample smp = sample(t_, y);
      clamped += smp.clamped ? 1 : 0;
      const double g = smp.value - t_shift_;
      const double w = weights_[k];
      const double wr = r_centered_[k];
      sg += w * g;
      sgg += w * g * g;
      srg += wr * g;
      if (with_gradient) {
        const double gp[3] = {smp.d0 * (-s * x0 - c * x1) + smp.d1 * (c * x0 - s * x1), smp.d0,
                              smp.d1};
        for (int p = 0; p < 3; ++p) {
          sgp[p] += w * gp[p];
          sggp[p] += w * g * gp[p];
          srgp[p] += wr * gp[p];
        }
      }
    }
  }

  const double var = sgg - sg * sg;
  const double g_std = var > 0.0 ? std::sqrt(var) : 0.0;
  if (!(g_std > 1e-12 * std::max(1.0, std::fabs(sg + t_shift_)))) {
    throw DegenerateImageError("deformed template has zero standard deviation");
  }
  const double a = srg - sg * r_centered_sum_;
  EnergyEval ev;
  ev.ncc = a / (r_std_ * g_std);
  ev.energy = -ev.ncc + regularizer(phi.alpha, lambda_);
  ev.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(r_.size());
  if (with_gradient) {
    for (int p = 0; p < 3; ++p) {
      const double da = srgp[p] - sgp[p] * r_centered_sum_;
      const double dstd = (sggp[p] - sg * sgp[p]) / g_std;
      const double dncc = (da / g_std - a * dstd / (g_std * g_std)) / r_std_;
      ev.gradient[static_cast<std::size_t>(p)] = -dncc;
    }
    ev.gradient[0] += 2.0 * lambda_ * std::sin(phi.alpha);
  }
  return ev;
}

double energy(const GridImage& r, const GridImage& t, const RigidDeformation& phi, double lambda) {
  return EnergyProblem(r, t, lambda).evaluate(phi, false).energy;
}

Gradient energy_gradient(const GridImage& r, const GridImage& t, const RigidDeformation& phi,
                         double lambda) {
  return EnergyProblem(r, t, lambda).evaluate(phi, true).gradient;
}

ArmijoResult armijo_search(const std::function<double(double)>& phi, double phi0, double slope0,
                           double tau_start, const GradientFlowConfig& cfg) {
  ArmijoResult res;
  if (!(slope0 < 0.0)) {
    res.ascent = true;
    return res;
  }
  const double tau_min = 1e-12 * cfg.tau_max;
  auto passes = [&](double tau, double value) {
    return std::isfinite(value) && armijo_condition(phi0, value, slope0, tau, cfg.sigma);
  };
  double tau = tau_start > 0.0 ? std::min(tau_start, cfg.tau_max) : cfg.tau_max / 8.0;
  tau = std::max(tau, tau_min);
  double value = phi(tau);
  ++res.evaluations;
  if (passes(tau, value)) {
    while (tau < cfg.tau_max) {
      const double wider = std::min(2.0 * tau, cfg.tau_max);
      const double v = phi(wider);
      ++res.evaluations;
      if (!passes(wider, v)) break;
      tau = wider;
      value = v;
    }
    res.accepted = true;
  } else {
    while (true) {
      tau *= 0.5;
      if (tau < tau_min) return res;
      value = phi(tau);
      ++res.evaluations;
      if (passes(tau, value)) break;
    }
    res.accepted = true;
  }
  res.tau = tau;
  res.value = value;
  return res;
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::IterationLimit: return "iteration-limit";
    case StopReason::StepFailure: return "step-failure";
    case StopReason::ZeroGradient: return "zero-gradient";
  }
  return "?";
}

namespace {

RigidDeformation step(const RigidDeformation& phi, const Gradient& g, double tau) {
  return {phi.alpha - tau * g[0], {phi.t[0] - tau * g[1], phi.t[1] - tau * g[2]}};
}

}  // namespace

GradientFlowResult gradient_flow(const GridImage& r, const GridImage& t,
                                 const RigidDeformation& phi0, const GradientFlowConfig& cfg) {
  cfg.validate();
  const EnergyProblem problem(r, t, cfg.lambda);
  GradientFlowResult res;
  res.phi = phi0;
  EnergyEval ev = problem.evaluate(phi0);
  res.energies.push_back(ev.energy);
  res.clamped_fraction = ev.clamped_fraction;
  double tau = cfg.tau_max / 8.0;
  res.stop = StopReason::IterationLimit;
  for (int it = 0; it < cfg.iter_max; ++it) {
    const Gradient& g = ev.gradient;
    const double gg = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    if (gg == 0.0) {
      res.stop = StopReason::ZeroGradient;
      break;
    }
    const RigidDeformation base = res.phi;
    const ArmijoResult ar = armijo_search(
        [&](double s) { return problem.energy(step(base, g, s)); }, ev.energy, -gg, tau, cfg);
    if (!ar.accepted) {
      res.stop = StopReason::StepFailure;
      break;
    }
    tau = ar.tau;
    res.phi = step(base, g, tau);
    const double previous = ev.energy;
    ev = problem.evaluate(res.phi);
    res.energies.push_back(ev.energy);
    res.taus.push_back(tau);
    res.clamped_fraction = ev.clamped_fraction;
    ++res.iterations;
    if (previous - ev.energy < cfg.epsilon) {
      res.stop = StopReason::Converged;
      break;
    }
  }
  return res;
}

RegistrationResult register_pyramids(const Pyramid& r, const Pyramid& t,
                                     const RigidDeformation& phi0, const MultilevelConfig& ml,
                                     const GradientFlowConfig& gf) {
  ml.validate();
  RegistrationResult res;
  res.phi = phi0;
  for (int level = ml.m0; level <= ml.m1; ++level) {
    res.levels.push_back(gradient_flow(r.at(level), t.at(level), res.phi, gf));
    res.phi = res.levels.back().phi;
  }
  return res;
}

namespace {

GridImage at_level(const GridImage& f, int level) {
  if (f.level() < level) {
    throw SizeError("image level " + std::to_string(f.level()) + " is coarser than m1 = " +
                    std::to_string(level));
  }
  GridImage out = f;
  while (out.level() > level) out = restrict_image(out);
  return out;
}

}  // namespace

Pyramid registration_pyramid(const GridImage& f, const MultilevelConfig& ml) {
  ml.validate();
  GridImage top = at_level(f, ml.m1);
  for (int k = 0; k < ml.presmooth; ++k) top = smooth_image(top);
  return build_pyramid(top, ml.m0);
}

RigidDeformation register_pair(const GridImage& f_i, const GridImage& f_j,
                               const RigidDeformation& phi0, const MultilevelConfig& ml,
                               const GradientFlowConfig& gf) {
  const Pyramid r = registration_pyramid(f_i, ml);
  const Pyramid t = registration_pyramid(f_j, ml);
  return register_pyramids(r, t, phi0, ml, gf).phi;
}

}  // namespace scanforge::reg

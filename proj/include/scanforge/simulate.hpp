#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "scanforge/cost.hpp"
#include "scanforge/plan.hpp"

namespace scanforge {

/// Per-application operator cost and message latency, in simulated time units.
struct CostModel {
  enum class Distribution : std::uint8_t { Constant, Uniform, LogNormal, Trace };

  Distribution distribution = Distribution::Constant;
  double c = 1.0;
  double lo = 0.0;
  double hi = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<double> trace;
  double latency = 0.0;
  std::uint64_t seed = 0;

  static CostModel constant(double c, double latency = 0.0);
  static CostModel uniform(double lo, double hi, std::uint64_t seed, double latency = 0.0);
  static CostModel lognormal(double mu, double sigma, std::uint64_t seed, double latency = 0.0);
  static CostModel from_trace(std::vector<double> costs, std::uint64_t seed,
                              double latency = 0.0);

  /// Throws ConfigError on non-positive or otherwise unusable parameters.
  void validate() const;
  double mean() const;
};

std::string_view to_string(CostModel::Distribution d) noexcept;

/// Deterministic cost stream; one per simulated worker.
class CostSampler {
 public:
  CostSampler(const CostModel& model, std::uint64_t stream);
  double next();

 private:
  CostModel model_;
  std::mt19937_64 rng_;
};

struct TimelineEvent {
  enum class Kind : std::uint8_t { Apply, Wait, ProbeHit };
  std::size_t worker = 0;
  Stage stage = Stage::Local1;
  Kind kind = Kind::Apply;
  double start = 0.0;
  double end = 0.0;
};

struct SimReport {
  double makespan = 0.0;
  std::vector<double> finish;
  std::vector<double> idle;
  /// Idle time spent in blocking receives of the global stage.
  std::vector<double> global_idle;
  std::vector<StageCounts> applications;
  std::vector<TimelineEvent> timeline;

  std::uint64_t total_applications() const;
  StageCounts stage_totals() const;
  void write_timeline_csv(std::ostream& out) const;
};

struct SimOptions {
  bool record_timeline = true;
};

/// Discrete-event replay of a plan. Each worker advances its own clock;
/// a receive completes at max(clock, send time + latency).
SimReport simulate(const DistributedPlan& plan, const CostModel& model,
                   const SimOptions& options = {});
SimReport simulate(StrategyVariant variant, ScanKind global_kind, std::size_t n, std::size_t p,
                   const CostModel& model, const SimOptions& options = {});

/// Time of a serial scan of n elements under the same cost model, drawn from
/// a stream no simulated worker uses.
double simulate_serial(std::size_t n, const CostModel& model);

struct LogNormalFit {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Maximum-likelihood fit on log-samples; samples must be positive.
LogNormalFit fit_lognormal(const std::vector<double>& samples);

}  // namespace scanforge

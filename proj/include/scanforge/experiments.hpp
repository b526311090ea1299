#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "scanforge/cost.hpp"
#include "scanforge/simulate.hpp"

namespace scanforge {

struct Timing {
  double t_serial = 0.0;
  double t_parallel = 0.0;
};

/// Produces one serial/parallel measurement for (n, p, repetition).
using Runner = std::function<Timing(std::size_t n, std::size_t p, std::size_t rep)>;

struct SpeedupStats {
  double speedup = 0.0;
  double sigma = 0.0;
};

/// SP = mean(t1)/mean(t2) and σ_SP = SP·sqrt((σ1/t1)² + (σ2/t2)²) with sample
/// standard deviations. Throws Error if the repetition counts differ.
SpeedupStats speedup_stats(const std::vector<double>& t_serial,
                           const std::vector<double>& t_parallel);

double mean(const std::vector<double>& xs);
/// Sample standard deviation; 0 for fewer than two values.
double sample_stddev(const std::vector<double>& xs);

struct ScalingRow {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> t_serial;
  std::vector<double> t_parallel;
  SpeedupStats stats;
};

struct ScalingTable {
  std::string variant;
  std::string kind;
  std::vector<ScalingRow> rows;

  /// variant,kind,n,p,rep,t_serial,t_parallel,speedup,sigma; one row per
  /// repetition (sigma empty) followed by a "mean" row per p.
  void write_csv(std::ostream& out) const;
};

inline constexpr const char* kScalingCsvHeader =
    "variant,kind,n,p,rep,t_serial,t_parallel,speedup,sigma";

ScalingTable strong_scaling_experiment(std::size_t n, const std::vector<std::size_t>& p_list,
                                       std::size_t repetitions, const Runner& runner);

struct WeakRow {
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> t_parallel;
  double mean_time = 0.0;
  double sigma = 0.0;
  /// Percentage growth of mean_time relative to the first (smallest) p.
  double growth_pct = 0.0;
};

struct WeakTable {
  std::string variant;
  std::string kind;
  std::vector<WeakRow> rows;

  void write_csv(std::ostream& out) const;
};

inline constexpr const char* kWeakCsvHeader =
    "variant,kind,k,n,p,rep,t_parallel,sigma,growth_pct";

/// n = k_per_worker * p for every p; p_list is sorted ascending first.
WeakTable weak_scaling_experiment(std::size_t k_per_worker, std::vector<std::size_t> p_list,
                                  std::size_t repetitions, const Runner& runner);

/// Runner backed by the discrete-event simulator. Repetition r reseeds the
/// cost model with seed + r.
Runner simulated_runner(StrategyVariant variant, ScanKind global_kind, CostModel model);

}  // namespace scanforge

#include "scanforge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "scanforge/error.hpp"

namespace scanforge {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

SpeedupStats speedup_stats(const std::vector<double>& t_serial,
                           const std::vector<double>& t_parallel) {
  if (t_serial.size() != t_parallel.size()) {
    throw Error("repetition counts differ: " + std::to_string(t_serial.size()) + " serial vs " +
                std::to_string(t_parallel.size()) + " parallel");
  }
  if (t_serial.empty()) throw Error("no repetitions");
  const double t1 = mean(t_serial);
  const double t2 = mean(t_parallel);
  const double s1 = sample_stddev(t_serial);
  const double s2 = sample_stddev(t_parallel);
  SpeedupStats r;
  r.speedup = t1 / t2;
  r.sigma = r.speedup * std::sqrt((s1 / t1) * (s1 / t1) + (s2 / t2) * (s2 / t2));
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ScalingTable::write_csv(std::ostream& out) const {
  out << kScalingCsvHeader << '\n';
  for (const ScalingRow& row : rows) {
    const std::string prefix =
        variant + ',' + kind + ',' + std::to_string(row.n) + ',' + std::to_string(row.p) + ',';
    for (std::size_t r = 0; r < row.t_serial.size(); ++r) {
      out << prefix << r << ',' << fmt(row.t_serial[r]) << ',' << fmt(row.t_parallel[r]) << ','
          << fmt(row.t_serial[r] / row.t_parallel[r]) << ",\n";
    }
    out << prefix << "mean," << fmt(mean(row.t_serial)) << ',' << fmt(mean(row.t_parallel)) << ','
        << fmt(row.stats.speedup) << ',' << fmt(row.stats.sigma) << '\n';
  }
}

ScalingTable strong_scaling_experiment(std::size_t n, const std::vector<std::size_t>& p_list,
                                       std::size_t repetitions, const Runner& runner) {
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  ScalingTable table;
  for (std::size_t p : p_list) {
    ScalingRow row;
    row.n = n;
    row.p = p;
    for (std::size_t r = 0; r < repetitions; ++r) {
      const Timing t = runner(n, p, r);
      row.t_serial.push_back(t.t_serial);
      row.t_parallel.push_back(t.t_parallel);
    }
    row.stats = speedup_stats(row.t_serial, row.t_parallel);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void WeakTable::write_csv(std::ostream& out) const {
  out << kWeakCsvHeader << '\n';
  for (const WeakRow& row : rows) {
    const std::string prefix = variant + ',' + kind + ',' + std::to_string(row.k) + ',' +
                               std::to_string(row.n) + ',' + std::to_string(row.p) + ',';
    for (std::size_t r = 0; r < row.t_parallel.size(); ++r) {
      out << prefix << r << ',' << fmt(row.t_parallel[r]) << ",,\n";
    }
    out << prefix << "mean," << fmt(row.mean_time) << ',' << fmt(row.sigma) << ','
        << fmt(row.growth_pct) << '\n';
  }
}

WeakTable weak_scaling_experiment(std::size_t k_per_worker, std::vector<std::size_t> p_list,
                                  std::size_t repetitions, const Runner& runner) {
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  if (k_per_worker == 0) throw ConfigError("work per worker must be positive");
  std::sort(p_list.begin(), p_list.end());
  WeakTable table;
  for (std::size_t p : p_list) {
    WeakRow row;
    row.k = k_per_worker;
    row.p = p;
    row.n = k_per_worker * p;
    for (std::size_t r = 0; r < repetitions; ++r) {
      row.t_parallel.push_back(runner(row.n, p, r).t_parallel);
    }
    row.mean_time = mean(row.t_parallel);
    row.sigma = sample_stddev(row.t_parallel);
    table.rows.push_back(std::move(row));
  }
  if (!table.rows.empty()) {
    const double base = table.rows.front().mean_time;
    for (WeakRow& row : table.rows) row.growth_pct = (row.mean_time / base - 1.0) * 100.0;
  }
  return table;
}

Runner simulated_runner(StrategyVariant variant, ScanKind global_kind, CostModel model) {
  model.validate();
  return [variant, global_kind, model](std::size_t n, std::size_t p, std::size_t rep) {
    CostModel m = model;
    m.seed = model.seed + rep;
    SimOptions opts;
    opts.record_timeline = false;
    Timing t;
    t.t_serial = simulate_serial(n, m);
    t.t_parallel = simulate(variant, global_kind, n, p, m, opts).makespan;
    return t;
  };
}

}  // namespace scanforge

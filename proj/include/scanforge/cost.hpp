#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "scanforge/scan_kind.hpp"

namespace scanforge {

enum class StrategyVariant : std::uint8_t {
  GeneralExclusive,
  GeneralInclusive,
  GeneralExclusiveOptimized,
  Alternative,
};

inline constexpr StrategyVariant kAllVariants[] = {
    StrategyVariant::GeneralExclusive, StrategyVariant::GeneralInclusive,
    StrategyVariant::GeneralExclusiveOptimized, StrategyVariant::Alternative};

std::string_view to_string(StrategyVariant variant) noexcept;
/// Canonical names plus "general", "inclusive-optimized", "optimized".
std::optional<StrategyVariant> parse_variant(std::string_view name);

enum class GlobalMode : std::uint8_t { Exclusive, Inclusive };

/// Global-stage mode each variant consumes.
constexpr GlobalMode global_mode(StrategyVariant v) noexcept {
  return v == StrategyVariant::GeneralInclusive ? GlobalMode::Inclusive : GlobalMode::Exclusive;
}

struct CostFigures {
  std::uint64_t span = 0;
  std::uint64_t work = 0;
};

/// Table values; n must be a power of two and at least 2.
std::uint64_t span(ScanKind kind, std::size_t n);
std::uint64_t work(ScanKind kind, std::size_t n);
inline CostFigures cost(ScanKind kind, std::size_t n) { return {span(kind, n), work(kind, n)}; }

/// Critical path of the global stage over p workers, each worker executing
/// its share of the network sequentially, one unit per application.
std::uint64_t global_stage_span(ScanKind kind, std::size_t p, GlobalMode mode);
/// Applications in the global stage; exclusive mode drops computations that
/// only feed the last lane.
std::uint64_t global_stage_work(ScanKind kind, std::size_t p, GlobalMode mode);

/// Per-worker time at which the global stage is finished, assuming all
/// workers enter it simultaneously. Element w belongs to worker w.
std::vector<std::uint64_t> global_stage_finish_times(ScanKind kind, std::size_t p,
                                                     GlobalMode mode);

struct DistributedCostFigures {
  std::size_t n = 0;
  std::size_t p = 0;
  std::uint64_t local1_span = 0;
  std::uint64_t global_span = 0;
  std::uint64_t local2_span = 0;
  std::uint64_t total_span = 0;
  std::uint64_t total_work = 0;
  /// False when p does not divide n; total_span is then an upper bound.
  bool even = true;
};

DistributedCostFigures distributed_span(ScanKind global_kind, std::size_t n, std::size_t p,
                                        StrategyVariant variant);

/// (n-1) / total_span.
double theoretical_speedup(ScanKind global_kind, std::size_t n, std::size_t p,
                           StrategyVariant variant);

/// Closed-form totals as printed for the serial, Blelloch, Kogge-Stone and
/// Sklansky global kinds; empty for Brent-Kung.
std::optional<double> reference_total_span(ScanKind global_kind, double n, double p);

struct OptimalWorkers {
  double p0 = 0.0;
  /// p0 lies above n/2: on the power-of-two grid nothing beats p = n.
  bool saturates = false;
};

OptimalWorkers optimal_workers(ScanKind global_kind, std::size_t n);

std::int64_t snir_deficiency(std::size_t size, std::size_t depth, std::size_t n);

void write_cost_csv_header(std::ostream& out);
void write_cost_csv_row(std::ostream& out, ScanKind kind, StrategyVariant variant,
                        const DistributedCostFigures& f);

}  // namespace scanforge

#include "scanforge/cost.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>

#include "scanforge/error.hpp"
#include "scanforge/network.hpp"
#include "scanforge/partition.hpp"

namespace scanforge {

std::string_view to_string(StrategyVariant variant) noexcept {
  switch (variant) {
    case StrategyVariant::GeneralExclusive: return "general-exclusive";
    case StrategyVariant::GeneralInclusive: return "general-inclusive";
    case StrategyVariant::GeneralExclusiveOptimized: return "general-exclusive-optimized";
    case StrategyVariant::Alternative: return "alternative";
  }
  return "?";
}

std::optional<StrategyVariant> parse_variant(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (c == '_' || c == ' ') c = '-';
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "general-exclusive" || s == "general") return StrategyVariant::GeneralExclusive;
  if (s == "general-inclusive" || s == "inclusive-optimized" || s == "inclusive") {
    return StrategyVariant::GeneralInclusive;
  }
  if (s == "general-exclusive-optimized" || s == "optimized" || s == "exclusive-optimized") {
    return StrategyVariant::GeneralExclusiveOptimized;
  }
  if (s == "alternative" || s == "reduce-then-scan") return StrategyVariant::Alternative;
  return std::nullopt;
}

namespace {

void require_table_width(std::size_t n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw SizeError("width must be a power of two >= 2, got " + std::to_string(n));
  }
}

void require_global_width(ScanKind kind, std::size_t p) {
  if (p == 0) throw SizeError("worker count must be positive");
  if (kind != ScanKind::Serial && !is_power_of_two(p)) {
    throw SizeError(std::string(to_string(kind)) + " global stage needs a power-of-two worker "
                    "count for closed-form costs, got " + std::to_string(p));
  }
}

}  // namespace

std::uint64_t span(ScanKind kind, std::size_t n) {
  require_table_width(n);
  const std::uint64_t lg = ilog2(n);
  switch (kind) {
    case ScanKind::Serial: return n - 1;
    case ScanKind::Blelloch: return 2 * lg;
    case ScanKind::BrentKung: return 2 * lg - 1;
    case ScanKind::KoggeStone: return lg;
    case ScanKind::Sklansky: return lg;
  }
  return 0;
}

std::uint64_t work(ScanKind kind, std::size_t n) {
  require_table_width(n);
  const std::uint64_t lg = ilog2(n);
  const std::uint64_t N = n;
  switch (kind) {
    case ScanKind::Serial: return N - 1;
    case ScanKind::Blelloch: return 2 * (N - 1);
    case ScanKind::BrentKung: return 2 * N - lg - 2;
    case ScanKind::KoggeStone: return N * lg - N + 1;
    case ScanKind::Sklansky: return N / 2 * lg;
  }
  return 0;
}

std::uint64_t global_stage_span(ScanKind kind, std::size_t p, GlobalMode mode) {
  require_global_width(kind, p);
  const bool incl = mode == GlobalMode::Inclusive;
  const std::uint64_t P = p;
  const std::uint64_t lg = ilog2(p);
  switch (kind) {
    case ScanKind::Serial:
      if (incl) return P - 1;
      return P >= 2 ? P - 2 : 0;
    case ScanKind::Blelloch: return 2 * lg;
    case ScanKind::KoggeStone:
    case ScanKind::Sklansky:
      if (incl) return lg;
      return P <= 2 ? 0 : lg;
    case ScanKind::BrentKung:
      if (P == 1) return 0;
      if (P == 2) return incl ? 1 : 0;
      return 2 * lg - 2;
  }
  return 0;
}

std::uint64_t global_stage_work(ScanKind kind, std::size_t p, GlobalMode mode) {
  require_global_width(kind, p);
  if (p == 1) return 0;
  const std::uint64_t full = kind == ScanKind::Serial ? p - 1 : work(kind, p);
  if (mode == GlobalMode::Inclusive || kind == ScanKind::Blelloch) return full;
  // Exclusive mode on an inclusive network: every application on the last
  // lane is dropped, one per stage of that lane.
  const std::uint64_t lg = ilog2(p);
  switch (kind) {
    case ScanKind::Serial: return full - 1;
    case ScanKind::BrentKung:
    case ScanKind::KoggeStone:
    case ScanKind::Sklansky: return full - lg;
    case ScanKind::Blelloch: break;
  }
  return full;
}

std::vector<std::uint64_t> global_stage_finish_times(ScanKind kind, std::size_t p,
                                                     GlobalMode mode) {
  require_global_width(kind, p);
  std::vector<std::uint64_t> ready(p, 0);
  if (p == 1) return ready;
  ScanNetwork net = build_network(kind, p);
  const bool excl_from_incl = !is_exclusive(kind) && mode == GlobalMode::Exclusive;
  if (excl_from_incl) {
    std::vector<bool> required(p, true);
    required[p - 1] = false;
    net = prune_network(net, required);
  }
  std::vector<std::uint64_t> next;
  for (const Step& step : net.steps) {
    next = ready;
    for (const Node& node : step) {
      switch (node.op) {
        case NodeOp::Combine:
        case NodeOp::CombineReversed:
          next[node.dst] = std::max(ready[node.dst], ready[node.src]) + 1;
          break;
        case NodeOp::Copy: next[node.dst] = std::max(ready[node.dst], ready[node.src]); break;
        case NodeOp::Reset: break;
      }
    }
    ready.swap(next);
  }

  std::vector<std::uint64_t> finish(ready);
  if (is_exclusive(kind)) {
    if (mode == GlobalMode::Inclusive) {
      // Worker w > 0 takes its inclusive value from the exclusive value of w+1.
      for (std::size_t w = 1; w + 1 < p; ++w) finish[w] = std::max(ready[w], ready[w + 1]);
    }
  } else {
    // Worker w also waits for the inclusive value of worker w-1.
    for (std::size_t w = 1; w < p; ++w) finish[w] = std::max(finish[w], ready[w - 1]);
  }
  return finish;
}

namespace {

std::uint64_t clamp_sub(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : 0; }

/// Stage-two applications of worker w holding k elements.
std::uint64_t local2_count(StrategyVariant v, std::size_t w, std::uint64_t k) {
  switch (v) {
    case StrategyVariant::GeneralExclusive:
    case StrategyVariant::GeneralExclusiveOptimized: return w == 0 ? 0 : k;
    case StrategyVariant::GeneralInclusive: return w == 0 ? 0 : clamp_sub(k, 1);
    case StrategyVariant::Alternative: return k;
  }
  return 0;
}

}  // namespace

DistributedCostFigures distributed_span(ScanKind global_kind, std::size_t n, std::size_t p,
                                        StrategyVariant variant) {
  const Partition part = partition(n, p);
  DistributedCostFigures f;
  f.n = n;
  f.p = p;
  f.even = part.even();
  if (p == 1) {
    f.local1_span = n - 1;
    f.total_span = n - 1;
    f.total_work = n - 1;
    return f;
  }
  const GlobalMode mode = global_mode(variant);
  const std::uint64_t kmax = part.max_block();
  f.local1_span = kmax - 1;
  f.global_span = global_stage_span(global_kind, p, mode);
  std::uint64_t ls2_work = 0;
  for (std::size_t w = 0; w < p; ++w) {
    const std::uint64_t c = local2_count(variant, w, part.blocks[w].size());
    if (w > 0 || variant == StrategyVariant::Alternative) f.local2_span = std::max(f.local2_span, c);
    ls2_work += c;
  }
  if (variant == StrategyVariant::GeneralExclusiveOptimized && f.even) {
    // Middle workers skip their last application when the successor's
    // exclusive value is already there; with unit costs that is decided by
    // global-stage finish times alone.
    const auto finish = global_stage_finish_times(global_kind, p, mode);
    for (std::size_t w = 1; w + 1 < p; ++w) {
      if (finish[w + 1] <= finish[w] + (kmax - 1)) --ls2_work;
    }
  }
  f.total_span = f.local1_span + f.global_span + f.local2_span;
  f.total_work = (n - p) + global_stage_work(global_kind, p, mode) + ls2_work;
  return f;
}

double theoretical_speedup(ScanKind global_kind, std::size_t n, std::size_t p,
                           StrategyVariant variant) {
  const auto f = distributed_span(global_kind, n, p, variant);
  if (f.total_span == 0) return 1.0;
  return static_cast<double>(n - 1) / static_cast<double>(f.total_span);
}

std::optional<double> reference_total_span(ScanKind global_kind, double n, double p) {
  const double k = n / p;
  switch (global_kind) {
    case ScanKind::Serial: return 2.0 * k + p - 3.0;
    case ScanKind::Blelloch: return 2.0 * k - 1.0 + 2.0 * std::log2(p);
    case ScanKind::KoggeStone:
    case ScanKind::Sklansky: return 2.0 * k - 2.0 + std::log2(p);
    case ScanKind::BrentKung: return std::nullopt;
  }
  return std::nullopt;
}

OptimalWorkers optimal_workers(ScanKind global_kind, std::size_t n) {
  const double N = static_cast<double>(n);
  OptimalWorkers r;
  switch (global_kind) {
    case ScanKind::Serial: r.p0 = std::sqrt(2.0 * N); break;
    case ScanKind::Blelloch:
    case ScanKind::BrentKung: r.p0 = N * std::log(2.0); break;
    case ScanKind::KoggeStone:
    case ScanKind::Sklansky: r.p0 = 2.0 * N * std::log(2.0); break;
  }
  r.saturates = r.p0 > N / 2.0;
  return r;
}

std::int64_t snir_deficiency(std::size_t size, std::size_t depth, std::size_t n) {
  return 2 * static_cast<std::int64_t>(n) - 2 - static_cast<std::int64_t>(size) -
         static_cast<std::int64_t>(depth);
}

void write_cost_csv_header(std::ostream& out) {
  out << "kind,variant,N,P,local1,global,local2,total_span,total_work,speedup\n";
}

void write_cost_csv_row(std::ostream& out, ScanKind kind, StrategyVariant variant,
                        const DistributedCostFigures& f) {
  const double sp = f.total_span == 0 ? 1.0
                                      : static_cast<double>(f.n - 1) /
                                            static_cast<double>(f.total_span);
  const auto old = out.precision(17);
  out << to_string(kind) << ',' << to_string(variant) << ',' << f.n << ',' << f.p << ','
      << f.local1_span << ',' << f.global_span << ',' << f.local2_span << ',' << f.total_span
      << ',' << f.total_work << ',' << sp << '\n';
  out.precision(old);
}

}  // namespace scanforge

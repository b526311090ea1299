#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scanforge/error.hpp"
#include "scanforge/operator.hpp"
#include "scanforge/scan_kind.hpp"

namespace scanforge {

struct ScanOptions {
  /// Pad non-power-of-two input with identity elements instead of throwing.
  bool pad_to_power_of_two = false;
};

/// Optional side channel for executors.
struct ScanStats {
  /// Applications whose destination lane lies in the padding region.
  std::uint64_t padding_applications = 0;
};

template <typename T>
struct ExclusiveResult {
  std::vector<T> values;
  T total;
};

/// How Blelloch's exclusive output is turned into an inclusive one.
enum class BlellochInclusive : std::uint8_t {
  ExtraApplication,  ///< shift left and apply excl[n-1] ⊙ x[n-1]
  Exchange,          ///< shift left and take the captured total, no application
};

namespace detail {

template <typename T>
class LaneApplier {
 public:
  LaneApplier(const Operator<T>& op, std::size_t logical_width, ScanStats* stats)
      : op_(op), logical_width_(logical_width), stats_(stats) {}

  T operator()(std::size_t dst, const T& lhs, const T& rhs) const {
    if (stats_ != nullptr && dst >= logical_width_) ++stats_->padding_applications;
    return op_.apply(lhs, rhs);
  }

 private:
  const Operator<T>& op_;
  std::size_t logical_width_;
  ScanStats* stats_;
};

template <typename T>
std::vector<T> prepare_input(const std::vector<T>& data, const Operator<T>& op,
                             const ScanOptions& options, const char* algorithm) {
  if (data.empty()) throw EmptyInputError();
  if (is_power_of_two(data.size())) return data;
  if (!options.pad_to_power_of_two) {
    throw SizeError(std::string(algorithm) + " scan needs a power-of-two width, got " +
                    std::to_string(data.size()));
  }
  std::vector<T> padded(data);
  padded.resize(next_power_of_two(data.size()), op.identity());
  return padded;
}

}  // namespace detail

template <typename T>
std::vector<T> serial_scan(const std::vector<T>& data, const Operator<T>& op) {
  if (data.empty()) throw EmptyInputError();
  std::vector<T> out(data);
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = op.apply(out[i - 1], out[i]);
  return out;
}

template <typename T>
ExclusiveResult<T> blelloch_scan(const std::vector<T>& data, const Operator<T>& op,
                                 const ScanOptions& options = {}, ScanStats* stats = nullptr) {
  std::vector<T> a = detail::prepare_input(data, op, options, "blelloch");
  const detail::LaneApplier<T> ap(op, data.size(), stats);
  const std::size_t n = a.size();
  const std::size_t levels = ilog2(n);

  for (std::size_t i = 0; i < levels; ++i) {
    const std::size_t half = std::size_t{1} << i;
    for (std::size_t j = 2 * half - 1; j < n; j += 2 * half) a[j] = ap(j, a[j - half], a[j]);
  }
  T total = a[n - 1];
  a[n - 1] = op.identity();
  for (std::size_t i = levels; i-- > 0;) {
    const std::size_t half = std::size_t{1} << i;
    for (std::size_t j = 2 * half - 1; j < n; j += 2 * half) {
      T left = std::move(a[j - half]);
      a[j - half] = a[j];
      a[j] = ap(j, a[j], left);
    }
  }
  a.resize(data.size());
  return {std::move(a), std::move(total)};
}

template <typename T>
std::vector<T> brent_kung_scan(const std::vector<T>& data, const Operator<T>& op,
                               const ScanOptions& options = {}, ScanStats* stats = nullptr) {
  std::vector<T> a = detail::prepare_input(data, op, options, "brent-kung");
  const detail::LaneApplier<T> ap(op, data.size(), stats);
  const std::size_t n = a.size();
  const std::size_t levels = ilog2(n);

  for (std::size_t i = 0; i < levels; ++i) {
    const std::size_t half = std::size_t{1} << i;
    for (std::size_t j = 2 * half - 1; j < n; j += 2 * half) a[j] = ap(j, a[j - half], a[j]);
  }
  for (std::size_t i = levels < 2 ? 0 : levels - 1; i-- > 0;) {
    const std::size_t half = std::size_t{1} << i;
    for (std::size_t j = 2 * half; j < n - 1; j += 2 * half) {
      const std::size_t dst = j + half - 1;
      a[dst] = ap(dst, a[j - 1], a[dst]);
    }
  }
  a.resize(data.size());
  return a;
}

template <typename T>
std::vector<T> kogge_stone_scan(const std::vector<T>& data, const Operator<T>& op,
                                const ScanOptions& options = {}, ScanStats* stats = nullptr) {
  std::vector<T> a = detail::prepare_input(data, op, options, "kogge-stone");
  const detail::LaneApplier<T> ap(op, data.size(), stats);
  const std::size_t n = a.size();
  std::vector<T> next;
  for (std::size_t d = 1; d < n; d <<= 1) {
    next = a;
    for (std::size_t j = d; j < n; ++j) next[j] = ap(j, a[j - d], a[j]);
    a.swap(next);
  }
  a.resize(data.size());
  return a;
}

template <typename T>
std::vector<T> sklansky_scan(const std::vector<T>& data, const Operator<T>& op,
                             const ScanOptions& options = {}, ScanStats* stats = nullptr) {
  std::vector<T> a = detail::prepare_input(data, op, options, "sklansky");
  const detail::LaneApplier<T> ap(op, data.size(), stats);
  const std::size_t n = a.size();
  for (std::size_t d = 1; d < n; d <<= 1) {
    for (std::size_t j = d - 1; j < n; j += 2 * d) {
      for (std::size_t k = 0; k < d; ++k) a[j + k + 1] = ap(j + k + 1, a[j], a[j + k + 1]);
    }
  }
  a.resize(data.size());
  return a;
}

template <typename T>
std::vector<T> inclusive_to_exclusive(const std::vector<T>& results, const Operator<T>& op) {
  std::vector<T> out;
  out.reserve(results.size());
  if (results.empty()) return out;
  out.push_back(op.identity());
  out.insert(out.end(), results.begin(), results.end() - 1);
  return out;
}

template <typename T>
std::vector<T> exclusive_to_inclusive(const std::vector<T>& results, const T& last_input,
                                      const Operator<T>& op) {
  if (results.empty()) return {};
  std::vector<T> out(results.begin() + 1, results.end());
  out.push_back(op.apply(results.back(), last_input));
  return out;
}

/// Inclusive scan with any kind; Blelloch goes through the chosen conversion.
template <typename T>
std::vector<T> inclusive_scan(ScanKind kind, const std::vector<T>& data, const Operator<T>& op,
                              const ScanOptions& options = {}, ScanStats* stats = nullptr,
                              BlellochInclusive conversion = BlellochInclusive::ExtraApplication) {
  switch (kind) {
    case ScanKind::Serial: return serial_scan(data, op);
    case ScanKind::BrentKung: return brent_kung_scan(data, op, options, stats);
    case ScanKind::KoggeStone: return kogge_stone_scan(data, op, options, stats);
    case ScanKind::Sklansky: return sklansky_scan(data, op, options, stats);
    case ScanKind::Blelloch: {
      ExclusiveResult<T> r = blelloch_scan(data, op, options, stats);
      if (conversion == BlellochInclusive::ExtraApplication) {
        return exclusive_to_inclusive(r.values, data.back(), op);
      }
      std::vector<T> out(r.values.begin() + 1, r.values.end());
      out.push_back(std::move(r.total));
      return out;
    }
  }
  throw Error("unknown scan kind");
}

}  // namespace scanforge

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

namespace scanforge {

/// A binary, approximately associative operator with an identity element.
///
/// Copies share one application counter, so an operator handed to several
/// workers reports the total number of applications across all of them.
/// `apply` may be called concurrently; the wrapped callables must tolerate it.
template <typename T>
class Operator {
 public:
  using value_type = T;
  using ApplyFn = std::function<T(const T&, const T&)>;
  using EqualFn = std::function<bool(const T&, const T&, double)>;

  Operator(std::string name, T identity, ApplyFn apply, EqualFn approx_eq, double tolerance = 0.0)
      : name_(std::move(name)),
        identity_(std::move(identity)),
        apply_(std::move(apply)),
        approx_eq_(std::move(approx_eq)),
        tolerance_(tolerance),
        counter_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

  const std::string& name() const noexcept { return name_; }
  const T& identity() const noexcept { return identity_; }
  double tolerance() const noexcept { return tolerance_; }

  T apply(const T& lhs, const T& rhs) const {
    counter_->fetch_add(1, std::memory_order_relaxed);
    return apply_(lhs, rhs);
  }

  bool approx_eq(const T& a, const T& b) const { return approx_eq_(a, b, tolerance_); }
  bool approx_eq(const T& a, const T& b, double tolerance) const {
    return approx_eq_(a, b, tolerance);
  }

  std::uint64_t applications() const noexcept {
    return counter_->load(std::memory_order_relaxed);
  }
  void reset_counter() const noexcept { counter_->store(0, std::memory_order_relaxed); }

  /// Same callables, fresh counter.
  Operator detached() const {
    return Operator(name_, identity_, apply_, approx_eq_, tolerance_);
  }

 private:
  std::string name_;
  T identity_;
  ApplyFn apply_;
  EqualFn approx_eq_;
  double tolerance_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
};

namespace ops {

inline Operator<std::int64_t> integer_sum() {
  return Operator<std::int64_t>(
      "int-sum", 0, [](std::int64_t a, std::int64_t b) { return a + b; },
      [](std::int64_t a, std::int64_t b, double) { return a == b; });
}

/// 64-bit float addition; approx_eq is a relative comparison.
inline Operator<double> float_sum(double tolerance = 1e-10) {
  return Operator<double>(
      "float-sum", 0.0, [](double a, double b) { return a + b; },
      [](double a, double b, double tol) {
        const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
        return std::fabs(a - b) <= tol * scale;
      },
      tolerance);
}

/// Free monoid over strings: concatenation, identity "". Any reordering of
/// operands is visible in the result; only re-parenthesization is invisible.
inline Operator<std::string> concatenation() {
  return Operator<std::string>(
      "concat", std::string{}, [](const std::string& a, const std::string& b) { return a + b; },
      [](const std::string& a, const std::string& b, double) { return a == b; });
}

}  // namespace ops
}  // namespace scanforge

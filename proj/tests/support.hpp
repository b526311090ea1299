#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

inline std::vector<std::int64_t> random_ints(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> dist(-1000000, 1000000);
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline std::vector<double> random_unit(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Tokens "[i]" so that concatenation exposes operand order.
inline std::vector<std::string> tokens(std::size_t n) {
  std::vector<std::string> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = "[" + std::to_string(i) + "]";
  return v;
}

/// Reference prefix sums built with the standard library only.
template <typename T>
std::vector<T> reference_inclusive(const std::vector<T>& v) {
  std::vector<T> out(v.size());
  std::partial_sum(v.begin(), v.end(), out.begin());
  return out;
}

template <typename T>
std::vector<T> reference_exclusive(const std::vector<T>& v, T identity) {
  std::vector<T> out(v.size());
  std::exclusive_scan(v.begin(), v.end(), out.begin(), identity);
  return out;
}

inline std::vector<std::size_t> powers_of_two(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t n = lo; n <= hi; n <<= 1) out.push_back(n);
  return out;
}

}  // namespace testing_support

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace scanforge {

enum class ScanKind : std::uint8_t { Serial, Blelloch, BrentKung, KoggeStone, Sklansky };

inline constexpr std::array<ScanKind, 5> kAllScanKinds = {
    ScanKind::Serial, ScanKind::Blelloch, ScanKind::BrentKung, ScanKind::KoggeStone,
    ScanKind::Sklansky};

/// Blelloch is the only kind whose natural output is an exclusive scan.
constexpr bool is_exclusive(ScanKind kind) noexcept { return kind == ScanKind::Blelloch; }

constexpr std::string_view to_string(ScanKind kind) noexcept {
  switch (kind) {
    case ScanKind::Serial: return "serial";
    case ScanKind::Blelloch: return "blelloch";
    case ScanKind::BrentKung: return "brent-kung";
    case ScanKind::KoggeStone: return "kogge-stone";
    case ScanKind::Sklansky: return "sklansky";
  }
  return "?";
}

/// Accepts the canonical names plus a few spellings ("brentkung", "koggestone", "ks").
std::optional<ScanKind> parse_scan_kind(std::string_view name);

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// floor(log2(n)) for n >= 1.
constexpr std::size_t ilog2(std::size_t n) noexcept {
  std::size_t r = 0;
  while (n > 1) {
    n >>= 1;
    ++r;
  }
  return r;
}

}  // namespace scanforge

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scanforge/cost.hpp"
#include "scanforge/partition.hpp"
#include "scanforge/scan_kind.hpp"

namespace scanforge {

enum class Stage : std::uint8_t { Local1, Global, Local2 };
inline constexpr std::size_t kStageCount = 3;

std::string_view to_string(Stage stage) noexcept;

/// Operator applications per stage.
struct StageCounts {
  std::uint64_t by_stage[kStageCount] = {0, 0, 0};

  std::uint64_t& operator[](Stage s) noexcept { return by_stage[static_cast<std::size_t>(s)]; }
  std::uint64_t operator[](Stage s) const noexcept {
    return by_stage[static_cast<std::size_t>(s)];
  }
  std::uint64_t total() const noexcept { return by_stage[0] + by_stage[1] + by_stage[2]; }
};

enum class Reg : std::uint8_t { Reduction, Exclusive, Inclusive, Total };
inline constexpr std::size_t kRegCount = 4;

struct Slot {
  enum class Kind : std::uint8_t { None, Data, Lane, Reg, Temp };
  Kind kind = Kind::None;
  std::uint32_t index = 0;

  static Slot data(std::size_t i) { return {Kind::Data, static_cast<std::uint32_t>(i)}; }
  static Slot lane(std::size_t i) { return {Kind::Lane, static_cast<std::uint32_t>(i)}; }
  static Slot reg(Reg r) { return {Kind::Reg, static_cast<std::uint32_t>(r)}; }
  static Slot temp(std::size_t i) { return {Kind::Temp, static_cast<std::uint32_t>(i)}; }
};

enum class ActionKind : std::uint8_t {
  Apply,         ///< dst = lhs ⊙ rhs, one operator application
  Assign,        ///< dst = lhs
  SetIdentity,   ///< dst = identity
  Send,          ///< post lhs to peer under tag
  Recv,          ///< dst = message (peer, tag), blocking
  ProbeOrApply,  ///< dst = message (peer, tag) if it has arrived, else lhs ⊙ rhs
};

struct Action {
  ActionKind kind = ActionKind::Assign;
  Stage stage = Stage::Local1;
  Slot dst;
  Slot lhs;
  Slot rhs;
  std::uint32_t peer = 0;
  std::uint64_t tag = 0;
};

/// Straight-line program for one worker. Lane slots are local indices into
/// `lanes`, which lists the global-stage lanes this worker owns.
struct WorkerPlan {
  std::size_t worker = 0;
  Block block;
  std::vector<std::size_t> lanes;
  std::size_t temps = 0;
  std::vector<Action> actions;
};

struct DistributedPlan {
  StrategyVariant variant = StrategyVariant::GeneralExclusive;
  ScanKind kind = ScanKind::Serial;
  Partition part;
  /// Width of the global-stage network, including identity-filled lanes.
  std::size_t width = 0;
  std::vector<WorkerPlan> workers;

  std::size_t p() const noexcept { return part.p; }
  std::size_t n() const noexcept { return part.n; }
};

/// Lowers a strategy to per-worker programs. With p == 1 every variant
/// becomes a plain serial scan.
DistributedPlan build_plan(StrategyVariant variant, ScanKind kind, std::size_t n, std::size_t p);

/// Worker that owns global-stage lane `lane` (lanes >= p belong to worker p-1).
inline std::size_t lane_owner(std::size_t lane, std::size_t p) noexcept {
  return lane < p ? lane : p - 1;
}

/// Message tags outside the network range.
inline constexpr std::uint64_t kTagExclusive = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kTagInclusive = 0xFFFF'FFFF'0000'0002ULL;
inline constexpr std::uint64_t kTagSuccessor = 0xFFFF'FFFF'0000'0003ULL;

inline std::uint64_t network_tag(std::size_t step, std::size_t node) noexcept {
  return (static_cast<std::uint64_t>(step) << 32) | static_cast<std::uint64_t>(node);
}

}  // namespace scanforge

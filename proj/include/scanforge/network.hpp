#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "scanforge/error.hpp"
#include "scanforge/operator.hpp"
#include "scanforge/scan_kind.hpp"

namespace scanforge {

enum class NodeOp : std::uint8_t {
  Combine,          ///< dst <- src ⊙ dst
  CombineReversed,  ///< dst <- dst ⊙ src
  Copy,             ///< dst <- src
  Reset,            ///< dst <- identity
};

struct Node {
  static constexpr std::size_t kNoSource = std::numeric_limits<std::size_t>::max();

  std::size_t src = kNoSource;
  std::size_t dst = 0;
  NodeOp op = NodeOp::Combine;

  bool is_application() const noexcept {
    return op == NodeOp::Combine || op == NodeOp::CombineReversed;
  }
  friend bool operator==(const Node&, const Node&) = default;
};

using Step = std::vector<Node>;

/// A prefix circuit as an ordered list of steps. Nodes in one step read the
/// state left by the previous step and write disjoint lanes.
struct ScanNetwork {
  std::size_t n = 0;
  std::string name;
  bool exclusive = false;
  std::vector<Step> steps;

  std::size_t size() const noexcept;
  std::size_t depth() const noexcept;
};

ScanNetwork build_network(ScanKind kind, std::size_t n);

/// Drops every node that does not contribute to a lane marked in `required`.
/// Steps left empty are kept so step numbering is preserved.
ScanNetwork prune_network(const ScanNetwork& net, const std::vector<bool>& required);

/// Throws NetworkError naming the first offending step and node.
void check_structure(const ScanNetwork& net);

struct LaneReport {
  std::size_t lane = 0;
  bool valid = false;
  std::string computed;
  std::string expected;
};

struct VerificationReport {
  bool ok = true;
  std::vector<LaneReport> lanes;

  std::vector<std::size_t> invalid_lanes() const;
};

/// Symbolic check: lane i must hold x_0 x_1 ... x_i (or x_0 ... x_{i-1} for
/// exclusive networks) under the free monoid.
VerificationReport verify_network(const ScanNetwork& net);

void write_network(std::ostream& out, const ScanNetwork& net);
ScanNetwork read_network(std::istream& in);
std::string to_text(const ScanNetwork& net);
ScanNetwork parse_network(const std::string& text);
std::string to_dot(const ScanNetwork& net);

/// Executes a network with snapshot semantics: every node of a step reads the
/// values left by the preceding step.
template <typename T>
std::vector<T> execute_network(const ScanNetwork& net, const std::vector<T>& data,
                               const Operator<T>& op) {
  if (data.size() != net.n) {
    throw SizeError("network width " + std::to_string(net.n) + " does not match input size " +
                    std::to_string(data.size()));
  }
  std::vector<T> cur(data);
  std::vector<T> next;
  for (const Step& step : net.steps) {
    next = cur;
    for (const Node& node : step) {
      switch (node.op) {
        case NodeOp::Combine: next[node.dst] = op.apply(cur[node.src], cur[node.dst]); break;
        case NodeOp::CombineReversed:
          next[node.dst] = op.apply(cur[node.dst], cur[node.src]);
          break;
        case NodeOp::Copy: next[node.dst] = cur[node.src]; break;
        case NodeOp::Reset: next[node.dst] = op.identity(); break;
      }
    }
    cur.swap(next);
  }
  return cur;
}

}  // namespace scanforge

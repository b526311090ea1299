#include "scanforge/plan.hpp"

#include <algorithm>
#include <map>

#include "scanforge/network.hpp"

namespace scanforge {

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Local1: return "local1";
    case Stage::Global: return "global";
    case Stage::Local2: return "local2";
  }
  return "?";
}

namespace {

class Emitter {
 public:
  Emitter(WorkerPlan& plan, Stage stage) : plan_(plan), stage_(stage) {}

  void apply(Slot dst, Slot lhs, Slot rhs) { push({ActionKind::Apply, stage_, dst, lhs, rhs}); }
  void assign(Slot dst, Slot src) { push({ActionKind::Assign, stage_, dst, src, {}}); }
  void identity(Slot dst) { push({ActionKind::SetIdentity, stage_, dst, {}, {}}); }
  void send(Slot src, std::size_t peer, std::uint64_t tag) {
    push({ActionKind::Send, stage_, {}, src, {}, static_cast<std::uint32_t>(peer), tag});
  }
  void recv(Slot dst, std::size_t peer, std::uint64_t tag) {
    push({ActionKind::Recv, stage_, dst, {}, {}, static_cast<std::uint32_t>(peer), tag});
  }
  void probe_or_apply(Slot dst, Slot lhs, Slot rhs, std::size_t peer, std::uint64_t tag) {
    push({ActionKind::ProbeOrApply, stage_, dst, lhs, rhs, static_cast<std::uint32_t>(peer), tag});
  }

 private:
  void push(Action a) { plan_.actions.push_back(a); }
  WorkerPlan& plan_;
  Stage stage_;
};

const Slot kExcl = Slot::reg(Reg::Exclusive);
const Slot kIncl = Slot::reg(Reg::Inclusive);
const Slot kRed = Slot::reg(Reg::Reduction);
const Slot kTotal = Slot::reg(Reg::Total);

void emit_local1(WorkerPlan& w, StrategyVariant variant) {
  Emitter e(w, Stage::Local1);
  const std::size_t k = w.block.size();
  if (variant == StrategyVariant::Alternative) {
    e.assign(kRed, Slot::data(0));
    for (std::size_t i = 1; i < k; ++i) e.apply(kRed, kRed, Slot::data(i));
    e.assign(Slot::lane(0), kRed);
  } else {
    for (std::size_t i = 1; i < k; ++i) e.apply(Slot::data(i), Slot::data(i - 1), Slot::data(i));
    e.assign(Slot::lane(0), Slot::data(k - 1));
  }
}

void emit_global(DistributedPlan& plan) {
  const std::size_t p = plan.p();
  const std::size_t width = plan.width;
  const ScanKind kind = plan.kind;
  const GlobalMode mode = global_mode(plan.variant);

  std::vector<std::size_t> local(width);
  for (WorkerPlan& w : plan.workers) {
    for (std::size_t i = 0; i < w.lanes.size(); ++i) local[w.lanes[i]] = i;
  }
  for (std::size_t lane = p; lane < width; ++lane) {
    Emitter(plan.workers[p - 1], Stage::Global).identity(Slot::lane(local[lane]));
  }

  ScanNetwork net = build_network(kind, width);
  if (!is_exclusive(kind)) {
    std::vector<bool> required(width, false);
    const std::size_t needed = mode == GlobalMode::Inclusive ? p : p - 1;
    std::fill(required.begin(), required.begin() + static_cast<std::ptrdiff_t>(needed), true);
    net = prune_network(net, required);
  }

  std::vector<std::size_t> temps(p, 0);
  std::vector<std::size_t> snapshot;
  for (std::size_t s = 0; s < net.steps.size(); ++s) {
    const Step& step = net.steps[s];
    if (step.empty()) continue;
    std::fill(temps.begin(), temps.end(), 0);
    snapshot.assign(step.size(), 0);
    auto emitter = [&](std::size_t lane) {
      return Emitter(plan.workers[lane_owner(lane, p)], Stage::Global);
    };
    auto same_owner = [&](const Node& node) {
      return lane_owner(node.src, p) == lane_owner(node.dst, p);
    };
    for (std::size_t k = 0; k < step.size(); ++k) {
      const Node& node = step[k];
      if (node.src != Node::kNoSource && !same_owner(node)) {
        emitter(node.src).send(Slot::lane(local[node.src]), lane_owner(node.dst, p),
                               network_tag(s, k));
      }
    }
    for (std::size_t k = 0; k < step.size(); ++k) {
      const Node& node = step[k];
      if (node.src != Node::kNoSource && same_owner(node)) {
        const std::size_t w = lane_owner(node.src, p);
        emitter(node.src).assign(Slot::temp(temps[w]), Slot::lane(local[node.src]));
        snapshot[k] = temps[w]++;
      }
    }
    for (std::size_t k = 0; k < step.size(); ++k) {
      const Node& node = step[k];
      const std::size_t w = lane_owner(node.dst, p);
      Emitter e = emitter(node.dst);
      const Slot dst = Slot::lane(local[node.dst]);
      if (node.op == NodeOp::Reset) {
        if (kind == ScanKind::Blelloch && node.dst == width - 1) e.assign(kTotal, dst);
        e.identity(dst);
        continue;
      }
      Slot src;
      if (same_owner(node)) {
        src = Slot::temp(snapshot[k]);
      } else {
        src = Slot::temp(temps[w]++);
        e.recv(src, lane_owner(node.src, p), network_tag(s, k));
      }
      switch (node.op) {
        case NodeOp::Combine: e.apply(dst, src, dst); break;
        case NodeOp::CombineReversed: e.apply(dst, dst, src); break;
        case NodeOp::Copy: e.assign(dst, src); break;
        case NodeOp::Reset: break;
      }
    }
    for (std::size_t w = 0; w < p; ++w) {
      plan.workers[w].temps = std::max(plan.workers[w].temps, temps[w]);
    }
  }

  for (WorkerPlan& wp : plan.workers) {
    const std::size_t w = wp.worker;
    Emitter e(wp, Stage::Global);
    const Slot own = Slot::lane(0);
    if (is_exclusive(kind)) {
      e.assign(kExcl, own);
      if (mode == GlobalMode::Inclusive) {
        if (w >= 2) e.send(kExcl, w - 1, kTagInclusive);
        if (w == p - 1) {
          e.assign(kIncl, kTotal);
        } else if (w >= 1) {
          e.recv(kIncl, w + 1, kTagInclusive);
        }
      }
    } else {
      if (w + 1 < p) e.send(own, w + 1, kTagExclusive);
      if (w == 0) {
        e.identity(kExcl);
      } else {
        e.recv(kExcl, w - 1, kTagExclusive);
      }
      if (mode == GlobalMode::Inclusive && w >= 1) e.assign(kIncl, own);
    }
  }
}

void emit_local2(WorkerPlan& wp, StrategyVariant variant, std::size_t p) {
  Emitter e(wp, Stage::Local2);
  const std::size_t w = wp.worker;
  const std::size_t k = wp.block.size();
  switch (variant) {
    case StrategyVariant::GeneralExclusive:
      if (w == 0) return;
      for (std::size_t i = 0; i < k; ++i) e.apply(Slot::data(i), kExcl, Slot::data(i));
      return;
    case StrategyVariant::GeneralExclusiveOptimized:
      if (w >= 2) e.send(kExcl, w - 1, kTagSuccessor);
      if (w == 0) return;
      if (w + 1 == p) {
        for (std::size_t i = 0; i < k; ++i) e.apply(Slot::data(i), kExcl, Slot::data(i));
        return;
      }
      for (std::size_t i = 0; i + 1 < k; ++i) e.apply(Slot::data(i), kExcl, Slot::data(i));
      e.probe_or_apply(Slot::data(k - 1), kExcl, Slot::data(k - 1), w + 1, kTagSuccessor);
      return;
    case StrategyVariant::GeneralInclusive:
      if (w == 0) return;
      for (std::size_t i = 0; i + 1 < k; ++i) e.apply(Slot::data(i), kExcl, Slot::data(i));
      e.assign(Slot::data(k - 1), kIncl);
      return;
    case StrategyVariant::Alternative:
      e.apply(Slot::data(0), kExcl, Slot::data(0));
      for (std::size_t i = 1; i < k; ++i) e.apply(Slot::data(i), Slot::data(i - 1), Slot::data(i));
      return;
  }
}

}  // namespace

DistributedPlan build_plan(StrategyVariant variant, ScanKind kind, std::size_t n, std::size_t p) {
  DistributedPlan plan;
  plan.variant = variant;
  plan.kind = kind;
  plan.part = partition(n, p);
  plan.width = kind == ScanKind::Serial ? p : next_power_of_two(p);
  plan.workers.resize(p);
  for (std::size_t w = 0; w < p; ++w) {
    plan.workers[w].worker = w;
    plan.workers[w].block = plan.part.blocks[w];
    plan.workers[w].lanes = {w};
  }

  if (p == 1) {
    WorkerPlan& only = plan.workers[0];
    Emitter e(only, Stage::Local1);
    for (std::size_t i = 1; i < n; ++i) e.apply(Slot::data(i), Slot::data(i - 1), Slot::data(i));
    return plan;
  }

  for (std::size_t lane = p; lane < plan.width; ++lane) plan.workers[p - 1].lanes.push_back(lane);
  for (WorkerPlan& w : plan.workers) emit_local1(w, variant);
  emit_global(plan);
  for (WorkerPlan& w : plan.workers) emit_local2(w, variant, p);
  return plan;
}

}  // namespace scanforge

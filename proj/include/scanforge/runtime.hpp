#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <barrier>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "scanforge/error.hpp"
#include "scanforge/operator.hpp"
#include "scanforge/plan.hpp"

namespace scanforge {

struct RunOptions {
  std::chrono::milliseconds receive_timeout{std::chrono::minutes(10)};
};

template <typename T>
struct RunResult {
  std::vector<T> values;
  std::vector<StageCounts> applications;
  /// Seconds spent per worker in each stage, measured after the start barrier.
  std::vector<std::array<double, kStageCount>> stage_seconds;
  /// Per worker: whether the successor probe found its message.
  std::vector<bool> probe_hit;
  double wall_seconds = 0.0;

  std::uint64_t total_applications() const {
    std::uint64_t t = 0;
    for (const StageCounts& c : applications) t += c.total();
    return t;
  }
};

namespace detail {

struct Aborted {};

template <typename T>
class Mailbox {
 public:
  void post(std::uint32_t from, std::uint64_t tag, T value) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      box_.insert_or_assign({from, tag}, std::move(value));
    }
    cv_.notify_all();
  }

  std::optional<T> try_take(std::uint32_t from, std::uint64_t tag) {
    std::lock_guard<std::mutex> lock(mutex_);
    return take_locked(from, tag);
  }

  T take(std::uint32_t from, std::uint64_t tag, std::chrono::steady_clock::time_point deadline,
         const std::atomic<bool>& abort) {
    std::unique_lock<std::mutex> lock(mutex_);
    while (true) {
      if (abort.load()) throw Aborted{};
      if (auto v = take_locked(from, tag)) return std::move(*v);
      if (cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
        if (auto v = take_locked(from, tag)) return std::move(*v);
        throw WorkerError("receive from worker " + std::to_string(from) + " timed out");
      }
    }
  }

  void wake() {
    { std::lock_guard<std::mutex> lock(mutex_); }
    cv_.notify_all();
  }

 private:
  std::optional<T> take_locked(std::uint32_t from, std::uint64_t tag) {
    auto it = box_.find({from, tag});
    if (it == box_.end()) return std::nullopt;
    T v = std::move(it->second);
    box_.erase(it);
    return v;
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::pair<std::uint32_t, std::uint64_t>, T> box_;
};

template <typename T>
struct WorkerState {
  std::vector<T> data;
  std::vector<T> lanes;
  std::array<T, kRegCount> regs;
  std::vector<T> temps;

  T& at(Slot s) {
    switch (s.kind) {
      case Slot::Kind::Data: return data.at(s.index);
      case Slot::Kind::Lane: return lanes.at(s.index);
      case Slot::Kind::Reg: return regs.at(s.index);
      case Slot::Kind::Temp: return temps.at(s.index);
      case Slot::Kind::None: break;
    }
    throw Error("plan refers to an empty slot");
  }
};

}  // namespace detail

/// Runs every worker program on its own thread. Workers share nothing but
/// their mailboxes; values cross worker boundaries by copy.
template <typename T>
RunResult<T> execute_plan(const DistributedPlan& plan, const std::vector<T>& data,
                          const Operator<T>& op, const RunOptions& options = {}) {
  if (data.empty()) throw EmptyInputError();
  if (data.size() != plan.n()) {
    throw SizeError("plan expects " + std::to_string(plan.n()) + " elements, got " +
                    std::to_string(data.size()));
  }
  using clock = std::chrono::steady_clock;
  const std::size_t p = plan.p();

  RunResult<T> result;
  result.values.resize(data.size(), op.identity());
  result.applications.resize(p);
  result.stage_seconds.resize(p);
  result.probe_hit.assign(p, false);

  std::vector<detail::Mailbox<T>> mailboxes(p);
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::vector<std::pair<std::size_t, std::string>> errors;
  std::vector<clock::time_point> started(p), finished(p);
  std::barrier sync(static_cast<std::ptrdiff_t>(p));
  std::vector<char> hits(p, 0);

  auto worker_main = [&](std::size_t w) {
    const WorkerPlan& wp = plan.workers[w];
    detail::WorkerState<T> st;
    st.data.assign(data.begin() + static_cast<std::ptrdiff_t>(wp.block.first),
                   data.begin() + static_cast<std::ptrdiff_t>(wp.block.last) + 1);
    st.lanes.assign(wp.lanes.size(), op.identity());
    st.regs.fill(op.identity());
    st.temps.assign(wp.temps, op.identity());
    StageCounts counts;
    std::array<double, kStageCount> seconds{};

    sync.arrive_and_wait();
    started[w] = clock::now();
    const auto deadline = started[w] + options.receive_timeout;
    auto stage_start = started[w];
    Stage current = Stage::Local1;
    std::size_t pc = 0;
    try {
      for (; pc < wp.actions.size(); ++pc) {
        if (abort.load(std::memory_order_relaxed)) throw detail::Aborted{};
        const Action& a = wp.actions[pc];
        if (a.stage != current) {
          const auto now = clock::now();
          seconds[static_cast<std::size_t>(current)] +=
              std::chrono::duration<double>(now - stage_start).count();
          stage_start = now;
          current = a.stage;
        }
        switch (a.kind) {
          case ActionKind::Apply:
            st.at(a.dst) = op.apply(st.at(a.lhs), st.at(a.rhs));
            ++counts[a.stage];
            break;
          case ActionKind::Assign: st.at(a.dst) = st.at(a.lhs); break;
          case ActionKind::SetIdentity: st.at(a.dst) = op.identity(); break;
          case ActionKind::Send:
            mailboxes[a.peer].post(static_cast<std::uint32_t>(w), a.tag, st.at(a.lhs));
            break;
          case ActionKind::Recv:
            try {
              st.at(a.dst) = mailboxes[w].take(a.peer, a.tag, deadline, abort);
            } catch (const WorkerError& e) {
              throw WorkerError(std::string(e.what()) + " in " + std::string(to_string(a.stage)) +
                                " stage");
            }
            break;
          case ActionKind::ProbeOrApply:
            if (auto v = mailboxes[w].try_take(a.peer, a.tag)) {
              st.at(a.dst) = std::move(*v);
              hits[w] = 1;
            } else {
              st.at(a.dst) = op.apply(st.at(a.lhs), st.at(a.rhs));
              ++counts[a.stage];
            }
            break;
        }
      }
      seconds[static_cast<std::size_t>(current)] +=
          std::chrono::duration<double>(clock::now() - stage_start).count();
      finished[w] = clock::now();
      std::copy(st.data.begin(), st.data.end(),
                result.values.begin() + static_cast<std::ptrdiff_t>(wp.block.first));
    } catch (const detail::Aborted&) {
      finished[w] = clock::now();
    } catch (const std::exception& e) {
      finished[w] = clock::now();
      std::ostringstream msg;
      msg << e.what() << " (" << to_string(current) << " stage, action " << pc << " of "
          << wp.actions.size() << ", " << counts.total() << " applications done)";
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        errors.emplace_back(w, msg.str());
      }
      abort.store(true);
      for (auto& m : mailboxes) m.wake();
    }
    result.applications[w] = counts;
    result.stage_seconds[w] = seconds;
  };

  std::vector<std::thread> threads;
  threads.reserve(p);
  for (std::size_t w = 0; w < p; ++w) threads.emplace_back(worker_main, w);
  for (std::thread& t : threads) t.join();

  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    std::string msg;
    for (const auto& [w, what] : errors) {
      if (!msg.empty()) msg += "; ";
      msg += "worker " + std::to_string(w) + ": " + what;
    }
    throw WorkerError(msg);
  }
  for (std::size_t w = 0; w < p; ++w) result.probe_hit[w] = hits[w] != 0;
  const auto first = *std::min_element(started.begin(), started.end());
  const auto last = *std::max_element(finished.begin(), finished.end());
  result.wall_seconds = std::chrono::duration<double>(last - first).count();
  return result;
}

/// Inclusive distributed scan of `data` over p workers.
template <typename T>
RunResult<T> run_distributed(const std::vector<T>& data, const Operator<T>& op,
                             StrategyVariant variant, ScanKind global_kind, std::size_t p,
                             const RunOptions& options = {}) {
  if (data.empty()) throw EmptyInputError();
  return execute_plan(build_plan(variant, global_kind, data.size(), p), data, op, options);
}

/// Runs only the global stage: one value per worker in, one scan value per
/// worker out (exclusive or inclusive).
template <typename T>
RunResult<T> global_stage(const std::vector<T>& local_values, const Operator<T>& op,
                          ScanKind kind, GlobalMode mode, const RunOptions& options = {}) {
  if (local_values.empty()) throw EmptyInputError();
  const std::size_t p = local_values.size();
  DistributedPlan plan = build_plan(mode == GlobalMode::Inclusive
                                        ? StrategyVariant::GeneralInclusive
                                        : StrategyVariant::GeneralExclusive,
                                    kind, p, p);
  const Reg out = mode == GlobalMode::Inclusive ? Reg::Inclusive : Reg::Exclusive;
  for (WorkerPlan& wp : plan.workers) {
    std::erase_if(wp.actions, [](const Action& a) { return a.stage != Stage::Global; });
    Action a;
    a.stage = Stage::Global;
    a.kind = ActionKind::Assign;
    a.dst = Slot::lane(0);
    a.lhs = Slot::data(0);
    wp.actions.insert(wp.actions.begin(), a);
    a.dst = Slot::data(0);
    a.lhs = Slot::reg(out);
    // Worker 0 in inclusive mode keeps its own value.
    if (!(mode == GlobalMode::Inclusive && wp.worker == 0)) wp.actions.push_back(a);
  }
  if (p == 1 && mode == GlobalMode::Exclusive) {
    Action a;
    a.stage = Stage::Global;
    a.kind = ActionKind::SetIdentity;
    a.dst = Slot::data(0);
    plan.workers[0].actions = {a};
  }
  return execute_plan(plan, local_values, op, options);
}

}  // namespace scanforge

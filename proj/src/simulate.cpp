#include "scanforge/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include "scanforge/error.hpp"

namespace scanforge {

CostModel CostModel::constant(double c, double latency) {
  CostModel m;
  m.c = c;
  m.latency = latency;
  return m;
}

CostModel CostModel::uniform(double lo, double hi, std::uint64_t seed, double latency) {
  CostModel m;
  m.distribution = Distribution::Uniform;
  m.lo = lo;
  m.hi = hi;
  m.seed = seed;
  m.latency = latency;
  return m;
}

CostModel CostModel::lognormal(double mu, double sigma, std::uint64_t seed, double latency) {
  CostModel m;
  m.distribution = Distribution::LogNormal;
  m.mu = mu;
  m.sigma = sigma;
  m.seed = seed;
  m.latency = latency;
  return m;
}

CostModel CostModel::from_trace(std::vector<double> costs, std::uint64_t seed, double latency) {
  CostModel m;
  m.distribution = Distribution::Trace;
  m.trace = std::move(costs);
  m.seed = seed;
  m.latency = latency;
  return m;
}

void CostModel::validate() const {
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw ConfigError("latency must be >= 0");
  switch (distribution) {
    case Distribution::Constant:
      if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("constant cost must be > 0");
      break;
    case Distribution::Uniform:
      if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
        throw ConfigError("uniform cost needs 0 < lo <= hi");
      }
      break;
    case Distribution::LogNormal:
      if (!std::isfinite(mu) || !(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("lognormal cost needs finite mu and sigma >= 0");
      }
      break;
    case Distribution::Trace:
      if (trace.empty()) throw ConfigError("trace cost model needs at least one sample");
      for (double t : trace) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("trace costs must be > 0");
      }
      break;
  }
}

double CostModel::mean() const {
  switch (distribution) {
    case Distribution::Constant: return c;
    case Distribution::Uniform: return 0.5 * (lo + hi);
    case Distribution::LogNormal: return std::exp(mu + 0.5 * sigma * sigma);
    case Distribution::Trace:
      return std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(trace.size());
  }
  return 0.0;
}

std::string_view to_string(CostModel::Distribution d) noexcept {
  switch (d) {
    case CostModel::Distribution::Constant: return "constant";
    case CostModel::Distribution::Uniform: return "uniform";
    case CostModel::Distribution::LogNormal: return "lognormal";
    case CostModel::Distribution::Trace: return "trace";
  }
  return "?";
}

CostSampler::CostSampler(const CostModel& model, std::uint64_t stream) : model_(model) {
  std::seed_seq seq{static_cast<std::uint32_t>(model.seed), static_cast<std::uint32_t>(model.seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  rng_.seed(seq);
}

double CostSampler::next() {
  switch (model_.distribution) {
    case CostModel::Distribution::Constant: return model_.c;
    case CostModel::Distribution::Uniform:
      if (model_.lo == model_.hi) return model_.lo;
      return std::uniform_real_distribution<double>(model_.lo, model_.hi)(rng_);
    case CostModel::Distribution::LogNormal: {
      double v = std::lognormal_distribution<double>(model_.mu, model_.sigma)(rng_);
      return std::max(v, std::numeric_limits<double>::min());
    }
    case CostModel::Distribution::Trace: {
      std::uniform_int_distribution<std::size_t> pick(0, model_.trace.size() - 1);
      return model_.trace[pick(rng_)];
    }
  }
  return model_.c;
}

std::uint64_t SimReport::total_applications() const { return stage_totals().total(); }

StageCounts SimReport::stage_totals() const {
  StageCounts t;
  for (const StageCounts& c : applications) {
    for (std::size_t s = 0; s < kStageCount; ++s) t.by_stage[s] += c.by_stage[s];
  }
  return t;
}

void SimReport::write_timeline_csv(std::ostream& out) const {
  out << "worker,stage,event,start,end\n";
  const auto old = out.precision(17);
  for (const TimelineEvent& e : timeline) {
    const char* kind = e.kind == TimelineEvent::Kind::Apply  ? "apply"
                       : e.kind == TimelineEvent::Kind::Wait ? "wait"
                                                             : "probe-hit";
    out << e.worker << ',' << to_string(e.stage) << ',' << kind << ',' << e.start << ',' << e.end
        << '\n';
  }
  out.precision(old);
}

namespace {

struct Proc {
  std::size_t pc = 0;
  double clock = 0.0;
  bool done = false;
};

using MessageKey = std::tuple<std::uint32_t, std::uint32_t, std::uint64_t>;  // to, from, tag

}  // namespace

SimReport simulate(const DistributedPlan& plan, const CostModel& model, const SimOptions& options) {
  model.validate();
  const std::size_t p = plan.p();
  SimReport report;
  report.finish.assign(p, 0.0);
  report.idle.assign(p, 0.0);
  report.global_idle.assign(p, 0.0);
  report.applications.assign(p, StageCounts{});

  std::vector<Proc> procs(p);
  std::vector<CostSampler> samplers;
  samplers.reserve(p);
  for (std::size_t w = 0; w < p; ++w) samplers.emplace_back(model, w);
  std::map<MessageKey, double> posted;

  auto record = [&](std::size_t w, Stage stage, TimelineEvent::Kind kind, double start,
                    double end) {
    if (options.record_timeline) report.timeline.push_back({w, stage, kind, start, end});
  };

  auto apply = [&](std::size_t w, const Action& a) {
    Proc& pr = procs[w];
    const double cost = samplers[w].next();
    record(w, a.stage, TimelineEvent::Kind::Apply, pr.clock, pr.clock + cost);
    pr.clock += cost;
    ++report.applications[w][a.stage];
  };

  // Runs worker w until it blocks or finishes; returns whether it advanced.
  auto run = [&](std::size_t w) {
    Proc& pr = procs[w];
    const auto& actions = plan.workers[w].actions;
    bool advanced = false;
    while (pr.pc < actions.size()) {
      const Action& a = actions[pr.pc];
      const auto me = static_cast<std::uint32_t>(w);
      switch (a.kind) {
        case ActionKind::Apply: apply(w, a); break;
        case ActionKind::Assign:
        case ActionKind::SetIdentity: break;
        case ActionKind::Send: posted[{a.peer, me, a.tag}] = pr.clock + model.latency; break;
        case ActionKind::Recv: {
          auto it = posted.find({me, a.peer, a.tag});
          if (it == posted.end()) return advanced;
          if (it->second > pr.clock) {
            const double wait = it->second - pr.clock;
            record(w, a.stage, TimelineEvent::Kind::Wait, pr.clock, it->second);
            report.idle[w] += wait;
            if (a.stage == Stage::Global) report.global_idle[w] += wait;
            pr.clock = it->second;
          }
          posted.erase(it);
          break;
        }
        case ActionKind::ProbeOrApply: {
          auto it = posted.find({me, a.peer, a.tag});
          if (it != posted.end() && it->second <= pr.clock) {
            record(w, a.stage, TimelineEvent::Kind::ProbeHit, pr.clock, pr.clock);
            posted.erase(it);
            break;
          }
          const Proc& sender = procs[a.peer];
          const bool too_late = it != posted.end() || sender.done ||
                                sender.clock + model.latency > pr.clock;
          if (!too_late) return advanced;
          apply(w, a);
          break;
        }
      }
      ++pr.pc;
      advanced = true;
    }
    if (!pr.done) {
      pr.done = true;
      advanced = true;
    }
    return advanced;
  };

  std::size_t remaining = p;
  while (remaining > 0) {
    bool progress = false;
    for (std::size_t w = 0; w < p; ++w) {
      if (procs[w].done) continue;
      if (run(w)) progress = true;
      if (procs[w].done) --remaining;
    }
    if (!progress) {
      std::string blocked;
      for (std::size_t w = 0; w < p; ++w) {
        if (procs[w].done) continue;
        const Action& a = plan.workers[w].actions[procs[w].pc];
        blocked += (blocked.empty() ? "" : ", ") + std::to_string(w) + " waits on " +
                   std::to_string(a.peer);
      }
      throw DeadlockError("simulation cannot progress: " + blocked);
    }
  }

  for (std::size_t w = 0; w < p; ++w) {
    report.finish[w] = procs[w].clock;
    report.makespan = std::max(report.makespan, procs[w].clock);
  }
  return report;
}

SimReport simulate(StrategyVariant variant, ScanKind global_kind, std::size_t n, std::size_t p,
                   const CostModel& model, const SimOptions& options) {
  return simulate(build_plan(variant, global_kind, n, p), model, options);
}

double simulate_serial(std::size_t n, const CostModel& model) {
  model.validate();
  CostSampler sampler(model, std::numeric_limits<std::uint64_t>::max());
  double t = 0.0;
  for (std::size_t i = 1; i < n; ++i) t += sampler.next();
  return t;
}

LogNormalFit fit_lognormal(const std::vector<double>& samples) {
  if (samples.empty()) throw ConfigError("cannot fit a distribution to no samples");
  double sum = 0.0;
  for (double s : samples) {
    if (!(s > 0.0)) throw ConfigError("lognormal fit needs positive samples");
    sum += std::log(s);
  }
  const double n = static_cast<double>(samples.size());
  const double mu = sum / n;
  double ss = 0.0;
  for (double s : samples) ss += (std::log(s) - mu) * (std::log(s) - mu);
  return {mu, std::sqrt(ss / n)};
}

}  // namespace scanforge

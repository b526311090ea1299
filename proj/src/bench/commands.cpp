#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

#include "scanforge/bench.hpp"
#include "scanforge/error.hpp"
#include "scanforge/experiments.hpp"
#include "scanforge/runtime.hpp"
#include "scanforge/scan.hpp"

namespace scanforge::bench {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool table_width(std::size_t n) { return n >= 2 && is_power_of_two(n); }

std::vector<std::size_t> default_widths() {
  std::vector<std::size_t> w;
  for (std::size_t n = 1; n <= 256; n *= 2) w.push_back(n);
  return w;
}

}  // namespace

// verify

VerifyRow verify_row(const ScanNetwork& net, std::optional<ScanKind> kind) {
  VerifyRow row;
  row.name = net.name;
  row.n = net.n;
  row.size = net.size();
  row.depth = net.depth();
  row.deficiency = snir_deficiency(row.size, row.depth, row.n);
  const VerificationReport report = verify_network(net);
  row.valid = report.ok;
  for (const LaneReport& lane : report.lanes) {
    if (!lane.valid) row.bad_lanes.push_back(lane);
  }
  if (kind && table_width(net.n)) {
    row.formula_size = work(*kind, net.n);
    row.formula_depth = span(*kind, net.n);
    row.formula_ok = *row.formula_size == row.size && *row.formula_depth == row.depth;
  } else if (kind && net.n == 1) {
    row.formula_ok = row.size == 0 && row.depth == 0;
  }
  return row;
}

std::vector<VerifyRow> run_verify(const ExperimentSpec& spec) {
  std::vector<VerifyRow> rows;
  if (!spec.network.empty()) {
    std::ifstream in(spec.network);
    if (!in) throw IoError("cannot open network file " + spec.network);
    const ScanNetwork net = read_network(in);
    std::optional<ScanKind> kind = parse_scan_kind(net.name);
    rows.push_back(verify_row(net, kind));
    return rows;
  }
  const auto widths = spec.widths.empty() ? default_widths() : spec.widths;
  for (ScanKind kind : spec.kinds) {
    for (std::size_t n : widths) rows.push_back(verify_row(build_network(kind, n), kind));
  }
  return rows;
}

bool write_verify(std::ostream& out, const std::vector<VerifyRow>& rows) {
  bool all_ok = true;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %6s %8s %8s %12s %13s %10s  %s\n", "network", "n",
                "size", "depth", "formula_size", "formula_depth", "deficiency", "status");
  out << line;
  for (const VerifyRow& r : rows) {
    const bool ok = r.valid && r.formula_ok;
    all_ok = all_ok && ok;
    const std::string fs = r.formula_size ? std::to_string(*r.formula_size) : "-";
    const std::string fd = r.formula_depth ? std::to_string(*r.formula_depth) : "-";
    const char* status = !r.valid ? "INVALID" : (!r.formula_ok ? "FORMULA-MISMATCH" : "ok");
    std::snprintf(line, sizeof line, "%-12s %6zu %8zu %8zu %12s %13s %10lld  %s\n", r.name.c_str(),
                  r.n, r.size, r.depth, fs.c_str(), fd.c_str(),
                  static_cast<long long>(r.deficiency), status);
    out << line;
    for (const LaneReport& lane : r.bad_lanes) {
      out << "  lane " << lane.lane << ": computed " << lane.computed << ", expected "
          << lane.expected << '\n';
    }
  }
  return all_ok;
}

// counts

CountsRow count_kind(ScanKind kind, std::size_t n) {
  CountsRow row;
  row.kind = kind;
  row.n = n;
  row.formula_span = span(kind, n);
  row.formula_work = work(kind, n);

  std::vector<std::int64_t> data(n);
  std::iota(data.begin(), data.end(), 1);
  const auto op = ops::integer_sum();
  std::vector<std::int64_t> expected = serial_scan(data, op.detached());
  std::vector<std::int64_t> got;
  if (kind == ScanKind::Blelloch) {
    got = blelloch_scan(data, op).values;
    expected.insert(expected.begin(), 0);
    expected.pop_back();
  } else {
    got = inclusive_scan(kind, data, op);
  }
  if (got != expected) {
    throw Error(std::string(to_string(kind)) + " executor disagrees with the serial scan at n=" +
                std::to_string(n));
  }
  row.work = op.applications();
  row.span = build_network(kind, n).depth();
  return row;
}

bool write_counts(std::ostream& out, const std::vector<CountsRow>& rows) {
  bool all = true;
  out << kCountsCsvHeader << '\n';
  for (const CountsRow& r : rows) {
    all = all && r.match();
    out << to_string(r.kind) << ',' << r.n << ',' << r.span << ',' << r.work << ','
        << r.formula_span << ',' << r.formula_work << ',' << (r.match() ? "yes" : "no") << '\n';
  }
  return all;
}

// simulate

std::vector<SimRow> run_simulate(const ExperimentSpec& spec) {
  const CostModel model = make_cost_model(spec);
  const double serial = simulate_serial(spec.n, model);
  std::vector<SimRow> rows;
  for (StrategyVariant variant : spec.variants) {
    for (ScanKind kind : spec.kinds) {
      for (std::size_t p : spec.p_list) {
        SimRow row;
        row.variant = variant;
        row.kind = kind;
        row.n = spec.n;
        row.p = p;
        const SimReport rep = simulate(variant, kind, spec.n, p, model, SimOptions{false});
        row.makespan = rep.makespan;
        row.serial_time = serial;
        row.speedup = rep.makespan > 0.0 ? serial / rep.makespan : 1.0;
        row.applications = rep.total_applications();
        row.efficiency = row.speedup / static_cast<double>(p);
        row.max_idle = rep.idle.empty() ? 0.0 : *std::max_element(rep.idle.begin(), rep.idle.end());
        try {
          const auto f = distributed_span(kind, spec.n, p, variant);
          row.total_span = f.total_span;
          row.total_work = f.total_work;
          row.theoretical_speedup = theoretical_speedup(kind, spec.n, p, variant);
        } catch (const SizeError&) {
          // Tree kinds have no figures for non-power-of-two p.
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_simulate_csv(std::ostream& out, const std::vector<SimRow>& rows) {
  out << kSimulateCsvHeader << '\n';
  for (const SimRow& r : rows) {
    out << to_string(r.variant) << ',' << to_string(r.kind) << ',' << r.n << ',' << r.p << ','
        << num(r.makespan) << ',' << num(r.serial_time) << ',' << num(r.speedup) << ','
        << (r.theoretical_speedup ? num(*r.theoretical_speedup) : "") << ','
        << (r.total_span ? std::to_string(*r.total_span) : "") << ','
        << (r.total_work ? std::to_string(*r.total_work) : "") << ',' << r.applications << ','
        << num(r.efficiency) << ',' << num(r.max_idle) << '\n';
  }
}

void write_simulate_gnuplot(std::ostream& out, const std::string& csv_path) {
  out << "set datafile separator ','\n"
         "set key autotitle columnhead left top\n"
         "set logscale x 2\n"
         "set xlabel 'P'\n"
         "set ylabel 'speedup'\n"
         "plot '"
      << csv_path
      << "' using 4:7 with linespoints title 'simulated', \\\n"
         "     '' using 4:8 with lines dashtype 2 title 'theoretical bound'\n";
}

// scaling

namespace {

/// Runs real threaded scans whose operator sleeps for a sampled cost.
Runner threads_runner(const ExperimentSpec& spec, CostModel model) {
  const StrategyVariant variant = spec.variants.front();
  const ScanKind kind = spec.kinds.front();
  const double unit_ms = spec.unit_ms;
  return [=](std::size_t n, std::size_t p, std::size_t rep) {
    CostModel m = model;
    m.seed = model.seed + rep;
    auto sampler = std::make_shared<CostSampler>(m, 0);
    auto mutex = std::make_shared<std::mutex>();
    auto sleep_op = Operator<double>(
        "sleep-sum", 0.0,
        [sampler, mutex, unit_ms](double a, double b) {
          double c;
          {
            std::lock_guard<std::mutex> lock(*mutex);
            c = sampler->next();
          }
          std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(c * unit_ms));
          return a + b;
        },
        [](double a, double b, double) { return a == b; });
    const std::vector<double> data(n, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    serial_scan(data, sleep_op);
    const double t_serial =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const RunResult<double> r = run_distributed(data, sleep_op, variant, kind, p);
    return Timing{t_serial, r.wall_seconds};
  };
}

}  // namespace

void run_scaling(const ExperimentSpec& spec, std::ostream& out) {
  const CostModel model = make_cost_model(spec);
  const StrategyVariant variant = spec.variants.front();
  const ScanKind kind = spec.kinds.front();
  const Runner runner = spec.runner == "threads" ? threads_runner(spec, model)
                                                  : simulated_runner(variant, kind, model);
  if (spec.mode == "weak") {
    WeakTable t = weak_scaling_experiment(spec.k, spec.p_list, spec.repetitions, runner);
    t.variant = std::string(to_string(variant));
    t.kind = std::string(to_string(kind));
    t.write_csv(out);
  } else {
    ScalingTable t = strong_scaling_experiment(spec.n, spec.p_list, spec.repetitions, runner);
    t.variant = std::string(to_string(variant));
    t.kind = std::string(to_string(kind));
    t.write_csv(out);
  }
}

// register

RegisterReport run_register(const ExperimentSpec& spec) {
  using clock = std::chrono::steady_clock;
  std::vector<reg::GridImage> frames;
  std::optional<reg::SeriesGroundTruth> truth;
  if (!spec.manifest.empty()) {
    std::size_t index = 0;
    for (const auto& path : reg::read_manifest(spec.manifest)) {
      try {
        frames.push_back(reg::read_frame(path));
      } catch (const IoError& e) {
        throw IoError("frame " + std::to_string(index) + ": " + e.what());
      }
      ++index;
    }
    if (frames.size() < 2) throw ConfigError("manifest lists fewer than 2 frames");
  } else {
    reg::Series s = reg::generate_series(spec.series, spec.seed);
    frames = std::move(s.frames);
    truth = std::move(s.truth);
  }

  auto store = std::make_shared<const reg::FrameStore>(frames, spec.ml);
  RegisterReport report;
  report.p = std::min(spec.p_list.front(), frames.size() - 1);
  unsigned threads = spec.threads != 0 ? spec.threads : static_cast<unsigned>(report.p);
  if (const unsigned hw = std::thread::hardware_concurrency(); hw != 0) threads = std::min(threads, hw);

  const auto t0 = clock::now();
  reg::PreprocessResult pre = reg::preprocess_series(*store, spec.gf, std::max(1u, threads));
  report.preprocess_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  report.neighbors = pre.neighbors;
  for (std::size_t i = 0; i < pre.seconds.size(); ++i) {
    report.preprocess_timing.push_back(
        {i, static_cast<int>(i), static_cast<int>(i + 1), pre.seconds[i]});
  }

  const Operator<reg::SeriesDeformation> base = reg::registration_operator(store, spec.gf);
  auto log = std::make_shared<std::vector<reg::TimingRecord>>();
  auto log_mutex = std::make_shared<std::mutex>();
  const Operator<reg::SeriesDeformation> timed(
      base.name(), base.identity(),
      [base, log, log_mutex](const reg::SeriesDeformation& a, const reg::SeriesDeformation& b) {
        const auto start = clock::now();
        reg::SeriesDeformation r = base.apply(a, b);
        const double s = std::chrono::duration<double>(clock::now() - start).count();
        std::lock_guard<std::mutex> lock(*log_mutex);
        log->push_back({log->size(), a.is_identity() ? b.from : a.from, r.to, s});
        return r;
      },
      [base](const reg::SeriesDeformation& a, const reg::SeriesDeformation& b, double tol) {
        return base.approx_eq(a, b, tol);
      },
      base.tolerance());

  const auto t1 = clock::now();
  const RunResult<reg::SeriesDeformation> run = run_distributed(
      pre.neighbors, timed, spec.variants.front(), spec.kinds.front(), report.p);
  report.scan_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  report.scan_timing = *log;

  report.cumulative.push_back(reg::RigidDeformation::identity());
  for (std::size_t i = 0; i < run.values.size(); ++i) {
    const reg::SeriesDeformation& d = run.values[i];
    if (d.from != 0 || d.to != static_cast<int>(i + 1)) {
      throw RegistrationError("scan result " + std::to_string(i) + " maps frame " +
                              std::to_string(d.from) + " to " + std::to_string(d.to) +
                              ", expected 0 to " + std::to_string(i + 1));
    }
    report.cumulative.push_back(d.phi);
  }

  if (truth) {
    double worst = 0.0;
    for (std::size_t i = 0; i < report.cumulative.size(); ++i) {
      worst = std::max(worst, reg::max_displacement(report.cumulative[i], truth->cumulative[i]));
    }
    report.max_error_pixels = worst / store->fine_spacing();
  }
  report.mean_frame = reg::mean_aligned_frame(frames, report.cumulative);
  return report;
}

void write_register_outputs(const std::filesystem::path& dir, const RegisterReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    std::ofstream out = open("deformations.txt");
    reg::write_deformations(out, report.cumulative);
  }
  {
    std::ofstream out = open("timing.csv");
    reg::write_timing_csv(out, report.scan_timing);
  }
  {
    std::ofstream out = open("preprocess_timing.csv");
    reg::write_timing_csv(out, report.preprocess_timing);
  }
  reg::write_pgm(dir / "mean.pgm", report.mean_frame);
}

}  // namespace scanforge::bench

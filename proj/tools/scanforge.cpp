#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "scanforge/bench.hpp"
#include "scanforge/error.hpp"

using namespace scanforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Flags {
  std::string config;
  std::optional<std::string> seed;
  std::vector<std::pair<std::string, std::string>> values;
};

void add_spec_flags(CLI::App& sub, Flags& flags) {
  sub.add_option("--config", flags.config, "key = value file applied before flags");
  sub.add_option_function<std::string>(
      "--seed", [&flags](const std::string& v) { flags.seed = v; },
      "random seed (overrides SCANFORGE_SEED)");
  for (const bench::KeyInfo& key : bench::spec_keys()) {
    const std::string name = key.name;
    if (name == "seed") continue;
    sub.add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags.values.emplace_back(name, v); }, key.help);
  }
}

bench::ExperimentSpec build_spec(const std::string& command, const Flags& flags) {
  return bench::assemble_spec(command, flags.config, flags.seed, std::getenv("SCANFORGE_SEED"),
                              flags.values);
}

/// Writes to the output file when one is given, else to stdout.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  fn(out);
  if (!out) throw IoError("error while writing " + path);
}

void warn_oversubscription(std::size_t p) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw != 0 && p > hw) {
    std::cerr << "scanforge: warning: " << p << " workers on " << hw
              << " hardware threads; timings are oversubscribed\n";
  }
}

int cmd_verify(const bench::ExperimentSpec& spec) {
  const auto rows = bench::run_verify(spec);
  bool ok = true;
  emit(spec.output, [&](std::ostream& out) { ok = bench::write_verify(out, rows); });
  return ok ? kExitOk : kExitMismatch;
}

int cmd_counts(const bench::ExperimentSpec& spec) {
  std::vector<bench::CountsRow> rows;
  const std::vector<std::size_t> widths =
      spec.widths.empty() ? std::vector<std::size_t>{spec.n} : spec.widths;
  for (ScanKind kind : spec.kinds) {
    for (std::size_t n : widths) rows.push_back(bench::count_kind(kind, n));
  }
  bool ok = true;
  emit(spec.output, [&](std::ostream& out) { ok = bench::write_counts(out, rows); });
  return ok ? kExitOk : kExitMismatch;
}

int cmd_simulate(const bench::ExperimentSpec& spec) {
  const auto rows = bench::run_simulate(spec);
  emit(spec.output, [&](std::ostream& out) { bench::write_simulate_csv(out, rows); });
  if (!spec.gnuplot.empty()) {
    emit(spec.gnuplot, [&](std::ostream& out) {
      bench::write_simulate_gnuplot(out, spec.output.empty() ? "simulate.csv" : spec.output);
    });
  }
  return kExitOk;
}

int cmd_scaling(const bench::ExperimentSpec& spec) {
  if (spec.runner == "threads") {
    for (std::size_t p : spec.p_list) warn_oversubscription(p);
  }
  emit(spec.output, [&](std::ostream& out) { bench::run_scaling(spec, out); });
  return kExitOk;
}

int cmd_register(const bench::ExperimentSpec& spec) {
  warn_oversubscription(spec.p_list.front());
  const bench::RegisterReport report = bench::run_register(spec);
  const std::string dir = spec.output.empty() ? "register-output" : spec.output;
  bench::write_register_outputs(dir, report);
  std::printf("frames            %zu\n", report.cumulative.size());
  std::printf("workers           %zu (%s, %s)\n", report.p,
              std::string(to_string(spec.variants.front())).c_str(),
              std::string(to_string(spec.kinds.front())).c_str());
  std::printf("preprocessing     %.3f s, %zu A calls\n", report.preprocess_seconds,
              report.preprocess_timing.size());
  std::printf("scan              %.3f s, %zu B applications\n", report.scan_seconds,
              report.scan_timing.size());
  if (report.max_error_pixels) {
    std::printf("max error         %.4f fine-grid spacings\n", *report.max_error_pixels);
  }
  std::printf("outputs           %s\n", dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scanforge: prefix-scan networks, distributed scan strategies and series registration"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const bench::ExperimentSpec&);
  };
  const Sub subs[] = {
      {"verify", "check prefix networks symbolically and against the size/depth formulas",
       cmd_verify},
      {"counts", "count span and work of each scan kind and compare with the formulas",
       cmd_counts},
      {"simulate", "simulated speedups next to the theoretical bounds (CSV)", cmd_simulate},
      {"register", "register a frame series with a distributed prefix sum", cmd_register},
      {"scaling", "strong or weak scaling table with speedup and sigma (CSV)", cmd_scaling},
  };
  std::map<std::string, Flags> flags;
  for (const Sub& s : subs) add_spec_flags(*app.add_subcommand(s.name, s.help), flags[s.name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (const Sub& s : subs) {
    if (!app.got_subcommand(s.name)) continue;
    try {
      return s.run(build_spec(s.name, flags[s.name]));
    } catch (const ConfigError& e) {
      std::cerr << "scanforge: config error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const IoError& e) {
      std::cerr << "scanforge: I/O error: " << e.what() << '\n';
      return kExitIo;
    } catch (const SizeError& e) {
      std::cerr << "scanforge: size error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const Error& e) {
      std::cerr << "scanforge: error: " << e.what() << '\n';
      return kExitMismatch;
    }
  }
  return kExitUsage;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scanforge/cost.hpp"
#include "scanforge/network.hpp"
#include "scanforge/registration/energy.hpp"
#include "scanforge/registration/io.hpp"
#include "scanforge/registration/series.hpp"
#include "scanforge/scan_kind.hpp"
#include "scanforge/simulate.hpp"

namespace scanforge::bench {

/// Everything a command needs. Filled from defaults, then a key=value
/// config file, then SCANFORGE_SEED, then command-line flags.
struct ExperimentSpec {
  std::string command;
  std::vector<ScanKind> kinds{ScanKind::Blelloch};
  std::vector<StrategyVariant> variants{StrategyVariant::GeneralExclusive};
  std::size_t n = 4096;
  std::vector<std::size_t> widths;  ///< verify; empty means 1, 2, 4, ..., 256
  std::vector<std::size_t> p_list{1, 2, 4, 8, 16};
  std::string mode = "strong";       ///< scaling: strong | weak
  std::size_t k = 8;                 ///< weak scaling: elements per worker
  std::string runner = "simulated";  ///< simulated | threads
  double unit_ms = 1.0;              ///< threads runner: milliseconds per unit of cost

  std::string cost = "constant";  ///< constant | uniform | lognormal | trace
  double cost_c = 1.0;
  double cost_lo = 0.5;
  double cost_hi = 1.5;
  double cost_mu = 0.0;
  double cost_sigma = 0.5;
  std::string cost_trace;  ///< timing CSV written by `register`
  double latency = 0.0;

  std::uint64_t seed = 0;
  std::size_t repetitions = 5;
  std::string output;   ///< file for CSV commands, directory for `register`
  std::string network;  ///< verify: network text file

  reg::SeriesSpec series;
  reg::MultilevelConfig ml;
  reg::GradientFlowConfig gf;
  std::string manifest;  ///< register: frames from disk instead of the generator
  unsigned threads = 0;  ///< register preprocessing threads; 0 means p
  std::string gnuplot;   ///< simulate: optional gnuplot script path

  /// Throws ConfigError.
  void validate() const;
};

struct KeyInfo {
  const char* name;
  const char* help;
};

/// Every key accepted in config files and as --<key> flags.
const std::vector<KeyInfo>& spec_keys();

/// Throws ConfigError for unknown keys and unparsable values.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// "key = value" lines; '#' starts a comment. Throws ConfigError with the line number.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in);
void load_config(ExperimentSpec& spec, const std::filesystem::path& path);

/// Flag wins over the environment value; nullopt when neither is set.
std::optional<std::uint64_t> resolve_seed(const std::optional<std::string>& flag,
                                          const char* env_value);

/// Defaults, then the config file (if any), then the environment seed, then
/// flags in order. A --seed flag beats the environment. Validates the result.
ExperimentSpec assemble_spec(const std::string& command, const std::string& config_path,
                             const std::optional<std::string>& seed_flag, const char* env_seed,
                             const std::vector<std::pair<std::string, std::string>>& flags);

/// "a,b,c" with "lo..hi" expanding to lo, 2 lo, 4 lo, ... <= hi.
std::vector<std::size_t> parse_size_list(std::string_view text);

CostModel make_cost_model(const ExperimentSpec& spec);

// verify

struct VerifyRow {
  std::string name;
  std::size_t n = 0;
  std::size_t size = 0;
  std::size_t depth = 0;
  std::optional<std::uint64_t> formula_size;
  std::optional<std::uint64_t> formula_depth;
  std::int64_t deficiency = 0;
  bool valid = false;
  bool formula_ok = true;
  std::vector<LaneReport> bad_lanes;
};

VerifyRow verify_row(const ScanNetwork& net, std::optional<ScanKind> kind);
std::vector<VerifyRow> run_verify(const ExperimentSpec& spec);
/// Returns true iff every row is valid and matches its formula.
bool write_verify(std::ostream& out, const std::vector<VerifyRow>& rows);

// counts

struct CountsRow {
  ScanKind kind = ScanKind::Serial;
  std::size_t n = 0;
  std::uint64_t span = 0;  ///< counted: steps with applications
  std::uint64_t work = 0;  ///< counted: operator applications of the executor
  std::uint64_t formula_span = 0;
  std::uint64_t formula_work = 0;
  bool match() const { return span == formula_span && work == formula_work; }
};

CountsRow count_kind(ScanKind kind, std::size_t n);
inline constexpr const char* kCountsCsvHeader = "kind,n,span,work,formula_span,formula_work,match";
bool write_counts(std::ostream& out, const std::vector<CountsRow>& rows);

// simulate

struct SimRow {
  StrategyVariant variant = StrategyVariant::GeneralExclusive;
  ScanKind kind = ScanKind::Serial;
  std::size_t n = 0;
  std::size_t p = 0;
  double makespan = 0.0;
  double serial_time = 0.0;
  double speedup = 0.0;
  std::optional<double> theoretical_speedup;
  std::optional<std::uint64_t> total_span;
  std::optional<std::uint64_t> total_work;
  std::uint64_t applications = 0;
  double efficiency = 0.0;
  double max_idle = 0.0;
};

inline constexpr const char* kSimulateCsvHeader =
    "variant,kind,n,p,makespan,serial_time,speedup,theoretical_speedup,total_span,total_work,"
    "applications,efficiency,max_idle";

std::vector<SimRow> run_simulate(const ExperimentSpec& spec);
void write_simulate_csv(std::ostream& out, const std::vector<SimRow>& rows);
/// Plots speedup and theoretical speedup over p from a simulate CSV.
void write_simulate_gnuplot(std::ostream& out, const std::string& csv_path);

// scaling

/// Strong or weak scaling table for the first variant and kind of the spec.
/// The threads runner sleeps cost samples (in milliseconds) inside a real
/// threaded scan.
void run_scaling(const ExperimentSpec& spec, std::ostream& out);

// register

struct RegisterReport {
  std::vector<reg::SeriesDeformation> neighbors;
  std::vector<reg::RigidDeformation> cumulative;  ///< phi_{0,i}; index 0 is identity
  std::vector<reg::TimingRecord> preprocess_timing;
  std::vector<reg::TimingRecord> scan_timing;
  std::optional<double> max_error_pixels;  ///< against generator truth
  double preprocess_seconds = 0.0;
  double scan_seconds = 0.0;
  std::size_t p = 1;
  reg::GridImage mean_frame;
};

/// Preprocessing plus the prefix sum of function B with the first variant
/// and kind of the spec over p = p_list.front() workers.
RegisterReport run_register(const ExperimentSpec& spec);
/// deformations.txt, timing.csv, preprocess_timing.csv, mean.pgm in `dir`.
void write_register_outputs(const std::filesystem::path& dir, const RegisterReport& report);

}  // namespace scanforge::bench

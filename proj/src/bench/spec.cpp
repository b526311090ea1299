#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <string>

#include "scanforge/bench.hpp"
#include "scanforge/error.hpp"

namespace scanforge::bench {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + t + "'");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + t + "'");
  }
  return v;
}

std::vector<ScanKind> parse_kinds(std::string_view text) {
  if (trim(text) == "all") return {kAllScanKinds.begin(), kAllScanKinds.end()};
  std::vector<ScanKind> out;
  for (const std::string& part : split(text, ',')) {
    const auto k = parse_scan_kind(part);
    if (!k) throw ConfigError("kind: unknown scan kind '" + part + "'");
    out.push_back(*k);
  }
  return out;
}

std::vector<StrategyVariant> parse_variants(std::string_view text) {
  if (trim(text) == "all") return {std::begin(kAllVariants), std::end(kAllVariants)};
  std::vector<StrategyVariant> out;
  for (const std::string& part : split(text, ',')) {
    const auto v = parse_variant(part);
    if (!v) throw ConfigError("variant: unknown strategy variant '" + part + "'");
    out.push_back(*v);
  }
  return out;
}

std::string normalize_key(std::string_view key) {
  std::string k = trim(key);
  std::replace(k.begin(), k.end(), '_', '-');
  std::replace(k.begin(), k.end(), '.', '-');
  return k;
}

using Setter = std::function<void(ExperimentSpec&, std::string_view)>;

struct KeyEntry {
  KeyInfo info;
  Setter set;
};

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = {
      {{"kind", "scan kinds, comma separated, or 'all'"},
       [](ExperimentSpec& s, std::string_view v) { s.kinds = parse_kinds(v); }},
      {{"variant", "strategy variants, comma separated, or 'all'"},
       [](ExperimentSpec& s, std::string_view v) { s.variants = parse_variants(v); }},
      {{"n", "number of elements"},
       [](ExperimentSpec& s, std::string_view v) { s.n = parse_int<std::size_t>("n", v); }},
      {{"widths", "verify: network widths, e.g. 1..256 or 3,5,8"},
       [](ExperimentSpec& s, std::string_view v) { s.widths = parse_size_list(v); }},
      {{"p", "worker counts, e.g. 1..512 or 1,2,4"},
       [](ExperimentSpec& s, std::string_view v) { s.p_list = parse_size_list(v); }},
      {{"mode", "scaling: strong or weak"},
       [](ExperimentSpec& s, std::string_view v) { s.mode = trim(v); }},
      {{"k", "weak scaling: elements per worker"},
       [](ExperimentSpec& s, std::string_view v) { s.k = parse_int<std::size_t>("k", v); }},
      {{"runner", "scaling: simulated or threads"},
       [](ExperimentSpec& s, std::string_view v) { s.runner = trim(v); }},
      {{"unit-ms", "threads runner: milliseconds slept per unit of cost"},
       [](ExperimentSpec& s, std::string_view v) { s.unit_ms = parse_double("unit-ms", v); }},
      {{"cost", "cost model: constant, uniform, lognormal or trace"},
       [](ExperimentSpec& s, std::string_view v) { s.cost = trim(v); }},
      {{"cost-c", "constant cost per application"},
       [](ExperimentSpec& s, std::string_view v) { s.cost_c = parse_double("cost-c", v); }},
      {{"cost-lo", "uniform cost lower bound"},
       [](ExperimentSpec& s, std::string_view v) { s.cost_lo = parse_double("cost-lo", v); }},
      {{"cost-hi", "uniform cost upper bound"},
       [](ExperimentSpec& s, std::string_view v) { s.cost_hi = parse_double("cost-hi", v); }},
      {{"cost-mu", "lognormal cost: mean of log"},
       [](ExperimentSpec& s, std::string_view v) { s.cost_mu = parse_double("cost-mu", v); }},
      {{"cost-sigma", "lognormal cost: std of log"},
       [](ExperimentSpec& s, std::string_view v) { s.cost_sigma = parse_double("cost-sigma", v); }},
      {{"cost-trace", "trace cost: timing CSV written by register"},
       [](ExperimentSpec& s, std::string_view v) { s.cost_trace = trim(v); }},
      {{"latency", "message latency in cost units"},
       [](ExperimentSpec& s, std::string_view v) { s.latency = parse_double("latency", v); }},
      {{"seed", "random seed"},
       [](ExperimentSpec& s, std::string_view v) { s.seed = parse_int<std::uint64_t>("seed", v); }},
      {{"repetitions", "repetitions per scaling point"},
       [](ExperimentSpec& s, std::string_view v) {
         s.repetitions = parse_int<std::size_t>("repetitions", v);
       }},
      {{"output", "output file (CSV commands) or directory (register)"},
       [](ExperimentSpec& s, std::string_view v) { s.output = trim(v); }},
      {{"network", "verify: network text file"},
       [](ExperimentSpec& s, std::string_view v) { s.network = trim(v); }},
      {{"gnuplot", "simulate: also write a gnuplot script here"},
       [](ExperimentSpec& s, std::string_view v) { s.gnuplot = trim(v); }},
      {{"frames", "register: synthetic series length"},
       [](ExperimentSpec& s, std::string_view v) {
         s.series.frames = parse_int<std::size_t>("frames", v);
       }},
      {{"level", "register: synthetic frame grid level"},
       [](ExperimentSpec& s, std::string_view v) { s.series.level = parse_int<int>("level", v); }},
      {{"snr", "register: pattern std over noise std, <= 0 for no noise"},
       [](ExperimentSpec& s, std::string_view v) { s.series.snr = parse_double("snr", v); }},
      {{"drift-t", "register: std of per-frame translation drift"},
       [](ExperimentSpec& s, std::string_view v) {
         s.series.drift_sigma_t = parse_double("drift-t", v);
       }},
      {{"drift-alpha", "register: std of per-frame rotation drift (radians)"},
       [](ExperimentSpec& s, std::string_view v) {
         s.series.drift_sigma_alpha = parse_double("drift-alpha", v);
       }},
      {{"manifest", "register: text file listing frame paths"},
       [](ExperimentSpec& s, std::string_view v) { s.manifest = trim(v); }},
      {{"m0", "coarsest registration level"},
       [](ExperimentSpec& s, std::string_view v) { s.ml.m0 = parse_int<int>("m0", v); }},
      {{"m1", "finest registration level"},
       [](ExperimentSpec& s, std::string_view v) { s.ml.m1 = parse_int<int>("m1", v); }},
      {{"presmooth", "smoothing passes before restriction"},
       [](ExperimentSpec& s, std::string_view v) { s.ml.presmooth = parse_int<int>("presmooth", v); }},
      {{"epsilon", "gradient flow: stop when the energy decrease is below this"},
       [](ExperimentSpec& s, std::string_view v) { s.gf.epsilon = parse_double("epsilon", v); }},
      {{"iter-max", "gradient flow: iterations per level"},
       [](ExperimentSpec& s, std::string_view v) { s.gf.iter_max = parse_int<int>("iter-max", v); }},
      {{"tau-max", "gradient flow: largest step size"},
       [](ExperimentSpec& s, std::string_view v) { s.gf.tau_max = parse_double("tau-max", v); }},
      {{"armijo-sigma", "Armijo sufficient decrease constant"},
       [](ExperimentSpec& s, std::string_view v) { s.gf.sigma = parse_double("armijo-sigma", v); }},
      {{"lambda", "rigid regularizer weight"},
       [](ExperimentSpec& s, std::string_view v) { s.gf.lambda = parse_double("lambda", v); }},
      {{"threads", "register: preprocessing threads, 0 means p"},
       [](ExperimentSpec& s, std::string_view v) { s.threads = parse_int<unsigned>("threads", v); }},
  };
  return table;
}

}  // namespace

const std::vector<KeyInfo>& spec_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> k;
    for (const KeyEntry& e : key_table()) k.push_back(e.info);
    return k;
  }();
  return keys;
}

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  const std::string k = normalize_key(key);
  for (const KeyEntry& e : key_table()) {
    if (k == e.info.name) {
      e.set(spec, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), trim(t.substr(eq + 1)));
  }
  return out;
}

void load_config(ExperimentSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  for (const auto& [key, value] : parse_config(in)) {
    try {
      apply_setting(spec, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
}

std::optional<std::uint64_t> resolve_seed(const std::optional<std::string>& flag,
                                          const char* env_value) {
  if (flag) return parse_int<std::uint64_t>("--seed", *flag);
  if (env_value != nullptr && *env_value != '\0') {
    return parse_int<std::uint64_t>("SCANFORGE_SEED", env_value);
  }
  return std::nullopt;
}

ExperimentSpec assemble_spec(const std::string& command, const std::string& config_path,
                             const std::optional<std::string>& seed_flag, const char* env_seed,
                             const std::vector<std::pair<std::string, std::string>>& flags) {
  ExperimentSpec spec;
  spec.command = command;
  if (!config_path.empty()) load_config(spec, config_path);
  if (auto seed = resolve_seed(seed_flag, env_seed)) spec.seed = *seed;
  for (const auto& [key, value] : flags) apply_setting(spec, key, value);
  spec.validate();
  return spec;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const std::string& part : split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_int<std::size_t>("size list", part));
      continue;
    }
    const auto lo = parse_int<std::size_t>("size list", part.substr(0, dots));
    const auto hi = parse_int<std::size_t>("size list", part.substr(dots + 2));
    if (lo == 0 || lo > hi) throw ConfigError("size range '" + part + "' needs 0 < lo <= hi");
    for (std::size_t v = lo; v <= hi; v *= 2) {
      out.push_back(v);
      if (v > std::numeric_limits<std::size_t>::max() / 2) break;
    }
  }
  return out;
}

CostModel make_cost_model(const ExperimentSpec& spec) {
  CostModel m;
  if (spec.cost == "constant") {
    m = CostModel::constant(spec.cost_c, spec.latency);
  } else if (spec.cost == "uniform") {
    m = CostModel::uniform(spec.cost_lo, spec.cost_hi, spec.seed, spec.latency);
  } else if (spec.cost == "lognormal") {
    m = CostModel::lognormal(spec.cost_mu, spec.cost_sigma, spec.seed, spec.latency);
  } else if (spec.cost == "trace") {
    if (spec.cost_trace.empty()) throw ConfigError("cost = trace needs cost-trace");
    std::ifstream in(spec.cost_trace);
    if (!in) throw IoError("cannot open cost trace " + spec.cost_trace);
    m = CostModel::from_trace(reg::timing_costs(reg::read_timing_csv(in)), spec.seed,
                              spec.latency);
  } else {
    throw ConfigError("unknown cost model '" + spec.cost + "'");
  }
  m.validate();
  return m;
}

void ExperimentSpec::validate() const {
  if (kinds.empty()) throw ConfigError("kind list is empty");
  if (variants.empty()) throw ConfigError("variant list is empty");
  if (n == 0) throw ConfigError("n must be positive");
  if (p_list.empty()) throw ConfigError("p list is empty");
  if (std::find(p_list.begin(), p_list.end(), std::size_t{0}) != p_list.end()) {
    throw ConfigError("worker counts must be positive");
  }
  if (std::find(widths.begin(), widths.end(), std::size_t{0}) != widths.end()) {
    throw ConfigError("widths must be positive");
  }
  if (mode != "strong" && mode != "weak") throw ConfigError("mode must be strong or weak");
  if (runner != "simulated" && runner != "threads") {
    throw ConfigError("runner must be simulated or threads");
  }
  if (!(unit_ms >= 0.0)) throw ConfigError("unit-ms must be >= 0");
  if (k == 0) throw ConfigError("k must be positive");
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  if (!(latency >= 0.0)) throw ConfigError("latency must be >= 0");
  if (cost != "trace") make_cost_model(*this);
  else if (cost_trace.empty()) throw ConfigError("cost = trace needs cost-trace");
  series.validate();
  ml.validate();
  gf.validate();
}

}  // namespace scanforge::bench

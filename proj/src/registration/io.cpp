#include "scanforge/registration/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "scanforge/error.hpp"

namespace scanforge::reg {

namespace {

constexpr char kRawMagic[8] = {'S', 'F', 'G', 'R', 'I', 'D', '0', '1'};

int level_for_side(std::size_t side, const std::filesystem::path& path) {
  for (int level = 0; level <= 14; ++level) {
    if (side_for_level(level) == side) return level;
  }
  throw IoError(path.string() + ": side " + std::to_string(side) + " is not 2^l + 1");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

// Next header token of a PGM file, skipping whitespace and comments.
std::string pgm_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw IoError(path.string() + ": truncated PGM header");
  return tok;
}

std::size_t pgm_number(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = pgm_token(in, path);
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": bad PGM header field '" + tok + "'");
  }
}

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const GridImage& f, int maxval, double lo,
               double hi) {
  if (maxval < 1 || maxval > 65535) throw IoError("PGM maxval must be in [1, 65535]");
  if (lo == hi) {
    const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
    lo = *mn;
    hi = *mx;
  }
  const double scale = hi > lo ? static_cast<double>(maxval) / (hi - lo) : 0.0;
  std::ofstream out = open_out(path);
  out << "P5\n" << f.side() << ' ' << f.side() << '\n' << maxval << '\n';
  const bool wide = maxval > 255;
  // Top row first, so y points up when viewed.
  for (std::size_t r = 0; r < f.side(); ++r) {
    const std::size_t j = f.side() - 1 - r;
    for (std::size_t i = 0; i < f.side(); ++i) {
      const double q = std::clamp(std::round((f.at(i, j) - lo) * scale), 0.0,
                                  static_cast<double>(maxval));
      const auto v = static_cast<unsigned>(q);
      if (wide) out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

GridImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  if (pgm_token(in, path) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  const std::size_t w = pgm_number(in, path);
  const std::size_t h = pgm_number(in, path);
  const std::size_t maxval = pgm_number(in, path);
  if (w != h) throw IoError(path.string() + ": PGM must be square");
  if (maxval < 1 || maxval > 65535) throw IoError(path.string() + ": bad maxval");
  GridImage f(level_for_side(w, path));
  const bool wide = maxval > 255;
  for (std::size_t r = 0; r < f.side(); ++r) {
    const std::size_t j = f.side() - 1 - r;
    for (std::size_t i = 0; i < f.side(); ++i) {
      unsigned v = static_cast<unsigned char>(in.get());
      if (wide) v = (v << 8) | static_cast<unsigned char>(in.get());
      f.at(i, j) = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  if (!in) throw IoError(path.string() + ": truncated PGM data");
  return f;
}

void write_raw(const std::filesystem::path& path, const GridImage& f) {
  std::ofstream out = open_out(path);
  out.write(kRawMagic, sizeof kRawMagic);
  const std::int32_t level = to_little<std::int32_t>(f.level());
  const std::int32_t reserved = 0;
  out.write(reinterpret_cast<const char*>(&level), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  for (double v : f.values()) {
    const float x = to_little(static_cast<float>(v));
    out.write(reinterpret_cast<const char*>(&x), 4);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

GridImage read_raw(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  char magic[8];
  std::int32_t level = 0, reserved = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&level), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  if (!in || std::memcmp(magic, kRawMagic, 8) != 0) {
    throw IoError(path.string() + ": not a raw float32 grid");
  }
  level = to_little(level);
  if (level < 0 || level > 14) throw IoError(path.string() + ": bad level " + std::to_string(level));
  GridImage f(level);
  for (double& v : f.values()) {
    float x;
    in.read(reinterpret_cast<char*>(&x), 4);
    v = to_little(x);
  }
  if (!in) throw IoError(path.string() + ": truncated raw grid");
  return f;
}

GridImage read_frame(const std::filesystem::path& path) {
  if (path.extension() == ".pgm") return read_pgm(path);
  return read_raw(path);
}

void write_deformations(std::ostream& out, const std::vector<RigidDeformation>& phis) {
  char line[96];
  for (const auto& phi : phis) {
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", phi.alpha, phi.t[0], phi.t[1]);
    out << line;
  }
}

std::vector<RigidDeformation> read_deformations(std::istream& in) {
  std::vector<RigidDeformation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    RigidDeformation phi;
    std::string extra;
    if (!(ss >> phi.alpha >> phi.t[0] >> phi.t[1]) || (ss >> extra)) {
      throw IoError("deformation line " + std::to_string(lineno) + ": expected 'alpha t0 t1'");
    }
    out.push_back(phi);
  }
  return out;
}

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::filesystem::path p(line.substr(first, last - first + 1));
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back(p);
  }
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::filesystem::path>& frames) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& p : frames) out << p.string() << '\n';
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRecord>& records) {
  out << "index,from,to,seconds\n";
  char line[128];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%zu,%d,%d,%.17g\n", r.index, r.from, r.to, r.seconds);
    out << line;
  }
}

std::vector<TimingRecord> read_timing_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,from,to,seconds", 0) != 0) {
    throw IoError("timing CSV must start with 'index,from,to,seconds'");
  }
  std::vector<TimingRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    TimingRecord r;
    if (std::sscanf(line.c_str(), "%zu,%d,%d,%lf", &r.index, &r.from, &r.to, &r.seconds) != 4) {
      throw IoError("timing CSV line " + std::to_string(lineno) + " is malformed");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<double> timing_costs(const std::vector<TimingRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.seconds);
  return out;
}

}  // namespace scanforge::reg

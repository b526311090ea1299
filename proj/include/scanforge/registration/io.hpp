#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scanforge/registration/grid_image.hpp"
#include "scanforge/registration/rigid.hpp"
#include "scanforge/registration/series.hpp"

namespace scanforge::reg {

/// Binary PGM (P5). Values are mapped linearly from [lo, hi] to [0, maxval];
/// when lo == hi the image range is used. Reading maps back to [0, 1].
void write_pgm(const std::filesystem::path& path, const GridImage& f, int maxval = 65535,
               double lo = 0.0, double hi = 0.0);
GridImage read_pgm(const std::filesystem::path& path);

/// Raw little-endian float32 grid behind a 16-byte header:
/// magic "SFGRID01", int32 level, int32 reserved.
void write_raw(const std::filesystem::path& path, const GridImage& f);
GridImage read_raw(const std::filesystem::path& path);

/// Dispatch on extension: .pgm or anything else as raw.
GridImage read_frame(const std::filesystem::path& path);

/// Text lines "alpha t0 t1".
void write_deformations(std::ostream& out, const std::vector<RigidDeformation>& phis);
std::vector<RigidDeformation> read_deformations(std::istream& in);

/// One frame path per line; blank lines and '#' comments are skipped.
/// Relative paths are resolved against the manifest's directory.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::filesystem::path>& frames);

/// "index,from,to,seconds" per operator application.
struct TimingRecord {
  std::size_t index = 0;
  int from = -1;
  int to = -1;
  double seconds = 0.0;
};
void write_timing_csv(std::ostream& out, const std::vector<TimingRecord>& records);
std::vector<TimingRecord> read_timing_csv(std::istream& in);
std::vector<double> timing_costs(const std::vector<TimingRecord>& records);

}  // namespace scanforge::reg

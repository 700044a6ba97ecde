#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dk/diagnostics.hpp"
#include "dk/particles.hpp"
#include "dk/solver.hpp"

namespace dk {

inline constexpr int kSchemaVersion = 1;

/// Header "t,mass,entropy,dissipation,min_rho,l2,l4", one row per step,
/// 17 significant digits.
void write_series_csv(std::ostream& out, const TrajectoryRecord& rec);

/// 16-byte header (magic "DKS1", then uint32 n, d, count in host byte
/// order) followed by each field as row-major float64.
void write_snapshots(std::ostream& out, std::span<const RealField> fields);
/// Throws std::runtime_error on a bad header or short read.
std::vector<RealField> read_snapshots(std::istream& in);

/// Header "bin_lo,bin_hi,weight".
void write_histogram_csv(std::ostream& out, const KineticHistogram& h);

/// Rows "t,i,x1[,x2[,x3]]"; the header is written when `header` is set.
void write_positions_csv(std::ostream& out, const ParticleState& state, bool header = true);

/// Writes <prefix>.csv, <prefix>.bin and <prefix>.manifest.json into dir.
/// The manifest carries the schema version, seed, config hash, grid, the
/// solver description, the snapshot times and the caller's config text.
void write_trajectory(const std::filesystem::path& dir, const std::string& prefix, const TrajectoryRecord& rec,
                      const GridSpec& grid, const std::string& config_text);

std::string hex64(std::uint64_t x);

}  // namespace dk

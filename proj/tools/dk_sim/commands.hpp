#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<int> threads;
};

const std::vector<std::string>& subcommands();

/// Worker count from --threads, then DK_SIM_THREADS, then the hardware.
int resolve_threads(const std::optional<int>& flag);

/// Runs one subcommand and maps failures to exit codes: 2 for configuration
/// errors, 3 for numerical aborts.  On failure a JSON error record goes to
/// `err` and to <out>/error.json.
int run_subcommand(const std::string& name, const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace dk::cli

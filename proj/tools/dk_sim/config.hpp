#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dk/grid.hpp"
#include "dk/kernels.hpp"
#include "dk/noise.hpp"
#include "dk/solver.hpp"

namespace dk::cli {

/// Flat INI document: [section] headers, key = value lines, '#' or ';'
/// comments.  Keys keep their order of appearance.
struct IniDocument {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string text;

  const std::string* find(const std::string& section, const std::string& key) const;
};

/// Throws ConfigError (with the line number) on malformed lines or duplicates.
IniDocument parse_ini(std::string_view text);

using Density = std::function<double(std::span<const double>)>;

struct InitialData {
  std::string preset = "constant";  // constant | sine | modes | bump | mixture | file
  double value = 1.0;
  double amplitude = 0.5;
  double width = 0.25;
  std::filesystem::path file;
};

struct ExperimentConfig {
  IniDocument doc;

  GridSpec grid;

  std::string kernel_type = "zero";  // zero | biot_savart | sine | table
  KernelSpec kernel;

  std::string noise_type = "none";  // none | uv
  NoiseSpec noise;
  double noise_amplitude = 0.0;

  int sigma_n = 16;
  bool sigma_correction = true;

  double t_start = 0.0;
  double t_end = 0.01;
  double dt = 1e-4;
  int snapshot_stride = 0;

  std::filesystem::path out_dir = "out";
  bool write_snapshots = true;

  std::string profile = "exploratory";  // theory | exploratory
  std::uint64_t seed = 0;
  int replicas = 1;
  std::optional<double> gamma;
  ClampPolicy clamp = ClampPolicy::off;
  InitialData initial;
  InitialData initial_b;
  double perturbation = 0.0;
  double perturbation_width = 0.1;
  std::vector<int> n_ladder;
  std::vector<double> gamma_ladder;
  std::vector<long> particle_counts{1000};
  double particle_dt = 1e-3;
  double bandwidth = 0.0;  // 0: two grid spacings
  int kinetic_levels = 10;
  int tail_max_M = 8;

  std::vector<std::string> warnings;

  /// Closed-form density of a preset (throws for "file").
  Density density(const InitialData& d) const;
  /// Upper bound of a preset density, for rejection sampling.
  double density_bound(const InitialData& d) const;
  RealField initial_field(const InitialData& d) const;
  /// Second initial datum of the uniqueness experiment: initial_b plus
  /// perturbation times a unit-mass bump.
  RealField perturbed_field() const;
  SolverConfig solver_config(std::uint64_t seed) const;
  double effective_bandwidth() const;
};

/// Parses and validates; relative file paths resolve against base_dir.
/// Throws ConfigError on unknown sections or keys, bad values, or a kernel
/// failing the A1 audit under the theory profile.
ExperimentConfig load_config(std::string_view text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config_file(const std::filesystem::path& path);

}  // namespace dk::cli

#pragma once

// Run configuration and its text format.
//
// Grammar (one item per line):
//   # comment              ignored, as are blank lines
//   [section]              starts a section
//   key = value            assigns section.key; surrounding blanks trimmed
// Lists are comma-separated; booleans are true/false. Unknown sections or
// keys are config errors, as are duplicate assignments within one file.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sfion/continuum.hpp"
#include "sfion/pulse.hpp"

namespace sfion {

struct GridConfig {
  int n = 800;
  double r_max = 600.0;
  double map_param = 0.4;
  int l_max = 60;
};

struct PropagationConfig {
  double dt = 0.05;
  bool mask = false;
  double energy_cutoff = 25.0;  // hartree; spectral basis truncation
};

struct AnalysisConfig {
  MomentumGrid k;
  int smoothing = 5;
  std::vector<double> cuts;  // momenta of angular cuts
  MapMesh map;
};

struct CtmcConfig {
  long n_events = 1000000;
  std::uint64_t seed = 1;
  double k_max = 0.25;  // near-threshold window for the l histogram
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "ppm"};
  std::string cache;  // empty: no caching
};

struct RunConfig {
  LaserPulse pulse{0.075, 0.05, 1005.0, 0.0};
  GridConfig grid;
  PropagationConfig propagation;
  AnalysisConfig analysis;
  CtmcConfig ctmc;
  OutputConfig outputs;

  /// Assigns "section.key" from its text form.
  void set(std::string_view key, std::string_view value);
  /// Text form of "section.key".
  std::string get(std::string_view key) const;
  /// All keys in serialization order.
  static std::vector<std::string> keys();

  /// Throws a config error unless every physical quantity is positive and
  /// sizes are usable.
  void validate() const;

  bool wants(std::string_view format) const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& file);
/// Lossless text form; parse_config(serialize(c)) reproduces c exactly.
std::string serialize(const RunConfig& config);

/// Applies "section.key=value".
void apply_override(RunConfig& config, std::string_view assignment);

/// Shortest text that reads back to the same double.
std::string format_double(double value);

}  // namespace sfion

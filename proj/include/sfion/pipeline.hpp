#pragma once

// End-to-end runs: TDSE propagation (cached by configuration), continuum
// analysis, CTMC ensembles, output files and the run manifest.

#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sfion/config.hpp"
#include "sfion/continuum.hpp"
#include "sfion/ctmc.hpp"
#include "sfion/tdse.hpp"

namespace sfion::pipeline {

inline constexpr const char* kVersion = "1.0.0";

struct TdseRun {
  std::unique_ptr<Propagator> propagator;
  WaveFunction psi;  // at t = tau
  PropagationDiagnostics diagnostics;
  bool from_cache = false;
  std::string key;
};

/// Hex key over every input that affects the final wavefunction.
std::string tdse_key(const RunConfig& config);

/// Builds the grid and Hamiltonians (eigendecompositions cached under
/// outputs.cache when set) and propagates the ground state through the
/// pulse, reusing a cached final state with the same key.
TdseRun run_tdse(const RunConfig& config, std::ostream* log = nullptr);

struct RingResult {
  RingSpec ring;
  std::vector<double> p_l;
  int argmax_l = 0;
};

struct Analysis {
  PartialWaveAmplitudes amplitudes;
  std::vector<RingResult> rings;
  std::vector<AngularCut> cuts;
  std::optional<MomentumMap> map;
};

Analysis analyze(const Propagator& propagator, const WaveFunction& psi,
                 const RunConfig& config, bool with_map);

struct CtmcRun {
  std::vector<ctmc::TrajectoryRecord> records;
  std::vector<double> histogram;  // near-threshold l distribution
  ctmc::EnsembleSummary summary;
  ctmc::PericenterSummary pericenter;
  double seconds = 0.0;
};

CtmcRun run_ctmc(const RunConfig& config);

/// Which results a run writes.
struct Products {
  bool tdse = true;
  bool map = false;
  bool cuts = false;
  bool rings = false;
  bool ctmc = false;
};

struct Preset {
  std::string name;
  std::string description;
  RunConfig config;
  Products products;
};

const std::vector<std::string>& preset_names();
/// Config error listing the valid names if unknown.
Preset preset(std::string_view name);

/// Runs the requested products, writes CSV/PPM files into
/// outputs.directory prefixed with `prefix`, and a `<prefix>manifest.json`
/// listing config, versions, results, timings and file hashes. Returns the
/// manifest.
nlohmann::json run(const RunConfig& config, const Products& products,
                   const std::string& prefix, std::ostream* log = nullptr);

/// Propagation only: writes the final-state checkpoint and a diagnostics CSV.
nlohmann::json run_tdse_outputs(const RunConfig& config, std::ostream* log = nullptr);

/// Analysis of a saved checkpoint against the configured grid.
nlohmann::json analyze_checkpoint(const RunConfig& config,
                                  const std::filesystem::path& checkpoint,
                                  std::ostream* log = nullptr);

}  // namespace sfion::pipeline

#include "sfion/pipeline.hpp"

#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "sfion/error.hpp"
#include "sfion/io.hpp"

namespace sfion::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<fs::path> cache_dir(const RunConfig& config) {
  if (config.outputs.cache.empty()) return std::nullopt;
  return fs::path(config.outputs.cache);
}

json diagnostics_json(const PropagationDiagnostics& d) {
  return {{"time", d.time},   {"norm", d.norm},   {"dipole_z", d.dipole_z},
          {"top_population", d.top_population},
          {"max_top_population", d.max_top_population},
          {"dt", d.dt},       {"steps", d.steps}, {"seconds", d.seconds}};
}

PropagationDiagnostics diagnostics_from_json(const json& j) {
  PropagationDiagnostics d;
  d.time = j.at("time").get<std::vector<double>>();
  d.norm = j.at("norm").get<std::vector<double>>();
  d.dipole_z = j.at("dipole_z").get<std::vector<double>>();
  d.top_population = j.at("top_population").get<std::vector<double>>();
  d.max_top_population = j.at("max_top_population");
  d.dt = j.at("dt");
  d.steps = j.at("steps");
  d.seconds = j.at("seconds");
  return d;
}

void log_line(std::ostream* log, const std::string& text) {
  if (log) *log << text << std::endl;
}

int argmax(const std::vector<double>& v) {
  return v.empty() ? -1
                   : static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::unique_ptr<Propagator> make_propagator(const RunConfig& config, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  const RadialGrid grid = build_grid(config.grid.n, config.grid.r_max, config.grid.map_param);
  auto hams = build_hamiltonians(grid, config.grid.l_max, cache_dir(config));
  log_line(log, "hamiltonians ready (" + format_double(seconds_since(start)) + " s)");
  return std::make_unique<Propagator>(grid, std::move(hams),
                                      config.propagation.energy_cutoff);
}

/// Records written files with their hashes.
class Manifest {
 public:
  Manifest(const RunConfig& config, std::string prefix)
      : dir_(config.outputs.directory), prefix_(std::move(prefix)) {
    data_["config"] = serialize(config);
    data_["versions"] = {
        {"sfion", kVersion},
        {"compiler", __VERSION__},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"openssl", OPENSSL_VERSION_TEXT}};
    const auto kp = config.pulse.keldysh();
    data_["pulse"] = {{"F0", config.pulse.F0},
                      {"omega", config.pulse.omega},
                      {"tau", config.pulse.tau},
                      {"phi", config.pulse.phi},
                      {"cycles", config.pulse.cycles()},
                      {"ponderomotive_energy", kp.ponderomotive_energy},
                      {"gamma", kp.gamma},
                      {"quiver_amplitude", kp.quiver_amplitude}};
    data_["files"] = json::array();
  }

  fs::path path(const std::string& name) const { return dir_ / (prefix_ + name); }

  void csv(const std::string& name, const io::CsvTable& table) {
    const auto file = path(name);
    table.write(file);
    add(file);
  }

  void add(const fs::path& file) {
    data_["files"].push_back({{"path", file.filename().string()},
                              {"bytes", fs::file_size(file)},
                              {"sha256", io::sha256_file(file)}});
  }

  json& operator[](const char* key) { return data_[key]; }

  json finish() {
    const auto file = path("manifest.json");
    io::write_file(file, data_.dump(2) + "\n");
    return data_;
  }

 private:
  fs::path dir_;
  std::string prefix_;
  json data_;
};

json analysis_json(const Analysis& a) {
  json out;
  out["ionization_probability"] = a.amplitudes.total_probability();
  out["normalization"] = PartialWaveAmplitudes::normalization();
  json rings = json::array();
  for (const auto& r : a.rings) {
    rings.push_back({{"index", r.ring.index},
                     {"k_lo", r.ring.k_lo},
                     {"k_peak", r.ring.k_peak},
                     {"k_hi", r.ring.k_hi},
                     {"energy", r.ring.energy()},
                     {"argmax_l", r.argmax_l},
                     {"p_l", r.p_l}});
  }
  out["rings"] = rings;
  json cuts = json::array();
  for (const auto& c : a.cuts) {
    cuts.push_back({{"k", c.k},
                    {"best_l0", c.best_l0},
                    {"scale", c.scale},
                    {"relative_residual", c.relative_residual},
                    {"minima", c.minima}});
  }
  out["cuts"] = cuts;
  if (a.map) out["map_integral"] = a.map->integral();
  return out;
}

void write_analysis(Manifest& manifest, const Analysis& a, const Products& products,
                    const RunConfig& config) {
  const bool csv = config.wants("csv");
  if (csv) {
    manifest.csv("amplitudes.csv", io::amplitudes_table(a.amplitudes));
    manifest.csv("spectrum.csv", io::spectrum_table(a.amplitudes));
  }
  if (products.rings && csv) {
    std::vector<RingSpec> specs;
    for (const auto& r : a.rings) specs.push_back(r.ring);
    manifest.csv("rings.csv", io::rings_table(a.amplitudes, specs));
  }
  if (products.cuts && csv) {
    for (const auto& c : a.cuts) {
      manifest.csv("cut_k" + format_double(c.k) + ".csv", io::cut_table(c));
    }
  }
  if (a.map) {
    if (csv) manifest.csv("map.csv", io::map_table(*a.map));
    if (config.wants("ppm")) {
      for (auto [scale, name] : {std::pair{io::ColorScale::linear, "map_linear.ppm"},
                                 std::pair{io::ColorScale::log, "map_log.ppm"}}) {
        const auto file = manifest.path(name);
        io::write_heatmap(*a.map, scale, file);
        manifest.add(file);
      }
    }
  }
  manifest["analysis"] = analysis_json(a);
}

json tdse_json(const TdseRun& run) {
  const auto& p = *run.propagator;
  return {{"key", run.key},
          {"from_cache", run.from_cache},
          {"final_norm", run.psi.norm()},
          {"norm_deviation", std::abs(run.psi.norm() - 1.0)},
          {"bound_population", p.bound_population(run.psi)},
          {"max_top_population", run.diagnostics.max_top_population},
          {"l_max_sufficient",
           run.diagnostics.max_top_population <= PropagationOptions{}.top_channel_tolerance},
          {"steps", run.diagnostics.steps},
          {"dt", run.diagnostics.dt},
          {"propagation_seconds", run.diagnostics.seconds},
          {"max_resolvable_k", p.grid().max_resolvable_k()}};
}

}  // namespace

std::string tdse_key(const RunConfig& c) {
  std::ostringstream s;
  s << "tdse-v2";
  for (const char* key :
       {"pulse.F0", "pulse.omega", "pulse.tau", "pulse.phi", "grid.n", "grid.r_max",
        "grid.map_param", "grid.l_max", "propagation.dt", "propagation.mask",
        "propagation.energy_cutoff"}) {
    s << ';' << key << '=' << c.get(key);
  }
  return io::sha256(s.str()).substr(0, 16);
}

TdseRun run_tdse(const RunConfig& config, std::ostream* log) {
  config.validate();
  TdseRun run;
  run.key = tdse_key(config);
  run.propagator = make_propagator(config, log);
  const auto& prop = *run.propagator;
  const auto dir = cache_dir(config);
  const fs::path state_file = dir ? *dir / ("tdse_" + run.key + ".psi") : fs::path();
  const fs::path diag_file = dir ? *dir / ("tdse_" + run.key + ".json") : fs::path();

  if (dir && fs::exists(state_file) && fs::exists(diag_file)) {
    auto cp = load_checkpoint(state_file);
    if (cp.psi.grid_hash == prop.grid().hash() && cp.psi.l_max() == prop.l_max()) {
      std::ifstream in(diag_file);
      run.diagnostics = diagnostics_from_json(json::parse(in));
      run.psi = std::move(cp.psi);
      run.from_cache = true;
      log_line(log, "tdse: reusing cached final state " + state_file.string());
      return run;
    }
  }

  PropagationOptions options;
  options.dt = config.propagation.dt;
  options.mask = config.propagation.mask;
  // Top-channel population is reported, not fatal; see l_max_sufficient.
  const double top_limit = options.top_channel_tolerance;
  options.top_channel_tolerance = std::numeric_limits<double>::infinity();
  log_line(log, "tdse: propagating F0=" + format_double(config.pulse.F0) + " n=" +
                    std::to_string(config.grid.n) + " l_max=" +
                    std::to_string(config.grid.l_max) + " dt=" +
                    format_double(config.propagation.dt));
  run.psi = prop.propagate(prop.ground_state(), config.pulse, options, &run.diagnostics);
  log_line(log, "tdse: done in " + format_double(run.diagnostics.seconds) +
                    " s, norm " + format_double(run.psi.norm()));
  if (run.diagnostics.max_top_population > top_limit) {
    log_line(log, "tdse: warning: top two channels reached population " +
                      format_double(run.diagnostics.max_top_population) + " > " +
                      format_double(top_limit) + "; l_max is not sufficient");
  }
  if (dir) {
    fs::create_directories(*dir);
    auto tmp = state_file;
    tmp += ".tmp";
    save_checkpoint(tmp, prop.grid(), run.psi);
    fs::rename(tmp, state_file);
    io::write_file(diag_file, diagnostics_json(run.diagnostics).dump() + "\n");
  }
  return run;
}

Analysis analyze(const Propagator& propagator, const WaveFunction& psi,
                 const RunConfig& config, bool with_map) {
  const auto k = config.analysis.k.values();
  Analysis a{project(propagator, psi, k, std::min(config.grid.l_max, psi.l_max())),
             {}, {}, std::nullopt};
  RingOptions ring_options;
  ring_options.smoothing = config.analysis.smoothing;
  for (const auto& ring : detect_rings(a.amplitudes, ring_options)) {
    auto p = ring_partial_probability(a.amplitudes, ring);
    const int best = argmax(p);
    a.rings.push_back({ring, std::move(p), best});
  }
  const MomentumDensity density(a.amplitudes);
  for (double kc : config.analysis.cuts) a.cuts.push_back(angular_cut(density, kc));
  if (with_map) a.map = momentum_map(density, config.analysis.map);
  return a;
}

CtmcRun run_ctmc(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  CtmcRun run;
  const auto events = ctmc::sample_events(config.pulse, config.ctmc.n_events, config.ctmc.seed);
  run.records = ctmc::integrate_all(events, config.pulse);
  const ctmc::EnergyWindow window{0.0, config.ctmc.k_max};
  run.histogram = ctmc::l_distribution(run.records, window);
  run.summary = ctmc::summarize(run.records);
  run.pericenter = ctmc::pericenter_check(run.records, config.pulse, window);
  run.seconds = seconds_since(start);
  return run;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1a", "fig1b", "fig1c", "fig2a",
                                                 "fig2b", "fig3a", "fig3b", "fig4a"};
  return names;
}

Preset preset(std::string_view name) {
  Preset p;
  p.name = name;
  RunConfig& c = p.config;
  Products& out = p.products;
  if (name == "fig1a" || name == "fig1b" || name == "fig1c") {
    c.pulse.F0 = name == "fig1a" ? 0.0377 : name == "fig1b" ? 0.0533 : 0.075;
    out.map = true;
    p.description = "momentum map and spectrum";
  } else if (name == "fig2a" || name == "fig2b") {
    c.pulse.F0 = name == "fig2a" ? 0.0377 : 0.075;
    c.analysis.cuts = {name == "fig2a" ? 0.34 : 0.19};
    out.cuts = true;
    p.description = "angular cut with single-Legendre fit";
  } else if (name == "fig3a" || name == "fig3b") {
    c.pulse.F0 = name == "fig3a" ? 0.0377 : 0.075;
    out.rings = true;
    p.description = "ATI rings and partial-wave probabilities";
  } else if (name == "fig4a") {
    c.pulse.F0 = 0.075;
    out.tdse = false;
    out.ctmc = true;
    p.description = "CTMC-T l distribution near threshold";
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw config_error("unknown preset '" + std::string(name) + "'; valid presets: " + list);
  }
  c.outputs.directory = "out/" + p.name;
  return p;
}

json run(const RunConfig& config, const Products& products, const std::string& prefix,
         std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  Manifest manifest(config, prefix);
  json timings;
  if (products.tdse) {
    const auto run = run_tdse(config, log);
    manifest["tdse"] = tdse_json(run);
    timings["tdse_seconds"] = run.from_cache ? 0.0 : run.diagnostics.seconds;
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = analyze(*run.propagator, run.psi, config, products.map);
    timings["analysis_seconds"] = seconds_since(t0);
    write_analysis(manifest, a, products, config);
    for (const auto& c : a.cuts) {
      log_line(log, "cut k=" + format_double(c.k) + ": best l0 = " + std::to_string(c.best_l0));
    }
    for (const auto& r : a.rings) {
      log_line(log, "ring " + std::to_string(r.ring.index) + " k_peak=" +
                        format_double(r.ring.k_peak) + ": argmax l = " +
                        std::to_string(r.argmax_l));
    }
  }
  if (products.ctmc) {
    const auto c = run_ctmc(config);
    timings["ctmc_seconds"] = c.seconds;
    if (config.wants("csv")) {
      manifest.csv("ctmc_records.csv", io::records_table(c.records));
      manifest.csv("ctmc_l_histogram.csv", io::histogram_table(c.histogram));
    }
    const char* status = c.pericenter.status == ctmc::PericenterStatus::ok ? "ok"
                         : c.pericenter.status == ctmc::PericenterStatus::empty_selection
                             ? "empty_selection"
                             : "skipped_zero_field";
    manifest["ctmc"] = {{"n_events", config.ctmc.n_events},
                        {"seed", config.ctmc.seed},
                        {"k_max", config.ctmc.k_max},
                        {"unbound", c.summary.unbound},
                        {"flagged", c.summary.flagged},
                        {"flagged_fraction", c.summary.flagged_fraction()},
                        {"histogram", c.histogram},
                        {"histogram_argmax_l", argmax(c.histogram)},
                        {"pericenter",
                         {{"status", status},
                          {"median_r_min", c.pericenter.median_r_min},
                          {"quiver_amplitude", c.pericenter.quiver_amplitude},
                          {"ratio", c.pericenter.ratio},
                          {"selected", c.pericenter.selected}}}};
    log_line(log, "ctmc: l histogram argmax " + std::to_string(argmax(c.histogram)) +
                      ", median r_min / alpha = " + format_double(c.pericenter.ratio));
  }
  timings["total_seconds"] = seconds_since(start);
  manifest["timings"] = timings;
  return manifest.finish();
}

json run_tdse_outputs(const RunConfig& config, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  const auto run = run_tdse(config, log);
  Manifest manifest(config, "tdse_");
  const auto state = manifest.path("final.psi");
  fs::create_directories(state.parent_path());
  save_checkpoint(state, run.propagator->grid(), run.psi);
  manifest.add(state);
  if (config.wants("csv")) {
    io::CsvTable diag({"t", "norm", "dipole_z", "top_population"});
    const auto& d = run.diagnostics;
    for (std::size_t i = 0; i < d.time.size(); ++i) {
      diag.add_row({d.time[i], d.norm[i], d.dipole_z[i], d.top_population[i]});
    }
    manifest.csv("diagnostics.csv", diag);
  }
  manifest["tdse"] = tdse_json(run);
  manifest["timings"] = {{"total_seconds", seconds_since(start)}};
  return manifest.finish();
}

json analyze_checkpoint(const RunConfig& config, const fs::path& checkpoint,
                        std::ostream* log) {
  config.validate();
  auto cp = load_checkpoint(checkpoint);
  if (cp.n != config.grid.n || cp.r_max != config.grid.r_max ||
      cp.map_param != config.grid.map_param || cp.psi.l_max() != config.grid.l_max) {
    throw config_error("checkpoint grid (n=" + std::to_string(cp.n) + ", l_max=" +
                       std::to_string(cp.psi.l_max()) +
                       ") does not match the configured grid");
  }
  const auto prop = make_propagator(config, log);
  if (cp.psi.grid_hash != prop->grid().hash()) {
    throw config_error("checkpoint grid hash does not match the configured grid");
  }
  Products products;
  products.map = products.cuts = products.rings = true;
  Manifest manifest(config, "analysis_");
  const auto a = analyze(*prop, cp.psi, config, true);
  write_analysis(manifest, a, products, config);
  manifest["checkpoint"] = {{"path", checkpoint.string()},
                            {"time", cp.psi.time},
                            {"norm", cp.psi.norm()}};
  return manifest.finish();
}

}  // namespace sfion::pipeline

#include "sfion/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "sfion/error.hpp"

namespace sfion {

namespace {

std::string_view trim(std::string_view s) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && blank(s.back())) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw config_error(std::string(key) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true") return true;
  if (text == "false") return false;
  throw config_error(std::string(key) + ": expected true or false, got '" +
                     std::string(text) + "'");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  text = trim(text);
  if (text.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    items.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

template <class Range, class Fn>
std::string join(const Range& items, Fn&& fmt) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += fmt(item);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SFION_DOUBLE(name, member)                                          \
  Field {                                                                   \
    name, [](RunConfig& c, std::string_view v) {                            \
      c.member = parse_number<double>(name, v);                             \
    },                                                                      \
        [](const RunConfig& c) { return format_double(c.member); }          \
  }
#define SFION_INT(name, member, type)                                       \
  Field {                                                                   \
    name, [](RunConfig& c, std::string_view v) {                            \
      c.member = parse_number<type>(name, v);                               \
    },                                                                      \
        [](const RunConfig& c) { return std::to_string(c.member); }         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SFION_DOUBLE("pulse.F0", pulse.F0),
      SFION_DOUBLE("pulse.omega", pulse.omega),
      SFION_DOUBLE("pulse.tau", pulse.tau),
      SFION_DOUBLE("pulse.phi", pulse.phi),
      SFION_INT("grid.n", grid.n, int),
      SFION_DOUBLE("grid.r_max", grid.r_max),
      SFION_DOUBLE("grid.map_param", grid.map_param),
      SFION_INT("grid.l_max", grid.l_max, int),
      SFION_DOUBLE("propagation.dt", propagation.dt),
      Field{"propagation.mask",
            [](RunConfig& c, std::string_view v) {
              c.propagation.mask = parse_bool("propagation.mask", v);
            },
            [](const RunConfig& c) {
              return std::string(c.propagation.mask ? "true" : "false");
            }},
      SFION_DOUBLE("propagation.energy_cutoff", propagation.energy_cutoff),
      SFION_DOUBLE("analysis.k_min", analysis.k.k_min),
      SFION_DOUBLE("analysis.k_max", analysis.k.k_max),
      SFION_DOUBLE("analysis.k_step", analysis.k.k_step),
      SFION_INT("analysis.smoothing", analysis.smoothing, int),
      Field{"analysis.cuts",
            [](RunConfig& c, std::string_view v) {
              c.analysis.cuts.clear();
              for (auto item : split_list(v)) {
                c.analysis.cuts.push_back(parse_number<double>("analysis.cuts", item));
              }
            },
            [](const RunConfig& c) { return join(c.analysis.cuts, format_double); }},
      SFION_DOUBLE("analysis.map_extent", analysis.map.k_extent),
      SFION_INT("analysis.map_nz", analysis.map.n_z, int),
      SFION_INT("analysis.map_nrho", analysis.map.n_rho, int),
      SFION_INT("ctmc.n_events", ctmc.n_events, long),
      SFION_INT("ctmc.seed", ctmc.seed, std::uint64_t),
      SFION_DOUBLE("ctmc.k_max", ctmc.k_max),
      Field{"outputs.directory",
            [](RunConfig& c, std::string_view v) { c.outputs.directory = trim(v); },
            [](const RunConfig& c) { return c.outputs.directory; }},
      Field{"outputs.formats",
            [](RunConfig& c, std::string_view v) {
              c.outputs.formats.clear();
              for (auto item : split_list(v)) {
                if (item != "csv" && item != "ppm") {
                  throw config_error("outputs.formats: unknown format '" +
                                     std::string(item) + "' (csv, ppm)");
                }
                c.outputs.formats.emplace_back(item);
              }
            },
            [](const RunConfig& c) {
              return join(c.outputs.formats, [](const std::string& s) { return s; });
            }},
      Field{"outputs.cache",
            [](RunConfig& c, std::string_view v) { c.outputs.cache = trim(v); },
            [](const RunConfig& c) { return c.outputs.cache; }},
  };
  return table;
}

#undef SFION_DOUBLE
#undef SFION_INT

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw config_error("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ec == std::errc() ? end : buf.data());
}

void RunConfig::set(std::string_view key, std::string_view value) {
  find_field(key).set(*this, value);
}

std::string RunConfig::get(std::string_view key) const {
  return find_field(key).get(*this);
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

bool RunConfig::wants(std::string_view format) const {
  return std::find(outputs.formats.begin(), outputs.formats.end(), format) !=
         outputs.formats.end();
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw config_error(what);
  };
  require(pulse.F0 > 0.0, "pulse.F0 must be > 0");
  require(pulse.omega > 0.0, "pulse.omega must be > 0");
  require(pulse.tau > 0.0, "pulse.tau must be > 0");
  require(std::isfinite(pulse.phi), "pulse.phi must be finite");
  require(grid.n >= 16, "grid.n must be >= 16");
  require(grid.r_max > 0.0, "grid.r_max must be > 0");
  require(grid.map_param > 0.0, "grid.map_param must be > 0");
  require(grid.l_max >= 1, "grid.l_max must be >= 1");
  require(propagation.dt > 0.0, "propagation.dt must be > 0");
  require(propagation.energy_cutoff > 0.0, "propagation.energy_cutoff must be > 0");
  require(analysis.k.k_min > 0.0 && analysis.k.k_step > 0.0 &&
              analysis.k.k_max >= analysis.k.k_min,
          "analysis k grid needs 0 < k_min <= k_max and k_step > 0");
  require(analysis.smoothing >= 1 && analysis.smoothing % 2 == 1,
          "analysis.smoothing must be odd and >= 1");
  for (double k : analysis.cuts) require(k > 0.0, "analysis.cuts must be > 0");
  require(analysis.map.k_extent > 0.0 && analysis.map.n_z >= 2 && analysis.map.n_rho >= 2,
          "analysis map mesh must be positive with >= 2 points per axis");
  require(ctmc.n_events >= 1, "ctmc.n_events must be >= 1");
  require(ctmc.k_max > 0.0, "ctmc.k_max must be > 0");
  require(!outputs.directory.empty(), "outputs.directory must not be empty");
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const auto raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error(where() + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw config_error(where() + "expected key = value");
    if (section.empty()) throw config_error(where() + "key outside any [section]");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) throw config_error(where() + "duplicate key " + key);
    try {
      config.set(key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw config_error(where() + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw io_error("cannot read config " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const std::string_view key = f.key;
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += "\n";
      section = sec;
      out += "[" + section + "]\n";
    }
    out += std::string(key.substr(dot + 1)) + " = " + f.get(config) + "\n";
  }
  return out;
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw config_error("override '" + std::string(assignment) + "' is not key=value");
  }
  config.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

}  // namespace sfion

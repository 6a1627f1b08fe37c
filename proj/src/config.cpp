#include "nanobeam/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "nanobeam/io.hpp"

namespace nanobeam {

namespace {

std::string trim(std::string const& s)
{
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto const e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(std::string const& v)
{
  std::string t = v;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::istringstream is(t);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

double to_double(std::string const& s)
{
  double v = 0.0;
  auto const [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

int to_int(std::string const& s)
{
  int v = 0;
  auto const [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

bool to_bool(std::string const& s)
{
  if (s == "on" || s == "true" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "no") return false;
  throw std::invalid_argument("not a boolean (on/off): '" + s + "'");
}

std::string one(std::string const& v)
{
  auto const t = tokens(v);
  if (t.size() != 1) throw std::invalid_argument("expected a single value");
  return t[0];
}

std::string join(std::vector<double> const& v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

struct Key
{
  char const* block;
  char const* name;
  std::function<std::string(RunConfig const&)> get;
  std::function<void(RunConfig&, std::string const&)> set;
};

template <typename T>
Key real(char const* block, char const* name, T RunConfig::*part, double T::*field)
{
  return {block, name, [=](RunConfig const& c) { return format_double(c.*part.*field); },
          [=](RunConfig& c, std::string const& v) { c.*part.*field = to_double(one(v)); }};
}

template <typename T>
Key integer(char const* block, char const* name, T RunConfig::*part, int T::*field)
{
  return {block, name, [=](RunConfig const& c) { return std::to_string(c.*part.*field); },
          [=](RunConfig& c, std::string const& v) { c.*part.*field = to_int(one(v)); }};
}

template <typename T>
Key boolean(char const* block, char const* name, T RunConfig::*part, bool T::*field)
{
  return {block, name, [=](RunConfig const& c) { return std::string(c.*part.*field ? "on" : "off"); },
          [=](RunConfig& c, std::string const& v) { c.*part.*field = to_bool(one(v)); }};
}

std::vector<Key> const& keys()
{
  static std::vector<Key> const table = [] {
    using R = RunConfig;
    std::vector<Key> k{
        real("device", "thickness_nm", &R::device, &DeviceSpec::thickness),
        real("device", "width_nm", &R::device, &DeviceSpec::width),
        real("device", "index", &R::device, &DeviceSpec::index),
        real("device", "mirror_period_nm", &R::device, &DeviceSpec::mirror_period),
        real("device", "taper_end_period_nm", &R::device, &DeviceSpec::taper_end_period),
        real("device", "radius_ratio", &R::device, &DeviceSpec::radius_ratio),
        integer("device", "mirror_pairs", &R::device, &DeviceSpec::mirror_pairs),
        integer("device", "taper_holes", &R::device, &DeviceSpec::taper_holes),
        real("device", "cavity_gap_nm", &R::device, &DeviceSpec::cavity_gap),

        real("grid", "spacing_nm", &R::grid, &GridSettings::spacing),
        {"grid", "padding_nm",
         [](R const& c) { return join({c.grid.padding.begin(), c.grid.padding.end()}); },
         [](R& c, std::string const& v) {
           auto const t = tokens(v);
           if (t.size() != 3) throw std::invalid_argument("expected three values (x y z)");
           for (int a = 0; a < 3; ++a) c.grid.padding[a] = to_double(t[a]);
         }},
        boolean("grid", "symmetry", &R::grid, &GridSettings::symmetry),
        integer("grid", "subsamples", &R::grid, &GridSettings::subsamples),

        real("solver", "courant_factor", &R::solver, &SolverSettings::courant_factor),
        integer("solver", "absorbing_layers", &R::solver, &SolverSettings::absorbing_layers),
        real("solver", "grading_order", &R::solver, &SolverSettings::grading_order),
        real("solver", "target_reflection", &R::solver, &SolverSettings::target_reflection),
        real("solver", "cfs_alpha", &R::solver, &SolverSettings::cfs_alpha),
        integer("solver", "window_steps", &R::solver, &SolverSettings::window_steps),
        real("solver", "source_wavelength_nm", &R::solver, &SolverSettings::source_wavelength),
        real("solver", "source_bandwidth", &R::solver, &SolverSettings::source_bandwidth),

        real("analysis", "band_min_nm", &R::analysis, &AnalysisSettings::band_min),
        real("analysis", "band_max_nm", &R::analysis, &AnalysisSettings::band_max),
        integer("analysis", "projection_periods", &R::analysis, &AnalysisSettings::projection_periods),
        integer("analysis", "samples_per_period", &R::analysis, &AnalysisSettings::samples_per_period),
        boolean("analysis", "write_slice", &R::analysis, &AnalysisSettings::write_slice),

        integer("bands", "k_points", &R::bands, &BandSettings::k_points),
        integer("bands", "num_bands", &R::bands, &BandSettings::num_bands),
        integer("bands", "steps", &R::bands, &BandSettings::steps),
        real("bands", "courant_factor", &R::bands, &BandSettings::courant_factor),
        real("bands", "source_bandwidth", &R::bands, &BandSettings::source_bandwidth),
        real("bands", "target_wavelength_nm", &R::bands, &BandSettings::target_wavelength),
        real("bands", "neff_cell_nm", &R::bands, &BandSettings::neff_cell_length),

        {"sweep", "s_values_nm", [](R const& c) { return join(c.sweep.s_values); },
         [](R& c, std::string const& v) {
           c.sweep.s_values.clear();
           for (auto const& t : tokens(v)) c.sweep.s_values.push_back(to_double(t));
         }},

        {"output", "directory", [](R const& c) { return c.output; },
         [](R& c, std::string const& v) {
           if (v.empty()) throw std::invalid_argument("empty directory");
           c.output = v;
         }},
    };
    return k;
  }();
  return table;
}

} // namespace

void RunConfig::validate() const
{
  auto fail = [](std::string const& what) { throw std::invalid_argument("config: " + what); };
  device.validate();
  if (!(grid.spacing > 0)) fail("grid.spacing_nm must be > 0");
  for (double p : grid.padding)
    if (!(p >= 0)) fail("grid.padding_nm must be >= 0");
  if (grid.subsamples < 1) fail("grid.subsamples must be >= 1");
  if (!(solver.courant_factor > 0 && solver.courant_factor <= 0.99)) fail("solver.courant_factor must lie in (0, 0.99]");
  if (solver.absorbing_layers < 8) fail("solver.absorbing_layers must be >= 8");
  if (!(solver.target_reflection > 0 && solver.target_reflection < 1)) fail("solver.target_reflection must lie in (0, 1)");
  if (!(solver.grading_order >= 0)) fail("solver.grading_order must be >= 0");
  if (!(solver.cfs_alpha >= 0)) fail("solver.cfs_alpha must be >= 0");
  if (solver.window_steps < 512) fail("solver.window_steps must be >= 512");
  if (!(solver.source_wavelength > 0)) fail("solver.source_wavelength_nm must be > 0");
  if (!(solver.source_bandwidth > 0 && solver.source_bandwidth < 2)) fail("solver.source_bandwidth must lie in (0, 2)");
  if (!(analysis.band_min > 0 && analysis.band_max > analysis.band_min)) fail("analysis band must satisfy 0 < min < max");
  if (analysis.projection_periods < 1) fail("analysis.projection_periods must be >= 1");
  if (analysis.samples_per_period < 4) fail("analysis.samples_per_period must be >= 4");
  if (bands.k_points < 2) fail("bands.k_points must be >= 2");
  if (bands.num_bands < 1) fail("bands.num_bands must be >= 1");
  if (bands.steps < 512) fail("bands.steps must be >= 512");
  if (!(bands.courant_factor > 0 && bands.courant_factor <= 0.99)) fail("bands.courant_factor must lie in (0, 0.99]");
  if (!(bands.source_bandwidth > 0 && bands.source_bandwidth < 2)) fail("bands.source_bandwidth must lie in (0, 2)");
  if (!(bands.target_wavelength > 0)) fail("bands.target_wavelength_nm must be > 0");
  if (!(bands.neff_cell_length > 0)) fail("bands.neff_cell_nm must be > 0");
  for (double s : sweep.s_values)
    if (!(s > 0)) fail("sweep.s_values_nm must be positive");
  if (output.empty()) fail("output.directory must not be empty");
}

RasterOptions RunConfig::raster_options() const
{
  RasterOptions r;
  r.spacing = grid.spacing;
  r.padding = grid.padding;
  r.boundary_cells = solver.absorbing_layers;
  r.mirrored = {grid.symmetry, grid.symmetry, grid.symmetry};
  r.subsamples = grid.subsamples;
  return r;
}

cavity::CavityOptions RunConfig::cavity_options() const
{
  cavity::CavityOptions o;
  o.raster = raster_options();
  o.symmetric = grid.symmetry;
  o.courant_factor = solver.courant_factor;
  o.absorbing.layers = solver.absorbing_layers;
  o.absorbing.grading_order = solver.grading_order;
  o.absorbing.target_reflection = solver.target_reflection;
  o.absorbing.cfs_alpha = solver.cfs_alpha;
  o.source_wavelength = solver.source_wavelength;
  o.fractional_bandwidth = solver.source_bandwidth;
  o.window_steps = solver.window_steps;
  o.band = {analysis.band_min, analysis.band_max};
  o.projection_periods = analysis.projection_periods;
  o.samples_per_period = analysis.samples_per_period;
  return o;
}

bands::BandOptions RunConfig::band_options() const
{
  bands::BandOptions o;
  o.bands = bands.num_bands;
  o.steps = bands.steps;
  o.courant_factor = bands.courant_factor;
  o.fractional_bandwidth = bands.source_bandwidth;
  o.k_points = bands.k_points;
  return o;
}

bool operator==(RunConfig const& a, RunConfig const& b) { return serialize_config(a) == serialize_config(b); }

RunConfig parse_config(std::istream& in)
{
  RunConfig cfg;
  std::string block;
  std::string line;
  int lineno = 0;
  auto fail = [&](std::string const& what) {
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto const hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed block header");
      block = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (auto const& k : keys()) known = known || block == k.block;
      if (!known) fail("unknown block [" + block + "]");
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (block.empty()) fail("key outside of a block");
    std::string const name = trim(line.substr(0, eq));
    std::string const value = trim(line.substr(eq + 1));
    Key const* key = nullptr;
    for (auto const& k : keys())
      if (block == k.block && name == k.name) key = &k;
    if (!key) fail("unknown key '" + name + "' in [" + block + "]");
    try {
      key->set(cfg, value);
    } catch (std::invalid_argument const& e) {
      fail(block + "." + name + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_string(std::string const& text)
{
  std::istringstream is(text);
  return parse_config(is);
}

RunConfig load_config(std::string const& path)
{
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  return parse_config(in);
}

std::string serialize_config(RunConfig const& cfg)
{
  std::ostringstream os;
  std::string block;
  for (auto const& k : keys()) {
    if (block != k.block) {
      if (!block.empty()) os << '\n';
      block = k.block;
      os << '[' << block << "]\n";
    }
    os << k.name << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

} // namespace nanobeam

#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include "dk/errors.hpp"
#include "dk/io.hpp"
#include "dk/regularization.hpp"

namespace dk::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"grid", {"dim", "n"}},
      {"kernel", {"type", "truncation", "wavevector", "direction", "amplitude", "file", "p", "pstar", "q", "qstar"}},
      {"noise", {"type", "K", "amplitude", "normalize", "epsilon"}},
      {"sigma", {"n", "correction"}},
      {"time", {"start", "end", "dt", "snapshot_stride"}},
      {"output", {"dir", "snapshots"}},
      {"experiment",
       {"profile", "seed", "replicas", "gamma", "clamp", "initial", "initial_value", "initial_amplitude",
        "initial_width", "initial_file", "initial_b", "perturbation", "perturbation_width", "n_ladder",
        "gamma_ladder", "particles", "particle_dt", "bandwidth", "kinetic_levels", "tail_max_M"}},
  };
  return s;
}

// Reads typed values and remembers which keys were consumed.
class Reader {
 public:
  explicit Reader(const IniDocument& doc) : doc_(doc) {
    for (const auto& [section, keys] : doc.sections) {
      const auto it = schema().find(section);
      if (it == schema().end()) fail("unknown section [" + section + "]");
      for (const auto& [key, value] : keys)
        if (!it->second.count(key)) fail("unknown key '" + key + "' in [" + section + "]");
    }
  }

  const std::string* raw(const std::string& section, const std::string& key) const {
    return doc_.find(section, key);
  }

  std::string str(const std::string& section, const std::string& key, const std::string& fallback) const {
    const auto* v = raw(section, key);
    return v ? *v : fallback;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const auto* v = raw(section, key);
    return v ? parse_double(*v, section, key) : fallback;
  }

  std::optional<double> optional_number(const std::string& section, const std::string& key) const {
    const auto* v = raw(section, key);
    if (!v) return std::nullopt;
    return parse_double(*v, section, key);
  }

  long integer(const std::string& section, const std::string& key, long fallback) const {
    const auto* v = raw(section, key);
    return v ? parse_long(*v, section, key) : fallback;
  }

  std::uint64_t unsigned64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    const auto* v = raw(section, key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size()) fail(where(section, key) + " must be an unsigned integer");
    return out;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    const auto* v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
    if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
    fail(where(section, key) + " must be true or false");
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (const auto* v = raw(section, key))
      for (const auto& tok : tokens(*v)) out.push_back(parse_double(tok, section, key));
    return out;
  }

  std::vector<long> integers(const std::string& section, const std::string& key) const {
    std::vector<long> out;
    if (const auto* v = raw(section, key))
      for (const auto& tok : tokens(*v)) out.push_back(parse_long(tok, section, key));
    return out;
  }

  static std::string where(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
  }

 private:
  static std::vector<std::string> tokens(const std::string& v) {
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
  }

  static double parse_double(const std::string& v, const std::string& section, const std::string& key) {
    if (v == "inf" || v == "infinity") return kInfinity;
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
      fail(where(section, key) + " must be a number, got '" + v + "'");
    return out;
  }

  static long parse_long(const std::string& v, const std::string& section, const std::string& key) {
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(where(section, key) + " must be an integer, got '" + v + "'");
    return out;
  }

  const IniDocument& doc_;
};

InitialData read_initial(const Reader& r, const std::string& key, const std::filesystem::path& base_dir,
                         const InitialData& fallback) {
  InitialData d = fallback;
  d.preset = r.str("experiment", key, fallback.preset);
  static const std::set<std::string> presets{"constant", "sine", "modes", "bump", "mixture", "file"};
  if (!presets.count(d.preset)) fail(Reader::where("experiment", key) + " must be one of constant, sine, modes, bump, mixture, file");
  if (d.preset == "file") {
    const auto* f = r.raw("experiment", "initial_file");
    if (!f) fail("initial preset 'file' needs [experiment] initial_file");
    d.file = base_dir / *f;
  }
  return d;
}

double periodic_offset(double x, double c) {
  const double z = x - c;
  return z - std::round(z);
}

}  // namespace

const std::string* IniDocument::find(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

IniDocument parse_ini(std::string_view text) {
  IniDocument doc;
  doc.text = std::string(text);
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string at = " (line " + std::to_string(lineno) + ")";
    if (t.front() == '[') {
      if (t.back() != ']') fail("malformed section header" + at);
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty()) fail("empty section name" + at);
      if (doc.sections.count(section)) fail("duplicate section [" + section + "]" + at);
      doc.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value" + at);
    if (section.empty()) fail("key outside any section" + at);
    const std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    const auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) fail("empty key" + at);
    auto& keys = doc.sections[section];
    if (keys.count(key)) fail("duplicate key '" + key + "' in [" + section + "]" + at);
    keys[key] = value;
  }
  return doc;
}

ExperimentConfig load_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.doc = parse_ini(text);
  const Reader r(c.doc);

  try {
    c.grid = GridSpec(static_cast<int>(r.integer("grid", "dim", 1)), static_cast<int>(r.integer("grid", "n", 32)));
  } catch (const std::invalid_argument& e) {
    fail(std::string("[grid] ") + e.what());
  }
  const int d = c.grid.dim();

  // kernel
  c.kernel_type = r.str("kernel", "type", "zero");
  try {
    if (c.kernel_type == "zero") {
      c.kernel = zero_kernel(c.grid);
    } else if (c.kernel_type == "biot_savart") {
      const auto* K = r.raw("kernel", "truncation");
      c.kernel = biot_savart(c.grid, K ? std::optional<int>(static_cast<int>(r.integer("kernel", "truncation", 0)))
                                       : std::nullopt);
    } else if (c.kernel_type == "sine") {
      auto kv = r.integers("kernel", "wavevector");
      auto dir = r.numbers("kernel", "direction");
      if (kv.empty()) kv.assign(d, 0), kv[0] = 1;
      if (dir.empty()) dir.assign(d, 0.0), dir[0] = 1.0;
      std::vector<int> k(kv.begin(), kv.end());
      c.kernel = sine_kernel(c.grid, k, dir, r.number("kernel", "amplitude", 1.0));
    } else if (c.kernel_type == "table") {
      const auto* f = r.raw("kernel", "file");
      if (!f) fail("[kernel] type = table needs file");
      std::ifstream in(base_dir / *f);
      if (!in) fail("cannot open kernel table " + (base_dir / *f).string());
      c.kernel = read_kernel_table(in, c.grid);
    } else {
      fail("[kernel] type must be zero, biot_savart, sine or table");
    }
    c.kernel.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(std::string("[kernel] ") + e.what());
  }
  {
    IntegrabilityClass e = c.kernel.exponents.value_or(IntegrabilityClass{});
    bool declared = c.kernel.exponents.has_value();
    for (const auto& [key, field] : {std::pair{"p", &e.p}, {"pstar", &e.pstar}, {"q", &e.q}, {"qstar", &e.qstar}})
      if (const auto v = r.optional_number("kernel", key)) {
        *field = *v;
        declared = true;
      }
    if (declared) c.kernel.exponents = e;
  }

  // noise
  c.noise_type = r.str("noise", "type", "none");
  c.noise_amplitude = r.number("noise", "epsilon", 1.0);
  if (c.noise_type == "none") {
    c.noise = zero_noise(c.grid);
    c.noise_amplitude = 0.0;
  } else if (c.noise_type == "uv") {
    const long K = r.integer("noise", "K", 1);
    if (K < 1 || K > c.grid.dealias_cutoff()) fail("[noise] K must lie in [1, n/3]");
    const auto ks = uv_wavevectors(d, static_cast<int>(K));
    double a = r.number("noise", "amplitude", 1.0);
    if (r.boolean("noise", "normalize", false)) a /= std::sqrt(static_cast<double>(ks.size()));
    const std::vector<double> amps(ks.size(), a);
    c.noise = uv_noise(c.grid, static_cast<int>(K), amps, 1.0);
  } else {
    fail("[noise] type must be none or uv");
  }

  // sigma
  c.sigma_n = static_cast<int>(r.integer("sigma", "n", 16));
  if (c.sigma_n < 2) fail("[sigma] n must be >= 2");
  c.sigma_correction = r.boolean("sigma", "correction", true);

  // time
  c.t_start = r.number("time", "start", 0.0);
  c.t_end = r.number("time", "end", 0.01);
  c.dt = r.number("time", "dt", 1e-4);
  c.snapshot_stride = static_cast<int>(r.integer("time", "snapshot_stride", 0));

  // output
  c.out_dir = r.str("output", "dir", "out");
  c.write_snapshots = r.boolean("output", "snapshots", true);

  // experiment
  c.profile = r.str("experiment", "profile", "exploratory");
  if (c.profile != "theory" && c.profile != "exploratory") fail("[experiment] profile must be theory or exploratory");
  c.seed = r.unsigned64("experiment", "seed", 0);
  c.replicas = static_cast<int>(r.integer("experiment", "replicas", 1));
  if (c.replicas < 1) fail("[experiment] replicas must be >= 1");
  c.gamma = r.optional_number("experiment", "gamma");
  const std::string clamp = r.str("experiment", "clamp", "off");
  if (clamp == "off") c.clamp = ClampPolicy::off;
  else if (clamp == "clamp" || clamp == "clamp-and-report") c.clamp = ClampPolicy::clamp_and_report;
  else fail("[experiment] clamp must be off or clamp-and-report");

  c.initial.value = r.number("experiment", "initial_value", 1.0);
  c.initial.amplitude = r.number("experiment", "initial_amplitude", 0.5);
  c.initial.width = r.number("experiment", "initial_width", 0.25);
  if (!(c.initial.width > 0.0 && c.initial.width < 0.5)) fail("[experiment] initial_width must lie in (0, 1/2)");
  c.initial = read_initial(r, "initial", base_dir, c.initial);
  c.initial_b = read_initial(r, "initial_b", base_dir, c.initial);
  c.perturbation = r.number("experiment", "perturbation", 0.0);
  c.perturbation_width = r.number("experiment", "perturbation_width", 0.1);
  if (!(c.perturbation_width > 0.0 && c.perturbation_width < 0.5))
    fail("[experiment] perturbation_width must lie in (0, 1/2)");

  for (long n : r.integers("experiment", "n_ladder")) {
    if (n < 2) fail("[experiment] n_ladder entries must be >= 2");
    c.n_ladder.push_back(static_cast<int>(n));
  }
  c.gamma_ladder = r.numbers("experiment", "gamma_ladder");
  for (double g : c.gamma_ladder)
    if (!(g > 0.0 && g <= 1.0)) fail("[experiment] gamma_ladder entries must lie in (0, 1]");
  if (const auto counts = r.integers("experiment", "particles"); !counts.empty()) c.particle_counts = counts;
  for (long n : c.particle_counts)
    if (n < 1) fail("[experiment] particles entries must be >= 1");
  c.particle_dt = r.number("experiment", "particle_dt", 1e-3);
  if (!(c.particle_dt > 0.0)) fail("[experiment] particle_dt must be positive");
  c.bandwidth = r.number("experiment", "bandwidth", 0.0);
  if (c.bandwidth != 0.0 && c.bandwidth < c.grid.spacing()) fail("[experiment] bandwidth is below the grid spacing");
  c.kinetic_levels = static_cast<int>(r.integer("experiment", "kinetic_levels", 10));
  if (c.kinetic_levels < 0 || c.kinetic_levels > 60) fail("[experiment] kinetic_levels must lie in [0, 60]");
  c.tail_max_M = static_cast<int>(r.integer("experiment", "tail_max_M", 8));
  if (c.tail_max_M < 1) fail("[experiment] tail_max_M must be >= 1");

  // integrability profile
  if (c.kernel.exponents) {
    const LpsReport rep = check_lps(d, *c.kernel.exponents);
    if (!rep.a1_pass) {
      if (c.profile == "theory")
        fail("kernel '" + c.kernel.label + "' fails A1 (" + rep.summary() + "); use profile = exploratory");
      c.warnings.push_back("kernel '" + c.kernel.label + "' fails A1 (" + rep.summary() +
                           "); results are exploratory");
    }
  } else if (c.profile == "theory") {
    fail("theory profile needs declared kernel exponents");
  }

  // solver-level checks (time grid, gamma, stability guard)
  c.solver_config(c.seed).validate();
  return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

// --------------------------------------------------------- initial data

Density ExperimentConfig::density(const InitialData& d) const {
  const int dim = grid.dim();
  if (d.preset == "constant") return [v = d.value](std::span<const double>) { return v; };
  if (d.preset == "sine")
    return [v = d.value, a = d.amplitude](std::span<const double> x) {
      return v + a * std::sin(2.0 * std::numbers::pi * x[0]);
    };
  if (d.preset == "modes")
    return [v = d.value, a = d.amplitude, dim](std::span<const double> x) {
      return v + a * std::cos(2.0 * std::numbers::pi * x[0]) + 0.6 * a * std::sin(4.0 * std::numbers::pi * x[dim - 1]);
    };
  if (d.preset == "bump" || d.preset == "mixture") {
    const MollifierKappa bump(dim, d.width, 0.5);
    // bump: value + amplitude * unit-mass bump at the centre.
    // mixture: (1 - amplitude) * value + amplitude * unit-mass bump, same mass as the constant.
    const bool mix = d.preset == "mixture";
    return [bump, v = d.value, a = d.amplitude, mix, dim](std::span<const double> x) {
      std::array<double, 3> z{0.0, 0.0, 0.0};
      for (int i = 0; i < dim; ++i) z[i] = periodic_offset(x[i], 0.5);
      const double b = bump.spatial(std::span<const double>(z.data(), dim));
      return mix ? (1.0 - a) * v + a * v * b : v + a * b;
    };
  }
  fail("initial preset '" + d.preset + "' has no closed form");
}

double ExperimentConfig::density_bound(const InitialData& d) const {
  if (d.preset == "constant") return std::abs(d.value);
  if (d.preset == "sine") return d.value + std::abs(d.amplitude);
  if (d.preset == "modes") return d.value + 1.6 * std::abs(d.amplitude);
  // Peak of a unit-mass bump of scale w in dim dimensions.
  const MollifierKappa bump(grid.dim(), d.width, 0.5);
  const std::array<double, 3> zero{0.0, 0.0, 0.0};
  const double peak = bump.spatial(std::span<const double>(zero.data(), grid.dim()));
  if (d.preset == "bump") return d.value + std::abs(d.amplitude) * peak;
  if (d.preset == "mixture") return std::abs(d.value) * (1.0 + std::abs(d.amplitude) * peak);
  fail("initial preset '" + d.preset + "' has no closed form");
}

RealField ExperimentConfig::initial_field(const InitialData& d) const {
  if (d.preset == "file") {
    std::ifstream in(d.file, std::ios::binary);
    if (!in) fail("cannot open initial data file " + d.file.string());
    std::vector<RealField> fields;
    try {
      fields = read_snapshots(in);
    } catch (const std::exception& e) {
      fail(std::string("initial data file: ") + e.what());
    }
    if (fields.empty()) fail("initial data file holds no field");
    if (!(fields.front().grid() == grid)) fail("initial data file grid differs from [grid]");
    return fields.front();
  }
  return RealField::from_function(grid, density(d));
}

RealField ExperimentConfig::perturbed_field() const {
  RealField out = initial_field(initial_b);
  if (perturbation == 0.0) return out;
  const MollifierKappa bump(grid.dim(), perturbation_width, 0.5);
  const int dim = grid.dim();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    std::array<double, 3> z{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) z[a] = periodic_offset(x[a], 0.5);
    out[i] += perturbation * bump.spatial(std::span<const double>(z.data(), dim));
  }
  return out;
}

SolverConfig ExperimentConfig::solver_config(std::uint64_t run_seed) const {
  SolverConfig s;
  s.grid = grid;
  s.kernel = KernelSchedule(kernel);
  s.noise = noise;
  s.noise_amplitude = noise_amplitude;
  s.sigma_n = sigma_n;
  s.sigma_correction = sigma_correction;
  s.gamma = gamma;
  s.t_start = t_start;
  s.t_end = t_end;
  s.dt = dt;
  s.seed = run_seed;
  s.clamp = clamp;
  s.snapshot_stride = snapshot_stride;
  s.initial = initial_field(initial);
  return s;
}

double ExperimentConfig::effective_bandwidth() const { return bandwidth > 0.0 ? bandwidth : 2.0 * grid.spacing(); }

}  // namespace dk::cli

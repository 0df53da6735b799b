#include "jflow/app.hpp"

#include "jflow/error.hpp"
#include "jflow/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

namespace jflow::app {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Collects every problem instead of stopping at the first.
class Reader {
public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  void get(const pt::ptree& tree, const std::string& section, const std::string& key, T& out) {
    const auto it = tree.find(key);
    if (it == tree.not_found()) return;
    parse(path(section, key), it->second.data(), out);
  }

  void parse(const std::string& where, const std::string& raw, double& out) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
      errors_.push_back(where + ": expected a number, got '" + s + "'");
      return;
    }
    out = v;
  }
  void parse(const std::string& where, const std::string& raw, std::optional<double>& out) {
    double v = 0.0;
    const auto before = errors_.size();
    parse(where, raw, v);
    if (errors_.size() == before) out = v;
  }
  template <class I>
    requires std::is_integral_v<I> && (!std::is_same_v<I, bool>)
  void parse(const std::string& where, const std::string& raw, I& out) {
    const std::string s = trim(raw);
    I v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
      errors_.push_back(where + ": expected an integer, got '" + s + "'");
      return;
    }
    out = v;
  }
  void parse(const std::string& where, const std::string& raw, bool& out) {
    const std::string s = trim(raw);
    if (s == "on" || s == "true" || s == "yes" || s == "1") {
      out = true;
    } else if (s == "off" || s == "false" || s == "no" || s == "0") {
      out = false;
    } else {
      errors_.push_back(where + ": expected on/off, got '" + s + "'");
    }
  }
  void parse(const std::string&, const std::string& raw, std::string& out) { out = trim(raw); }

  std::vector<double> numbers(const std::string& where, const std::string& raw) {
    std::vector<double> out;
    std::string text = raw;
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::string tok;
    for (int k = 0; in >> tok; ++k) {
      double v = 0.0;
      const auto before = errors_.size();
      parse(where + "[" + std::to_string(k) + "]", tok, v);
      if (errors_.size() == before) out.push_back(v);
    }
    return out;
  }

  // "cos 0.05 1 0 1 0; sin -0.01 0 1 0 0"
  std::vector<FourierMode> modes(const std::string& where, const std::string& raw) {
    std::vector<FourierMode> out;
    const auto items = split_list(raw, ';');
    for (std::size_t m = 0; m < items.size(); ++m) {
      const std::string at = where + "[" + std::to_string(m) + "]";
      std::istringstream in(items[m]);
      std::string kind;
      in >> kind;
      FourierMode mode;
      if (kind == "cos" || kind == "sin") {
        mode.cosine = kind == "cos";
      } else {
        errors_.push_back(at + ": mode kind must be cos or sin, got '" + kind + "'");
        continue;
      }
      std::vector<std::string> rest;
      for (std::string tok; in >> tok;) rest.push_back(tok);
      if (rest.size() != 5) {
        errors_.push_back(at + ": expected 'kind amplitude k1 k2 k3 k4'");
        continue;
      }
      parse(at + ".amplitude", rest[0], mode.amplitude);
      for (int j = 0; j < 4; ++j) parse(at + ".k" + std::to_string(j + 1), rest[j + 1], mode.k[j]);
      out.push_back(mode);
    }
    return out;
  }

  void unknown(const pt::ptree& tree, const std::string& section, const std::set<std::string>& known) {
    for (const auto& [key, child] : tree) {
      if (!child.empty() && section.empty()) continue; // sections are handled separately
      if (!known.contains(key)) errors_.push_back("unknown key '" + path(section, key) + "'");
    }
  }

  static std::string path(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  std::vector<std::string>& errors_;
};

const std::set<std::string> kTopKeys{"version", "preset", "N", "offsets", "backend", "divisor", "beta",
                                     "rho", "eps", "out", "seed", "snapshot", "path_steps"};
const std::set<std::string> kSections{"flow", "ma", "init", "diagnostics", "chi0", "omega0", "omega_hat"};

void read_form(Reader& r, const pt::ptree& root, const std::string& name, FormSpec& form,
               std::vector<std::string>& errors) {
  const auto it = root.find(name);
  if (it == root.not_found()) return;
  const pt::ptree& t = it->second;
  r.unknown(t, name, {"class", "modes"});
  if (auto c = t.find("class"); c != t.not_found()) {
    const auto v = r.numbers(name + ".class", c->second.data());
    if (v.size() != 4) {
      errors.push_back(name + ".class: expected 'a11 a22 re12 im12'");
    } else {
      form.cls = Herm2{v[0], v[1], {v[2], v[3]}};
    }
  }
  if (auto m = t.find("modes"); m != t.not_found()) form.potential = r.modes(name + ".modes", m->second.data());
}

void apply_overrides(pt::ptree& root, const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) root.put(pt::ptree::path_type(key, '.'), value);
}

} // namespace

std::string RunConfig::canonical() const {
  std::ostringstream o;
  auto form = [&](const char* name, const FormSpec& f) {
    o << name << ".class=" << num(f.cls.a11) << ' ' << num(f.cls.a22) << ' ' << num(f.cls.a12.real()) << ' '
      << num(f.cls.a12.imag()) << '\n';
    for (const auto& m : f.potential) {
      o << name << ".mode=" << (m.cosine ? "cos " : "sin ") << num(m.amplitude);
      for (int k : m.k) o << ' ' << k;
      o << '\n';
    }
  };
  o << "version=" << schema_version << "\nN=" << n << "\noffsets=";
  for (double v : offsets) o << num(v) << ' ';
  o << "\nbackend=" << (backend == Backend::split ? "split" : "full") << "\npreset=" << preset_name
    << "\ndivisor=" << preset.divisor << "\nbeta=" << num(preset.beta) << "\nrho=" << num(preset.rho) << '\n';
  form("chi0", preset.chi0);
  form("omega0", preset.omega0);
  form("omega_hat", preset.omega_hat);
  o << "flow=" << num(flow.dt_safety) << ' ' << num(flow.stop_tolerance) << ' ' << num(flow.max_time) << ' '
    << flow.snapshot_stride << ' ' << flow.degenerate_mode << ' ' << flow.max_rejections << ' ' << flow.max_steps
    << ' ' << (flow.fixed_dt ? num(*flow.fixed_dt) : "adaptive") << '\n';
  o << "ma=" << num(ma.newton_tol) << ' ' << ma.max_newton << ' ' << num(ma.linear_tol) << ' ' << num(ma.damping)
    << ' ' << ma.max_backtracks << ' ' << ma.gmres_restart << ' ' << ma.max_linear_iterations << ' '
    << ma.sup_gauge << '\n';
  o << "eps=";
  for (double e : eps_list) o << num(e) << ' ';
  o << "\ninit=" << init.random_modes << ' ' << num(init.random_amplitude) << ' ' << init.random_band << '\n';
  form("init", FormSpec{Herm2{}, init.modes});
  const auto& d = diagnostics;
  o << "diagnostics=" << num(d.sup_phi_budget) << ' ' << num(d.sup_phidot_budget) << ' ' << num(d.max_ratio) << ' '
    << num(d.trace_tolerance) << ' ' << num(d.monitor_tolerance) << ' ' << num(d.q_slack) << ' '
    << num(d.region_threshold) << ' ' << num(d.q.A) << ' ' << num(d.q.delta) << ' '
    << (d.q.c0_shift ? num(*d.q.c0_shift) : "auto") << ' ' << num(d.q.max_mask_fraction) << ' ' << d.q_stride
    << '\n';
  o << "seed=" << seed << "\nsnapshot=" << (snapshot ? snapshot->generic_string() : "") << "\npath_steps="
    << path_steps << '\n';
  return o.str();
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical()); }

Grid RunConfig::torus_grid() const { return Grid::torus(n, offsets); }
Grid RunConfig::plane_grid() const { return Grid::plane(n, {offsets[0], offsets[1]}); }

namespace {

FormSpec init_spec(const RunConfig& cfg) {
  FormSpec spec{Herm2{}, cfg.init.modes};
  if (cfg.init.random_modes <= 0) return spec;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> wave(-cfg.init.random_band, cfg.init.random_band);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int j = 0; j < cfg.init.random_modes; ++j) {
    FourierMode m;
    m.cosine = coin(rng);
    m.amplitude = cfg.init.random_amplitude * amp(rng);
    do {
      for (int& k : m.k) k = wave(rng);
      if (cfg.backend == Backend::split) {
        // Product data: alternate the factor that carries the mode.
        if (j % 2 == 0) m.k[2] = m.k[3] = 0;
        else m.k[0] = m.k[1] = 0;
      }
    } while (m.k == std::array<int, 4>{});
    spec.potential.push_back(m);
  }
  return spec;
}

} // namespace

ScalarField RunConfig::initial_potential() const { return init_spec(*this).potential_on(torus_grid()); }

SplitField RunConfig::initial_split() const {
  const FormSpec spec = init_spec(*this);
  const SplitForm f = spec.realize_split(plane_grid());
  return {f.first.potential(), f.second.potential()};
}

void validate(const RunConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.schema_version != kSchemaVersion) {
    errors.push_back("version: unsupported schema version " + std::to_string(cfg.schema_version) + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }
  if (cfg.n % 2 != 0) errors.push_back("N must be even (got " + std::to_string(cfg.n) + ")");
  if (cfg.n < 4) errors.push_back("N must be at least 4");
  if (cfg.backend == Backend::full && cfg.n > 24) {
    errors.push_back("N: the full backend is limited to N <= 24 (got " + std::to_string(cfg.n) + ")");
  }
  if (cfg.backend == Backend::split && !cfg.preset.is_split()) {
    errors.push_back("backend: split backend needs product-structured chi0, omega0 and omega_hat");
  }
  if (cfg.backend == Backend::split && cfg.init.modes.size() > 0 &&
      !FormSpec{Herm2{}, cfg.init.modes}.is_split()) {
    errors.push_back("init.modes: split backend needs modes confined to one factor");
  }
  if (cfg.eps_list.empty()) errors.push_back("eps: list is empty");
  for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
    if (!(cfg.eps_list[k] >= 0.0)) {
      errors.push_back("eps[" + std::to_string(k) + "]: must be >= 0 (got " + num(cfg.eps_list[k]) + ")");
    }
  }
  if (cfg.preset.divisor && !(cfg.preset.rho > 0.0)) errors.push_back("rho: must be positive");
  if (cfg.preset.divisor && !(cfg.preset.beta > 0.0)) errors.push_back("beta: must be positive");
  if (cfg.init.random_modes < 0) errors.push_back("init.random_modes: must be >= 0");
  if (cfg.init.random_band < 1) errors.push_back("init.random_band: must be >= 1");
  if (cfg.path_steps < 8 || cfg.path_steps % 2 != 0) errors.push_back("path_steps: must be even and >= 8");
  if (cfg.diagnostics.q_stride < 1) errors.push_back("diagnostics.q_stride: must be >= 1");
  try {
    FlowConfig probe = cfg.flow;
    probe.eps = 0.0;
    probe.validate();
  } catch (const Error& e) {
    errors.push_back(std::string("flow: ") + e.what());
  }
  try {
    cfg.ma.validate();
  } catch (const Error& e) {
    errors.push_back(std::string("ma: ") + e.what());
  }
  if (cfg.preset.divisor) {
    try {
      cfg.diagnostics.q.validate(cfg.preset.beta);
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems) errors.push_back("diagnostics.q: " + p);
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
}

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }
  apply_overrides(root, overrides);

  std::vector<std::string> errors;
  Reader r(errors);
  RunConfig cfg;
  cfg.overrides = overrides;

  r.unknown(root, "", kTopKeys);
  for (const auto& [key, child] : root) {
    if (!child.empty() && !kSections.contains(key)) errors.push_back("unknown section '" + key + "'");
  }

  r.get(root, "", "version", cfg.schema_version);
  r.get(root, "", "N", cfg.n);
  if (auto it = root.find("offsets"); it != root.not_found()) {
    const auto v = r.numbers("offsets", it->second.data());
    if (v.size() != 4) errors.push_back("offsets: expected four numbers");
    else std::copy(v.begin(), v.end(), cfg.offsets.begin());
  }

  r.get(root, "", "preset", cfg.preset_name);
  if (!cfg.preset_name.empty()) {
    try {
      cfg.preset = preset(cfg.preset_name);
    } catch (const Error&) {
      std::string names;
      for (const auto& p : preset_names()) names += " " + p;
      errors.push_back("preset: unknown preset '" + cfg.preset_name + "' (known:" + names + ")");
    }
  } else {
    const FormSpec id{Herm2::identity(), {}};
    cfg.preset = PresetSpec{"custom", id, id, id};
  }
  read_form(r, root, "chi0", cfg.preset.chi0, errors);
  read_form(r, root, "omega0", cfg.preset.omega0, errors);
  read_form(r, root, "omega_hat", cfg.preset.omega_hat, errors);
  r.get(root, "", "divisor", cfg.preset.divisor);
  r.get(root, "", "beta", cfg.preset.beta);
  r.get(root, "", "rho", cfg.preset.rho);

  cfg.backend = cfg.preset.is_split() ? Backend::split : Backend::full;
  if (auto it = root.find("backend"); it != root.not_found()) {
    const std::string b = trim(it->second.data());
    if (b == "split") cfg.backend = Backend::split;
    else if (b == "full") cfg.backend = Backend::full;
    else if (b != "auto") errors.push_back("backend: expected full, split or auto, got '" + b + "'");
  }

  cfg.eps_list = cfg.preset.divisor ? std::vector<double>{0.2, 0.1, 0.05} : std::vector<double>{0.0};
  if (auto it = root.find("eps"); it != root.not_found()) cfg.eps_list = r.numbers("eps", it->second.data());

  std::string out;
  r.get(root, "", "out", out);
  if (!out.empty()) cfg.out = out;
  r.get(root, "", "seed", cfg.seed);
  std::string snapshot;
  r.get(root, "", "snapshot", snapshot);
  if (!snapshot.empty()) cfg.snapshot = snapshot;
  r.get(root, "", "path_steps", cfg.path_steps);

  if (auto it = root.find("flow"); it != root.not_found()) {
    const auto& t = it->second;
    r.unknown(t, "flow", {"dt_safety", "stop_tolerance", "max_time", "snapshot_stride", "degenerate_mode",
                          "max_rejections", "max_steps", "fixed_dt"});
    r.get(t, "flow", "dt_safety", cfg.flow.dt_safety);
    r.get(t, "flow", "stop_tolerance", cfg.flow.stop_tolerance);
    r.get(t, "flow", "max_time", cfg.flow.max_time);
    r.get(t, "flow", "snapshot_stride", cfg.flow.snapshot_stride);
    r.get(t, "flow", "degenerate_mode", cfg.flow.degenerate_mode);
    r.get(t, "flow", "max_rejections", cfg.flow.max_rejections);
    r.get(t, "flow", "max_steps", cfg.flow.max_steps);
    r.get(t, "flow", "fixed_dt", cfg.flow.fixed_dt);
  }
  if (auto it = root.find("ma"); it != root.not_found()) {
    const auto& t = it->second;
    r.unknown(t, "ma", {"newton_tol", "max_newton", "linear_tol", "damping", "max_backtracks", "gmres_restart",
                        "max_linear_iterations", "sup_gauge"});
    r.get(t, "ma", "newton_tol", cfg.ma.newton_tol);
    r.get(t, "ma", "max_newton", cfg.ma.max_newton);
    r.get(t, "ma", "linear_tol", cfg.ma.linear_tol);
    r.get(t, "ma", "damping", cfg.ma.damping);
    r.get(t, "ma", "max_backtracks", cfg.ma.max_backtracks);
    r.get(t, "ma", "gmres_restart", cfg.ma.gmres_restart);
    r.get(t, "ma", "max_linear_iterations", cfg.ma.max_linear_iterations);
    r.get(t, "ma", "sup_gauge", cfg.ma.sup_gauge);
  }
  if (auto it = root.find("init"); it != root.not_found()) {
    const auto& t = it->second;
    r.unknown(t, "init", {"modes", "random_modes", "random_amplitude", "random_band"});
    if (auto m = t.find("modes"); m != t.not_found()) cfg.init.modes = r.modes("init.modes", m->second.data());
    r.get(t, "init", "random_modes", cfg.init.random_modes);
    r.get(t, "init", "random_amplitude", cfg.init.random_amplitude);
    r.get(t, "init", "random_band", cfg.init.random_band);
  }
  if (auto it = root.find("diagnostics"); it != root.not_found()) {
    const auto& t = it->second;
    auto& d = cfg.diagnostics;
    r.unknown(t, "diagnostics", {"sup_phi_budget", "sup_phidot_budget", "max_ratio", "trace_tolerance",
                                 "monitor_tolerance", "q_slack", "region_threshold", "q_A", "q_delta",
                                 "q_c0_shift", "q_max_mask_fraction", "q_stride"});
    r.get(t, "diagnostics", "sup_phi_budget", d.sup_phi_budget);
    r.get(t, "diagnostics", "sup_phidot_budget", d.sup_phidot_budget);
    r.get(t, "diagnostics", "max_ratio", d.max_ratio);
    r.get(t, "diagnostics", "trace_tolerance", d.trace_tolerance);
    r.get(t, "diagnostics", "monitor_tolerance", d.monitor_tolerance);
    r.get(t, "diagnostics", "q_slack", d.q_slack);
    r.get(t, "diagnostics", "region_threshold", d.region_threshold);
    r.get(t, "diagnostics", "q_A", d.q.A);
    r.get(t, "diagnostics", "q_delta", d.q.delta);
    r.get(t, "diagnostics", "q_c0_shift", d.q.c0_shift);
    r.get(t, "diagnostics", "q_max_mask_fraction", d.q.max_mask_fraction);
    r.get(t, "diagnostics", "q_stride", d.q_stride);
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    errors.insert(errors.end(), e.problems.begin(), e.problems.end());
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  RunConfig cfg = parse_config(text, overrides);
  cfg.source_path = path.string();
  return cfg;
}

} // namespace jflow::app

#include "crossdiff/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

using nlohmann::json;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

// Reads keys of one JSON object, echoing each value (given or default) into `echo`.
// finish() rejects keys that were never asked for.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(fmt::format("'{}' must be an object, got {}", where(), type_name(obj_)));
  }

  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &obj_.at(key) : nullptr;
  }

  double number(const std::string& key, double def) {
    const json* v = raw(key);
    double out = def;
    if (v) {
      if (!v->is_number()) throw bad_type(key, "a number", *v);
      out = v->get<double>();
    }
    echo[key] = out;
    return out;
  }

  std::optional<double> optional_number(const std::string& key) {
    const json* v = raw(key);
    if (!v) {
      echo[key] = nullptr;
      return std::nullopt;
    }
    if (!v->is_number()) throw bad_type(key, "a number", *v);
    echo[key] = v->get<double>();
    return v->get<double>();
  }

  long long integer(const std::string& key, long long def) {
    const json* v = raw(key);
    long long out = def;
    if (v) {
      if (!v->is_number_integer()) throw bad_type(key, "an integer", *v);
      out = v->get<long long>();
    }
    echo[key] = out;
    return out;
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = raw(key);
    bool out = def;
    if (v) {
      if (!v->is_boolean()) throw bad_type(key, "true or false", *v);
      out = v->get<bool>();
    }
    echo[key] = out;
    return out;
  }

  std::string text(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed) {
    const json* v = raw(key);
    std::string out = def;
    if (v) {
      if (!v->is_string()) throw bad_type(key, "a string", *v);
      out = v->get<std::string>();
    }
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return out == a; })) {
      std::string list;
      for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw ConfigError(fmt::format("'{}' must be one of {}, got \"{}\"", key_path(key), list, out));
    }
    echo[key] = out;
    return out;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
    const json* v = raw(key);
    std::vector<double> out = def;
    if (v) {
      if (!v->is_array()) throw bad_type(key, "an array of numbers", *v);
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number()) throw bad_type(key, "an array of numbers", *v);
        out.push_back(e.get<double>());
      }
    }
    echo[key] = out;
    return out;
  }

  std::vector<long long> integers(const std::string& key, const std::vector<long long>& def) {
    const json* v = raw(key);
    std::vector<long long> out = def;
    if (v) {
      if (!v->is_array()) throw bad_type(key, "an array of integers", *v);
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number_integer()) throw bad_type(key, "an array of integers", *v);
        out.push_back(e.get<long long>());
      }
    }
    echo[key] = out;
    return out;
  }

  Point point(const std::string& key, const Point& def) {
    const std::vector<double> v = numbers(key, {def[0], def[1]});
    if (v.size() != 1 && v.size() != 2)
      throw ConfigError(fmt::format("'{}' must have one or two coordinates", key_path(key)));
    return {v[0], v.size() > 1 ? v[1] : 0.0};
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      (void)value;
      if (!seen_.count(key)) throw ConfigError(fmt::format("unknown key '{}'", key_path(key)));
    }
  }

  ConfigError bad_type(const std::string& key, const char* expected, const json& got) const {
    return ConfigError(fmt::format("'{}' must be {}, got {}", key_path(key), expected, type_name(got)));
  }

  json echo = json::object();

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::map<std::string, std::vector<std::string>>& descriptor_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"constant", {"value", "offset"}},
      {"bump", {"amplitude", "center", "radius", "offset"}},
      {"gaussian", {"amplitude", "center", "width", "offset"}},
      {"sine", {"amplitude", "modes", "offset"}},
      {"linear", {"value", "slope", "offset"}},
      {"noise", {"value", "amplitude", "seed", "offset"}},
      {"logistic", {"rate", "capacity"}},
  };
  return keys;
}

FieldDescriptor parse_descriptor(const json& j, const std::string& path, bool allow_state, json& echo) {
  FieldDescriptor d;
  if (j.is_number()) {
    d.value = j.get<double>();
    echo = json{{"type", "constant"}, {"value", d.value}, {"offset", 0.0}};
    return d;
  }
  Reader r(j, path);
  d.type = r.text("type", "constant", {"constant", "bump", "gaussian", "sine", "linear", "noise", "logistic"});
  if (d.type == "logistic" && !allow_state)
    throw ConfigError(fmt::format("'{}': logistic fields are only valid as sources", path));
  for (const std::string& key : descriptor_keys().at(d.type)) {
    if (key == "value") d.value = r.number(key, 0.0);
    else if (key == "offset") d.offset = r.number(key, 0.0);
    else if (key == "amplitude") d.amplitude = r.number(key, 1.0);
    else if (key == "center") d.center = r.point(key, {0.5, 0.5});
    else if (key == "radius") d.radius = r.number(key, 0.25);
    else if (key == "width") d.width = r.number(key, 0.1);
    else if (key == "slope") d.slope = r.point(key, {0.0, 0.0});
    else if (key == "rate") d.rate = r.number(key, 1.0);
    else if (key == "capacity") d.capacity = r.number(key, 1.0);
    else if (key == "seed") d.seed = static_cast<std::uint64_t>(r.integer(key, 0));
    else if (key == "modes") {
      const auto m = r.integers(key, {1, 1});
      if (m.empty() || m.size() > 2) throw ConfigError(fmt::format("'{}.modes' needs one or two entries", path));
      d.modes = {static_cast<int>(m[0]), static_cast<int>(m.size() > 1 ? m[1] : 1)};
    }
  }
  if (d.type == "bump" && !(d.radius > 0.0)) throw ConfigError(fmt::format("'{}.radius' must be positive", path));
  if (d.type == "gaussian" && !(d.width > 0.0)) throw ConfigError(fmt::format("'{}.width' must be positive", path));
  if (d.type == "logistic" && !(d.capacity > 0.0))
    throw ConfigError(fmt::format("'{}.capacity' must be positive", path));
  r.finish();
  echo = r.echo;
  return d;
}

FieldDescriptor descriptor(Reader& r, const std::string& key, const FieldDescriptor& def) {
  const json* v = r.raw(key);
  json echo;
  if (!v) {
    json given = json{{"type", def.type}, {"value", def.value}};
    FieldDescriptor d = parse_descriptor(given, r.key_path(key), false, echo);
    r.echo[key] = echo;
    return d;
  }
  FieldDescriptor d = parse_descriptor(*v, r.key_path(key), false, echo);
  r.echo[key] = echo;
  return d;
}

std::optional<FieldDescriptor> optional_descriptor(Reader& r, const std::string& key, bool allow_state) {
  const json* v = r.raw(key);
  if (!v) {
    r.echo[key] = nullptr;
    return std::nullopt;
  }
  json echo;
  FieldDescriptor d = parse_descriptor(*v, r.key_path(key), allow_state, echo);
  r.echo[key] = echo;
  return d;
}

std::vector<std::optional<FieldDescriptor>> descriptor_list(Reader& r, const std::string& key, int m,
                                                            bool allow_state, bool required) {
  const json* v = r.raw(key);
  std::vector<std::optional<FieldDescriptor>> out(m);
  json echo = json::array();
  if (!v) {
    if (required) throw ConfigError(fmt::format("missing key '{}'", r.key_path(key)));
    for (int i = 0; i < m; ++i) echo.push_back(nullptr);
    r.echo[key] = echo;
    return out;
  }
  if (!v->is_array() || static_cast<int>(v->size()) != m)
    throw ConfigError(fmt::format("'{}' must be an array with one entry per species ({})", r.key_path(key), m));
  for (int i = 0; i < m; ++i) {
    const json& e = (*v)[i];
    const std::string path = fmt::format("{}[{}]", r.key_path(key), i);
    if (e.is_null()) {
      if (required) throw ConfigError(fmt::format("'{}' must not be null", path));
      echo.push_back(nullptr);
      continue;
    }
    json de;
    out[i] = parse_descriptor(e, path, allow_state, de);
    echo.push_back(de);
  }
  r.echo[key] = echo;
  return out;
}

CrossTensor parse_tensor(const json& j, int dim, const std::string& path, json& echo) {
  if (j.is_number()) {
    echo = j.get<double>();
    return CrossTensor::isotropic(dim, j.get<double>());
  }
  if (j.is_array() && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); })) {
    std::vector<double> v = j.get<std::vector<double>>();
    if (dim == 2 && v.size() == 2) v = {v[0], 0.0, 0.0, v[1]};
    if (dim == 2 && v.size() == 4) {
      echo = v;
      return CrossTensor::matrix(v[0], v[1], v[2], v[3]);
    }
    if (dim == 1 && v.size() == 1) {
      echo = v[0];
      return CrossTensor::scalar(v[0]);
    }
  }
  throw ConfigError(fmt::format("'{}' must be a number, [kx, ky] or [k00, k01, k10, k11] matching the grid dimension",
                                path));
}

void read_grid(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("grid");
  Reader r(g ? *g : empty, "grid");
  const bool keulegan = cfg.kind == ScenarioKind::keulegan;
  const std::vector<long long> dims = r.integers("dims", keulegan ? std::vector<long long>{40, 10}
                                                                   : std::vector<long long>{20, 20});
  if (dims.empty() || dims.size() > 2) throw ConfigError("'grid.dims' needs one or two entries");
  const int dim = static_cast<int>(dims.size());
  std::vector<double> lo_def(dim, 0.0);
  std::vector<double> hi_def(dim, 1.0);
  if (keulegan && dim == 2) hi_def[1] = 0.25;
  const std::vector<double> lo = r.numbers("lower", lo_def);
  const std::vector<double> hi = r.numbers("upper", hi_def);
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
    throw ConfigError("'grid.lower' and 'grid.upper' must match the length of 'grid.dims'");
  for (int a = 0; a < dim; ++a) {
    if (dims[a] < 1) throw ConfigError("'grid.dims' entries must be positive");
    if (!(hi[a] > lo[a])) throw ConfigError("'grid.upper' must exceed 'grid.lower'");
  }
  r.finish();
  root.echo["grid"] = r.echo;
  cfg.box.dim = dim;
  cfg.box.lower = {lo[0], dim == 2 ? lo[1] : 0.0};
  cfg.box.upper = {hi[0], dim == 2 ? hi[1] : 0.0};
  cfg.cells = {static_cast<int>(dims[0]), dim == 2 ? static_cast<int>(dims[1]) : 1};
}

void read_stepper(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("stepper");
  Reader r(g ? *g : empty, "stepper");
  StepperConfig& s = cfg.stepper;
  const bool keulegan = cfg.kind == ScenarioKind::keulegan;
  s.dt = r.number("dt", keulegan ? 0.01 : s.dt);
  s.t_end = r.number("t_end", keulegan ? 1.0 : s.t_end);
  s.picard_tol = r.number("picard_tol", s.picard_tol);
  s.picard_max = static_cast<int>(r.integer("picard_max", s.picard_max));
  s.lin_tol = r.number("lin_tol", s.lin_tol);
  s.lin_max = static_cast<int>(r.integer("lin_max", s.lin_max));
  s.snapshot_every = static_cast<int>(r.integer("snapshot_every", keulegan ? 10 : s.snapshot_every));
  s.face_weighting =
      r.text("face_weighting", "upwind", {"upwind", "arithmetic"}) == "upwind" ? FaceWeighting::upwind
                                                                             : FaceWeighting::arithmetic;
  r.finish();
  root.echo["stepper"] = r.echo;
  try {
    s.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("stepper: {}", e.what()));
  }
}

void read_model(Reader& root, ScenarioConfig& cfg) {
  const json* g = root.raw("model");
  if (!g) throw ConfigError("missing key 'model'");
  Reader r(*g, "model");
  const int dim = cfg.box.dim;
  cfg.delta = r.numbers("delta", {});
  const int m = static_cast<int>(cfg.delta.size());
  if (m < 1) throw ConfigError("'model.delta' must list one diffusivity per species");

  const json* k = r.raw("K");
  if (!k) throw ConfigError("missing key 'model.K'");
  if (!k->is_array() || static_cast<int>(k->size()) != m)
    throw ConfigError(fmt::format("'model.K' must be an {0} x {0} array of tensors", m));
  json k_echo = json::array();
  for (int i = 0; i < m; ++i) {
    const json& row = (*k)[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m)
      throw ConfigError(fmt::format("'model.K[{}]' must have {} tensors", i, m));
    json row_echo = json::array();
    for (int j = 0; j < m; ++j) {
      json e;
      cfg.K.push_back(parse_tensor(row[j], dim, fmt::format("model.K[{}][{}]", i, j), e));
      row_echo.push_back(e);
    }
    k_echo.push_back(row_echo);
  }
  r.echo["K"] = k_echo;

  cfg.ell = r.number("ell", 1.0);
  cfg.coupling = r.text("coupling", "truncated", {"truncated", "untruncated"}) == "truncated" ? Coupling::truncated
                                                                                           : Coupling::untruncated;
  const auto initial = descriptor_list(r, "initial", m, false, true);
  for (const auto& d : initial) cfg.initial.push_back(*d);
  cfg.dirichlet = descriptor_list(r, "dirichlet", m, false, false);
  cfg.sources = descriptor_list(r, "sources", m, true, false);
  r.finish();
  root.echo["model"] = r.echo;
}

void read_aquifer(Reader& root, ScenarioConfig& cfg) {
  const json* g = root.raw("aquifer");
  if (!g) throw ConfigError("missing key 'aquifer'");
  Reader r(*g, "aquifer");
  AquiferConfig& a = cfg.aquifer;
  a.h2 = r.number("h2", a.h2);
  a.delta = r.number("delta", a.delta);
  a.alpha = r.number("alpha", a.alpha);
  a.epsilon = r.number("epsilon", a.epsilon);
  FieldDescriptor h_def;
  h_def.value = 0.5 * a.h2;
  FieldDescriptor h1_def;
  h1_def.value = 0.1 * a.h2;
  a.initial_h = descriptor(r, "initial_h", h_def);
  a.initial_h1 = descriptor(r, "initial_h1", h1_def);
  a.dirichlet_h = optional_descriptor(r, "dirichlet_h", false);
  a.dirichlet_h1 = optional_descriptor(r, "dirichlet_h1", false);
  a.pumping = optional_descriptor(r, "pumping", false);
  r.finish();
  root.echo["aquifer"] = r.echo;
}

void read_keulegan(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("keulegan");
  Reader r(g ? *g : empty, "keulegan");
  KeuleganConfig& k = cfg.keulegan;
  KeuleganOptions& o = k.options;
  k.pump = r.number("pump", k.pump);
  k.tilt = r.number("tilt", k.tilt);
  o.h2 = r.number("h2", o.h2);
  o.delta = r.number("delta", o.delta);
  o.alpha = r.number("alpha", o.alpha);
  o.epsilon = r.number("epsilon", o.epsilon);
  o.h1_level = r.number("h1_level", o.h1_level);
  o.h_mean = r.number("h_mean", o.h_mean);
  o.relax_time = r.number("relax_time", o.relax_time);
  o.well_width = r.number("well_width", o.well_width);
  if (r.has("well")) {
    o.well = r.point("well", {0.0, 0.0});
  } else {
    r.raw("well");
    r.echo["well"] = nullptr;
  }
  r.finish();
  root.echo["keulegan"] = r.echo;
}

void read_diagnostics(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("diagnostics");
  Reader r(g ? *g : empty, "diagnostics");
  DiagnosticsConfig& d = cfg.diagnostics;
  d.conditions = r.boolean("conditions", d.conditions);
  d.g_s = r.number("g_s", d.g_s);
  d.ell0 = r.optional_number("ell0");
  d.m = r.number("m", d.m);
  d.m_prime = r.number("m_prime", d.m_prime);
  d.s = r.number("s", d.s);
  d.M_s = r.optional_number("M_s");
  d.sobolev_beta = r.optional_number("sobolev_beta");
  d.n_max = static_cast<int>(r.integer("n_max", d.n_max));
  d.degiorgi = r.boolean("degiorgi", d.degiorgi);
  if (r.has("bounds")) {
    const auto b = r.numbers("bounds", {});
    if (b.size() != 2 || !(b[0] <= b[1])) throw ConfigError("'diagnostics.bounds' must be [lo, hi] with lo <= hi");
    d.bounds = std::array<double, 2>{b[0], b[1]};
  } else {
    r.raw("bounds");
    r.echo["bounds"] = nullptr;
  }
  {
    const json* p = r.raw("perturbation");
    Reader pr(p ? *p : empty, "diagnostics.perturbation");
    PerturbationConfig& pc = d.perturbation;
    pc.amplitude = pr.number("amplitude", pc.amplitude);
    pc.center = pr.point("center", pc.center);
    pc.radius = pr.number("radius", pc.radius);
    pc.shape = pr.text("shape", pc.shape, {"bump", "plateau"});
    pc.species = static_cast<int>(pr.integer("species", pc.species));
    if (!(pc.radius > 0.0)) throw ConfigError("'diagnostics.perturbation.radius' must be positive");
    pr.finish();
    r.echo["perturbation"] = pr.echo;
  }
  if (d.n_max < 0) throw ConfigError("'diagnostics.n_max' must be nonnegative");
  r.finish();
  root.echo["diagnostics"] = r.echo;
}

void read_convergence(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("convergence");
  Reader r(g ? *g : empty, "convergence");
  ConvergenceConfig& c = cfg.convergence;
  c.kind = r.text("case", c.kind, {"heat_sine", "manufactured"});
  std::vector<long long> grids_def(c.grids.begin(), c.grids.end());
  const auto grids = r.integers("grids", grids_def);
  c.grids.assign(grids.begin(), grids.end());
  c.dts = r.numbers("dts", c.dts);
  c.t_end = r.number("t_end", c.t_end);
  if (c.grids.empty() || c.grids.size() != c.dts.size())
    throw ConfigError("'convergence.grids' and 'convergence.dts' must be nonempty and of equal length");
  r.finish();
  root.echo["convergence"] = r.echo;
}

void read_sweep(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("sweep");
  Reader r(g ? *g : empty, "sweep");
  cfg.epsilons = r.numbers("epsilons", cfg.epsilons);
  r.finish();
  root.echo["sweep"] = r.echo;
}

void read_outputs(Reader& root, ScenarioConfig& cfg) {
  const json empty = json::object();
  const json* g = root.raw("outputs");
  Reader r(g ? *g : empty, "outputs");
  cfg.outputs.snapshots = r.boolean("snapshots", cfg.outputs.snapshots);
  cfg.outputs.profiles = r.boolean("profiles", cfg.outputs.profiles);
  r.finish();
  root.echo["outputs"] = r.echo;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void set_noise_seed(json& j, std::uint64_t seed) {
  if (j.is_object()) {
    if (j.contains("type") && j["type"] == "noise") j["seed"] = seed;
    for (auto& [k, v] : j.items()) {
      (void)k;
      set_noise_seed(v, seed);
    }
  } else if (j.is_array()) {
    for (auto& v : j) set_noise_seed(v, seed);
  }
}

constexpr double kPi = std::numbers::pi;

double unit(double x, double lo, double extent) { return (x - lo) / extent; }

double evaluate(const FieldDescriptor& d, const Box& box, const Point& x) {
  const double dx = x[0] - d.center[0];
  const double dy = box.dim == 2 ? x[1] - d.center[1] : 0.0;
  const double r2 = dx * dx + dy * dy;
  double v = 0.0;
  if (d.type == "constant") {
    v = d.value;
  } else if (d.type == "bump") {
    const double q = 1.0 - r2 / (d.radius * d.radius);
    v = q > 0.0 ? d.amplitude * q * q : 0.0;
  } else if (d.type == "gaussian") {
    v = d.amplitude * std::exp(-r2 / (2.0 * d.width * d.width));
  } else if (d.type == "sine") {
    v = d.amplitude * std::sin(d.modes[0] * kPi * unit(x[0], box.lower[0], box.extent(0)));
    if (box.dim == 2) v *= std::sin(d.modes[1] * kPi * unit(x[1], box.lower[1], box.extent(1)));
  } else if (d.type == "linear") {
    v = d.value + d.slope[0] * (x[0] - box.lower[0]);
    if (box.dim == 2) v += d.slope[1] * (x[1] - box.lower[1]);
  } else if (d.type == "noise") {
    std::uint64_t bits[2];
    std::memcpy(&bits[0], &x[0], sizeof(double));
    std::memcpy(&bits[1], &x[1], sizeof(double));
    std::seed_seq seq{static_cast<std::uint32_t>(d.seed), static_cast<std::uint32_t>(d.seed >> 32),
                      static_cast<std::uint32_t>(bits[0]), static_cast<std::uint32_t>(bits[0] >> 32),
                      static_cast<std::uint32_t>(bits[1]), static_cast<std::uint32_t>(bits[1] >> 32)};
    std::mt19937_64 gen(seq);
    v = d.value + d.amplitude * std::generate_canonical<double, 53>(gen);
  } else {
    throw InvalidParameter(fmt::format("field type '{}' is not a function of position", d.type));
  }
  return v + d.offset;
}

}  // namespace

const char* kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::generic: return "generic";
    case ScenarioKind::aquifer: return "aquifer";
    case ScenarioKind::keulegan: return "keulegan";
  }
  return "generic";
}

ScenarioConfig parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed config at line {}: {}", line_of(text, e.byte), e.what()));
  }

  ScenarioConfig cfg;
  Reader root(doc, "");
  const json* version = root.raw("version");
  if (!version) throw ConfigError("missing key 'version'");
  if (!version->is_number_integer() || version->get<long long>() != kConfigVersion)
    throw ConfigError(fmt::format("unsupported config version {} (expected {})", version->dump(), kConfigVersion));
  root.echo["version"] = kConfigVersion;

  const std::string kind = root.text("kind", "generic", {"generic", "aquifer", "keulegan"});
  cfg.kind = kind == "generic" ? ScenarioKind::generic
             : kind == "aquifer" ? ScenarioKind::aquifer
                                 : ScenarioKind::keulegan;

  const std::map<ScenarioKind, std::vector<std::string>> foreign = {
      {ScenarioKind::generic, {"aquifer", "keulegan", "sweep"}},
      {ScenarioKind::aquifer, {"model", "keulegan", "convergence"}},
      {ScenarioKind::keulegan, {"model", "aquifer", "convergence"}},
  };
  static const std::set<std::string> sections = {"version", "kind", "grid", "stepper", "model", "aquifer",
                                                 "keulegan", "diagnostics", "convergence", "sweep", "outputs", "seed"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!sections.count(key)) throw ConfigError(fmt::format("unknown key '{}'", key));
  }
  for (const std::string& key : foreign.at(cfg.kind))
    if (doc.contains(key)) throw ConfigError(fmt::format("section '{}' does not apply to kind {}", key, kind));

  read_grid(root, cfg);
  read_stepper(root, cfg);
  switch (cfg.kind) {
    case ScenarioKind::generic:
      read_model(root, cfg);
      read_convergence(root, cfg);
      break;
    case ScenarioKind::aquifer:
      read_aquifer(root, cfg);
      read_sweep(root, cfg);
      break;
    case ScenarioKind::keulegan:
      read_keulegan(root, cfg);
      read_sweep(root, cfg);
      break;
  }
  read_diagnostics(root, cfg);
  read_outputs(root, cfg);
  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 0));
  root.finish();
  cfg.resolved = root.echo;
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

void apply_seed(ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.resolved["seed"] = seed;
  auto fix = [seed](FieldDescriptor& d) {
    if (d.type == "noise") d.seed = seed;
  };
  for (auto& d : cfg.initial) fix(d);
  for (auto& d : cfg.dirichlet)
    if (d) fix(*d);
  for (auto& d : cfg.sources)
    if (d) fix(*d);
  fix(cfg.aquifer.initial_h);
  fix(cfg.aquifer.initial_h1);
  for (auto* d : {&cfg.aquifer.dirichlet_h, &cfg.aquifer.dirichlet_h1, &cfg.aquifer.pumping})
    if (*d) fix(**d);
  for (const char* section : {"model", "aquifer"})
    if (cfg.resolved.contains(section)) set_noise_seed(cfg.resolved[section], seed);
}

InitialFn make_initial(const FieldDescriptor& d, const Box& box) {
  if (d.type == "logistic") throw InvalidParameter("logistic fields are only valid as sources");
  return [d, box](const Point& x) { return evaluate(d, box, x); };
}

BoundaryFn make_boundary(const FieldDescriptor& d, const Box& box) {
  if (d.type == "logistic") throw InvalidParameter("logistic fields are only valid as sources");
  return [d, box](double, const Point& x) { return evaluate(d, box, x); };
}

SourceFn make_source(const FieldDescriptor& d, const Box& box, int species) {
  if (d.type == "logistic")
    return [d, species](double, const Point&, std::span<const double> u) {
      const double v = u[species];
      return d.rate * std::max(0.0, v) * (1.0 - v / d.capacity);
    };
  return [d, box](double, const Point& x, std::span<const double>) { return evaluate(d, box, x); };
}

Grid make_grid(const ScenarioConfig& cfg) { return Grid(cfg.box, cfg.cells); }

ModelSpec make_model(const ScenarioConfig& cfg) {
  ModelSpec s;
  s.domain = make_grid(cfg).box();
  s.delta = cfg.delta;
  s.K = cfg.K;
  s.ell = cfg.ell;
  s.coupling = cfg.coupling;
  const int m = static_cast<int>(cfg.delta.size());
  for (int i = 0; i < m; ++i) {
    s.initial.push_back(make_initial(cfg.initial[i], s.domain));
    s.dirichlet.push_back(make_boundary(cfg.dirichlet[i] ? *cfg.dirichlet[i] : cfg.initial[i], s.domain));
    s.sources.push_back(cfg.sources[i] ? make_source(*cfg.sources[i], s.domain, i) : SourceFn{});
  }
  return s;
}

AquiferSpec make_aquifer(const ScenarioConfig& cfg, const Grid& grid) {
  if (cfg.kind == ScenarioKind::keulegan)
    return keulegan_scenario(grid, cfg.keulegan.pump, cfg.keulegan.tilt, cfg.keulegan.options);
  const AquiferConfig& a = cfg.aquifer;
  AquiferSpec s;
  s.domain = grid.box();
  s.h2 = a.h2;
  s.delta = a.delta;
  s.alpha = a.alpha;
  s.epsilon = a.epsilon;
  s.initial_h = make_initial(a.initial_h, s.domain);
  s.initial_h1 = make_initial(a.initial_h1, s.domain);
  s.dirichlet_h = make_boundary(a.dirichlet_h ? *a.dirichlet_h : a.initial_h, s.domain);
  s.dirichlet_h1 = make_boundary(a.dirichlet_h1 ? *a.dirichlet_h1 : a.initial_h1, s.domain);
  if (a.pumping) {
    const BoundaryFn p = make_boundary(*a.pumping, s.domain);
    s.pumping = p;
  }
  return s;
}

}  // namespace crossdiff

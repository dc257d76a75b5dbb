#include "wavemap/config.hpp"

#include <cmath>
#include <limits>

#include "wavemap/analytic.hpp"
#include "wavemap/io.hpp"

namespace wavemap {

namespace {

using nlohmann::json;

const char* kind_name(InitialKind k) { return k == InitialKind::Bump ? "bump" : "static"; }

InitialKind kind_from(const std::string& name) {
  if (name == "bump") return InitialKind::Bump;
  if (name == "static") return InitialKind::Static;
  throw ConfigError("initial_kind", "expected \"bump\" or \"static\", got \"" + name + "\"");
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(key, "missing");
  return *it;
}

double get_number(const json& v, const char* key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "not finite");
  return x;
}

long long get_integer(const json& v, const char* key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9e15)
      return static_cast<long long>(x);
  }
  throw ConfigError(key, "expected an integer");
}

bool get_bool(const json& v, const char* key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const char* key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

// Keys that must be given explicitly; everything else has a default.
constexpr const char* kRequired[] = {"outer_radius", "base_points", "t_max"};
constexpr const char* kRequiredBump[] = {"amplitude", "radius", "delta"};

}  // namespace

SchemeParams SimConfig::scheme() const {
  SchemeParams p;
  p.courant = courant;
  p.refine_tolerance = refine_tolerance;
  p.boundary = boundary;
  p.adaptive = adaptive;
  return p;
}

double SimConfig::effective_lambda_threshold() const {
  if (lambda_threshold > 0.0) return lambda_threshold;
  return 10.0 * std::ldexp(base_spacing(), -max_depth);
}

void SimConfig::validate() const {
  auto positive = [](double x, const char* key) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(key, "must be positive");
  };
  if (!std::isfinite(amplitude)) throw ConfigError("amplitude", "not finite");
  positive(radius, "radius");
  positive(delta, "delta");
  positive(static_lambda, "static_lambda");
  if (static_sign != 1 && static_sign != -1) throw ConfigError("static_sign", "must be +1 or -1");
  positive(outer_radius, "outer_radius");
  if (base_points < 16 || base_points % 2 != 0)
    throw ConfigError("base_points", "must be even and at least 16");
  if (!(courant > 0.0 && courant <= 1.0)) throw ConfigError("courant", "must lie in (0, 1]");
  positive(refine_tolerance, "refine_tolerance");
  if (max_depth < 0 || max_depth > 40) throw ConfigError("max_depth", "must lie in [0, 40]");
  positive(t_max, "t_max");
  if (!(lambda_threshold >= 0.0)) throw ConfigError("lambda_threshold", "must be >= 0");
  if (!(growth_factor > 1.0)) throw ConfigError("growth_factor", "must exceed 1");
  if (!(exhausted_floor > 0.0) || !std::isfinite(exhausted_floor))
    throw ConfigError("exhausted_floor", "must be positive");
  if (!(dispersal_energy_fraction > 0.0 && dispersal_energy_fraction < 1.0))
    throw ConfigError("dispersal_energy_fraction", "must lie in (0, 1)");
  positive(gradient_floor, "gradient_floor");
  if (diag_every < 1) throw ConfigError("diag_every", "must be at least 1");
  if (!(eta_max >= 1.0)) throw ConfigError("eta_max", "must be at least 1");
  if (!(fit_lambda_max >= 0.0)) throw ConfigError("fit_lambda_max", "must be >= 0");
  if (!(fit_lambda_min >= 0.0)) throw ConfigError("fit_lambda_min", "must be >= 0");
  if (fit_lambda_max > 0.0 && fit_lambda_min >= fit_lambda_max)
    throw ConfigError("fit_lambda_min", "must be below fit_lambda_max");
  for (double t : snapshot_times)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw ConfigError("snapshot_times", "entries must be finite and >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

nlohmann::json SimConfig::to_json() const {
  json j;
  j["initial_kind"] = kind_name(initial_kind);
  j["amplitude"] = amplitude;
  j["radius"] = radius;
  j["delta"] = delta;
  j["static_lambda"] = static_lambda;
  j["static_sign"] = static_sign;
  j["outer_radius"] = outer_radius;
  j["base_points"] = base_points;
  j["courant"] = courant;
  j["refine_tolerance"] = refine_tolerance;
  j["boundary"] = to_string(boundary);
  j["max_depth"] = max_depth;
  j["adaptive"] = adaptive;
  j["t_max"] = t_max;
  j["lambda_threshold"] = lambda_threshold;
  j["growth_factor"] = growth_factor;
  j["exhausted_floor"] = exhausted_floor;
  j["dispersal_energy_fraction"] = dispersal_energy_fraction;
  j["stop_on_dispersal"] = stop_on_dispersal;
  j["gradient_floor"] = gradient_floor;
  j["diag_every"] = diag_every;
  j["eta_max"] = eta_max;
  j["fit_lambda_max"] = fit_lambda_max;
  j["fit_lambda_min"] = fit_lambda_min;
  j["snapshot_times"] = snapshot_times;
  j["snapshot_at_refinement"] = snapshot_at_refinement;
  j["output_dir"] = output_dir;
  return j;
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  for (const char* key : kRequired) (void)require(j, key);
  const bool bump = !j.contains("initial_kind") ||
                    kind_from(get_string(j["initial_kind"], "initial_kind")) == InitialKind::Bump;
  if (bump)
    for (const char* key : kRequiredBump) (void)require(j, key);
  else
    (void)require(j, "static_lambda");

  SimConfig c;
  const SimConfig defaults;
  const json known = defaults.to_json();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const char* k = key.c_str();
    const json& v = it.value();
    if (!known.contains(key)) throw ConfigError(key, "unknown field");
    if (key == "initial_kind") c.initial_kind = kind_from(get_string(v, k));
    else if (key == "amplitude") c.amplitude = get_number(v, k);
    else if (key == "radius") c.radius = get_number(v, k);
    else if (key == "delta") c.delta = get_number(v, k);
    else if (key == "static_lambda") c.static_lambda = get_number(v, k);
    else if (key == "static_sign") c.static_sign = static_cast<int>(get_integer(v, k));
    else if (key == "outer_radius") c.outer_radius = get_number(v, k);
    else if (key == "base_points") {
      long long n = get_integer(v, k);
      if (n < 0) throw ConfigError(key, "must be non-negative");
      c.base_points = static_cast<std::size_t>(n);
    } else if (key == "courant") c.courant = get_number(v, k);
    else if (key == "refine_tolerance") c.refine_tolerance = get_number(v, k);
    else if (key == "boundary") {
      try {
        c.boundary = boundary_flavor_from_string(get_string(v, k));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
      }
    } else if (key == "max_depth") c.max_depth = static_cast<int>(get_integer(v, k));
    else if (key == "adaptive") c.adaptive = get_bool(v, k);
    else if (key == "t_max") c.t_max = get_number(v, k);
    else if (key == "lambda_threshold") c.lambda_threshold = get_number(v, k);
    else if (key == "growth_factor") c.growth_factor = get_number(v, k);
    else if (key == "exhausted_floor") c.exhausted_floor = get_number(v, k);
    else if (key == "dispersal_energy_fraction") c.dispersal_energy_fraction = get_number(v, k);
    else if (key == "stop_on_dispersal") c.stop_on_dispersal = get_bool(v, k);
    else if (key == "gradient_floor") c.gradient_floor = get_number(v, k);
    else if (key == "diag_every") c.diag_every = static_cast<int>(get_integer(v, k));
    else if (key == "eta_max") c.eta_max = get_number(v, k);
    else if (key == "fit_lambda_max") c.fit_lambda_max = get_number(v, k);
    else if (key == "fit_lambda_min") c.fit_lambda_min = get_number(v, k);
    else if (key == "snapshot_times") {
      if (!v.is_array()) throw ConfigError(key, "expected an array of times");
      c.snapshot_times.clear();
      for (const auto& e : v) c.snapshot_times.push_back(get_number(e, k));
    } else if (key == "snapshot_at_refinement") c.snapshot_at_refinement = get_bool(v, k);
    else if (key == "output_dir") c.output_dir = get_string(v, k);
  }
  c.validate();
  return c;
}

std::string SimConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  return io::hex64(io::fnv1a64(j.dump()));
}

void SimConfig::set_field(const std::string& key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json j = to_json();
  if (!j.contains(key)) throw ConfigError(key, "unknown field");
  j[key] = parsed;
  *this = from_json(j);
}

SimConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return SimConfig::from_json(j);
}

std::pair<GridHierarchy, FieldState> initial_state(const SimConfig& config) {
  config.validate();
  GridHierarchy grid = build_uniform(config.outer_radius, config.base_points, config.max_depth);
  std::function<double(double)> u0;
  if (config.initial_kind == InitialKind::Bump) {
    analytic::InitialDataFamily fam{config.amplitude, config.radius, config.delta};
    u0 = [fam](double r) { return analytic::initial_profile(fam, r); };
  } else {
    analytic::StaticSolutionScaled s(config.static_lambda, config.static_sign);
    u0 = [s](double r) { return s.value(r); };
  }
  FieldState state = make_state(grid, config.dt0(), u0, [](double) { return 0.0; });
  return {std::move(grid), std::move(state)};
}

}  // namespace wavemap

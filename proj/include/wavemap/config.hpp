#pragma once

// Run configuration. Stored as flat JSON; every field carries its unit in the
// field table (see README). Fully deterministic: there is no seed.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavemap/evolver.hpp"
#include "wavemap/grid.hpp"

namespace wavemap {

enum class InitialKind {
  Bump,    // A (r/R)^3 exp(-((r-R)/delta)^4), zero momentum
  Static,  // sign * u_S(r / lambda), zero momentum
};

struct SimConfig {
  // initial data
  InitialKind initial_kind = InitialKind::Bump;
  double amplitude = 0.0;  // dimensionless
  double radius = 2.0;     // length
  double delta = 0.4;      // length
  double static_lambda = 1.0;
  int static_sign = 1;

  // domain and scheme
  double outer_radius = 32.0;  // length
  std::size_t base_points = 2048;
  double courant = 0.5;
  double refine_tolerance = 0.2;
  BoundaryFlavor boundary = BoundaryFlavor::Sommerfeld2d;
  int max_depth = 20;
  bool adaptive = true;

  // stopping and classification
  double t_max = 6.0;             // time
  double lambda_threshold = 0.0;  // length; 0 selects 10 * finest spacing at max depth
  double growth_factor = 4.0;
  // After depth exhaustion without overshoot the run continues unrefined until
  // lambda < exhausted_floor * finest spacing (then Inconclusive).
  double exhausted_floor = 2.0;
  double dispersal_energy_fraction = 0.1;
  bool stop_on_dispersal = true;
  double gradient_floor = 1e-8;

  // diagnostics
  int diag_every = 1;  // finest-level steps between samples
  double eta_max = 10.0;
  double fit_lambda_max = 0.0;  // 0 selects 0.1 * lambda at the first refinement
  double fit_lambda_min = 0.0;

  // output
  std::vector<double> snapshot_times;
  bool snapshot_at_refinement = false;
  std::string output_dir = "out";

  SchemeParams scheme() const;
  double base_spacing() const { return outer_radius / static_cast<double>(base_points); }
  double dt0() const { return courant * base_spacing(); }
  double effective_lambda_threshold() const;

  /// Field-precise validation; throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  static SimConfig from_json(const nlohmann::json& j);

  /// Hash of the canonical JSON form, excluding output_dir.
  std::string hash() const;

  /// Sets one field from text (value parsed as JSON, falling back to a string).
  void set_field(const std::string& key, const std::string& value);
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

SimConfig load_config(const std::string& path);

/// Uniform grid and t = 0 state for the configured initial data.
std::pair<GridHierarchy, FieldState> initial_state(const SimConfig& config);

}  // namespace wavemap

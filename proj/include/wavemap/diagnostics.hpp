#pragma once

// Measured quantities of a state: scale factor from the central gradient,
// energies (total and inside a light cone), and the distance of the rescaled
// profile from the harmonic map.
//
// Composite quadrature: each radius is integrated on the finest level that
// covers it. At a non-synchronized instant coarser levels lead the finest one
// by less than their own time step.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavemap/grid.hpp"

namespace wavemap {

struct ScaleFactor {
  double lambda = 0.0;    // 2 / |u_r(t, 0)|
  int sign = 0;           // sign of the tracked multiple of u_S, i.e. of u_r(t, 0)
  double gradient = 0.0;  // u_r(t, 0)
};

inline constexpr double kDefaultGradientFloor = 1e-8;

/// nullopt when |u_r(t, 0)| <= floor (scale undefined).
std::optional<ScaleFactor> scale_factor(const GridHierarchy& grid, const FieldState& state,
                                        double gradient_floor = kDefaultGradientFloor);

struct EnergySplit {
  double kinetic = 0.0;    // pi * int v^2 r dr
  double potential = 0.0;  // pi * int (u_r^2 + sin^2 u / r^2) r dr
  bool empty = false;      // integration range had zero length

  double total() const { return kinetic + potential; }
};

/// Energy inside [0, radius]; radius is clipped to the outer radius.
EnergySplit energy_within(const GridHierarchy& grid, const FieldState& state, double radius);

/// Energy inside each of the ascending radii, one pass over the hierarchy.
std::vector<EnergySplit> energy_profile(const GridHierarchy& grid, const FieldState& state,
                                        std::span<const double> ascending_radii);

double total_energy(const GridHierarchy& grid, const FieldState& state);

/// E_K, E_P inside the past light cone r < t_est - t of the blowup point.
/// Requires state.time < t_est and t_est - state.time <= outer radius.
EnergySplit lightcone_energies(const GridHierarchy& grid, const FieldState& state, double t_est);

/// Log lattice eta_j = 10^(j/64) restricted to [eta_min, eta_max]. Lattices
/// for growing eta_max are nested.
std::vector<double> eta_lattice(double eta_min, double eta_max);

/// max over eta_lattice(h_finest/lambda, eta_max) of |u(lambda eta) - sign u_S(eta)|.
double profile_collapse_error(const GridHierarchy& grid, const FieldState& state, double lambda,
                              int sign, double eta_max);

struct DiagnosticsRecord {
  double t = 0.0;
  double u_r_center = 0.0;
  double lambda = 0.0;  // NaN when undefined
  int sign = 0;         // 0 when undefined
  double e_total = 0.0;
  double e_kinetic_lightcone = 0.0;    // NaN until a blowup time is supplied
  double e_potential_lightcone = 0.0;  // NaN until a blowup time is supplied
  double profile_error = 0.0;          // NaN when lambda undefined or out of domain
  int finest_level = 0;
  double max_abs_u = 0.0;
  bool synchronized = true;
};

/// Time series of diagnostics plus the cumulative energy profile of every
/// record, from which light-cone energies follow for any blowup time.
class DiagnosticsSeries {
 public:
  DiagnosticsSeries() = default;
  explicit DiagnosticsSeries(std::vector<double> profile_radii);

  /// Measures the state and appends a record. Records must have strictly
  /// increasing times; a repeated time is ignored.
  void sample(const GridHierarchy& grid, const FieldState& state, double eta_max,
              double peak_abs_u, bool synchronized);

  void push_back(const DiagnosticsRecord& rec);  // without an energy profile

  /// Fills the light-cone columns for blowup time t_est from the stored
  /// profiles (linear in radius between profile radii).
  void apply_blowup_time(double t_est);

  const std::vector<DiagnosticsRecord>& records() const { return records_; }
  std::vector<DiagnosticsRecord>& records() { return records_; }
  const std::vector<double>& profile_radii() const { return radii_; }
  bool has_profiles() const { return !profiles_.empty(); }

  /// Energy inside radius at record index from the stored profile.
  EnergySplit profile_energy(std::size_t index, double radius) const;

  std::string to_csv(const std::string& config_hash) const;
  static DiagnosticsSeries from_csv(const std::string& text);

  static const std::vector<std::string>& columns();
  static constexpr int kSchemaVersion = 1;

 private:
  std::vector<DiagnosticsRecord> records_;
  std::vector<double> radii_;
  std::vector<std::vector<EnergySplit>> profiles_;
};

/// Geometric radii R_out 2^(-j/16) down to the finest spacing reachable at
/// max_depth, ascending.
std::vector<double> default_profile_radii(const GridHierarchy& grid);

/// (t, lambda / (t_est - t)) for every record with a defined lambda.
/// Requires t_est to exceed every record time.
std::vector<std::pair<double, double>> rate_ratio(const DiagnosticsSeries& series, double t_est);

}  // namespace wavemap

#include "wavemap/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "wavemap/analytic.hpp"
#include "wavemap/evolver.hpp"
#include "wavemap/io.hpp"

namespace wavemap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

// Walks the composite cells in increasing radius and reports the cumulative
// split at each requested radius.
class CompositeIntegrator {
 public:
  CompositeIntegrator(const GridHierarchy& grid, const FieldState& state)
      : grid_(grid), state_(state) {}

  std::vector<EnergySplit> run(std::span<const double> radii) const {
    std::vector<EnergySplit> out(radii.size());
    std::size_t next = 0;
    while (next < radii.size() && radii[next] <= 0.0) out[next++].empty = true;

    double kin = 0.0, pot = 0.0;
    const int finest = grid_.finest_index();
    for (int k = finest; k >= 0 && next < radii.size(); --k) {
      const MeshLevel& lv = grid_.levels[static_cast<std::size_t>(k)];
      const LevelField& f = state_.levels[static_cast<std::size_t>(k)];
      const std::size_t first = (k == finest) ? 0 : lv.intervals / 2;
      const double h = lv.spacing;
      for (std::size_t i = first; i < lv.intervals && next < radii.size(); ++i) {
        const double r0 = lv.radius(i);
        const double r1 = lv.radius(i + 1);
        const double k0 = kPi * f.v[i] * f.v[i] * r0;
        const double k1 = kPi * f.v[i + 1] * f.v[i + 1] * r1;
        const double s0 = (i == 0) ? 0.0 : kPi * sq(std::sin(f.u[i])) / r0;
        const double s1 = kPi * sq(std::sin(f.u[i + 1])) / r1;
        const double g = (f.u[i + 1] - f.u[i]) / h;
        while (next < radii.size() && radii[next] <= r1) {
          const double rc = radii[next];
          const double th = (rc - r0) / h;
          const double kc = k0 + th * (k1 - k0);
          const double sc = s0 + th * (s1 - s0);
          out[next].kinetic = kin + 0.5 * (rc - r0) * (k0 + kc);
          out[next].potential =
              pot + 0.5 * (rc - r0) * (s0 + sc) + kPi * g * g * 0.5 * (rc * rc - r0 * r0);
          ++next;
        }
        kin += 0.5 * h * (k0 + k1);
        pot += 0.5 * h * (s0 + s1) + kPi * g * g * 0.5 * (r1 + r0) * h;
      }
    }
    for (; next < radii.size(); ++next) {
      out[next].kinetic = kin;
      out[next].potential = pot;
    }
    return out;
  }

 private:
  static double sq(double x) { return x * x; }

  const GridHierarchy& grid_;
  const FieldState& state_;
};

}  // namespace

std::optional<ScaleFactor> scale_factor(const GridHierarchy& grid, const FieldState& state,
                                        double gradient_floor) {
  const double g = central_gradient(state.levels.back().u, grid.finest().spacing);
  if (!(std::fabs(g) > gradient_floor)) return std::nullopt;
  return ScaleFactor{2.0 / std::fabs(g), g > 0 ? 1 : -1, g};
}

std::vector<EnergySplit> energy_profile(const GridHierarchy& grid, const FieldState& state,
                                        std::span<const double> ascending_radii) {
  if (!std::is_sorted(ascending_radii.begin(), ascending_radii.end())) {
    throw std::invalid_argument("energy_profile: radii must be ascending");
  }
  return CompositeIntegrator(grid, state).run(ascending_radii);
}

EnergySplit energy_within(const GridHierarchy& grid, const FieldState& state, double radius) {
  const double r = std::min(radius, grid.outer_radius());
  const double radii[1] = {r};
  return energy_profile(grid, state, radii).front();
}

double total_energy(const GridHierarchy& grid, const FieldState& state) {
  return energy_within(grid, state, grid.outer_radius()).total();
}

EnergySplit lightcone_energies(const GridHierarchy& grid, const FieldState& state, double t_est) {
  const double radius = t_est - state.time;
  if (radius > grid.outer_radius() * (1.0 + 1e-12)) {
    throw std::invalid_argument("lightcone_energies: light cone exceeds the outer radius");
  }
  if (!(radius > 0.0)) {
    EnergySplit e;
    e.empty = true;
    return e;
  }
  return energy_within(grid, state, radius);
}

std::vector<double> eta_lattice(double eta_min, double eta_max) {
  std::vector<double> out;
  if (!(eta_min > 0.0) || !(eta_max >= eta_min)) return out;
  constexpr double per_decade = 64.0;
  const auto j0 = static_cast<long>(std::ceil(std::log10(eta_min) * per_decade - 1e-9));
  for (long j = j0;; ++j) {
    const double eta = std::pow(10.0, static_cast<double>(j) / per_decade);
    if (eta > eta_max) break;
    if (eta >= eta_min) out.push_back(eta);
  }
  return out;
}

double profile_collapse_error(const GridHierarchy& grid, const FieldState& state, double lambda,
                              int sign, double eta_max) {
  if (!(lambda > 0.0)) throw std::invalid_argument("profile_collapse_error: lambda must be > 0");
  if (!(lambda * eta_max < grid.outer_radius())) {
    throw std::invalid_argument("profile_collapse_error: lambda * eta_max outside the domain");
  }
  const analytic::StaticSolutionScaled us(1.0, sign);
  double err = 0.0;
  for (double eta : eta_lattice(grid.finest().spacing / lambda, eta_max)) {
    err = std::max(err, std::fabs(sample(grid, state, lambda * eta).u - us.value(eta)));
  }
  return err;
}

std::vector<double> default_profile_radii(const GridHierarchy& grid) {
  const double r_out = grid.outer_radius();
  const double r_min = grid.base_spacing() * std::ldexp(1.0, -grid.max_depth);
  std::vector<double> radii;
  for (int j = 0;; ++j) {
    const double r = r_out * std::exp2(-j / 16.0);
    if (r < r_min) break;
    radii.push_back(r);
  }
  std::reverse(radii.begin(), radii.end());
  return radii;
}

DiagnosticsSeries::DiagnosticsSeries(std::vector<double> profile_radii)
    : radii_(std::move(profile_radii)) {
  if (!std::is_sorted(radii_.begin(), radii_.end())) {
    throw std::invalid_argument("DiagnosticsSeries: profile radii must be ascending");
  }
}

void DiagnosticsSeries::push_back(const DiagnosticsRecord& rec) {
  if (!records_.empty() && !(rec.t > records_.back().t)) {
    throw std::invalid_argument("DiagnosticsSeries: times must be strictly increasing");
  }
  if (!profiles_.empty()) {
    throw std::logic_error("DiagnosticsSeries: cannot mix records with and without profiles");
  }
  records_.push_back(rec);
}

void DiagnosticsSeries::sample(const GridHierarchy& grid, const FieldState& state,
                               double eta_max, double peak_abs_u, bool synchronized) {
  if (!records_.empty() && !(state.time > records_.back().t)) return;
  if (profiles_.size() != records_.size()) {
    throw std::logic_error("DiagnosticsSeries: cannot mix records with and without profiles");
  }
  DiagnosticsRecord rec;
  rec.t = state.time;
  rec.finest_level = grid.finest_index();
  rec.max_abs_u = peak_abs_u;
  rec.synchronized = synchronized;
  rec.u_r_center = central_gradient(state.levels.back().u, grid.finest().spacing);
  rec.lambda = kNaN;
  rec.profile_error = kNaN;
  rec.e_kinetic_lightcone = kNaN;
  rec.e_potential_lightcone = kNaN;
  if (const auto sf = scale_factor(grid, state)) {
    rec.lambda = sf->lambda;
    rec.sign = sf->sign;
    if (sf->lambda * eta_max < grid.outer_radius()) {
      rec.profile_error = profile_collapse_error(grid, state, sf->lambda, sf->sign, eta_max);
    }
  }
  std::vector<EnergySplit> prof = energy_profile(grid, state, radii_);
  rec.e_total = total_energy(grid, state);
  records_.push_back(rec);
  profiles_.push_back(std::move(prof));
}

EnergySplit DiagnosticsSeries::profile_energy(std::size_t index, double radius) const {
  if (index >= profiles_.size()) throw std::out_of_range("profile_energy: no profile stored");
  const std::vector<EnergySplit>& p = profiles_[index];
  EnergySplit out;
  if (!(radius > 0.0)) {
    out.empty = true;
    return out;
  }
  const auto it = std::lower_bound(radii_.begin(), radii_.end(), radius);
  if (it == radii_.end()) return p.back();
  const auto j = static_cast<std::size_t>(it - radii_.begin());
  const double r1 = radii_[j];
  const double r0 = j == 0 ? 0.0 : radii_[j - 1];
  const EnergySplit e0 = j == 0 ? EnergySplit{} : p[j - 1];
  const EnergySplit& e1 = p[j];
  const double w = (radius - r0) / (r1 - r0);
  out.kinetic = e0.kinetic + w * (e1.kinetic - e0.kinetic);
  out.potential = e0.potential + w * (e1.potential - e0.potential);
  return out;
}

void DiagnosticsSeries::apply_blowup_time(double t_est) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    DiagnosticsRecord& rec = records_[i];
    const double radius = t_est - rec.t;
    if (!has_profiles() || !(radius > 0.0)) {
      rec.e_kinetic_lightcone = kNaN;
      rec.e_potential_lightcone = kNaN;
      continue;
    }
    const EnergySplit e = profile_energy(i, radius);
    rec.e_kinetic_lightcone = e.kinetic;
    rec.e_potential_lightcone = e.potential;
  }
}

const std::vector<std::string>& DiagnosticsSeries::columns() {
  static const std::vector<std::string> cols = {
      "t",         "u_r_center",    "lambda",       "sign",
      "E_total",   "E_K_lightcone", "E_P_lightcone", "profile_error",
      "finest_level", "max_abs_u",  "synchronized"};
  return cols;
}

std::string DiagnosticsSeries::to_csv(const std::string& config_hash) const {
  std::string out = "# wavemap diagnostics schema=" + std::to_string(kSchemaVersion) +
                    " config_hash=" + config_hash + "\n";
  const auto& cols = columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out += cols[c];
    out += c + 1 < cols.size() ? ',' : '\n';
  }
  for (const DiagnosticsRecord& r : records_) {
    out += io::format_double(r.t) + ',' + io::format_double(r.u_r_center) + ',' +
           io::format_double(r.lambda) + ',' + std::to_string(r.sign) + ',' +
           io::format_double(r.e_total) + ',' + io::format_double(r.e_kinetic_lightcone) + ',' +
           io::format_double(r.e_potential_lightcone) + ',' + io::format_double(r.profile_error) +
           ',' + std::to_string(r.finest_level) + ',' + io::format_double(r.max_abs_u) + ',' +
           (r.synchronized ? "1" : "0") + '\n';
  }
  return out;
}

DiagnosticsSeries DiagnosticsSeries::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  DiagnosticsSeries series;
  bool have_header = false;
  std::vector<int> col_of;  // record field index for each csv column
  const auto& cols = columns();
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      for (const std::string& name : cells) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        col_of.push_back(it == cols.end() ? -1 : static_cast<int>(it - cols.begin()));
      }
      if (std::find(col_of.begin(), col_of.end(), 0) == col_of.end() ||
          std::find(col_of.begin(), col_of.end(), 2) == col_of.end()) {
        throw std::invalid_argument("diagnostics csv: needs at least columns t and lambda");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != col_of.size()) {
      throw std::invalid_argument("diagnostics csv: ragged row '" + line + "'");
    }
    DiagnosticsRecord r;
    r.lambda = r.profile_error = r.e_kinetic_lightcone = r.e_potential_lightcone = kNaN;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      switch (col_of[c]) {
        case 0: r.t = io::parse_double(cells[c]); break;
        case 1: r.u_r_center = io::parse_double(cells[c]); break;
        case 2: r.lambda = io::parse_double(cells[c]); break;
        case 3: r.sign = std::stoi(cells[c]); break;
        case 4: r.e_total = io::parse_double(cells[c]); break;
        case 5: r.e_kinetic_lightcone = io::parse_double(cells[c]); break;
        case 6: r.e_potential_lightcone = io::parse_double(cells[c]); break;
        case 7: r.profile_error = io::parse_double(cells[c]); break;
        case 8: r.finest_level = std::stoi(cells[c]); break;
        case 9: r.max_abs_u = io::parse_double(cells[c]); break;
        case 10: r.synchronized = cells[c] == "1"; break;
        default: break;
      }
    }
    series.push_back(r);
  }
  return series;
}

std::vector<std::pair<double, double>> rate_ratio(const DiagnosticsSeries& series, double t_est) {
  std::vector<std::pair<double, double>> out;
  for (const DiagnosticsRecord& r : series.records()) {
    if (!(t_est > r.t)) throw std::invalid_argument("rate_ratio: t_est must exceed every time");
    if (std::isnan(r.lambda)) continue;
    out.emplace_back(r.t, r.lambda / (t_est - r.t));
  }
  return out;
}

}  // namespace wavemap

#pragma once

// Experiment drivers: a classified single run, the power-law fit of the
// scale factor, bisection for the critical amplitude and a three-resolution
// self-convergence study.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavemap/config.hpp"
#include "wavemap/diagnostics.hpp"
#include "wavemap/evolver.hpp"

namespace wavemap {

enum class OutcomeKind { Dispersal, Blowup, Inconclusive };

std::string to_string(OutcomeKind kind);

struct PowerLawFit {
  double T = 0.0;
  double alpha = 0.0;
  double prefactor = 0.0;  // lambda ~ prefactor (T - t)^alpha
  double residual = 0.0;   // RMS of log lambda about the fitted line
  double lambda_lo = 0.0;  // window actually used
  double lambda_hi = 0.0;
  std::size_t samples = 0;
};

struct FitWindow {
  double lambda_max = 0.0;  // 0: no upper bound
  double lambda_min = 0.0;  // 0: no lower bound
};

/// Tail shorter than one decade in lambda.
class InsufficientDecade : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fits lambda = c (T - t)^alpha on the monotone-decreasing tail of the
/// series, restricted to the window. T is searched on a log grid of T - t_last
/// and refined by golden section; alpha and c follow from linear least squares
/// in log-log.
PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> lambda,
                          const FitWindow& window = {});
PowerLawFit fit_power_law(const DiagnosticsSeries& series, const FitWindow& window = {});

/// State measured right after a level was added: every such instant has the
/// same h_finest / lambda, so trends across them are free of the O((h/lambda)^2)
/// jitter of the central-gradient estimate.
struct RefinementSample {
  int level = 0;
  double t = 0.0;
  double lambda = 0.0;  // NaN when undefined
  int sign = 0;
  double profile_error = 0.0;
  std::vector<std::array<double, 3>> profile;  // rescaled_profile rows
};

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::Inconclusive;
  std::string reason;

  // dispersal
  double t_bounce = 0.0;
  double lambda_min = 0.0;  // NaN if never defined

  // blowup
  double T_est = 0.0;
  std::optional<PowerLawFit> fit;
  std::string fit_error;
  double lambda_last = 0.0;

  bool overshoot = false;
  double t_overshoot = 0.0;
  double lambda_first_refinement = 0.0;
  int depth_reached = 0;
  double t_end = 0.0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  std::int64_t finest_steps = 0;

  DiagnosticsSeries diagnostics;
  std::vector<RefinementSample> refinement_samples;
  GridHierarchy final_grid;
  FieldState final_state;
};

/// Invoked at configured snapshot times (tag "t<time>") and, if enabled, after
/// each refinement (tag "refine<k>").
using SnapshotSink =
    std::function<void(const std::string& tag, const GridHierarchy&, const FieldState&)>;

RunOutcome run(const SimConfig& config, const SnapshotSink& snapshots = {});

nlohmann::json to_json(const PowerLawFit& fit);
nlohmann::json outcome_json(const RunOutcome& outcome, const SimConfig& config);

/// Rows (eta, sign * u(lambda eta), u_S(eta)) on the eta lattice.
std::vector<std::array<double, 3>> rescaled_profile(const GridHierarchy& grid,
                                                    const FieldState& state, double lambda,
                                                    int sign, double eta_max);

// ---------------------------------------------------------------------------
// Bisection

struct Probe {
  double amplitude = 0.0;
  OutcomeKind kind = OutcomeKind::Inconclusive;
  std::string reason;
  double t_bounce = 0.0;
  double lambda_min = 0.0;
  double T_est = 0.0;
  bool endpoint = false;  // precondition check of lo or hi
};

using ProbeFn = std::function<Probe(double amplitude)>;

struct BisectionResult {
  double lo = 0.0;
  double hi = 0.0;
  double tol = 0.0;
  int jobs = 1;
  std::vector<Probe> probes;  // in evaluation order, endpoints first
  std::vector<std::pair<double, double>> brackets;  // after each round, starting with [lo, hi]

  std::size_t interior_probes() const;
};

class BisectionPrecondition : public std::invalid_argument {
 public:
  BisectionPrecondition(const std::string& what, Probe probe)
      : std::invalid_argument(what), probe_(std::move(probe)) {}
  const Probe& probe() const { return probe_; }

 private:
  Probe probe_;
};

class InconclusiveProbe : public std::runtime_error {
 public:
  InconclusiveProbe(const std::string& what, Probe probe, BisectionResult partial)
      : std::runtime_error(what), probe_(std::move(probe)), partial_(std::move(partial)) {}
  const Probe& probe() const { return probe_; }
  const BisectionResult& partial() const { return partial_; }

 private:
  Probe probe_;
  BisectionResult partial_;
};

/// A blowup probe below a dispersal probe inside the bracket.
class BracketInversion : public std::runtime_error {
 public:
  BracketInversion(const std::string& what, BisectionResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const BisectionResult& partial() const { return partial_; }

 private:
  BisectionResult partial_;
};

/// Shrinks [lo, hi] until hi - lo <= tol. With jobs > 1 each round evaluates
/// `jobs` equispaced interior amplitudes concurrently.
BisectionResult bisect_critical_amplitude(double lo, double hi, double tol, const ProbeFn& probe,
                                          int jobs = 1);
BisectionResult bisect_critical_amplitude(double lo, double hi, double tol,
                                          const SimConfig& config_template, int jobs = 1);

Probe probe_from_outcome(double amplitude, const RunOutcome& outcome);

nlohmann::json bisection_json(const BisectionResult& result, const SimConfig& config_template);

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceResult {
  std::vector<std::size_t> base_points;  // N, 2N, 4N
  double t_eval = 0.0;
  double diff_coarse = 0.0;  // ||u_h - u_{h/2}|| on coarse nodes
  double diff_fine = 0.0;    // ||u_{h/2} - u_{h/4}||
  double order = 0.0;        // NaN when flagged
  bool flagged = false;
  std::string note;
};

/// Runs the configuration without refinement at N, 2N, 4N up to t_eval
/// (a multiple of the coarsest time step) and returns the self-convergence
/// exponent log2(diff_coarse / diff_fine) in the discrete L2 norm.
ConvergenceResult convergence_study(const SimConfig& config, double t_eval);

nlohmann::json convergence_json(const ConvergenceResult& result, const SimConfig& config);

}  // namespace wavemap

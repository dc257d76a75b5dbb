#pragma once

// Time integration of
//
//     u_t = v,   v_t = (1/r)(r u_r)_r - sin(2u) / (2 r^2)
//
// on the nested hierarchy. Space: the conservative stencil for (1/r)(r u_r)_r.
// Time: kick-drift-kick leapfrog (u at integer steps, v advanced through the
// half step), which is the staggered leapfrog with a synchronous (u, v) output.
// Fine levels take two sub-steps per parent step (Berger-Oliger), receive
// Hermite-in-time boundary values at their outer edge from the parent, and are
// injected back into the parent at each sync point.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavemap/grid.hpp"
#include "wavemap/kernels.hpp"

namespace wavemap {

enum class BoundaryFlavor {
  Sommerfeld2d,            // u_t + u_r + u/(2r) = 0, second-order box scheme
  Sommerfeld2dFirstOrder,  // same condition, first-order upwind (convergence control)
  None,                    // Dirichlet clamp: full reflection
};

std::string to_string(BoundaryFlavor flavor);
BoundaryFlavor boundary_flavor_from_string(const std::string& name);

struct SchemeParams {
  double courant = 0.5;           // dt_0 = courant * h_0
  double refine_tolerance = 0.2;  // C in |u_r(0)| h <= C
  BoundaryFlavor boundary = BoundaryFlavor::Sommerfeld2d;
  bool adaptive = true;

  void validate() const;
};

/// Scheme failure (NaN or Inf in the nodal values); not a physical blowup.
class NumericalBlowupOfScheme : public std::runtime_error {
 public:
  NumericalBlowupOfScheme(int level, double time)
      : std::runtime_error("non-finite value on level " + std::to_string(level) + " at t=" +
                           std::to_string(time)),
        level_(level),
        time_(time) {}
  int level() const { return level_; }
  double time() const { return time_; }

 private:
  int level_;
  double time_;
};

/// (1/r_i)[(r_i + h/2)(u_{i+1}-u_i) - (r_i - h/2)(u_i - u_{i-1})] / h^2 at an
/// interior node 1 <= i <= N-1.
double radial_laplacian(std::span<const double> u, double h, std::size_t i);

/// v_t on one level: radial_laplacian - sin(2u)/(2r^2) at interior nodes, 0 at
/// both ends.
std::vector<double> rhs(const GridHierarchy& grid, const FieldState& state, int level);

/// u_r(t, 0) from the one-sided parabola through nodes 0, 1, 2.
double central_gradient(std::span<const double> u, double h);

/// True when |u_r(0)| h > C on the finest level.
bool refinement_trigger(const GridHierarchy& grid, const FieldState& state,
                        const SchemeParams& params);

/// Called by Evolver after every step of the finest level.
class StepObserver {
 public:
  enum class Control { Continue, Stop };
  virtual ~StepObserver() = default;
  virtual Control after_finest_step(const class Evolver& ev) = 0;
  virtual void on_refine(const class Evolver& /*ev*/) {}
};

class Evolver {
 public:
  Evolver(GridHierarchy grid, FieldState state, SchemeParams params);

  const GridHierarchy& grid() const { return grid_; }
  const FieldState& state() const { return state_; }
  const SchemeParams& params() const { return params_; }

  double time() const { return state_.time; }

  /// Advances the hierarchy by one coarse step dt_0; fine levels subcycle.
  /// Returns false when the observer asked to stop (the finest level then
  /// sits at the stop time, coarser levels at or ahead of it).
  bool step(StepObserver* observer = nullptr);

  /// Steps until the finest-level time reaches t_end or the observer stops.
  bool advance_to(double t_end, StepObserver* observer = nullptr);

  /// Reverses v on all levels (time-reversal tests).
  void reverse_momentum();

  bool depth_exhausted() const { return depth_exhausted_; }
  bool trigger_active() const { return trigger_active_; }
  double peak_abs_u() const { return peak_abs_u_; }
  std::int64_t finest_steps() const { return finest_steps_; }
  bool levels_synchronized() const;
  int refinements() const { return grid_.finest_index(); }

  /// Asymptotic value k*pi used by the outgoing condition, fixed from the
  /// initial outer boundary value.
  double background() const { return background_; }

 private:
  struct LevelScratch {
    std::vector<double> plus, minus, source;
    std::vector<double> sin2u, acc;
  };
  struct EdgeHistory {
    double t0 = 0, u0 = 0, v0 = 0;
    double t1 = 0, u1 = 0, v1 = 0;
  };

  bool advance_level(std::size_t k, StepObserver* observer);
  void step_level(std::size_t k);
  void outer_boundary(std::vector<double>& u, double u_prev_n, double u_prev_nm1,
                      double dt) const;
  void inject(std::size_t fine);
  void add_level_scratch(std::size_t k);
  void compute_acceleration(std::size_t k);
  void after_finest(StepObserver* observer);
  double level_time(std::size_t k) const;

  GridHierarchy grid_;
  FieldState state_;
  SchemeParams params_;
  const kernels::KernelTable* kt_;
  std::vector<LevelScratch> scratch_;
  std::vector<EdgeHistory> edges_;  // edges_[k]: parent data at level k's outer edge
  std::vector<std::int64_t> ticks_;
  double tick_ = 0.0;
  double background_ = 0.0;
  double peak_abs_u_ = 0.0;
  bool depth_exhausted_ = false;
  bool trigger_active_ = false;
  bool stop_ = false;
  std::int64_t finest_steps_ = 0;
};

}  // namespace wavemap

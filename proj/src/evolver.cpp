#include "wavemap/evolver.hpp"

#include <cmath>
#include <numbers>

namespace wavemap {

std::string to_string(BoundaryFlavor flavor) {
  switch (flavor) {
    case BoundaryFlavor::Sommerfeld2d: return "sommerfeld_2d";
    case BoundaryFlavor::Sommerfeld2dFirstOrder: return "sommerfeld_2d_first_order";
    case BoundaryFlavor::None: return "none";
  }
  return "unknown";
}

BoundaryFlavor boundary_flavor_from_string(const std::string& name) {
  if (name == "sommerfeld_2d") return BoundaryFlavor::Sommerfeld2d;
  if (name == "sommerfeld_2d_first_order") return BoundaryFlavor::Sommerfeld2dFirstOrder;
  if (name == "none") return BoundaryFlavor::None;
  throw std::invalid_argument("unknown boundary flavor '" + name +
                              "' (expected sommerfeld_2d, sommerfeld_2d_first_order or none)");
}

void SchemeParams::validate() const {
  if (!(courant > 0.0 && courant <= 1.0)) {
    throw std::invalid_argument("courant must lie in (0, 1]");
  }
  if (!(refine_tolerance > 0.0)) throw std::invalid_argument("refine_tolerance must be > 0");
}

double radial_laplacian(std::span<const double> u, double h, std::size_t i) {
  if (i == 0 || i + 1 >= u.size()) {
    throw std::out_of_range("radial_laplacian: node must be interior");
  }
  const double r = static_cast<double>(i) * h;
  return ((r + h / 2) * (u[i + 1] - u[i]) - (r - h / 2) * (u[i] - u[i - 1])) / (h * h) / r;
}

std::vector<double> rhs(const GridHierarchy& grid, const FieldState& state, int level) {
  const auto k = static_cast<std::size_t>(level);
  const MeshLevel& lv = grid.levels.at(k);
  const std::vector<double>& u = state.levels.at(k).u;
  std::vector<double> out(lv.nodes(), 0.0);
  for (std::size_t i = 1; i < lv.intervals; ++i) {
    const double r = lv.radius(i);
    out[i] = radial_laplacian(u, lv.spacing, i) - std::sin(2.0 * u[i]) / (2.0 * r * r);
  }
  return out;
}

double central_gradient(std::span<const double> u, double h) {
  if (u.size() < 3) throw std::invalid_argument("central_gradient: need 3 nodes");
  return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
}

bool refinement_trigger(const GridHierarchy& grid, const FieldState& state,
                        const SchemeParams& params) {
  const double h = grid.finest().spacing;
  return std::fabs(central_gradient(state.levels.back().u, h)) * h > params.refine_tolerance;
}

Evolver::Evolver(GridHierarchy grid, FieldState state, SchemeParams params)
    : grid_(std::move(grid)), state_(std::move(state)), params_(params), kt_(&kernels::active()) {
  params_.validate();
  validate(grid_, state_);
  const double dt0 = state_.levels.front().dt;
  tick_ = std::ldexp(dt0, -grid_.max_depth);
  for (std::size_t k = 0; k < grid_.levels.size(); ++k) {
    add_level_scratch(k);
    ticks_.push_back(std::llround(state_.levels[k].time / tick_));
  }
  edges_.resize(grid_.levels.size());
  const std::vector<double>& u0 = state_.levels.front().u;
  background_ = std::numbers::pi * std::round(u0.back() / std::numbers::pi);
  for (const LevelField& f : state_.levels) {
    peak_abs_u_ = std::max(peak_abs_u_, kt_->max_abs(f.u.data(), 0, f.u.size()));
  }
}

void Evolver::add_level_scratch(std::size_t k) {
  const MeshLevel& lv = grid_.levels[k];
  const std::size_t n = lv.nodes();
  LevelScratch s;
  s.plus.assign(n, 0.0);
  s.minus.assign(n, 0.0);
  s.source.assign(n, 0.0);
  s.sin2u.assign(n, 0.0);
  s.acc.assign(n, 0.0);
  const double h2 = lv.spacing * lv.spacing;
  for (std::size_t i = 1; i < n; ++i) {
    const double di = static_cast<double>(i);
    s.plus[i] = (di + 0.5) / (di * h2);
    s.minus[i] = (di - 0.5) / (di * h2);
    const double r = lv.radius(i);
    s.source[i] = 1.0 / (2.0 * r * r);
  }
  if (scratch_.size() <= k) scratch_.resize(k + 1);
  scratch_[k] = std::move(s);
}

double Evolver::level_time(std::size_t k) const {
  return static_cast<double>(ticks_[k]) * tick_;
}

bool Evolver::levels_synchronized() const {
  for (std::int64_t t : ticks_) {
    if (t != ticks_.front()) return false;
  }
  return true;
}

void Evolver::compute_acceleration(std::size_t k) {
  LevelScratch& s = scratch_[k];
  const std::vector<double>& u = state_.levels[k].u;
  const std::size_t n = grid_.levels[k].intervals;
  kernels::sin_double_angle(u, s.sin2u, 1, n);
  kt_->acceleration(u.data(), s.sin2u.data(),
                    kernels::StencilCoefficients{s.plus.data(), s.minus.data(), s.source.data()},
                    s.acc.data(), 1, n);
}

void Evolver::outer_boundary(std::vector<double>& u, double u_prev_n, double u_prev_nm1,
                             double dt) const {
  const MeshLevel& lv = grid_.levels.front();
  const std::size_t n = lv.intervals;
  const double h = lv.spacing;
  const double rn = lv.radius(n);
  const double bg = background_;
  switch (params_.boundary) {
    case BoundaryFlavor::None:
      break;
    case BoundaryFlavor::Sommerfeld2d: {
      // box scheme centred at (t + dt/2, r_{n-1/2}) in w = u - background
      const double a = u[n - 1] - bg;
      const double b = u_prev_nm1 - bg;
      const double c = u_prev_n - bg;
      const double rh = rn - h / 2;
      const double lhs = 1.0 / (2.0 * dt) + 1.0 / (2.0 * h) + 1.0 / (8.0 * rh);
      const double known =
          (c - a + b) / (2.0 * dt) + (a - c + b) / (2.0 * h) - (a + b + c) / (8.0 * rh);
      u[n] = bg + known / lhs;
      break;
    }
    case BoundaryFlavor::Sommerfeld2dFirstOrder: {
      const double c = u_prev_n - bg;
      const double b = u_prev_nm1 - bg;
      u[n] = bg + c - dt * ((c - b) / h + c / (2.0 * rn));
      break;
    }
  }
}

void Evolver::step_level(std::size_t k) {
  LevelField& f = state_.levels[k];
  LevelScratch& s = scratch_[k];
  const MeshLevel& lv = grid_.levels[k];
  const std::size_t n = lv.intervals;
  const double dt = f.dt;
  const bool has_child = k + 1 < grid_.levels.size();
  const std::size_t mid = n / 2;

  if (has_child) {
    EdgeHistory& e = edges_[k + 1];
    e.t0 = level_time(k);
    e.u0 = f.u[mid];
    e.v0 = f.v[mid];
  }
  const double u_prev_n = f.u[n];
  const double u_prev_nm1 = f.u[n - 1];

  compute_acceleration(k);
  kt_->axpy(f.v.data(), s.acc.data(), 0.5 * dt, 1, n);
  kt_->axpy(f.u.data(), f.v.data(), dt, 1, n);

  ticks_[k] += std::int64_t{1} << (grid_.max_depth - static_cast<int>(k));
  const double t_new = level_time(k);

  if (k == 0) {
    outer_boundary(f.u, u_prev_n, u_prev_nm1, dt);
  } else {
    const EdgeHistory& e = edges_[k];
    const double span = e.t1 - e.t0;
    const double th = (t_new - e.t0) / span;
    const double th2 = th * th;
    const double th3 = th2 * th;
    f.u[n] = (2 * th3 - 3 * th2 + 1) * e.u0 + (th3 - 2 * th2 + th) * span * e.v0 +
             (-2 * th3 + 3 * th2) * e.u1 + (th3 - th2) * span * e.v1;
    f.v[n] = (6 * th2 - 6 * th) * (e.u0 - e.u1) / span + (3 * th2 - 4 * th + 1) * e.v0 +
             (3 * th2 - 2 * th) * e.v1;
  }
  f.u[0] = 0.0;

  compute_acceleration(k);
  kt_->axpy(f.v.data(), s.acc.data(), 0.5 * dt, 1, n);
  f.v[0] = 0.0;

  if (k == 0) {
    const double h = lv.spacing;
    const double rn = lv.radius(n);
    switch (params_.boundary) {
      case BoundaryFlavor::None:
        f.v[n] = 0.0;
        break;
      case BoundaryFlavor::Sommerfeld2d: {
        const double wn = f.u[n] - background_;
        const double wr =
            (3.0 * wn - 4.0 * (f.u[n - 1] - background_) + (f.u[n - 2] - background_)) / (2.0 * h);
        f.v[n] = -(wr + wn / (2.0 * rn));
        break;
      }
      case BoundaryFlavor::Sommerfeld2dFirstOrder:
        f.v[n] = (f.u[n] - u_prev_n) / dt;
        break;
    }
  }

  f.time = t_new;
  if (has_child) {
    EdgeHistory& e = edges_[k + 1];
    e.t1 = t_new;
    e.u1 = f.u[mid];
    e.v1 = f.v[mid];
  }

  const double mu = kt_->max_abs(f.u.data(), 0, f.u.size());
  const double mv = kt_->max_abs(f.v.data(), 0, f.v.size());
  if (std::isnan(mu) || std::isnan(mv)) throw NumericalBlowupOfScheme(static_cast<int>(k), t_new);
  peak_abs_u_ = std::max(peak_abs_u_, mu);
}

void Evolver::inject(std::size_t fine) {
  const LevelField& ff = state_.levels[fine];
  LevelField& cf = state_.levels[fine - 1];
  const std::size_t half = grid_.levels[fine].intervals / 2;
  for (std::size_t j = 0; j <= half; ++j) {
    cf.u[j] = ff.u[2 * j];
    cf.v[j] = ff.v[2 * j];
  }
}

void Evolver::after_finest(StepObserver* observer) {
  ++finest_steps_;
  state_.time = state_.levels.back().time;
  // sync cascade: a synchronized child hands its data to the parent
  for (std::size_t j = grid_.levels.size() - 1; j > 0 && ticks_[j] == ticks_[j - 1]; --j) {
    inject(j);
  }

  trigger_active_ = refinement_trigger(grid_, state_, params_);
  if (trigger_active_ && params_.adaptive) {
    if (grid_.finest_index() < grid_.max_depth) {
      refine_in_place(grid_, state_);
      const std::size_t k = grid_.levels.size() - 1;
      add_level_scratch(k);
      ticks_.push_back(ticks_[k - 1]);
      edges_.resize(grid_.levels.size());
      if (observer) observer->on_refine(*this);
    } else {
      depth_exhausted_ = true;
    }
  }
  if (observer && observer->after_finest_step(*this) == StepObserver::Control::Stop) stop_ = true;
}

bool Evolver::advance_level(std::size_t k, StepObserver* observer) {
  step_level(k);
  if (k + 1 == grid_.levels.size()) after_finest(observer);
  return !stop_;
}

bool Evolver::step(StepObserver* observer) {
  stop_ = false;
  // Resumable Berger-Oliger ordering: step level 0 when everything is in
  // sync, otherwise the deepest level that lags its parent.
  bool stepped_coarse = !levels_synchronized();  // finish an interrupted step first
  while (true) {
    std::size_t next = 0;
    bool found = false;
    for (std::size_t k = ticks_.size() - 1; k > 0; --k) {
      if (ticks_[k] < ticks_[k - 1]) {
        next = k;
        found = true;
        break;
      }
    }
    if (!found) {
      if (stepped_coarse) return true;
      stepped_coarse = true;
      next = 0;
    }
    if (!advance_level(next, observer)) return false;
  }
}

namespace {

class StopAt final : public StepObserver {
 public:
  StopAt(double t_end, StepObserver* inner) : t_end_(t_end), inner_(inner) {}
  Control after_finest_step(const Evolver& ev) override {
    if (inner_ && inner_->after_finest_step(ev) == Control::Stop) {
      inner_stopped_ = true;
      return Control::Stop;
    }
    return ev.time() >= t_end_ ? Control::Stop : Control::Continue;
  }
  void on_refine(const Evolver& ev) override {
    if (inner_) inner_->on_refine(ev);
  }
  bool inner_stopped() const { return inner_stopped_; }

 private:
  double t_end_;
  StepObserver* inner_;
  bool inner_stopped_ = false;
};

}  // namespace

bool Evolver::advance_to(double t_end, StepObserver* observer) {
  StopAt stop(t_end, observer);
  while (time() < t_end) {
    if (!step(&stop) && stop.inner_stopped()) return false;
  }
  return true;
}

void Evolver::reverse_momentum() {
  for (LevelField& f : state_.levels) {
    for (double& x : f.v) x = -x;
  }
}

}  // namespace wavemap

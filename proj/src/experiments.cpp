#include "wavemap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "wavemap/analytic.hpp"
#include "wavemap/io.hpp"

namespace wavemap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailJitter = 1e-2;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Dispersal: return "dispersal";
    case OutcomeKind::Blowup: return "blowup";
    case OutcomeKind::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Power-law fit

PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> lambda,
                          const FitWindow& window) {
  if (t.size() != lambda.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  if (t.size() < 3) throw InsufficientDecade("fit_power_law: fewer than 3 samples");

  // Monotone-decreasing tail: walk back from the end while lambda grows. The
  // central-gradient estimate jumps by O((h/lambda)^2) when a level is added,
  // so upticks within kTailJitter are tolerated.
  std::size_t begin = t.size() - 1;
  if (!(std::isfinite(lambda[begin]) && lambda[begin] > 0.0))
    throw InsufficientDecade("fit_power_law: last sample has no scale factor");
  while (begin > 0) {
    const double prev = lambda[begin - 1];
    if (!(std::isfinite(prev) && prev > 0.0 && prev >= lambda[begin] * (1.0 - kTailJitter) &&
          t[begin - 1] < t[begin]))
      break;
    --begin;
  }

  std::vector<double> tw, lw;
  for (std::size_t i = begin; i < t.size(); ++i) {
    if (window.lambda_max > 0.0 && lambda[i] > window.lambda_max) continue;
    if (window.lambda_min > 0.0 && lambda[i] < window.lambda_min) continue;
    tw.push_back(t[i]);
    lw.push_back(lambda[i]);
  }
  if (tw.size() < 3) throw InsufficientDecade("fit_power_law: fewer than 3 samples in window");
  const double l_hi = lw.front();
  const double l_lo = lw.back();
  if (l_hi < 10.0 * l_lo) {
    throw InsufficientDecade("fit_power_law: window spans lambda " + io::format_double(l_lo) +
                             " .. " + io::format_double(l_hi) + ", less than one decade");
  }

  const double t_last = tw.back();
  std::vector<double> back(tw.size()), y(tw.size()), x(tw.size());
  for (std::size_t i = 0; i < tw.size(); ++i) {
    back[i] = t_last - tw[i];
    y[i] = std::log(lw[i]);
  }
  const double span = back.front();
  auto objective = [&](double log_delta) {
    const double delta = std::exp(log_delta);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::log(delta + back[i]);
    return least_squares(x, y);
  };

  // Coarse log grid for delta = T - t_last, then golden section around the best.
  const double lo = std::log(span * 1e-9);
  const double hi = std::log(span * 10.0);
  constexpr int kGrid = 400;
  const double step = (hi - lo) / kGrid;
  int best = 0;
  double best_rms = kInf;
  for (int k = 0; k <= kGrid; ++k) {
    const double r = objective(lo + step * k).rms;
    if (r < best_rms) {
      best_rms = r;
      best = k;
    }
  }
  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, kGrid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = objective(c).rms;
  double fd = objective(d).rms;
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(c).rms;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(d).rms;
    }
  }
  const double log_delta = 0.5 * (a + b);
  const LineFit f = objective(log_delta);

  PowerLawFit fit;
  fit.T = t_last + std::exp(log_delta);
  fit.alpha = f.slope;
  fit.prefactor = std::exp(f.intercept);
  fit.residual = f.rms;
  fit.lambda_lo = l_lo;
  fit.lambda_hi = l_hi;
  fit.samples = tw.size();
  if (!(fit.alpha > 0.0)) {
    throw std::runtime_error("fit_power_law: non-positive exponent " +
                             io::format_double(fit.alpha));
  }
  return fit;
}

PowerLawFit fit_power_law(const DiagnosticsSeries& series, const FitWindow& window) {
  std::vector<double> t, l;
  t.reserve(series.records().size());
  l.reserve(series.records().size());
  for (const DiagnosticsRecord& r : series.records()) {
    t.push_back(r.t);
    l.push_back(r.lambda);
  }
  return fit_power_law(t, l, window);
}

// ---------------------------------------------------------------------------
// Single run

namespace {

class RunObserver : public StepObserver {
 public:
  RunObserver(const SimConfig& cfg, RunOutcome& out, DiagnosticsSeries& series,
              const SnapshotSink& sink)
      : cfg_(cfg), out_(out), series_(series), sink_(sink), times_(cfg.snapshot_times) {
    std::sort(times_.begin(), times_.end());
    threshold_ = cfg.effective_lambda_threshold();
  }

  enum class Verdict { None, Blowup, Exhausted };

  Control after_finest_step(const Evolver& ev) override {
    ++count_;
    const GridHierarchy& grid = ev.grid();
    const FieldState& state = ev.state();
    const double t = ev.time();

    if (!out_.overshoot && ev.peak_abs_u() > analytic::kPi) {
      out_.overshoot = true;
      out_.t_overshoot = t;
    }
    const auto sf = scale_factor(grid, state, cfg_.gradient_floor);
    if (sf && !(sf->lambda >= lambda_min_)) {
      lambda_min_ = sf->lambda;
      t_bounce_ = t;
    }

    emit_snapshots(ev);

    if (ev.depth_exhausted() && out_.overshoot) {
      verdict_ = Verdict::Blowup;
      take_sample(ev);
      return Control::Stop;
    }
    // Exhausted without overshoot: keep going unrefined while the core is
    // still marginally resolved.
    if (ev.depth_exhausted() && sf && sf->lambda < cfg_.exhausted_floor * grid.finest().spacing) {
      verdict_ = Verdict::Exhausted;
      take_sample(ev);
      return Control::Stop;
    }
    if (sf && sf->lambda <= threshold_ && out_.overshoot) {
      verdict_ = Verdict::Blowup;
      take_sample(ev);
      return Control::Stop;
    }

    const bool due = count_ % cfg_.diag_every == 0 || refined_;
    if (!due) return Control::Continue;
    take_sample(ev);
    refined_ = false;

    if (!dispersed_ && std::isfinite(lambda_min_) &&
        (!sf || sf->lambda > cfg_.growth_factor * lambda_min_)) {
      if (energy_departed()) {
        dispersed_ = true;
        t_dispersed_ = t;
        if (cfg_.stop_on_dispersal) return Control::Stop;
      }
    }
    return Control::Continue;
  }

  void on_refine(const Evolver& ev) override {
    refined_ = true;
    const auto sf = scale_factor(ev.grid(), ev.state(), cfg_.gradient_floor);
    if (ev.refinements() == 1) out_.lambda_first_refinement = sf ? sf->lambda : kNaN;
    RefinementSample rs;
    rs.level = ev.refinements();
    rs.t = ev.time();
    rs.lambda = sf ? sf->lambda : kNaN;
    rs.sign = sf ? sf->sign : 0;
    rs.profile_error = kNaN;
    if (sf && sf->lambda * cfg_.eta_max < ev.grid().outer_radius()) {
      rs.profile_error =
          profile_collapse_error(ev.grid(), ev.state(), sf->lambda, sf->sign, cfg_.eta_max);
      rs.profile = rescaled_profile(ev.grid(), ev.state(), sf->lambda, sf->sign, cfg_.eta_max);
    }
    out_.refinement_samples.push_back(std::move(rs));
    if (cfg_.snapshot_at_refinement && sink_) {
      sink_("refine" + std::to_string(ev.refinements()), ev.grid(), ev.state());
    }
  }

  void take_sample(const Evolver& ev) {
    series_.sample(ev.grid(), ev.state(), cfg_.eta_max, ev.peak_abs_u(), ev.levels_synchronized());
  }

  void emit_snapshots(const Evolver& ev) {
    while (next_ < times_.size() && times_[next_] <= ev.time()) {
      if (sink_) sink_("t" + io::format_double(times_[next_]), ev.grid(), ev.state());
      ++next_;
    }
  }

  Verdict verdict() const { return verdict_; }
  bool dispersed() const { return dispersed_; }
  double t_dispersed() const { return t_dispersed_; }
  double lambda_min() const { return lambda_min_; }
  double t_bounce() const { return t_bounce_; }

 private:
  // Energy inside growth * lambda_min has fallen below the configured fraction
  // of its peak over the recorded history.
  bool energy_departed() {
    const double radius = cfg_.growth_factor * lambda_min_;
    const std::size_t n = series_.records().size();
    if (n == 0) return false;
    if (radius != peak_radius_) {
      peak_radius_ = radius;
      peak_energy_ = 0.0;
      scanned_ = 0;
    }
    for (; scanned_ < n; ++scanned_) {
      peak_energy_ = std::max(peak_energy_, series_.profile_energy(scanned_, radius).total());
    }
    const double now = series_.profile_energy(n - 1, radius).total();
    return peak_energy_ > 0.0 && now < cfg_.dispersal_energy_fraction * peak_energy_;
  }

  const SimConfig& cfg_;
  RunOutcome& out_;
  DiagnosticsSeries& series_;
  const SnapshotSink& sink_;
  std::vector<double> times_;
  std::size_t next_ = 0;
  double threshold_ = 0.0;
  std::int64_t count_ = 0;
  bool refined_ = false;
  Verdict verdict_ = Verdict::None;
  double lambda_min_ = kInf;
  double t_bounce_ = kNaN;
  bool dispersed_ = false;
  double t_dispersed_ = kNaN;
  double peak_radius_ = kNaN;
  double peak_energy_ = 0.0;
  std::size_t scanned_ = 0;
};

double extrapolated_zero(const DiagnosticsSeries& series) {
  const auto& r = series.records();
  for (std::size_t i = r.size(); i-- > 1;) {
    const auto& a = r[i - 1];
    const auto& b = r[i];
    if (std::isfinite(a.lambda) && std::isfinite(b.lambda) && a.lambda > b.lambda) {
      return b.t + b.lambda * (b.t - a.t) / (a.lambda - b.lambda);
    }
  }
  return r.empty() ? kNaN : r.back().t;
}

}  // namespace

RunOutcome run(const SimConfig& config, const SnapshotSink& snapshots) {
  config.validate();
  auto [grid, state] = initial_state(config);

  RunOutcome out;
  out.lambda_min = kNaN;
  out.t_bounce = kNaN;
  out.T_est = kNaN;
  out.lambda_last = kNaN;
  out.lambda_first_refinement = kNaN;
  out.t_overshoot = kNaN;
  out.initial_energy = total_energy(grid, state);
  out.diagnostics = DiagnosticsSeries(default_profile_radii(grid));

  const bool zero_field = std::all_of(state.levels.front().u.begin(), state.levels.front().u.end(),
                                      [](double u) { return u == 0.0; });
  if (zero_field) {
    // Zero data stays zero: nothing to evolve, nothing ever concentrates.
    out.diagnostics.sample(grid, state, config.eta_max, 0.0, true);
    if (snapshots)
      for (double t : config.snapshot_times)
        if (t == 0.0) snapshots("t" + io::format_double(t), grid, state);
    out.kind = OutcomeKind::Dispersal;
    out.reason = "zero initial energy";
    out.final_energy = 0.0;
    out.final_grid = std::move(grid);
    out.final_state = std::move(state);
    return out;
  }

  Evolver ev(std::move(grid), std::move(state), config.scheme());
  RunObserver obs(config, out, out.diagnostics, snapshots);
  obs.take_sample(ev);
  obs.emit_snapshots(ev);
  bool scheme_failed = false;
  try {
    ev.advance_to(config.t_max, &obs);
  } catch (const NumericalBlowupOfScheme& e) {
    scheme_failed = true;
    out.reason = std::string("scheme failure: ") + e.what();
  }
  if (!scheme_failed) obs.take_sample(ev);

  out.lambda_min = std::isfinite(obs.lambda_min()) ? obs.lambda_min() : kNaN;
  out.t_bounce = obs.t_bounce();
  out.depth_reached = ev.grid().finest_index();
  out.t_end = ev.time();
  out.finest_steps = ev.finest_steps();
  for (auto it = out.diagnostics.records().rbegin(); it != out.diagnostics.records().rend(); ++it) {
    if (std::isfinite(it->lambda)) {
      out.lambda_last = it->lambda;
      break;
    }
  }

  if (scheme_failed) {
    out.kind = OutcomeKind::Inconclusive;
  } else if (obs.verdict() == RunObserver::Verdict::Blowup) {
    out.kind = OutcomeKind::Blowup;
    out.reason = ev.depth_exhausted() ? "depth exhausted with overshoot"
                                      : "lambda below threshold after overshoot";
    FitWindow w;
    w.lambda_max = config.fit_lambda_max > 0.0 ? config.fit_lambda_max
                                               : 0.1 * out.lambda_first_refinement;
    if (!std::isfinite(w.lambda_max)) w.lambda_max = 0.0;
    w.lambda_min = config.fit_lambda_min;
    try {
      out.fit = fit_power_law(out.diagnostics, w);
      out.T_est = out.fit->T;
    } catch (const std::exception& e) {
      out.fit_error = e.what();
      out.T_est = extrapolated_zero(out.diagnostics);
    }
    out.diagnostics.apply_blowup_time(out.T_est);
  } else if (obs.verdict() == RunObserver::Verdict::Exhausted) {
    out.kind = OutcomeKind::Inconclusive;
    out.reason = "depth exhausted and lambda below the unresolved floor without overshoot";
  } else if (obs.dispersed()) {
    out.kind = OutcomeKind::Dispersal;
    out.reason = "scale factor grew by the growth factor and the core energy departed at t=" +
                 io::format_double(obs.t_dispersed());
  } else {
    out.kind = OutcomeKind::Inconclusive;
    out.reason = "t_max reached without classification";
  }

  out.final_energy = total_energy(ev.grid(), ev.state());
  out.final_grid = ev.grid();
  out.final_state = ev.state();
  return out;
}

namespace {

// Config as embedded in manifests: the output location is not part of the
// experiment, so it is left out (like in the hash).
nlohmann::json manifest_config(const SimConfig& config) {
  nlohmann::json j = config.to_json();
  j.erase("output_dir");
  return j;
}

}  // namespace

nlohmann::json to_json(const PowerLawFit& fit) {
  return {{"T", fit.T},
          {"alpha", fit.alpha},
          {"prefactor", fit.prefactor},
          {"residual", fit.residual},
          {"lambda_lo", fit.lambda_lo},
          {"lambda_hi", fit.lambda_hi},
          {"samples", fit.samples}};
}

nlohmann::json outcome_json(const RunOutcome& o, const SimConfig& config) {
  nlohmann::json j;
  j["format"] = "wavemap-outcome";
  j["config_hash"] = config.hash();
  j["config"] = manifest_config(config);
  j["kind"] = to_string(o.kind);
  j["reason"] = o.reason;
  j["t_bounce"] = o.t_bounce;
  j["lambda_min"] = o.lambda_min;
  j["T_est"] = o.T_est;
  j["lambda_last"] = o.lambda_last;
  j["fit"] = o.fit ? to_json(*o.fit) : nlohmann::json(nullptr);
  j["fit_error"] = o.fit_error;
  j["overshoot"] = o.overshoot;
  j["t_overshoot"] = o.t_overshoot;
  j["lambda_first_refinement"] = o.lambda_first_refinement;
  j["depth_reached"] = o.depth_reached;
  j["t_end"] = o.t_end;
  j["initial_energy"] = o.initial_energy;
  j["final_energy"] = o.final_energy;
  j["finest_steps"] = o.finest_steps;
  j["samples"] = o.diagnostics.records().size();
  return j;
}

std::vector<std::array<double, 3>> rescaled_profile(const GridHierarchy& grid,
                                                    const FieldState& state, double lambda,
                                                    int sign, double eta_max) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rescaled_profile: lambda must be positive");
  if (sign != 1 && sign != -1) throw std::invalid_argument("rescaled_profile: sign must be +-1");
  const double eta_top = std::min(eta_max, grid.outer_radius() / lambda);
  std::vector<std::array<double, 3>> rows;
  for (double eta : eta_lattice(grid.finest().spacing / lambda, eta_top)) {
    const double u = sample(grid, state, lambda * eta).u;
    rows.push_back({eta, sign * u, analytic::static_solution(eta)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Bisection

std::size_t BisectionResult::interior_probes() const {
  return static_cast<std::size_t>(
      std::count_if(probes.begin(), probes.end(), [](const Probe& p) { return !p.endpoint; }));
}

Probe probe_from_outcome(double amplitude, const RunOutcome& o) {
  Probe p;
  p.amplitude = amplitude;
  p.kind = o.kind;
  p.reason = o.reason;
  p.t_bounce = o.t_bounce;
  p.lambda_min = o.lambda_min;
  p.T_est = o.T_est;
  return p;
}

BisectionResult bisect_critical_amplitude(double lo, double hi, double tol, const ProbeFn& probe,
                                          int jobs) {
  if (!(lo < hi)) throw std::invalid_argument("bisect: need lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("bisect: tol must be positive");
  if (jobs < 1) throw std::invalid_argument("bisect: jobs must be at least 1");
  if (!probe) throw std::invalid_argument("bisect: no probe function");

  BisectionResult res;
  res.lo = lo;
  res.hi = hi;
  res.tol = tol;
  res.jobs = jobs;

  auto evaluate = [&](const std::vector<double>& amps, bool endpoint) {
    std::vector<Probe> out(amps.size());
    if (jobs == 1 || amps.size() == 1) {
      for (std::size_t i = 0; i < amps.size(); ++i) out[i] = probe(amps[i]);
    } else {
      std::vector<std::future<Probe>> futs;
      for (double a : amps) futs.push_back(std::async(std::launch::async, probe, a));
      for (std::size_t i = 0; i < amps.size(); ++i) out[i] = futs[i].get();
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].amplitude = amps[i];
      out[i].endpoint = endpoint;
      res.probes.push_back(out[i]);
    }
    for (const Probe& p : out) {
      if (p.kind == OutcomeKind::Inconclusive) {
        throw InconclusiveProbe("bisect: inconclusive probe at A=" + io::format_double(p.amplitude) +
                                    " (" + p.reason + ")",
                                p, res);
      }
    }
    return out;
  };

  const std::vector<Probe> ends = evaluate({lo, hi}, true);
  if (ends[0].kind != OutcomeKind::Dispersal) {
    throw BisectionPrecondition("bisect: lower amplitude " + io::format_double(lo) +
                                    " does not disperse (" + to_string(ends[0].kind) + ")",
                                ends[0]);
  }
  if (ends[1].kind != OutcomeKind::Blowup) {
    throw BisectionPrecondition("bisect: upper amplitude " + io::format_double(hi) +
                                    " does not blow up (" + to_string(ends[1].kind) + ")",
                                ends[1]);
  }
  res.brackets.emplace_back(lo, hi);

  while (res.hi - res.lo > tol) {
    std::vector<double> amps;
    const double width = res.hi - res.lo;
    for (int i = 1; i <= jobs; ++i) amps.push_back(res.lo + width * i / (jobs + 1));
    const std::vector<Probe> out = evaluate(amps, false);
    // Outcomes must read dispersal ... dispersal blowup ... blowup.
    std::size_t first_blowup = out.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].kind == OutcomeKind::Blowup) {
        first_blowup = i;
        break;
      }
    }
    for (std::size_t i = first_blowup; i < out.size(); ++i) {
      if (out[i].kind != OutcomeKind::Blowup) {
        throw BracketInversion("bisect: dispersal at A=" + io::format_double(out[i].amplitude) +
                                   " above blowup at A=" +
                                   io::format_double(out[first_blowup].amplitude),
                               res);
      }
    }
    const double new_lo = first_blowup == 0 ? res.lo : amps[first_blowup - 1];
    const double new_hi = first_blowup == out.size() ? res.hi : amps[first_blowup];
    res.lo = new_lo;
    res.hi = new_hi;
    res.brackets.emplace_back(new_lo, new_hi);
  }
  return res;
}

BisectionResult bisect_critical_amplitude(double lo, double hi, double tol,
                                          const SimConfig& config_template, int jobs) {
  config_template.validate();
  ProbeFn fn = [&config_template](double amplitude) {
    SimConfig c = config_template;
    c.initial_kind = InitialKind::Bump;
    c.amplitude = amplitude;
    c.stop_on_dispersal = true;
    c.snapshot_times.clear();
    c.snapshot_at_refinement = false;
    return probe_from_outcome(amplitude, run(c));
  };
  return bisect_critical_amplitude(lo, hi, tol, fn, jobs);
}

nlohmann::json bisection_json(const BisectionResult& r, const SimConfig& config_template) {
  nlohmann::json j;
  j["format"] = "wavemap-bisection";
  j["config_hash"] = config_template.hash();
  j["config"] = manifest_config(config_template);
  j["lo"] = r.lo;
  j["hi"] = r.hi;
  j["A_star"] = 0.5 * (r.lo + r.hi);
  j["tol"] = r.tol;
  j["jobs"] = r.jobs;
  j["interior_probes"] = r.interior_probes();
  nlohmann::json probes = nlohmann::json::array();
  for (const Probe& p : r.probes) {
    probes.push_back({{"amplitude", p.amplitude},
                      {"kind", to_string(p.kind)},
                      {"reason", p.reason},
                      {"t_bounce", p.t_bounce},
                      {"lambda_min", p.lambda_min},
                      {"T_est", p.T_est},
                      {"endpoint", p.endpoint}});
  }
  j["probes"] = probes;
  nlohmann::json brackets = nlohmann::json::array();
  for (const auto& [a, b] : r.brackets) brackets.push_back({a, b});
  j["brackets"] = brackets;
  return j;
}

// ---------------------------------------------------------------------------
// Convergence

ConvergenceResult convergence_study(const SimConfig& config, double t_eval) {
  config.validate();
  if (!(t_eval > 0.0)) throw std::invalid_argument("convergence_study: t_eval must be positive");
  const double steps = t_eval / config.dt0();
  if (std::fabs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw std::invalid_argument("convergence_study: t_eval " + io::format_double(t_eval) +
                                " is not a multiple of the coarse step " +
                                io::format_double(config.dt0()));
  }

  ConvergenceResult res;
  res.t_eval = t_eval;
  std::vector<std::vector<double>> u;
  for (int k = 0; k < 3; ++k) {
    SimConfig c = config;
    c.base_points = config.base_points << k;
    c.adaptive = false;
    auto [grid, state] = initial_state(c);
    Evolver ev(std::move(grid), std::move(state), c.scheme());
    ev.advance_to(t_eval);
    if (std::fabs(ev.time() - t_eval) > 1e-12 * t_eval) {
      throw std::logic_error("convergence_study: landed at t=" + io::format_double(ev.time()));
    }
    res.base_points.push_back(c.base_points);
    u.push_back(ev.state().levels.front().u);
  }

  const std::size_t n = config.base_points;
  const double h = config.base_spacing();
  double s1 = 0.0, s2 = 0.0, umax = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = u[0][i], b = u[1][2 * i], c = u[2][4 * i];
    s1 += (a - b) * (a - b);
    s2 += (b - c) * (b - c);
    umax = std::max(umax, std::fabs(c));
  }
  res.diff_coarse = std::sqrt(h * s1);
  res.diff_fine = std::sqrt(h * s2);

  const double roundoff = 1e-12 * std::max(1.0, umax) * std::sqrt(config.outer_radius);
  if (res.diff_fine <= roundoff || res.diff_coarse <= roundoff) {
    res.flagged = true;
    res.order = kNaN;
    res.note = "differences at roundoff level; order undefined";
  } else {
    res.order = std::log2(res.diff_coarse / res.diff_fine);
    if (res.diff_fine >= res.diff_coarse) {
      res.flagged = true;
      res.note = "differences do not decrease with resolution";
    }
  }
  return res;
}

nlohmann::json convergence_json(const ConvergenceResult& r, const SimConfig& config) {
  nlohmann::json j;
  j["format"] = "wavemap-convergence";
  j["config_hash"] = config.hash();
  j["config"] = manifest_config(config);
  j["base_points"] = r.base_points;
  j["t_eval"] = r.t_eval;
  j["diff_coarse"] = r.diff_coarse;
  j["diff_fine"] = r.diff_fine;
  j["order"] = r.order;
  j["flagged"] = r.flagged;
  j["note"] = r.note;
  return j;
}

}  // namespace wavemap

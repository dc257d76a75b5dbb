#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#include "wavemap/analytic.hpp"
#include "wavemap/experiments.hpp"

using namespace wavemap;

namespace {

struct Series {
  std::vector<double> t, lambda;
};

Series power_law(double c, double T, double alpha, double t0, double t1, std::size_t n) {
  Series s;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
    s.t.push_back(t);
    s.lambda.push_back(c * std::pow(T - t, alpha));
  }
  return s;
}

SimConfig small(double amplitude) {
  SimConfig c;
  c.amplitude = amplitude;
  c.outer_radius = 16.0;
  c.base_points = 512;
  c.max_depth = 6;
  c.t_max = 6.0;
  return c;
}

ProbeFn threshold_probe(double a_star, std::atomic<int>* calls = nullptr) {
  return [=](double a) {
    if (calls) ++*calls;
    Probe p;
    p.kind = a < a_star ? OutcomeKind::Dispersal : OutcomeKind::Blowup;
    return p;
  };
}

}  // namespace

TEST_CASE("power-law fit recovers synthetic exponents") {
  const Series a = power_law(1.0, 3.0, 1.1, 2.5, 2.999, 500);
  const PowerLawFit f = fit_power_law(a.t, a.lambda);
  CHECK(f.T == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(f.alpha == doctest::Approx(1.1).epsilon(1e-3));
  CHECK(f.prefactor == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(f.residual < 1e-6);
  CHECK(f.samples == 500);

  const Series b = power_law(0.5, 3.0, 1.0, 2.0, 2.9999, 400);
  const PowerLawFit g = fit_power_law(b.t, b.lambda);
  CHECK(g.T == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(g.alpha == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(g.prefactor == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("power-law fit is invariant under time translation") {
  Series a = power_law(1.0, 3.0, 1.3, 2.0, 2.999, 300);
  const PowerLawFit f0 = fit_power_law(a.t, a.lambda);
  for (double& t : a.t) t += 10.0;
  const PowerLawFit f1 = fit_power_law(a.t, a.lambda);
  CHECK(f1.T - 10.0 == doctest::Approx(f0.T).epsilon(1e-9));
  CHECK(f1.alpha == doctest::Approx(f0.alpha).epsilon(1e-6));
}

TEST_CASE("power-law fit window and tail") {
  Series a = power_law(1.0, 3.0, 1.1, 2.0, 2.9999, 1000);
  // a dispersing prefix before the collapse is discarded by the tail rule
  std::vector<double> t = {0.5, 1.0, 1.5}, l = {0.5, 0.2, 0.1};
  t.insert(t.end(), a.t.begin(), a.t.end());
  l.insert(l.end(), a.lambda.begin(), a.lambda.end());
  const PowerLawFit f = fit_power_law(t, l);
  CHECK(f.alpha == doctest::Approx(1.1).epsilon(1e-3));

  const PowerLawFit w = fit_power_law(a.t, a.lambda, {1e-2, 1e-4});
  CHECK(w.lambda_hi <= 1e-2);
  CHECK(w.lambda_lo >= 1e-4);
  CHECK(w.alpha == doctest::Approx(1.1).epsilon(1e-3));

  CHECK_THROWS_AS(fit_power_law(a.t, a.lambda, {1e-2, 2e-3}), InsufficientDecade);
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(fit_power_law(two, two), InsufficientDecade);
  const std::vector<double> t3 = {0.0, 1.0, 2.0}, l3 = {1.0, 0.9, 0.8};
  CHECK_THROWS_AS(fit_power_law(t3, l3), InsufficientDecade);
  CHECK_THROWS_AS(fit_power_law(t3, two), std::invalid_argument);
}

TEST_CASE("bisection against a threshold stub") {
  std::atomic<int> calls = 0;
  const BisectionResult r = bisect_critical_amplitude(0.5, 1.5, 1e-2, threshold_probe(1.0, &calls));
  CHECK(r.hi - r.lo <= 1e-2);
  CHECK(r.lo < 1.0);
  CHECK(r.hi >= 1.0);
  CHECK(r.interior_probes() == 7);
  CHECK(calls == 9);
  CHECK(r.probes[0].endpoint);
  CHECK(r.probes[1].endpoint);
  REQUIRE(r.brackets.size() == 8);
  for (std::size_t i = 1; i < r.brackets.size(); ++i) {
    CHECK(r.brackets[i].first >= r.brackets[i - 1].first);
    CHECK(r.brackets[i].second <= r.brackets[i - 1].second);
  }

  const BisectionResult p = bisect_critical_amplitude(0.5, 1.5, 1e-2, threshold_probe(1.0), 3);
  CHECK(p.hi - p.lo <= 1e-2);
  CHECK(p.lo < 1.0);
  CHECK(p.hi >= 1.0);
  CHECK(p.jobs == 3);
  CHECK(p.brackets.size() == 5);  // width quarters per round: 1 -> 1/256
}

TEST_CASE("bisection failure modes") {
  CHECK_THROWS_AS(bisect_critical_amplitude(1.1, 1.5, 1e-2, threshold_probe(1.0)), BisectionPrecondition);
  CHECK_THROWS_AS(bisect_critical_amplitude(0.5, 0.9, 1e-2, threshold_probe(1.0)), BisectionPrecondition);
  CHECK_THROWS_AS(bisect_critical_amplitude(1.5, 0.5, 1e-2, threshold_probe(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(bisect_critical_amplitude(0.5, 1.5, 0.0, threshold_probe(1.0)), std::invalid_argument);

  ProbeFn flaky = [](double a) {
    Probe p;
    p.kind = a < 0.9 ? OutcomeKind::Dispersal : a < 1.1 ? OutcomeKind::Inconclusive : OutcomeKind::Blowup;
    p.reason = "stub";
    return p;
  };
  try {
    (void)bisect_critical_amplitude(0.5, 1.5, 1e-2, flaky);
    FAIL("expected InconclusiveProbe");
  } catch (const InconclusiveProbe& e) {
    CHECK(e.probe().amplitude == 1.0);
    CHECK(e.partial().probes.size() == 3);
  }

  ProbeFn inverted = [](double a) {
    Probe p;
    p.kind = (a < 0.6 || (a > 0.8 && a < 1.0)) ? OutcomeKind::Dispersal : OutcomeKind::Blowup;
    return p;
  };
  CHECK_THROWS_AS(bisect_critical_amplitude(0.5, 1.5, 1e-2, inverted, 4), BracketInversion);
}

TEST_CASE("zero amplitude disperses immediately") {
  const RunOutcome o = run(small(0.0));
  CHECK(o.kind == OutcomeKind::Dispersal);
  CHECK(o.reason == "zero initial energy");
  CHECK(o.initial_energy == 0.0);
}

TEST_CASE("runs are deterministic") {
  const RunOutcome a = run(small(0.5));
  const RunOutcome b = run(small(0.5));
  CHECK(a.kind == b.kind);
  CHECK(a.t_end == b.t_end);
  CHECK(a.diagnostics.to_csv("x") == b.diagnostics.to_csv("x"));
  CHECK(outcome_json(a, small(0.5)).dump() == outcome_json(b, small(0.5)).dump());
  CHECK(a.final_state.levels.back().u == b.final_state.levels.back().u);
}

TEST_CASE("small data disperse and the energy leaves the core") {
  const RunOutcome o = run(small(0.5));
  REQUIRE(o.kind == OutcomeKind::Dispersal);
  CHECK(o.t_bounce > 1.5);
  CHECK(o.t_bounce < 3.5);
  CHECK(o.lambda_min > 0.0);
  CHECK_FALSE(o.overshoot);

  SimConfig c = small(0.5);
  c.stop_on_dispersal = false;
  c.t_max = 2.0 * o.t_bounce;
  const RunOutcome late = run(c);
  CHECK(late.t_end == doctest::Approx(c.t_max).epsilon(1e-6));
  const double core = energy_within(late.final_grid, late.final_state, 1.0).total();
  CHECK(core < 0.05 * late.initial_energy);
  CHECK(late.final_energy == doctest::Approx(late.initial_energy).epsilon(1e-2));
}

TEST_CASE("large data blow up after an overshoot") {
  SimConfig c = small(1.5);
  c.max_depth = 12;
  const RunOutcome o = run(c);
  CHECK(o.kind == OutcomeKind::Blowup);
  CHECK(o.overshoot);
  CHECK(o.T_est > o.t_overshoot);
  CHECK(o.depth_reached >= 1);
  CHECK(o.refinement_samples.size() == static_cast<std::size_t>(o.depth_reached));
  const auto& rs = o.refinement_samples;
  REQUIRE(rs.size() >= 3);
  for (std::size_t i = rs.size() - 3; i < rs.size(); ++i) CHECK(rs[i].sign == rs.back().sign);
  const Probe p = probe_from_outcome(1.5, o);
  CHECK(p.kind == OutcomeKind::Blowup);
  CHECK(p.T_est == o.T_est);
}

TEST_CASE("snapshot sink receives configured times") {
  SimConfig c = small(0.5);
  c.snapshot_times = {0.0, 1.0, 2.0};
  std::vector<std::string> tags;
  (void)run(c, [&](const std::string& tag, const GridHierarchy&, const FieldState& s) {
    tags.push_back(tag);
    if (tag == "t1") CHECK(s.time == doctest::Approx(1.0));
  });
  REQUIRE(tags.size() >= 3);
  CHECK(tags[0] == "t0");
  CHECK(tags[1] == "t1");
  CHECK(tags[2] == "t2");
}

TEST_CASE("self-convergence study") {
  SimConfig c = small(0.5);
  c.base_points = 256;
  const ConvergenceResult r = convergence_study(c, 1.0);
  CHECK_FALSE(r.flagged);
  CHECK(r.base_points == std::vector<std::size_t>{256, 512, 1024});
  CHECK(r.order == doctest::Approx(2.0).epsilon(0.15));
  CHECK(r.diff_fine < r.diff_coarse);
  CHECK_THROWS_AS(convergence_study(c, 1.01), std::invalid_argument);

  // negative control: a first-order outer boundary with the wave in contact
  SimConfig b = small(0.5);
  b.outer_radius = 4.0;
  b.base_points = 512;
  const double second = convergence_study(b, 3.0).order;
  b.boundary = BoundaryFlavor::Sommerfeld2dFirstOrder;
  const double first = convergence_study(b, 3.0).order;
  b.base_points = 1024;
  const double first_finer = convergence_study(b, 3.0).order;
  CHECK(second == doctest::Approx(2.0).epsilon(0.05));
  CHECK(first < 1.7);
  CHECK(first_finer < first);

  const ConvergenceResult z = convergence_study(small(0.0), 1.0);
  CHECK(z.flagged);
  CHECK(std::isnan(z.order));
}

TEST_CASE("rescaled profile rows") {
  const GridHierarchy g = build_uniform(16.0, 2048, 4);
  const FieldState s = make_state(
      g, 0.01, [](double r) { return analytic::static_solution(r, 0.5, -1); }, [](double) { return 0.0; });
  const auto rows = rescaled_profile(g, s, 0.5, -1, 10.0);
  REQUIRE_FALSE(rows.empty());
  CHECK(rows.back()[0] == doctest::Approx(10.0));
  for (const auto& row : rows) {
    CHECK(row[2] == doctest::Approx(analytic::static_solution(row[0])));
    CHECK(std::fabs(row[1] - row[2]) < 1e-4);
  }
  CHECK_THROWS_AS(rescaled_profile(g, s, 0.0, 1, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(rescaled_profile(g, s, 0.5, 0, 10.0), std::invalid_argument);
}

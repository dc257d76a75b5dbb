#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wavemap/analytic.hpp"
#include "wavemap/config.hpp"
#include "wavemap/diagnostics.hpp"

using namespace wavemap;
using analytic::kPi;

namespace {

std::pair<GridHierarchy, FieldState> static_state(double lambda, int sign, std::size_t n,
                                                  double outer = 32.0, int refinements = 0) {
  GridHierarchy g = build_uniform(outer, n, 20);
  FieldState s = make_state(g, 0.5 * g.base_spacing(),
                            [=](double r) { return analytic::static_solution(r, lambda, sign); },
                            [](double) { return 0.0; });
  for (int k = 0; k < refinements; ++k) refine_in_place(g, s);
  return {g, s};
}

}  // namespace

TEST_CASE("scale factor of a rescaled harmonic map") {
  for (int sign : {1, -1})
    for (double lambda : {0.5, 2.0}) {
      const auto [g, s] = static_state(lambda, sign, 2048);
      const auto sf = scale_factor(g, s);
      REQUIRE(sf.has_value());
      CHECK(sf->sign == sign);
      // one-sided parabola: relative error O((h / lambda)^2)
      const double h = g.base_spacing();
      CHECK(sf->lambda == doctest::Approx(lambda).epsilon(2.0 * (h / lambda) * (h / lambda)));
      CHECK(sf->gradient == doctest::Approx(2.0 * sign / sf->lambda));
    }
  const GridHierarchy g = build_uniform(8.0, 64, 2);
  const FieldState zero = make_state(g, 0.1, [](double) { return 0.0; }, [](double) { return 0.0; });
  CHECK_FALSE(scale_factor(g, zero).has_value());
}

TEST_CASE("energies of the harmonic map converge to the closed form") {
  auto error = [](std::size_t n, double R) {
    const auto [g, s] = static_state(1.0, 1, n);
    const EnergySplit e = energy_within(g, s, R);
    CHECK(e.kinetic == 0.0);
    return std::fabs(e.potential - analytic::static_energy_in_ball(1.0, R));
  };
  for (double R : {0.5, 1.0, 4.0}) {
    const double e1 = error(512, R), e2 = error(1024, R);
    CHECK(e1 < 5e-3);
    CHECK(std::log2(e1 / e2) > 1.8);
  }
  // refined levels only change the quadrature spacing, not the answer
  const auto [g0, s0] = static_state(0.1, 1, 1024);
  const auto [g2, s2] = static_state(0.1, 1, 1024, 32.0, 3);
  const double exact = analytic::static_energy_in_ball(0.1, 1.0);
  CHECK(std::fabs(energy_within(g2, s2, 1.0).total() - exact) <
        std::fabs(energy_within(g0, s0, 1.0).total() - exact));
  CHECK(total_energy(g2, s2) == doctest::Approx(analytic::static_energy_in_ball(0.1, 32.0)).epsilon(1e-4));
}

TEST_CASE("energy profile agrees with individual integrals") {
  const auto [g, s] = static_state(0.3, -1, 512, 16.0, 2);
  const std::vector<double> radii = {0.0, 0.01, 0.3, 1.0, 2.0, 3.9, 4.0, 4.1, 16.0, 100.0};
  const auto prof = energy_profile(g, s, radii);
  REQUIRE(prof.size() == radii.size());
  CHECK(prof[0].empty);
  for (std::size_t i = 1; i < radii.size(); ++i)
    CHECK(prof[i].total() == doctest::Approx(energy_within(g, s, radii[i]).total()).epsilon(1e-13));
  CHECK(prof.back().total() == doctest::Approx(total_energy(g, s)));
  const std::vector<double> bad = {1.0, 0.5};
  CHECK_THROWS_AS(energy_profile(g, s, bad), std::invalid_argument);
}

TEST_CASE("light-cone energies") {
  auto [g, s] = static_state(1.0, 1, 512, 16.0);
  s.time = 1.0;
  const EnergySplit e = lightcone_energies(g, s, 3.0);
  CHECK(e.potential == doctest::Approx(energy_within(g, s, 2.0).potential));
  CHECK(lightcone_energies(g, s, 1.0).empty);
  CHECK_THROWS_AS(lightcone_energies(g, s, 20.0), std::invalid_argument);
}

TEST_CASE("eta lattice") {
  const auto a = eta_lattice(1e-3, 10.0);
  CHECK(a.front() == doctest::Approx(1e-3));
  CHECK(a.back() == doctest::Approx(10.0));
  CHECK(a.size() == 4 * 64 + 1);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] / a[i - 1] == doctest::Approx(std::pow(10.0, 1.0 / 64)));
  const auto b = eta_lattice(1e-3, 100.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(eta_lattice(0.0, 1.0).empty());
  CHECK(eta_lattice(2.0, 1.0).empty());
}

TEST_CASE("profile collapse error vanishes on the harmonic map") {
  const auto [g, s] = static_state(0.5, -1, 2048);
  CHECK(profile_collapse_error(g, s, 0.5, -1, 10.0) < 1e-5);
  CHECK(profile_collapse_error(g, s, 0.5, 1, 10.0) > 1.0);
  CHECK(profile_collapse_error(g, s, 0.6, -1, 10.0) > 0.05);
  CHECK_THROWS_AS(profile_collapse_error(g, s, 0.0, 1, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(profile_collapse_error(g, s, 5.0, 1, 10.0), std::invalid_argument);
}

TEST_CASE("diagnostics csv round trip and header") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DiagnosticsSeries series;
  series.push_back({0.0, 0.0, nan, 0, 13.5, nan, nan, nan, 0, 0.4, true});
  series.push_back({0.1, -2.5, 0.8, -1, 13.49, nan, nan, 0.01, 3, 1.7, false});
  const std::string csv = series.to_csv("00ff");
  CHECK(csv.rfind("# wavemap diagnostics schema=1 config_hash=00ff\n"
                  "t,u_r_center,lambda,sign,E_total,E_K_lightcone,E_P_lightcone,profile_error,"
                  "finest_level,max_abs_u,synchronized\n",
                  0) == 0);
  const DiagnosticsSeries back = DiagnosticsSeries::from_csv(csv);
  REQUIRE(back.records().size() == 2);
  const DiagnosticsRecord& r = back.records()[1];
  CHECK(r.t == 0.1);
  CHECK(r.u_r_center == -2.5);
  CHECK(r.lambda == 0.8);
  CHECK(r.sign == -1);
  CHECK(r.profile_error == 0.01);
  CHECK(r.finest_level == 3);
  CHECK_FALSE(r.synchronized);
  CHECK(std::isnan(back.records()[0].lambda));
  CHECK(back.to_csv("00ff") == csv);

  const DiagnosticsSeries minimal = DiagnosticsSeries::from_csv("t,lambda\n1,0.5\n2,0.25\n");
  CHECK(minimal.records().size() == 2);
  CHECK_THROWS_AS(DiagnosticsSeries::from_csv("t,u\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(DiagnosticsSeries::from_csv("t,lambda\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(series.push_back({0.05, 0, 1, 1, 0, 0, 0, 0, 0, 0, true}), std::invalid_argument);
}

TEST_CASE("light-cone columns from stored profiles") {
  auto [g, s] = static_state(0.5, 1, 1024, 16.0);
  DiagnosticsSeries series(default_profile_radii(g));
  series.sample(g, s, 10.0, 1.0, true);
  s.time = 0.5;
  series.sample(g, s, 10.0, 1.0, true);
  CHECK(series.has_profiles());
  CHECK(std::isnan(series.records()[0].e_kinetic_lightcone));
  series.apply_blowup_time(2.5);
  const auto& recs = series.records();
  // light cone radii 2.5 and 2.0, energy of the static map in those balls
  CHECK(recs[0].e_potential_lightcone ==
        doctest::Approx(analytic::static_energy_in_ball(0.5, 2.5)).epsilon(2e-3));
  CHECK(recs[1].e_potential_lightcone ==
        doctest::Approx(analytic::static_energy_in_ball(0.5, 2.0)).epsilon(2e-3));
  CHECK(recs[1].e_kinetic_lightcone == 0.0);
  CHECK(recs[0].lambda == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(recs[0].profile_error < 2e-3);
}

TEST_CASE("rate ratio") {
  DiagnosticsSeries series;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  series.push_back({1.0, 0, 0.5, 1, 0, nan, nan, nan, 0, 0, true});
  series.push_back({1.5, 0, nan, 0, 0, nan, nan, nan, 0, 0, true});
  series.push_back({2.0, 0, 0.1, 1, 0, nan, nan, nan, 0, 0, true});
  const auto rr = rate_ratio(series, 3.0);
  REQUIRE(rr.size() == 2);
  CHECK(rr[0].second == doctest::Approx(0.25));
  CHECK(rr[1].second == doctest::Approx(0.1));
  CHECK_THROWS_AS(rate_ratio(series, 2.0), std::invalid_argument);
}

TEST_CASE("scale factor of a tightly concentrated map") {
  const GridHierarchy g = build_uniform(1.0, 4096, 2);
  const FieldState s = make_state(g, 1e-4, [](double r) { return analytic::static_solution(r, 0.01, -1); },
                                  [](double) { return 0.0; });
  const auto sf = scale_factor(g, s);
  REQUIRE(sf);
  CHECK(sf->sign == -1);
  CHECK(sf->lambda == doctest::Approx(0.01).epsilon(2e-3));
  const auto [g1, s1] = static_state(1.0, 1, 2048);
  CHECK(scale_factor(g1, s1)->lambda == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(scale_factor(g1, s1)->sign == 1);
}

TEST_CASE("initial-data energy matches adaptive quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  const analytic::InitialDataFamily fam{0.5, 2.0, 0.4};
  auto density = [&](double r) {
    if (r <= 0) return 0.0;
    const double dr = 1e-5;
    const double up = (analytic::initial_profile(fam, r + dr) - analytic::initial_profile(fam, std::max(r - dr, 0.0))) /
                      (r + dr - std::max(r - dr, 0.0));
    const double s = std::sin(analytic::initial_profile(fam, r));
    return kPi * (up * up + s * s / (r * r)) * r;
  };
  const double exact = gauss_kronrod<double, 61>::integrate(density, 0.0, 4.0, 15, 1e-12);
  auto error = [&](std::size_t n) {
    SimConfig c;
    c.amplitude = 0.5;
    c.outer_radius = 32.0;
    c.base_points = n;
    auto [g, s] = initial_state(c);
    return std::fabs(total_energy(g, s) - exact);
  };
  const double e1 = error(1024), e2 = error(2048);
  CHECK(e2 < 2e-3 * exact);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("light cone of ten scale radii holds 100/101 of the soliton energy") {
  const double lambda = 0.2;
  auto [g, s] = static_state(lambda, -1, 4096, 16.0);
  s.time = 1.0;
  const EnergySplit e = lightcone_energies(g, s, 1.0 + 10 * lambda);
  CHECK(e.kinetic == 0.0);
  CHECK(e.potential == doctest::Approx(4 * kPi * 100 / 101).epsilon(1e-4));
}

TEST_CASE("sign mismatch is detected") {
  const auto [g, s] = static_state(0.5, 1, 2048);
  CHECK(profile_collapse_error(g, s, 0.5, -1, 10.0) >= 2 * std::atan(10.0));
}

TEST_CASE("rate ratio of synthetic scale factors") {
  DiagnosticsSeries faster, geodesic;
  for (int k = 0; k < 50; ++k) {
    const double t = 2.0 + 0.0199 * k;
    faster.push_back({t, 0, std::pow(3.0 - t, 1.1), 1, 0, 0, 0, 0, 0, 0, true});
    geodesic.push_back({t, 0, 0.5 * (3.0 - t), 1, 0, 0, 0, 0, 0, 0, true});
  }
  const auto rf = rate_ratio(faster, 3.0);
  for (std::size_t i = 1; i < rf.size(); ++i) CHECK(rf[i].second < rf[i - 1].second);
  CHECK(rf.back().second == doctest::Approx(std::pow(3.0 - rf.back().first, 0.1)));
  for (const auto& [t, ratio] : rate_ratio(geodesic, 3.0)) CHECK(ratio == doctest::Approx(0.5));
}

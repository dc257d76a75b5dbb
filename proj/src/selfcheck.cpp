#include "wavemap/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wavemap/analytic.hpp"
#include "wavemap/diagnostics.hpp"
#include "wavemap/evolver.hpp"
#include "wavemap/grid.hpp"
#include "wavemap/io.hpp"

namespace wavemap {

namespace {

using analytic::kPi;

CheckResult upper_bound(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, value <= threshold, std::move(detail)};
}

std::vector<double> nodal(std::size_t n, double h, double (*f)(double)) {
  std::vector<double> u(n + 1);
  for (std::size_t i = 0; i <= n; ++i) u[i] = f(h * static_cast<double>(i));
  return u;
}

// max_i |L_h u_S - sin(2 u_S) / (2 r^2)| for r_i in [0.5, 8]. Near the origin
// the stencil error on the cubic term is h^2 / r, so the bound is taken at
// fixed radii away from it.
double static_discrete_residual(double h) {
  const auto n = static_cast<std::size_t>(std::lround(8.0 / h));
  const std::vector<double> u = nodal(n + 1, h, [](double r) { return analytic::static_solution(r); });
  double m = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double r = h * static_cast<double>(i);
    if (r < 0.5) continue;
    const double res = radial_laplacian(u, h, i) - std::sin(2.0 * u[i]) / (2.0 * r * r);
    m = std::max(m, std::fabs(res));
  }
  return m;
}

}  // namespace

std::vector<CheckResult> analytic_checks() {
  std::vector<CheckResult> out;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  {
    // (1/r)(r u_r)_r of r^2 is 4 and of r is 1/r; the stencil reproduces both.
    const double h = 1.0 / 64.0;
    const std::size_t n = 1024;
    const auto sq = nodal(n, h, [](double r) { return r * r; });
    const auto lin = nodal(n, h, [](double r) { return r; });
    double e2 = 0.0, e1 = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double r = h * static_cast<double>(i);
      e2 = std::max(e2, std::fabs(radial_laplacian(sq, h, i) - 4.0) / 4.0);
      e1 = std::max(e1, std::fabs(radial_laplacian(lin, h, i) * r - 1.0));
    }
    out.push_back(upper_bound("stencil_exact_r2", e2, 1e3 * eps,
                              "max relative error of the stencil on r^2 (exact value 4)"));
    out.push_back(upper_bound("stencil_exact_r", e1, 1e3 * eps,
                              "max relative error of the stencil on r (exact value 1/r)"));
  }

  {
    double m = 0.0;
    for (double alpha : {0.25, 0.5, 1.0, 1.5, 2.0, 4.0})
      for (int k = 1; k < 100; ++k)
        m = std::max(m, std::fabs(analytic::self_similar_residual(alpha, k / 100.0)));
    out.push_back(upper_bound("self_similar_residual", m, 1e-10,
                              "max |ODE residual| of f_alpha, alpha in [0.25, 4], rho in [0.01, 0.99]"));
  }

  {
    double m = 0.0;
    for (double lambda : {0.1, 0.5, 1.0, 3.0})
      for (int sign : {1, -1})
        for (int k = 1; k <= 500; ++k) {
          const double r = 0.02 * k * lambda;
          const double scale = 1.0 / (lambda * lambda);
          m = std::max(m, std::fabs(analytic::static_residual(r, lambda, sign)) / scale);
        }
    out.push_back(upper_bound("static_residual_continuum", m, 1e-12,
                              "max |u'' + u'/r - sin(2u)/(2r^2)| * lambda^2 on the dilation orbit"));
  }

  {
    const double r1 = static_discrete_residual(1.0 / 32.0);
    const double r2 = static_discrete_residual(1.0 / 64.0);
    const double r3 = static_discrete_residual(1.0 / 128.0);
    const double order = 0.5 * (std::log2(r1 / r2) + std::log2(r2 / r3));
    out.push_back({"static_residual_discrete_order", order, 0.1, std::fabs(order - 2.0) <= 0.1,
                   "observed order of the discrete static residual on r in [0.5, 8], h = 1/32 .. 1/128 "
                   "(pass: within 0.1 of 2); residuals " +
                       io::format_double(r1) + ", " + io::format_double(r2) + ", " +
                       io::format_double(r3)});
  }

  {
    using boost::math::quadrature::gauss_kronrod;
    double m = 0.0;
    for (double lambda : {0.5, 1.0, 2.0})
      for (double rmax : {0.5, 1.0, 2.0, 10.0, 100.0}) {
        auto density = [lambda](double r) {
          const analytic::StaticSolutionScaled us(lambda, 1);
          const double s = std::sin(us.value(r));
          const double ur = us.dr(r);
          return r > 0.0 ? kPi * (ur * ur + s * s / (r * r)) * r : 0.0;
        };
        const double q = gauss_kronrod<double, 61>::integrate(density, 0.0, rmax, 15, 1e-14);
        m = std::max(m, std::fabs(q / analytic::static_energy_in_ball(lambda, rmax) - 1.0));
      }
    out.push_back(upper_bound("static_energy_closed_form", m, 1e-11,
                              "max relative gap between quadrature and 4 pi R^2/(lambda^2+R^2)"));

    auto density = [](double r) {
      const double s = std::sin(analytic::static_solution(r));
      const double ur = 2.0 / (1.0 + r * r);
      return r > 0.0 ? kPi * (ur * ur + s * s / (r * r)) * r : 0.0;
    };
    const double q = gauss_kronrod<double, 61>::integrate(
        density, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
    out.push_back(upper_bound("static_energy_total", std::fabs(q / analytic::kStaticEnergy - 1.0),
                              1e-11, "relative gap between quadrature on [0, inf) and 4 pi"));
  }

  {
    // The zero mode generates dilations and is annihilated by the linearized
    // operator -d^2/dr^2 - (1/r) d/dr + V.
    double dil = 0.0, ker = 0.0, pot = 0.0;
    const double e = 1e-4;
    const double h = 1e-3;
    for (int k = 1; k <= 200; ++k) {
      const double r = 0.05 * k;
      const double dl = (analytic::static_solution(r, 1.0 + e) - analytic::static_solution(r, 1.0 - e)) /
                        (2.0 * e);
      dil = std::max(dil, std::fabs(dl + analytic::zero_mode(r)));
      auto z = analytic::zero_mode;
      const double z1 = (-z(r + 2 * h) + 8 * z(r + h) - 8 * z(r - h) + z(r - 2 * h)) / (12 * h);
      const double z2 =
          (-z(r + 2 * h) + 16 * z(r + h) - 30 * z(r) + 16 * z(r - h) - z(r - 2 * h)) / (12 * h * h);
      ker = std::max(ker, std::fabs(-z2 - z1 / r + analytic::linearization_potential(r) * z(r)));
      const double v = std::cos(2.0 * analytic::static_solution(r)) / (r * r);
      pot = std::max(pot, std::fabs(analytic::linearization_potential(r) - v) /
                              std::max(1.0, std::fabs(v)));
    }
    out.push_back(upper_bound("zero_mode_dilation", dil, 1e-7,
                              "max |d/dlambda u_S + zero_mode| (central difference, step 1e-4)"));
    out.push_back(upper_bound("zero_mode_kernel", ker, 1e-6,
                              "max |L zero_mode| with fourth-order differences, h = 1e-3"));
    out.push_back(upper_bound("potential_form", pot, 1e-12,
                              "max relative gap between V(r) and cos(2 u_S)/r^2"));
  }

  {
    // Composite energy of sampled u_S against the closed form on [0, R].
    const GridHierarchy g = build_uniform(32.0, 4096, 0);
    const FieldState s = make_state(
        g, 0.5 * g.base_spacing(), [](double r) { return analytic::static_solution(r); },
        [](double) { return 0.0; });
    const double rel = std::fabs(total_energy(g, s) / analytic::static_energy_in_ball(1.0, 32.0) - 1.0);
    out.push_back(upper_bound("static_energy_discrete", rel, 1e-4,
                              "relative gap of the grid energy of u_S (N=4096, R=32)"));
  }
  return out;
}

}  // namespace wavemap

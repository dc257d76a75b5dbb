#pragma once

// Closed-form solutions of the equivariant wave-map equation
//
//     u_tt = u_rr + u_r / r - sin(2u) / (2 r^2)
//
// used as initial data, blowup-profile templates and test oracles.
// All derivatives are hand-differentiated so the oracles are exact.

#include <numbers>

namespace wavemap::analytic {

inline constexpr double kPi = std::numbers::pi;

/// Energy of the degree-one harmonic map, 4*pi.
inline constexpr double kStaticEnergy = 4.0 * kPi;

/// sign * 2 atan(r / lambda): the dilation orbit of the degree-one harmonic map.
struct StaticSolutionScaled {
  double lambda = 1.0;
  int sign = 1;

  StaticSolutionScaled() = default;
  StaticSolutionScaled(double lambda_, int sign_);

  double value(double r) const;
  double dr(double r) const;
  double drr(double r) const;
};

/// Singular self-similar family f_alpha(rho), rho = r / (T - t), rho in [0, 1].
struct SelfSimilarSolution {
  double alpha = 1.0;

  SelfSimilarSolution() = default;
  explicit SelfSimilarSolution(double alpha_);

  double value(double rho) const;
  double drho(double rho) const;
  double drhorho(double rho) const;
};

/// Degree-zero initial data A (r/R)^3 exp(-((r-R)/delta)^4) with zero momentum.
struct InitialDataFamily {
  double amplitude = 0.0;
  double radius = 2.0;
  double width = 0.4;
};

double static_solution(double r, double lambda = 1.0, int sign = 1);

/// r d/dr u_S(r) = 2r / (1 + r^2), the dilation zero mode.
double zero_mode(double r);

/// cos(2 u_S(r)) / r^2 in its rational form. Rejects r <= 0.
double linearization_potential(double r);

double self_similar(double alpha, double rho);

/// Left-hand side of the self-similar ODE evaluated on f_alpha. Zero up to
/// rounding; rejects rho outside the open interval (0, 1).
double self_similar_residual(double alpha, double rho);

/// Same residual for an arbitrary profile given with its two derivatives.
double self_similar_ode_lhs(double f, double df, double d2f, double rho);

/// u'' + u'/r - sin(2u)/(2r^2) for sign * u_S(r / lambda); r > 0.
double static_residual(double r, double lambda = 1.0, int sign = 1);

double initial_profile(const InitialDataFamily& family, double r);

/// Potential energy of u_S^lambda on the ball [0, r_max]:
/// 4 pi r_max^2 / (lambda^2 + r_max^2).
double static_energy_in_ball(double lambda, double r_max);

}  // namespace wavemap::analytic

#include "wavemap/analytic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavemap::analytic {

namespace {

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite, got " +
                                std::to_string(x));
  }
}

int normalize_sign(int sign) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("sign must be +1 or -1, got " + std::to_string(sign));
  }
  return sign;
}

}  // namespace

StaticSolutionScaled::StaticSolutionScaled(double lambda_, int sign_)
    : lambda(lambda_), sign(normalize_sign(sign_)) {
  require_positive(lambda, "lambda");
}

double StaticSolutionScaled::value(double r) const {
  return sign * 2.0 * std::atan(r / lambda);
}

double StaticSolutionScaled::dr(double r) const {
  return sign * 2.0 * lambda / (lambda * lambda + r * r);
}

double StaticSolutionScaled::drr(double r) const {
  const double d = lambda * lambda + r * r;
  return -sign * 4.0 * lambda * r / (d * d);
}

SelfSimilarSolution::SelfSimilarSolution(double alpha_) : alpha(alpha_) {
  require_positive(alpha, "alpha");
}

// f = 2 atan(g), g = alpha rho / (1 + s), s = sqrt(1 - rho^2).
// g'  = alpha / (s (1 + s))
// g'' = alpha rho (1 + 2s) / (s^3 (1 + s)^2)
double SelfSimilarSolution::value(double rho) const {
  const double s = std::sqrt(1.0 - rho * rho);
  return 2.0 * std::atan(alpha * rho / (1.0 + s));
}

double SelfSimilarSolution::drho(double rho) const {
  const double s = std::sqrt(1.0 - rho * rho);
  const double g = alpha * rho / (1.0 + s);
  const double dg = alpha / (s * (1.0 + s));
  return 2.0 * dg / (1.0 + g * g);
}

double SelfSimilarSolution::drhorho(double rho) const {
  const double s = std::sqrt(1.0 - rho * rho);
  const double g = alpha * rho / (1.0 + s);
  const double dg = alpha / (s * (1.0 + s));
  const double d2g = alpha * rho * (1.0 + 2.0 * s) / (s * s * s * (1.0 + s) * (1.0 + s));
  const double q = 1.0 + g * g;
  return 2.0 * d2g / q - 4.0 * g * dg * dg / (q * q);
}

double static_solution(double r, double lambda, int sign) {
  if (r < 0.0) throw std::invalid_argument("static_solution: r must be >= 0");
  return StaticSolutionScaled(lambda, sign).value(r);
}

double zero_mode(double r) {
  if (r < 0.0) throw std::invalid_argument("zero_mode: r must be >= 0");
  return 2.0 * r / (1.0 + r * r);
}

double linearization_potential(double r) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("linearization_potential: r must be > 0 (potential diverges at 0)");
  }
  const double r2 = r * r;
  const double q = 1.0 + r2;
  return (1.0 - 6.0 * r2 + r2 * r2) / (q * q * r2);
}

double self_similar(double alpha, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("self_similar: rho must lie in [0, 1]");
  }
  return SelfSimilarSolution(alpha).value(rho);
}

double self_similar_ode_lhs(double f, double df, double d2f, double rho) {
  const double w = 1.0 - rho * rho;
  return d2f + (1.0 / rho - rho / w) * df - std::sin(2.0 * f) / (2.0 * rho * rho * w);
}

double self_similar_residual(double alpha, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("self_similar_residual: rho must lie in (0, 1)");
  }
  const SelfSimilarSolution f(alpha);
  return self_similar_ode_lhs(f.value(rho), f.drho(rho), f.drhorho(rho), rho);
}

double static_residual(double r, double lambda, int sign) {
  if (!(r > 0.0)) throw std::invalid_argument("static_residual: r must be > 0");
  const StaticSolutionScaled us(lambda, sign);
  return us.drr(r) + us.dr(r) / r - std::sin(2.0 * us.value(r)) / (2.0 * r * r);
}

double initial_profile(const InitialDataFamily& family, double r) {
  require_positive(family.radius, "radius");
  require_positive(family.width, "width");
  if (r < 0.0) throw std::invalid_argument("initial_profile: r must be >= 0");
  const double x = r / family.radius;
  const double y = (r - family.radius) / family.width;
  const double y2 = y * y;
  return family.amplitude * x * x * x * std::exp(-y2 * y2);
}

double static_energy_in_ball(double lambda, double r_max) {
  require_positive(lambda, "lambda");
  if (!(r_max > 0.0)) throw std::invalid_argument("static_energy_in_ball: r_max must be > 0");
  if (std::isinf(r_max)) return kStaticEnergy;
  const double r2 = r_max * r_max;
  return kStaticEnergy * r2 / (lambda * lambda + r2);
}

}  // namespace wavemap::analytic

#include "rstar/twobody.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace rstar {

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^x k^2/(k^2+b^2) dk = x - b atan(x/b), stable for x << b.
double lorentz_ramp(double x, double b) {
  if (b == 0.0) return x;
  const double r = x / b;
  if (r < 1e-3) {
    const double r2 = r * r;
    return x * r2 * (1.0 / 3.0 - r2 / 5.0 + r2 * r2 / 7.0);
  }
  return x - b * std::atan(r);
}

}  // namespace

TwoChannelDerived two_channel_parameters(const ResonanceParams& p) {
  validate_params(p, SolverKind::Regularized);
  TwoChannelDerived d;
  d.e_mol = (std::sqrt(2.0) / (p.epsilon * std::sqrt(kPi)) - p.inv_a) / p.r_star;
  d.lambda = std::sqrt(2.0 * kPi / p.r_star);
  return d;
}

std::complex<double> f0(double k, const ResonanceParams& p) {
  validate_params(p, SolverKind::TwoBody);
  if (k == 0.0 && p.inv_a == 0.0) {
    throw Error(ErrorCode::PoleAtZero, "f0 diverges at k = 0 for 1/a = 0");
  }
  const std::complex<double> denom(p.inv_a + p.r_star * k * k, k);
  return -1.0 / denom;
}

std::complex<double> pair_loop_integral(double k, double eps) {
  const double gk = std::exp(-0.5 * k * k * eps * eps);
  const double imag = -k * gk / (4.0 * kPi);

  // k'^2 g(k') / (k^2 - k'^2) = -g(k') + k^2 [g(k') - g(k)] / (k^2 - k'^2) up to a
  // term with vanishing principal value.  The bracket is written with expm1 so
  // the removable singularity at k' = k is exact.
  const double half_eps2 = 0.5 * eps * eps;
  auto smooth = [&](double kp) {
    const double delta = kp * kp - k * k;
    const double x = -delta * half_eps2;
    if (std::abs(x) < 1e-300) return gk * half_eps2;
    // Far from the pole there is no cancellation, and gk may have underflowed.
    if (x > 1.0) return (std::exp(-kp * kp * half_eps2) - gk) / -delta;
    return gk * half_eps2 * std::expm1(x) / x;
  };

  double principal = -std::sqrt(0.5 * kPi) / eps;
  if (k > 0.0) {
    const double k_cut = std::max(4.0 * k, 12.0 / eps);
    const RadialGrid inner = build_linear_gauss_grid(32, 16, 0.0, k);
    const RadialGrid outer = build_linear_gauss_grid(96, 16, k, k_cut);
    double bracket = inner.integrate(smooth) + outer.integrate(smooth);
    // Beyond k_cut only -g(k)/(k^2 - k'^2) survives.
    bracket += gk * std::atanh(k / k_cut) / k;
    principal += k * k * bracket;
  }
  return {principal / (2.0 * kPi * kPi), imag};
}

std::complex<double> f_eps(double k, const ResonanceParams& p) {
  const TwoChannelDerived d = two_channel_parameters(p);
  const double pair_energy = k * k;
  const std::complex<double> rhs =
      (d.e_mol - pair_energy) / (2.0 * d.lambda * d.lambda) + pair_loop_integral(k, p.epsilon);
  if (rhs == 0.0) throw Error(ErrorCode::PoleAtZero, "f_eps diverges at k = 0 for 1/a = 0");
  const double chi = cutoff(k, p.epsilon);
  return chi * chi / (4.0 * kPi * rhs);
}

double dimer_kappa(const ResonanceParams& p) {
  validate_params(p, SolverKind::TwoBody);
  if (!(p.inv_a > 0.0)) throw Error(ErrorCode::NoBoundState, "dimer requires a > 0");
  if (p.r_star == 0.0) return p.inv_a;
  // Rationalized root of R* kappa^2 + kappa - 1/a = 0, free of cancellation.
  return 2.0 * p.inv_a / (1.0 + std::sqrt(1.0 + 4.0 * p.r_star * p.inv_a));
}

DimerSolution dimer_observables(const ResonanceParams& p) {
  validate_params(p, SolverKind::TwoBody);
  const double kappa = dimer_kappa(p);
  if (p.r_star == 0.0) throw Error(ErrorCode::RStarRequired, "dimer observables need r_star > 0");
  DimerSolution s;
  s.params = p;
  s.kappa = kappa;
  s.energy = -kappa * kappa;
  const double x = 2.0 * kappa * p.r_star;
  s.n_mol = x / (1.0 + x);
  s.c4 = 16.0 * kPi * kappa / (1.0 + x);
  s.c6 = -2.0 * kappa * kappa * s.c4;
  return s;
}

double dimer_nk(double k, const ResonanceParams& p) {
  const DimerSolution s = dimer_observables(p);
  const double d = k * k + s.kappa * s.kappa;
  return s.c4 / (d * d);
}

RadialGrid default_dimer_grid(const ResonanceParams& p, int n_points) {
  const double kappa = dimer_kappa(p);
  return build_log_gauss_grid(n_points, 1e-3 * kappa, 1e4 * kappa);
}

double regularized_kinetic_integral(const RadialGrid& grid, std::span<const double> nk,
                                    double c4, double c6, double inv_a) {
  const double b = std::abs(inv_a);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.n_points(); ++i) {
    const double k = grid.nodes[i];
    const double k2 = k * k;
    sum += grid.weights[i] * k2 * (k2 * nk[i] - c4 / (k2 + b * b));
  }
  const double k_lo = grid.k_min;
  const double k_hi = grid.k_max;
  // [0, k_lo): n_k flat at its first sample.
  sum += nk.front() * std::pow(k_lo, 5) / 5.0 - c4 * lorentz_ramp(k_lo, b);
  // [k_hi, inf): c4 b^2/(k^2+b^2) + c6/k^2.
  sum += c4 * b * std::atan2(b, k_hi) + c6 / k_hi;
  return sum / (2.0 * kPi * kPi);
}

double energy_relation_residual_dimer(const ResonanceParams& p, const RadialGrid& grid) {
  const DimerSolution s = dimer_observables(p);
  std::vector<double> nk(grid.n_points());
  for (std::size_t i = 0; i < nk.size(); ++i) {
    const double d = grid.nodes[i] * grid.nodes[i] + s.kappa * s.kappa;
    nk[i] = s.c4 / (d * d);
  }
  const double rhs = 0.5 * regularized_kinetic_integral(grid, nk, s.c4, s.c6, p.inv_a) +
                     p.r_star * s.c6 / (8.0 * kPi);
  return rhs - s.energy;
}

}  // namespace rstar

#pragma once

// Two-body physics of the narrow-resonance model: the effective-range
// scattering amplitude, its finite-cutoff two-channel counterpart, and the
// dimer (two-atom bound state) observables.

#include <cmath>
#include <complex>
#include <span>

#include "rstar/model.hpp"
#include "rstar/numerics.hpp"

namespace rstar {

/// Bare molecular energy and inter-channel coupling amplitude that reproduce
/// the effective-range amplitude in the zero-range limit.
struct TwoChannelDerived {
  double e_mol = 0.0;
  double lambda = 0.0;
};

TwoChannelDerived two_channel_parameters(const ResonanceParams& p);

/// Gaussian coupling cutoff exp(-k^2 eps^2 / 4).
inline double cutoff(double k, double eps) { return std::exp(-0.25 * k * k * eps * eps); }

/// f0(k) = -1 / (1/a + R* k^2 + i k).  Throws PoleAtZero at k = 0, 1/a = 0.
std::complex<double> f0(double k, const ResonanceParams& p);

/// Pair loop integral  int d^3k'/(2pi)^3 cutoff(k')^2 / (k^2 + i0 - k'^2).
/// The imaginary part is closed form; the principal value is integrated with
/// the pole subtracted.
std::complex<double> pair_loop_integral(double k, double eps);

/// Two-channel amplitude at relative wavenumber k (pair energy k^2) for a
/// finite cutoff range.  Needs epsilon > 0 and r_star > 0.
std::complex<double> f_eps(double k, const ResonanceParams& p);

/// Dimer binding wavenumber, the positive root of 1/a - kappa - R* kappa^2.
/// Throws NoBoundState for a <= 0.
double dimer_kappa(const ResonanceParams& p);

DimerSolution dimer_observables(const ResonanceParams& p);

/// Atom momentum distribution of the dimer at rest, c4 / (k^2 + kappa^2)^2.
double dimer_nk(double k, const ResonanceParams& p);

/// Grid used for dimer integrals when the caller does not supply one:
/// [1e-3 kappa, 1e4 kappa], where the neglected k^-8 tail is below 1e-11.
RadialGrid default_dimer_grid(const ResonanceParams& p, int n_points = 300);

/// int d^3k/(2pi)^3 [k^2 n_k - c4 a^2 / (1 + k^2 a^2)] from samples of n_k on
/// `grid`.  Below the grid n_k is taken constant; above it the large-k form
/// c4/k^4 + c6/k^6 is integrated analytically.
double regularized_kinetic_integral(const RadialGrid& grid, std::span<const double> nk,
                                    double c4, double c6, double inv_a);

/// Right-hand side of the energy relation for the dimer at rest minus its
/// exact energy -kappa^2.
double energy_relation_residual_dimer(const ResonanceParams& p, const RadialGrid& grid);

}  // namespace rstar

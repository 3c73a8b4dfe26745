#pragma once

// Three identical bosons at a narrow resonance: the s-wave integral equation
// for the pair amplitude D(k) in the centre-of-mass frame at energy -q^2,
//
//   d(k) D(k) = (2/pi) int_0^inf dp (p/k) ln[(k^2+p^2+kp+q^2)/(k^2+p^2-kp+q^2)] D(p),
//   d(k)      = sqrt(3k^2/4 + q^2) + R* (3k^2/4 + q^2) - 1/a,
//
// discretized by Nystrom on a log-Gauss grid.  Bound states are the zeros of
// det(I - d^-1 K) as a function of q.

#include <utility>
#include <vector>

#include "rstar/model.hpp"
#include "rstar/numerics.hpp"

namespace rstar {

/// Universal Efimov channel root s0 of 8 sinh(pi s/6) = sqrt(3) s cosh(pi s/2).
struct EfimovChannel {
  double s0 = 0.0;
  double period = 0.0;         // e^{pi/s0}, wavenumber scaling per level
  double energy_ratio = 0.0;   // e^{2 pi/s0}
};

double efimov_channel_function(double s);
EfimovChannel efimov_channel_root();

double stm_diagonal(double k, double q, const ResonanceParams& p);
/// Kernel without quadrature weight: (2/(pi k)) p ln[...].
double stm_kernel(double k, double p, double q);

struct StmOperator {
  double q = 0.0;
  RadialGrid grid;
  std::vector<double> diagonal;
  DenseMatrix kernel;  // includes quadrature weights

  /// I - diag(d)^-1 K
  DenseMatrix fredholm_matrix() const;
};

/// Assembles the discretized operator.  Refuses q <= kappa when a dimer
/// exists (ThresholdViolation) and R* = 0 (RStarRequired).
StmOperator assemble(double q, const ResonanceParams& p, const RadialGrid& grid);

struct DetSample {
  double q = 0.0;
  int sign = 0;
  double log_abs_det = 0.0;
};

/// det(I - d^-1 K) at every q of `q_list`.  Evaluations are independent and
/// are spread over `threads` workers; the result order follows `q_list`.
std::vector<DetSample> det_scan(const ResonanceParams& p, const RadialGrid& grid,
                                const std::vector<double>& q_list, int threads = 1);

struct LevelSearchOptions {
  double q_max = 0.0;          // 0: 10 max(1/R*, kappa, |1/a|)
  double q_min = 0.0;          // 0: 1e3 * grid.k_min
  double ladder_ratio = 1.2;
  double rel_tol = 1e-14;
};

struct LevelSearch {
  std::vector<TrimerLevel> levels;  // decreasing q
  int requested = 0;
  bool complete() const { return static_cast<int>(levels.size()) >= requested; }
};

/// Up to `n_levels` deepest trimers, bracketed on a geometric q ladder and
/// refined with Brent.  A short list means shallower levels are below the
/// ladder or grid resolution (FewerLevelsFound is signalled by complete()).
LevelSearch solve_levels(const ResonanceParams& p, const RadialGrid& grid, int n_levels,
                         const LevelSearchOptions& options = {});

/// Grid for spectrum searches: k_min = 2e-4 q_shallow with q_shallow from
/// Efimov scaling of max(0.1/R*, kappa), k_max = max(100/R*, 10 q_ceiling).
RadialGrid default_spectrum_grid(const ResonanceParams& p, int n_levels, int n_points = 300);
/// Grid for momentum-distribution work on one level: wide enough in k to
/// fit the large-momentum tail.
RadialGrid default_nk_grid(const ResonanceParams& p, double q, int n_points = 360);

struct StmSolution {
  ResonanceParams params;
  TrimerLevel level;
  std::vector<double> d_values;  // normalized so that n_open + n_mol = 1
  double n_mol = 0.0;
  double n_open = 0.0;
  double k_mol = 0.0;            // mean molecule translational kinetic energy
  double residual = 0.0;         // ||(I - d^-1 K) D|| / ||D||
};

StmSolution solve_amplitude(const TrimerLevel& level, const ResonanceParams& p,
                            const RadialGrid& grid);

/// D(k) anywhere on the positive axis, from the Nystrom interpolation
/// formula.  A dense table in ln k serves points inside the grid.
class PairAmplitude {
 public:
  PairAmplitude(const StmSolution& sol, const RadialGrid& grid, int table_points = 6000);

  double operator()(double k) const;
  double nystrom(double k) const;

 private:
  double scale(double k) const;

  ResonanceParams params_;
  double q_;
  std::vector<double> nodes_;
  std::vector<double> wd_;  // w_j D_j
  double u_lo_ = 0.0;
  double du_ = 0.0;
  std::vector<double> table_;  // D / scale on the ln k table
};

struct NkOptions {
  double fit_k_lo = 0.0;   // 0: 30 max(q, 1/R*)
  double fit_k_hi = 0.0;   // 0: grid.k_max / 10
  int p_points = 192;      // per side of the k/2 breakpoint
  int s_order = 32;
};

struct MomentumDistribution {
  std::vector<double> k_samples;
  std::vector<double> k_weights;  // radial quadrature weights of the samples
  std::pair<double, double> sample_range{0.0, 0.0};  // ends of the sampling grid
  std::vector<double> values;
  double c4_fit = 0.0;
  double c6_fit = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};
  double norm_integral = 0.0;      // int d^3k/(2pi)^3 n_k
  double sum_rule_residual = 0.0;  // norm_integral - (3 - 2 n_mol)
  double c6_contact_spectator = 0.0;
  double c6_contact_pair_cm = 0.0;
};

/// One-body momentum distribution of a solved trimer on `out_grid`, its
/// normalization and the fitted large-k tail c4/k^4 + c6/k^6.
MomentumDistribution reconstruct_nk(const StmSolution& sol, const ResonanceParams& p,
                                    const RadialGrid& grid, const RadialGrid& out_grid,
                                    const NkOptions& options = {});

/// Default sampling of n_k for a level: log grid from 1e-3 q to k_max/5.
RadialGrid default_nk_out_grid(double q, const RadialGrid& grid, int n_points = 200);

/// Right-hand side of the energy relation (trap-free) minus -q^2.
double energy_relation_residual_trimer(const StmSolution& sol, const MomentumDistribution& dist,
                                       const ResonanceParams& p, bool include_c6 = true);

struct LevelAnalysisOptions {
  int search_points = 300;    // spectrum grid used to locate the level
  int n_points = 360;         // amplitude grid of the re-solve
  int out_points = 200;       // n_k samples
  double cutoff_scale = 1.0;  // multiplies the default amplitude-grid k_max
  NkOptions nk;
};

struct LevelAnalysis {
  RadialGrid grid;
  StmSolution solution;
  MomentumDistribution distribution;
  double energy_residual = 0.0;
};

/// Locates level `index` on the spectrum grid, re-solves it on the wider
/// momentum-distribution grid, and reconstructs n_k with the energy-relation
/// residual.  Throws FewerLevelsFound when the level is not bound.
LevelAnalysis analyze_level(const ResonanceParams& p, int index,
                            const LevelAnalysisOptions& options = {});

struct CollapseRow {
  double k_max = 0.0;
  double q0_zero_range = 0.0;
  double q0_finite = 0.0;
};

/// Ground-state q as a function of the momentum cutoff, for R* = 0 (which
/// collapses) and for the given R* > 0 (which converges).
std::vector<CollapseRow> thomas_collapse_probe(double inv_a, double r_star,
                                               const std::vector<double>& k_max_list,
                                               int n_points = 320, double k_min = 1e-6);

}  // namespace rstar

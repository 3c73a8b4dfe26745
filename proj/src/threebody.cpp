#include "rstar/threebody.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "rstar/twobody.hpp"

namespace rstar {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInv2Pi2 = 1.0 / (2.0 * kPi * kPi);

// Largest q considered for levels; the spectrum is bounded, nothing lives
// far above the scales set by R*, the dimer and 1/a.
double level_ceiling(const ResonanceParams& p) {
  double scale = 1.0 / p.r_star;
  scale = std::max(scale, std::abs(p.inv_a));
  if (p.inv_a > 0.0) scale = std::max(scale, dimer_kappa(p));
  return 10.0 * scale;
}

double atom_dimer_threshold(const ResonanceParams& p) {
  if (!(p.inv_a > 0.0)) return 0.0;
  return dimer_kappa(p);
}

StmOperator assemble_unchecked(double q, const ResonanceParams& p, const RadialGrid& grid) {
  const std::size_t n = grid.n_points();
  StmOperator op;
  op.q = q;
  op.grid = grid;
  op.diagonal.resize(n);
  op.kernel = DenseMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ki = grid.nodes[i];
    op.diagonal[i] = stm_diagonal(ki, q, p);
    const auto row = op.kernel.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = stm_kernel(ki, grid.nodes[j], q) * grid.weights[j];
    }
  }
  return op;
}

LogDeterminant fredholm_determinant(double q, const ResonanceParams& p, const RadialGrid& grid) {
  return lu_log_determinant(assemble_unchecked(q, p, grid).fredholm_matrix());
}

double signed_determinant(double q, const ResonanceParams& p, const RadialGrid& grid) {
  const LogDeterminant ld = fredholm_determinant(q, p, grid);
  return ld.sign * std::exp(std::min(ld.log_abs_det, 700.0));
}

// Walks a geometric ladder downward from q_hi and refines each sign change.
std::vector<double> ladder_roots(const ResonanceParams& p, const RadialGrid& grid, double q_hi,
                                 double q_lo, double ratio, int n_roots, double rel_tol) {
  std::vector<double> roots;
  if (!(q_hi > q_lo)) return roots;
  const double log_step = std::log(ratio);
  double q_prev = q_hi;
  int s_prev = fredholm_determinant(q_prev, p, grid).sign;
  for (int step = 1; static_cast<int>(roots.size()) < n_roots; ++step) {
    const double q = std::max(q_hi * std::exp(-step * log_step), q_lo);
    const int s = fredholm_determinant(q, p, grid).sign;
    if (s != 0 && s_prev != 0 && s != s_prev) {
      auto f = [&](double x) { return signed_determinant(x, p, grid); };
      roots.push_back(brent_root(f, q, q_prev, rel_tol * q));
    }
    if (q <= q_lo) break;
    q_prev = q;
    s_prev = s;
  }
  return roots;
}

double vector_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Conditioning scale roughly following |D(k)|: flat below q, ~1/k in the
// scaling region, ~1/(R*^3 k^4) at large k.
double amplitude_scale(double k, double q, double r_star) {
  const double t = 1.0 + r_star * k;
  return q / (std::sqrt(q * q + k * k) * t * t * t);
}

}  // namespace

double efimov_channel_function(double s) {
  return 8.0 * std::sinh(kPi * s / 6.0) - std::sqrt(3.0) * s * std::cosh(kPi * s / 2.0);
}

EfimovChannel efimov_channel_root() {
  // The function is positive just above the trivial root at 0 and negative at 2.
  double lo = 1e-3;
  double hi = 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (efimov_channel_function(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  EfimovChannel c;
  c.s0 = 0.5 * (lo + hi);
  c.period = std::exp(kPi / c.s0);
  c.energy_ratio = std::exp(2.0 * kPi / c.s0);
  return c;
}

double stm_diagonal(double k, double q, const ResonanceParams& p) {
  const double e = 0.75 * k * k + q * q;
  return std::sqrt(e) + p.r_star * e - p.inv_a;
}

double stm_kernel(double k, double p, double q) {
  const double base = k * k + p * p + q * q;
  const double cross = k * p;
  return 2.0 / (kPi * k) * p * std::log1p(2.0 * cross / (base - cross));
}

DenseMatrix StmOperator::fredholm_matrix() const {
  const std::size_t n = diagonal.size();
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = kernel.row(i);
    const auto dst = m.row(i);
    const double inv_d = 1.0 / diagonal[i];
    for (std::size_t j = 0; j < n; ++j) dst[j] = -src[j] * inv_d;
    dst[i] += 1.0;
  }
  return m;
}

namespace {

void check_trial_q(double q, const ResonanceParams& p) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw Error(ErrorCode::BadRange, "trial q must be positive and finite");
  }
  const double kappa = atom_dimer_threshold(p);
  if (q <= kappa) {
    throw Error(ErrorCode::ThresholdViolation,
                "q = " + std::to_string(q) + " is not below the atom-dimer threshold kappa = " +
                    std::to_string(kappa));
  }
}

}  // namespace

StmOperator assemble(double q, const ResonanceParams& p, const RadialGrid& grid) {
  validate_params(p, SolverKind::ThreeBody);
  check_trial_q(q, p);
  return assemble_unchecked(q, p, grid);
}

std::vector<DetSample> det_scan(const ResonanceParams& p, const RadialGrid& grid,
                                const std::vector<double>& q_list, int threads) {
  validate_params(p, SolverKind::ThreeBody);
  for (double q : q_list) check_trial_q(q, p);
  std::vector<DetSample> out(q_list.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < q_list.size(); i += stride) {
      const LogDeterminant ld = fredholm_determinant(q_list[i], p, grid);
      out[i] = {q_list[i], ld.sign, ld.log_abs_det};
    }
  };
  const std::size_t n_workers = static_cast<std::size_t>(std::max(1, threads));
  if (n_workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(work, t, n_workers);
    for (auto& th : pool) th.join();
  }
  return out;
}

LevelSearch solve_levels(const ResonanceParams& p, const RadialGrid& grid, int n_levels,
                         const LevelSearchOptions& options) {
  validate_params(p, SolverKind::ThreeBody);
  const double q_hi = options.q_max > 0.0 ? options.q_max : level_ceiling(p);
  double q_lo = options.q_min > 0.0 ? options.q_min : 1e3 * grid.k_min;
  const double kappa = atom_dimer_threshold(p);
  if (kappa > 0.0) q_lo = std::max(q_lo, kappa * (1.0 + 1e-9));

  LevelSearch search;
  search.requested = n_levels;
  const std::vector<double> roots =
      ladder_roots(p, grid, q_hi, q_lo, options.ladder_ratio, n_levels, options.rel_tol);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    search.levels.push_back({static_cast<int>(i), roots[i], -roots[i] * roots[i]});
  }
  return search;
}

RadialGrid default_spectrum_grid(const ResonanceParams& p, int n_levels, int n_points) {
  validate_params(p, SolverKind::ThreeBody);
  const EfimovChannel efimov = efimov_channel_root();
  const double q_top = std::max(0.1 / p.r_star, atom_dimer_threshold(p));
  const double q_shallow = q_top * std::pow(efimov.period, -std::max(0, n_levels - 1));
  const double k_min = 2e-4 * q_shallow;
  const double k_max = std::max(100.0 / p.r_star, 10.0 * level_ceiling(p));
  return build_log_gauss_grid(n_points, k_min, k_max);
}

RadialGrid default_nk_grid(const ResonanceParams& p, double q, int n_points) {
  validate_params(p, SolverKind::ThreeBody);
  const double k_max = std::max(1e4 / p.r_star, 1e3 * q);
  return build_log_gauss_grid(n_points, 1e-3 * q, k_max);
}

StmSolution solve_amplitude(const TrimerLevel& level, const ResonanceParams& p,
                            const RadialGrid& grid) {
  const StmOperator op = assemble(level.q, p, grid);
  const std::size_t n = grid.n_points();
  const double q = level.q;

  // Inverse iteration on the diagonally rescaled Fredholm matrix so every
  // component of the null vector carries full relative precision.
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = amplitude_scale(grid.nodes[i], q, p.r_star);
  DenseMatrix scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = op.kernel.row(i);
    const auto dst = scaled.row(i);
    const double f = 1.0 / (op.diagonal[i] * scale[i]);
    for (std::size_t j = 0; j < n; ++j) dst[j] = -src[j] * scale[j] * f;
    dst[i] += 1.0;
  }
  const LuFactorization lu(std::move(scaled));
  const DenseMatrix fredholm = op.fredholm_matrix();

  std::vector<double> y(n, 1.0);
  std::vector<double> d(n);
  double residual = 0.0;
  for (int iter = 0; iter < 8; ++iter) {
    y = lu.solve(y);
    const double ymax = std::abs(*std::max_element(y.begin(), y.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    }));
    for (double& v : y) v /= ymax;
    for (std::size_t i = 0; i < n; ++i) d[i] = y[i] * scale[i];
    residual = vector_norm(fredholm.apply(d)) / vector_norm(d);
    if (iter >= 1 && residual <= 1e-10) break;
  }
  if (!(residual <= 1e-8)) {
    throw Error(ErrorCode::NotConverged,
                "null-vector residual " + std::to_string(residual) + " exceeds 1e-8");
  }
  if (d.front() < 0.0) {
    for (double& v : d) v = -v;
  }

  // Sector weights before normalization.  The molecule sector carries
  // 6 R* |D|^2; the three-atom sector is G0 V acting on it, whose angular
  // integrals are closed form on the product grid.
  double mol = 0.0;
  double mol_kinetic = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k2 = grid.nodes[i] * grid.nodes[i];
    const double w = grid.weights[i] * k2 * d[i] * d[i];
    mol += w;
    mol_kinetic += w * 0.25 * k2;
  }
  mol *= 6.0 * p.r_star * kInv2Pi2;
  mol_kinetic *= 6.0 * p.r_star * kInv2Pi2;

  double same = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ki2 = grid.nodes[i] * grid.nodes[i];
    const double wi = grid.weights[i] * ki2;
    for (std::size_t j = 0; j < n; ++j) {
      const double kj2 = grid.nodes[j] * grid.nodes[j];
      const double a = q * q + ki2 + kj2;
      const double angular = 2.0 / (a * a - ki2 * kj2);
      const double wij = wi * grid.weights[j] * kj2 * angular;
      same += wij * d[i] * d[i];
      cross += wij * d[i] * d[j];
    }
  }
  const double open = 8.0 * kPi * (3.0 * same + 6.0 * cross) / (8.0 * std::pow(kPi, 4));

  const double total = open + mol;
  const double norm = 1.0 / std::sqrt(total);
  StmSolution sol;
  sol.params = p;
  sol.level = level;
  sol.d_values = std::move(d);
  for (double& v : sol.d_values) v *= norm;
  sol.n_mol = mol / total;
  sol.n_open = open / total;
  sol.k_mol = mol_kinetic / total;
  sol.residual = residual;
  return sol;
}

PairAmplitude::PairAmplitude(const StmSolution& sol, const RadialGrid& grid, int table_points)
    : params_(sol.params), q_(sol.level.q), nodes_(grid.nodes), wd_(grid.n_points()) {
  for (std::size_t j = 0; j < wd_.size(); ++j) wd_[j] = grid.weights[j] * sol.d_values[j];
  u_lo_ = std::log(grid.nodes.front());
  du_ = (std::log(grid.nodes.back()) - u_lo_) / (table_points - 1);
  table_.resize(table_points);
  for (int i = 0; i < table_points; ++i) {
    const double k = std::exp(u_lo_ + i * du_);
    table_[i] = nystrom(k) / scale(k);
  }
}

double PairAmplitude::scale(double k) const { return amplitude_scale(k, q_, params_.r_star); }

double PairAmplitude::nystrom(double k) const {
  double s = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) s += stm_kernel(k, nodes_[j], q_) * wd_[j];
  return s / stm_diagonal(k, q_, params_);
}

double PairAmplitude::operator()(double k) const {
  const double t = (std::log(k) - u_lo_) / du_;
  const int m = static_cast<int>(table_.size());
  if (!(t >= 2.0) || !(t <= m - 4.0)) return nystrom(k);
  // Six-point Lagrange interpolation in ln k.
  const int i0 = static_cast<int>(std::floor(t)) - 2;
  const double x = t - i0;
  double sum = 0.0;
  for (int a = 0; a < 6; ++a) {
    double l = 1.0;
    for (int b = 0; b < 6; ++b) {
      if (b != a) l *= (x - b) / static_cast<double>(a - b);
    }
    sum += l * table_[i0 + a];
  }
  return sum * scale(k);
}

RadialGrid default_nk_out_grid(double q, const RadialGrid& grid, int n_points) {
  return build_log_gauss_grid(n_points, 1e-3 * q, grid.k_max / 5.0);
}

MomentumDistribution reconstruct_nk(const StmSolution& sol, const ResonanceParams& p,
                                    const RadialGrid& grid, const RadialGrid& out_grid,
                                    const NkOptions& options) {
  validate_params(p, SolverKind::ThreeBody);
  const double q = sol.level.q;
  const double q2 = q * q;
  const PairAmplitude amp(sol, grid);
  const GaussRule panel = gauss_legendre(8);
  const GaussRule s_rule = gauss_legendre(options.s_order);
  const double g_lo = grid.nodes.front();
  const double g_hi = grid.k_max;
  const int panels_per_side = std::max(1, options.p_points / 8);

  // Integrates over p with |p| <= |k + p| (the mirror half is equal), using
  // s = |k + p| in place of the polar angle.
  auto open_channel = [&](double k, double dk) {
    double sum = 0.0;
    auto side = [&](double a, double b) {
      if (!(b > a)) return;
      const double ua = std::log(a);
      const double h = (std::log(b) - ua) / panels_per_side;
      for (int pi = 0; pi < panels_per_side; ++pi) {
        for (std::size_t ip = 0; ip < panel.x.size(); ++ip) {
          const double pp = std::exp(ua + h * (pi + 0.5 * (panel.x[ip] + 1.0)));
          const double wp = 0.5 * h * panel.w[ip] * pp;
          const double dp = amp(pp);
          const double s_lo = pp <= 0.5 * k ? k - pp : pp;
          const double s_hi = k + pp;
          const double vl = std::log(s_lo);
          const double hv = std::log(s_hi) - vl;
          double inner = 0.0;
          for (std::size_t is = 0; is < s_rule.x.size(); ++is) {
            const double s = std::exp(vl + 0.5 * hv * (s_rule.x[is] + 1.0));
            const double ws = 0.5 * hv * s_rule.w[is] * s * s;
            const double den = q2 + 0.5 * (k * k + pp * pp + s * s);
            const double amp_sum = dk + dp + amp(s);
            inner += ws * amp_sum * amp_sum / (den * den);
          }
          sum += wp * pp * inner / k;
        }
      }
    };
    const double mid = std::clamp(0.5 * k, g_lo, g_hi);
    side(g_lo, mid);
    side(mid, g_hi);
    return 12.0 / kPi * sum;
  };

  MomentumDistribution dist;
  dist.k_samples = out_grid.nodes;
  dist.k_weights = out_grid.weights;
  dist.sample_range = {out_grid.k_min, out_grid.k_max};
  dist.values.resize(out_grid.n_points());
  for (std::size_t i = 0; i < out_grid.n_points(); ++i) {
    const double k = out_grid.nodes[i];
    const double dk = amp(k);
    dist.values[i] = open_channel(k, dk) + 6.0 * p.r_star * dk * dk;
  }

  // Tail fit of k^4 n_k = c4 + c6/k^2 + nuisance terms k^-4 ... k^-8.
  const double k_a = options.fit_k_lo > 0.0 ? options.fit_k_lo : 30.0 * std::max(q, 1.0 / p.r_star);
  const double k_b = options.fit_k_hi > 0.0 ? options.fit_k_hi : grid.k_max / 10.0;
  dist.fit_window = {k_a, k_b};
  std::vector<std::vector<double>> design;
  std::vector<double> y;
  std::vector<double> w;
  for (std::size_t i = 0; i < out_grid.n_points(); ++i) {
    const double k = out_grid.nodes[i];
    if (k < k_a || k > k_b) continue;
    const double inv2 = 1.0 / (k * k);
    const double inv4 = inv2 * inv2;
    design.push_back({1.0, inv2, inv4, inv4 / k, inv4 * inv2, inv4 * inv2 / k, inv4 * inv4});
    y.push_back(k * k * k * k * dist.values[i]);
    w.push_back(out_grid.weights[i] / k);
  }
  if (!(k_b >= 4.0 * k_a) || design.size() < 15) {
    throw Error(ErrorCode::WindowTooNarrow,
                "tail fit window [" + std::to_string(k_a) + ", " + std::to_string(k_b) +
                    "] holds " + std::to_string(design.size()) + " samples");
  }
  const std::vector<double> c = weighted_least_squares(design, y, w);
  dist.c4_fit = c[0];
  dist.c6_fit = c[1];

  double integral = 0.0;
  for (std::size_t i = 0; i < out_grid.n_points(); ++i) {
    const double k = out_grid.nodes[i];
    integral += out_grid.weights[i] * k * k * dist.values[i];
  }
  const double k_lo = out_grid.k_min;
  const double k_hi = out_grid.k_max;
  integral += dist.values.front() * k_lo * k_lo * k_lo / 3.0;
  integral += dist.c4_fit / k_hi + dist.c6_fit / (3.0 * k_hi * k_hi * k_hi);
  dist.norm_integral = integral * kInv2Pi2;
  dist.sum_rule_residual = dist.norm_integral - (3.0 - 2.0 * sol.n_mol);

  // Contact expression for c6 from the molecule-sector amplitude, with and
  // without the pair centre-of-mass kinetic energy.
  double spectator = 0.0;
  double pair_cm = 0.0;
  for (std::size_t i = 0; i < grid.n_points(); ++i) {
    const double k2 = grid.nodes[i] * grid.nodes[i];
    const double w2 = grid.weights[i] * k2 * sol.d_values[i] * sol.d_values[i];
    spectator += w2 * (-q2 - 0.5 * k2);
    pair_cm += w2 * (-q2 - 0.75 * k2);
  }
  dist.c6_contact_spectator = 96.0 * kPi * kInv2Pi2 * spectator;
  dist.c6_contact_pair_cm = 96.0 * kPi * kInv2Pi2 * pair_cm;
  return dist;
}

double energy_relation_residual_trimer(const StmSolution& sol, const MomentumDistribution& dist,
                                       const ResonanceParams& p, bool include_c6) {
  RadialGrid samples;
  samples.nodes = dist.k_samples;
  samples.weights = dist.k_weights;
  samples.k_min = dist.sample_range.first;
  samples.k_max = dist.sample_range.second;
  double rhs = 0.5 * regularized_kinetic_integral(samples, dist.values, dist.c4_fit,
                                                  dist.c6_fit, p.inv_a);
  if (include_c6) rhs += p.r_star * dist.c6_fit / (8.0 * kPi);
  rhs -= sol.k_mol;
  return rhs - sol.level.energy;
}

LevelAnalysis analyze_level(const ResonanceParams& p, int index,
                            const LevelAnalysisOptions& options) {
  validate_params(p, SolverKind::ThreeBody);
  if (index < 0) throw Error(ErrorCode::BadRange, "level index must be >= 0");
  const RadialGrid search_grid = default_spectrum_grid(p, index + 1, options.search_points);
  const LevelSearch search = solve_levels(p, search_grid, index + 1);
  if (!search.complete()) {
    throw Error(ErrorCode::FewerLevelsFound,
                "level " + std::to_string(index) + " not found on the search grid");
  }
  const double q = search.levels[index].q;

  LevelAnalysis out;
  const RadialGrid base = default_nk_grid(p, q, options.n_points);
  out.grid = options.cutoff_scale == 1.0
                 ? base
                 : build_log_gauss_grid(options.n_points, base.k_min,
                                        options.cutoff_scale * base.k_max);
  LevelSearchOptions bracket;
  bracket.q_max = 2.0 * q;
  bracket.q_min = 0.5 * q;
  const LevelSearch refined = solve_levels(p, out.grid, 1, bracket);
  if (refined.levels.empty()) {
    throw Error(ErrorCode::NotConverged, "level lost on the momentum-distribution grid");
  }
  TrimerLevel level = refined.levels.front();
  level.index = index;

  out.solution = solve_amplitude(level, p, out.grid);
  const RadialGrid out_grid = default_nk_out_grid(level.q, out.grid, options.out_points);
  out.distribution = reconstruct_nk(out.solution, p, out.grid, out_grid, options.nk);
  out.energy_residual = energy_relation_residual_trimer(out.solution, out.distribution, p);
  return out;
}

std::vector<CollapseRow> thomas_collapse_probe(double inv_a, double r_star,
                                               const std::vector<double>& k_max_list,
                                               int n_points, double k_min) {
  const ResonanceParams zero_range{inv_a, 0.0, 0.0};
  const ResonanceParams finite = validate_params({inv_a, r_star, 0.0}, SolverKind::ThreeBody);
  validate_params(zero_range, SolverKind::TwoBody);
  std::vector<CollapseRow> rows;
  for (double k_max : k_max_list) {
    const RadialGrid grid = build_log_gauss_grid(n_points, k_min, k_max);
    CollapseRow row;
    row.k_max = k_max;
    // Zero range: the deepest state sits at the cutoff scale.
    double zr_lo = 1e3 * k_min;
    if (inv_a > 0.0) zr_lo = std::max(zr_lo, inv_a * (1.0 + 1e-9));
    const auto zr = ladder_roots(zero_range, grid, 10.0 * k_max, zr_lo, 1.2, 1, 1e-14);
    row.q0_zero_range = zr.empty() ? 0.0 : zr.front();
    const LevelSearch fin = solve_levels(finite, grid, 1);
    row.q0_finite = fin.levels.empty() ? 0.0 : fin.levels.front().q;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rstar

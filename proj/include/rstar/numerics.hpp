#pragma once

// Quadrature grids, small dense linear algebra and scalar root finding.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rstar {

/// Quadrature rule on the positive momentum axis.
struct RadialGrid {
  std::vector<double> nodes;    // strictly increasing, all > 0
  std::vector<double> weights;  // positive, include any mapping Jacobian
  double k_min = 0.0;
  double k_max = 0.0;

  std::size_t n_points() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Gauss-Legendre rule of the given order on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
GaussRule gauss_legendre(int order);

/// Log-mapped composite Gauss-Legendre grid: u = ln k is split into equal
/// panels on [ln k_min, ln k_max] carrying about eight nodes each, and the
/// weights include the Jacobian dk = k du.  Requires 0 < k_min < k_max and
/// n_points >= 8.
RadialGrid build_log_gauss_grid(int n_points, double k_min, double k_max);

/// Composite Gauss-Legendre rule with `panels` equal panels of `order`
/// nodes each on [a, b], 0 <= a < b.
RadialGrid build_linear_gauss_grid(int panels, int order, double a, double b);

/// Row-major square matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  std::vector<double> apply(std::span<const double> v) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct LogDeterminant {
  int sign = 0;  // +1, -1, or 0 when a pivot vanishes exactly
  double log_abs_det = 0.0;
};

/// In-place LU with partial pivoting, reusable for repeated solves.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix m);

  LogDeterminant log_determinant() const;
  /// Solves m x = b.  Exactly zero pivots are replaced by a tiny multiple of
  /// the matrix scale so inverse iteration at a root remains usable.
  std::vector<double> solve(std::span<const double> b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  int parity_ = 1;
  bool singular_ = false;
  double scale_ = 0.0;
};

LogDeterminant lu_log_determinant(const DenseMatrix& m);

/// Brent's method on a sign-changing bracket.  Throws NoSignChange or
/// MaxIterations.
double brent_root(const std::function<double(double)>& f, double x_lo, double x_hi,
                  double tol, int max_iter = 200);

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

/// Power iteration with a Rayleigh-quotient estimate, stopped once
/// ||m v - lambda v|| <= tol ||v||.  Throws MaxIterations when the spectrum
/// has no real dominant eigenvalue.
EigenPair largest_eigenvalue(const DenseMatrix& m, double tol, int max_iter = 20000);

/// Weighted linear least squares min sum_i w_i (sum_j A_ij c_j - y_i)^2 via
/// Householder QR.  `design` holds one row per observation.
std::vector<double> weighted_least_squares(const std::vector<std::vector<double>>& design,
                                           std::span<const double> y,
                                           std::span<const double> w);

}  // namespace rstar

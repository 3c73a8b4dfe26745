#include "rstar/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rstar/model.hpp"

namespace rstar {

GaussRule gauss_legendre(int order) {
  if (order < 1) throw Error(ErrorCode::BadRange, "Gauss-Legendre order must be >= 1");
  GaussRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= order; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int n = 2; n <= order; ++n) {
      const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[i] = -x;
    rule.x[order - 1 - i] = x;
    rule.w[i] = w;
    rule.w[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.x[order / 2] = 0.0;
  return rule;
}

RadialGrid build_log_gauss_grid(int n_points, double k_min, double k_max) {
  if (!(k_min > 0.0) || !(k_max > k_min) || !std::isfinite(k_max)) {
    throw Error(ErrorCode::BadRange, "log grid needs 0 < k_min < k_max");
  }
  if (n_points < 8) throw Error(ErrorCode::BadRange, "log grid needs n_points >= 8");

  const int panels = n_points / 8;
  const int order = n_points / panels;
  const int extra = n_points % panels;
  const double u0 = std::log(k_min);
  const double du = (std::log(k_max) - u0) / panels;

  RadialGrid grid;
  grid.k_min = k_min;
  grid.k_max = k_max;
  grid.nodes.reserve(n_points);
  grid.weights.reserve(n_points);
  const GaussRule regular = gauss_legendre(order);
  const GaussRule wide = gauss_legendre(order + 1);
  for (int p = 0; p < panels; ++p) {
    const GaussRule& rule = p < extra ? wide : regular;
    const double lo = u0 + p * du;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double u = lo + 0.5 * du * (rule.x[i] + 1.0);
      const double k = std::exp(u);
      grid.nodes.push_back(k);
      grid.weights.push_back(0.5 * du * rule.w[i] * k);
    }
  }
  return grid;
}

RadialGrid build_linear_gauss_grid(int panels, int order, double a, double b) {
  if (!(b > a) || a < 0.0 || panels < 1) {
    throw Error(ErrorCode::BadRange, "linear grid needs 0 <= a < b and panels >= 1");
  }
  const GaussRule rule = gauss_legendre(order);
  RadialGrid grid;
  grid.k_min = a;
  grid.k_max = b;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      grid.nodes.push_back(lo + 0.5 * h * (rule.x[i] + 1.0));
      grid.weights.push_back(0.5 * h * rule.w[i]);
    }
  }
  return grid;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::apply(std::span<const double> v) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* r = data_.data() + i * n_;
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += r[j] * v[j];
    out[i] = s;
  }
  return out;
}

LuFactorization::LuFactorization(DenseMatrix m) : lu_(std::move(m)), perm_(lu_.size()) {
  const std::size_t n = lu_.size();
  for (std::size_t i = 0; i < n; ++i) {
    perm_[i] = i;
    for (std::size_t j = 0; j < n; ++j) scale_ = std::max(scale_, std::abs(lu_(i, j)));
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) best = v, piv = i;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      parity_ = -parity_;
    }
    const double pivot = lu_(k, k);
    if (pivot == 0.0) {
      singular_ = true;
      continue;
    }
    const auto rk = lu_.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const auto ri = lu_.row(i);
      const double f = ri[k] / pivot;
      ri[k] = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
    }
  }
}

LogDeterminant LuFactorization::log_determinant() const {
  if (singular_) return {0, -std::numeric_limits<double>::infinity()};
  int sign = parity_;
  double log_abs = 0.0;
  for (std::size_t i = 0; i < lu_.size(); ++i) {
    const double d = lu_(i, i);
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  return {sign, log_abs};
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = lu_.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= r[j] * x[j];
    x[i] = s;
  }
  const double tiny = std::max(scale_, 1.0) * std::numeric_limits<double>::epsilon();
  for (std::size_t i = n; i-- > 0;) {
    const auto r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= r[j] * x[j];
    const double d = r[i] == 0.0 ? tiny : r[i];
    x[i] = s / d;
  }
  return x;
}

LogDeterminant lu_log_determinant(const DenseMatrix& m) {
  return LuFactorization(m).log_determinant();
}

double brent_root(const std::function<double(double)>& f, double x_lo, double x_hi,
                  double tol, int max_iter) {
  double a = x_lo;
  double b = x_hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorCode::NoSignChange, "bracket [" + std::to_string(x_lo) + ", " +
                                             std::to_string(x_hi) + "] has no sign change");
  }
  double c = b;
  double fc = fb;
  double d = b - a;
  double e = d;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b, b = c, c = a;
      fa = fb, fb = fc, fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw Error(ErrorCode::MaxIterations, "brent_root did not converge");
}

EigenPair largest_eigenvalue(const DenseMatrix& m, double tol, int max_iter) {
  const std::size_t n = m.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));

  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    s = std::sqrt(s);
    for (double& xi : x) xi /= s;
  };
  normalize(v);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<double> mv = m.apply(v);
    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += v[i] * mv[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (mv[i] - lambda * v[i]) * (mv[i] - lambda * v[i]);
    if (std::sqrt(res) <= tol) return {lambda, v};
    double norm = 0.0;
    for (double x : mv) norm += x * x;
    if (norm == 0.0) return {0.0, v};
    v = std::move(mv);
    normalize(v);
  }
  throw Error(ErrorCode::MaxIterations, "power iteration found no dominant eigenvalue");
}

std::vector<double> weighted_least_squares(const std::vector<std::vector<double>>& design,
                                           std::span<const double> y,
                                           std::span<const double> w) {
  const std::size_t rows = design.size();
  const std::size_t cols = rows ? design.front().size() : 0;
  if (rows < cols || cols == 0) {
    throw Error(ErrorCode::BadRange, "least squares needs at least as many rows as unknowns");
  }
  // Column-major copy of sqrt(w) * A and sqrt(w) * y, columns rescaled to unit norm.
  std::vector<std::vector<double>> a(cols, std::vector<double>(rows));
  std::vector<double> rhs(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double sw = std::sqrt(w[i]);
    for (std::size_t j = 0; j < cols; ++j) a[j][i] = sw * design[i][j];
    rhs[i] = sw * y[i];
  }
  std::vector<double> col_scale(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (double v : a[j]) s += v * v;
    col_scale[j] = s > 0.0 ? std::sqrt(s) : 1.0;
    for (double& v : a[j]) v /= col_scale[j];
  }
  std::vector<double> diag(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm += a[k][i] * a[k][i];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error(ErrorCode::BadRange, "rank-deficient least squares problem");
    const double alpha = a[k][k] > 0.0 ? -norm : norm;
    std::vector<double> v(rows, 0.0);
    for (std::size_t i = k; i < rows; ++i) v[i] = a[k][i];
    v[k] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k; i < rows; ++i) vv += v[i] * v[i];
    auto reflect = [&](std::vector<double>& x) {
      double dot = 0.0;
      for (std::size_t i = k; i < rows; ++i) dot += v[i] * x[i];
      const double f = 2.0 * dot / vv;
      for (std::size_t i = k; i < rows; ++i) x[i] -= f * v[i];
    };
    for (std::size_t j = k; j < cols; ++j) reflect(a[j]);
    reflect(rhs);
    diag[k] = a[k][k];
  }
  std::vector<double> c(cols);
  for (std::size_t k = cols; k-- > 0;) {
    double s = rhs[k];
    for (std::size_t j = k + 1; j < cols; ++j) s -= a[j][k] * c[j];
    c[k] = s / diag[k];
  }
  for (std::size_t j = 0; j < cols; ++j) c[j] /= col_scale[j];
  return c;
}

}  // namespace rstar

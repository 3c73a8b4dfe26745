#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rstar/model.hpp"
#include "rstar/numerics.hpp"

using namespace rstar;
using std::numbers::pi;

namespace {

std::string error_name(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.name();
  }
  return "none";
}

}

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
  for (int order : {1, 2, 5, 8, 16, 32}) {
    const GaussRule r = gauss_legendre(order);
    REQUIRE(r.x.size() == static_cast<std::size_t>(order));
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      double sum = 0.0;
      for (int i = 0; i < order; ++i) sum += r.w[i] * std::pow(r.x[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("log grid: Gaussian moment") {
  const RadialGrid g = build_log_gauss_grid(200, 1e-4, 20.0);
  CHECK(g.n_points() == 200);
  const double v = g.integrate([](double k) { return k * k * std::exp(-k * k); });
  CHECK(std::abs(v - std::sqrt(pi) / 4.0) <= 1e-10);
}

TEST_CASE("log grid: truncated Lorentzian against its antiderivative") {
  // int k^2/(k^2+1)^2 dk = (atan k - k/(1+k^2))/2
  auto anti = [](double k) { return 0.5 * (std::atan(k) - k / (1.0 + k * k)); };
  const RadialGrid g = build_log_gauss_grid(200, 1e-3, 1e3);
  const double v = g.integrate([](double k) { return k * k / ((k * k + 1) * (k * k + 1)); });
  CHECK(std::abs(v - (anti(1e3) - anti(1e-3))) <= 1e-12);
}

TEST_CASE("log grid structure") {
  const RadialGrid g = build_log_gauss_grid(8, 1.0, 2.0);
  CHECK(g.n_points() == 8);
  double wsum = 0.0;
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    CHECK(g.nodes[i] > 1.0);
    CHECK(g.nodes[i] < 2.0);
    if (i) CHECK(g.nodes[i] > g.nodes[i - 1]);
    CHECK(g.weights[i] > 0.0);
    wsum += g.weights[i];
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));

  const RadialGrid odd = build_log_gauss_grid(203, 1e-2, 1e2);
  CHECK(odd.n_points() == 203);
  CHECK(odd.integrate([](double k) { return 1.0 / k; }) ==
        doctest::Approx(std::log(1e4)).epsilon(1e-13));

  CHECK(error_name([] { build_log_gauss_grid(200, 0.0, 1.0); }) == "BadRange");
  CHECK(error_name([] { build_log_gauss_grid(200, 2.0, 1.0); }) == "BadRange");
  CHECK(error_name([] { build_log_gauss_grid(4, 1.0, 2.0); }) == "BadRange");
}

TEST_CASE("linear grid integrates a cubic exactly") {
  const RadialGrid g = build_linear_gauss_grid(3, 2, 0.0, 3.0);
  CHECK(g.n_points() == 6);
  CHECK(g.integrate([](double x) { return x * x * x; }) == doctest::Approx(81.0 / 4.0));
}

TEST_CASE("LU determinant and solve") {
  DenseMatrix a(2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 3;
  const LuFactorization lu(a);
  const LogDeterminant d = lu.log_determinant();
  CHECK(d.sign == 1);
  CHECK(std::exp(d.log_abs_det) == doctest::Approx(5.0).epsilon(1e-15));
  const std::vector<double> b{3.0, 5.0};
  const std::vector<double> x = lu.solve(b);
  CHECK(x[0] == doctest::Approx(0.8));
  CHECK(x[1] == doctest::Approx(1.4));

  DenseMatrix swap(2);
  swap(0, 1) = 1;
  swap(1, 0) = 1;
  const LogDeterminant ds = lu_log_determinant(swap);
  CHECK(ds.sign == -1);
  CHECK(ds.log_abs_det == doctest::Approx(0.0));

  DenseMatrix singular(2, 1.0);
  CHECK(lu_log_determinant(singular).sign == 0);
  CHECK(std::isinf(lu_log_determinant(singular).log_abs_det));
}

TEST_CASE("LU determinant of Hilbert matrix") {
  // det H_4 = 1/6048000
  DenseMatrix h(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = 1.0 / (i + j + 1);
  const LogDeterminant d = lu_log_determinant(h);
  CHECK(d.sign == 1);
  CHECK(d.log_abs_det == doctest::Approx(-std::log(6048000.0)).epsilon(1e-12));
}

TEST_CASE("log determinant equals the sum of log eigenvalues") {
  // Q diag(l) Q^T with Q a Householder reflection.
  const std::vector<double> lambda{0.5, 2.0, 3.0, 7.0, 11.0};
  const std::vector<double> v{1.0, -2.0, 0.5, 3.0, 1.5};
  double vv = 0.0;
  for (double x : v) vv += x * x;
  const std::size_t n = lambda.size();
  DenseMatrix q(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = (i == j) - 2.0 * v[i] * v[j] / vv;
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) m(i, j) += q(i, k) * lambda[k] * q(j, k);
  double expected = 0.0;
  for (double l : lambda) expected += std::log(l);
  const LogDeterminant d = lu_log_determinant(m);
  CHECK(d.sign == 1);
  CHECK(d.log_abs_det == doctest::Approx(expected).epsilon(1e-13));

  const EigenPair top = largest_eigenvalue(m, 1e-12);
  CHECK(top.value == doctest::Approx(11.0).epsilon(1e-10));
}

TEST_CASE("power iteration") {
  DenseMatrix d(3);
  d(0, 0) = 1;
  d(1, 1) = 3;
  d(2, 2) = 2;
  const EigenPair e = largest_eigenvalue(d, 1e-12);
  CHECK(e.value == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(std::abs(e.vector[1]) > 0.999 * (std::abs(e.vector[0]) + std::abs(e.vector[1]) +
                                         std::abs(e.vector[2])));

  DenseMatrix s(2);
  s(0, 0) = 2;
  s(0, 1) = 1;
  s(1, 0) = 1;
  s(1, 1) = 2;
  CHECK(largest_eigenvalue(s, 1e-12).value == doctest::Approx(3.0).epsilon(1e-10));

  DenseMatrix rot(2);
  rot(0, 1) = -1;
  rot(1, 0) = 1;
  CHECK(error_name([&] { largest_eigenvalue(rot, 1e-12, 500); }) == "MaxIterations");
}

TEST_CASE("brent_root") {
  const double r = brent_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0, 1e-15);
  CHECK(r == doctest::Approx(0.7390851332151607).epsilon(1e-15));
  CHECK(brent_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-15) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(error_name([] { brent_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12); }) ==
        "NoSignChange");
}

TEST_CASE("weighted least squares recovers an exact polynomial") {
  std::vector<std::vector<double>> design;
  std::vector<double> y;
  std::vector<double> w;
  for (int i = 0; i < 40; ++i) {
    const double k = 10.0 * std::pow(100.0, i / 39.0);
    design.push_back({1.0, 1.0 / (k * k), 1.0 / std::pow(k, 4)});
    y.push_back(4.9 - 0.97 / (k * k) + 43.0 / std::pow(k, 4));
    w.push_back(1.0 + 0.1 * (i % 3));
  }
  const std::vector<double> c = weighted_least_squares(design, y, w);
  CHECK(c[0] == doctest::Approx(4.9).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(-0.97).epsilon(1e-9));
  CHECK(c[2] == doctest::Approx(43.0).epsilon(1e-6));
}

TEST_CASE("property: LU solve residual on random well-conditioned systems") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 12;
    DenseMatrix m(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
      m(i, i) += static_cast<double>(n);
      b[i] = u(rng);
    }
    const std::vector<double> x = LuFactorization(m).solve(b);
    const std::vector<double> mx = m.apply(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(mx[i] - b[i]) <= 1e-12);
  }
}

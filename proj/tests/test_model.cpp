#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <random>
#include <string>

#include "rstar/serialize.hpp"
#include "rstar/threebody.hpp"
#include "rstar/twobody.hpp"

using namespace rstar;
using nlohmann::json;

TEST_CASE("validate_params accepts admissible input unchanged") {
  const ResonanceParams p{0.3, 2.0, 0.1};
  CHECK(validate_params(p, SolverKind::TwoBody) == p);
  CHECK(validate_params(p, SolverKind::Regularized) == p);
  CHECK(validate_params(p, SolverKind::ThreeBody) == p);
  CHECK(validate_params({-1.0, 0.0, 0.0}, SolverKind::TwoBody).r_star == 0.0);
}

TEST_CASE("validate_params rejects bad input with typed errors") {
  auto code_of = [](const ResonanceParams& p, SolverKind kind) {
    try {
      validate_params(p, kind);
    } catch (const Error& e) {
      return std::string(e.name());
    }
    return std::string("none");
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(code_of({nan, 1.0, 0.0}, SolverKind::TwoBody) == "NonFinite");
  CHECK(code_of({0.0, inf, 0.0}, SolverKind::TwoBody) == "NonFinite");
  CHECK(code_of({0.0, -1.0, 0.0}, SolverKind::TwoBody) == "NegativeRange");
  CHECK(code_of({0.0, 1.0, -0.1}, SolverKind::TwoBody) == "NegativeRange");
  CHECK(code_of({0.0, 1.0, 0.0}, SolverKind::Regularized) == "EpsilonZero");
  CHECK(code_of({0.0, 0.0, 0.1}, SolverKind::Regularized) == "RStarRequired");
  CHECK(code_of({0.0, 0.0, 0.0}, SolverKind::ThreeBody) == "RStarRequired");
}

TEST_CASE("error message starts with the stable code name") {
  const Error e(ErrorCode::WindowTooNarrow, "detail");
  CHECK(std::string(e.what()) == "WindowTooNarrow: detail");
  CHECK(e.code() == ErrorCode::WindowTooNarrow);
}

TEST_CASE("format_double round-trips every double") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 20000) {
    const std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    const std::string s = format_double(x);
    const double y = std::strtod(s.c_str(), nullptr);
    REQUIRE(std::memcmp(&x, &y, sizeof x) == 0);
    ++checked;
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("json round trip of records is exact") {
  const DimerSolution d = dimer_observables({0.7, 1.3, 0.0});
  CHECK(json::parse(dump_finite(json(d))).get<DimerSolution>() == d);

  const TrimerLevel l{2, 0.1234567890123456789, -0.0152415787532388};
  CHECK(json::parse(dump_finite(json(l))).get<TrimerLevel>() == l);

  StmSolution s;
  s.params = {0.0, 1.0, 0.0};
  s.level = l;
  s.d_values = {1.0 / 3.0, 2.0 / 7.0, 1e-300, 6.02214076e23};
  s.n_mol = 0.19508083365930795;
  s.n_open = 1.0 - s.n_mol;
  s.k_mol = 0.008335976456482787;
  s.residual = 3.3e-13;
  const StmSolution t = json::parse(dump_finite(json(s))).get<StmSolution>();
  CHECK(t.params == s.params);
  CHECK(t.level == s.level);
  CHECK(t.d_values == s.d_values);
  CHECK(t.n_mol == s.n_mol);
  CHECK(t.n_open == s.n_open);
  CHECK(t.k_mol == s.k_mol);
  CHECK(t.residual == s.residual);

  MomentumDistribution m;
  m.k_samples = {0.1, 1.0, 10.0};
  m.k_weights = {0.05, 0.5, 5.0};
  m.values = {12.5, 0.25, 4.9e-4};
  m.c4_fit = 4.902916103384144;
  m.c6_fit = -0.9737202123188872;
  m.fit_window = {3.0, 1000.0};
  m.norm_integral = 2.609864824629257;
  m.sum_rule_residual = 2.6e-5;
  const MomentumDistribution n = json::parse(dump_finite(json(m))).get<MomentumDistribution>();
  CHECK(n.k_samples == m.k_samples);
  CHECK(n.values == m.values);
  CHECK(n.c4_fit == m.c4_fit);
  CHECK(n.c6_fit == m.c6_fit);
  CHECK(n.fit_window == m.fit_window);
}

TEST_CASE("dump_finite refuses NaN") {
  json j = {{"a", 1.0}, {"b", {1.0, std::numeric_limits<double>::quiet_NaN()}}};
  CHECK_THROWS_AS(dump_finite(j), Error);
}

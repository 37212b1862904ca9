#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "tsig/coefficients.hpp"

using namespace tsig;

namespace {
constexpr double kL = pi;  // screen length used throughout
}

TEST_CASE("constant coefficients are admissible and report their bounds") {
  const auto c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.0);
  const auto r = c.validate(kL);
  CHECK(r.inf_abs_alpha == doctest::Approx(1.0));
  CHECK(r.inf_mu == doctest::Approx(1.0));
  CHECK(r.sup_beta_im == doctest::Approx(0.0));
  CHECK(!r.screen_absent);
}

TEST_CASE("validate rejects each violated bound by name") {
  auto c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.0);
  c.mu = PiecewiseField{{{0.0, kL / 2, 1.0, 1.0}, {kL / 2, kL, 0.0, 0.0}}};
  CHECK_THROWS_WITH_AS(c.validate(kL), doctest::Contains("inf mu"), admissibility_error);

  c = SurfaceCoefficients::constant(kL, 0.0, 1.0, 1.0, 0.0);
  CHECK_THROWS_WITH_AS(c.validate(kL), doctest::Contains("alpha"), admissibility_error);

  c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.5);  // Im beta > 0
  CHECK_THROWS_WITH_AS(c.validate(kL), doctest::Contains("Im beta"), admissibility_error);
}

TEST_CASE("coverage check: gaps, overlaps, wrong total length") {
  auto c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.0);
  c.alpha = PiecewiseField{{{0.0, 1.0, 1.0, 1.0}, {1.5, kL, 1.0, 1.0}}};  // gap
  CHECK_THROWS_AS(c.validate(kL), admissibility_error);
  c.alpha = PiecewiseField{{{0.0, kL - 0.3, 1.0, 1.0}}};  // short
  CHECK_THROWS_AS(c.validate(kL), admissibility_error);
}

TEST_CASE("eval: left-limit convention at breakpoints") {
  SurfaceCoefficients c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.0);
  c.mu = PiecewiseField{{{0.0, kL / 2, 1.0, 1.0}, {kL / 2, kL, 2.0, 2.0}}};
  CHECK(c.eval(kL / 2, 1.0).mu == doctest::Approx(1.0));
  CHECK(c.eval(kL / 2 + 1e-6, 1.0).mu == doctest::Approx(2.0));
  CHECK(c.eval(0.0, 1.0).mu == doctest::Approx(1.0));
  CHECK_THROWS_AS(c.mu.eval(-0.1), std::domain_error);
  CHECK_THROWS_AS(c.mu.eval(kL + 0.1), std::domain_error);
}

TEST_CASE("eval: beta combines as beta_re + (i/k) beta_im") {
  const auto c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 3.0, -1.0);
  const auto v = c.eval(1.0, 2.0);
  CHECK(v.beta.real() == doctest::Approx(3.0));
  CHECK(v.beta.imag() == doctest::Approx(-0.5));
}

TEST_CASE("constant fields evaluate constant at many sample points") {
  const auto c = SurfaceCoefficients::constant(kL, 0.7, 1.3, 2.0, 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double s = kL * i / 100.0;
    const auto v = c.eval(s, 1.0);
    CHECK(v.alpha == doctest::Approx(0.7));
    CHECK(v.mu == doctest::Approx(1.3));
  }
}

TEST_CASE("validate bounds agree with brute-force sampling") {
  SurfaceCoefficients c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.0);
  c.mu = PiecewiseField{{{0.0, 1.0, 2.0, 0.5}, {1.0, kL, 0.5, 3.0}}};  // linear pieces
  c.beta_im = PiecewiseField{{{0.0, kL, -2.0, -0.25}}};
  const auto r = c.validate(kL);
  double mu_min = 1e300, bi_max = -1e300;
  std::vector<double> samples;
  for (int i = 0; i <= 10000; ++i) samples.push_back(kL * i / 10000.0);
  // a uniform grid misses piece breakpoints, where linear extrema live
  for (const auto& p : c.mu.pieces) samples.insert(samples.end(), {p.s0, p.s1});
  for (double s : samples) {
    mu_min = std::min(mu_min, c.mu.eval(s));
    bi_max = std::max(bi_max, c.beta_im.eval(s));
  }
  CHECK(r.inf_mu == doctest::Approx(mu_min).epsilon(1e-9));
  CHECK(r.sup_beta_im == doctest::Approx(bi_max).epsilon(1e-9));
}

TEST_CASE("patched: damage factor applies exactly on the patch") {
  const auto c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 3.0, 0.0);
  const auto d = c.beta_re.patched(kL / 3, 2 * kL / 3, 1.25);
  CHECK(d.eval(kL / 6) == doctest::Approx(3.0));
  CHECK(d.eval(kL / 2) == doctest::Approx(3.75));
  CHECK(d.eval(5 * kL / 6) == doctest::Approx(3.0));
  // patch endpoints follow the left-limit convention
  CHECK(d.eval(kL / 3) == doctest::Approx(3.0));
  CHECK(d.eval(2 * kL / 3) == doctest::Approx(3.75));
  // total coverage unchanged
  SurfaceCoefficients cd = c;
  cd.beta_re = d;
  CHECK_NOTHROW(cd.validate(kL));
}

TEST_CASE("patched preserves linear profiles outside and scales inside") {
  PiecewiseField f{{{0.0, kL, 1.0, 2.0}}};
  const auto g = f.patched(1.0, 2.0, 2.0);
  for (double s : {0.3, 0.9, 2.2, 3.0})
    CHECK(g.eval(s) == doctest::Approx(f.eval(s)).epsilon(1e-12));
  for (double s : {1.2, 1.7, 2.0}) CHECK(g.eval(s) == doctest::Approx(2.0 * f.eval(s)).epsilon(1e-12));
}

TEST_CASE("min_abs detects sign changes inside a linear piece") {
  PiecewiseField f{{{0.0, kL, -1.0, 2.0}}};
  CHECK(f.min_abs() == 0.0);
  PiecewiseField g{{{0.0, kL, 0.5, 2.0}}};
  CHECK(g.min_abs() == doctest::Approx(0.5));
}

TEST_CASE("JSON round-trip is exact for piecewise fields") {
  SurfaceCoefficients c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 3.0, 0.0);
  c.beta_re = c.beta_re.patched(kL / 3, 2 * kL / 3, 1.25);
  c.mu = PiecewiseField{{{0.0, 1.0, 1.0, 2.0}, {1.0, kL, 2.0, 2.0}}};
  const auto b = SurfaceCoefficients::from_json(c.to_json());
  CHECK(b == c);
}

TEST_CASE("infinite alpha (sound-hard pieces) survives serialization") {
  SurfaceCoefficients c = SurfaceCoefficients::constant(kL, 1.0, 1.0, 1.0, 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  c.alpha = PiecewiseField{{{0.0, kL / 2, inf, inf}, {kL / 2, kL, 1.0, 1.0}}};
  const auto b = SurfaceCoefficients::from_json(c.to_json());
  CHECK(b == c);
  CHECK(std::isinf(b.alpha.eval(0.5)));
}

TEST_CASE("no-screen sentinel") {
  const auto c = SurfaceCoefficients::no_screen();
  CHECK(c.validate(kL).screen_absent);
  const auto v = c.eval(1.0, 2.0);
  CHECK(v.alpha == 0.0);
  CHECK(v.mu == 0.0);
  CHECK(v.beta == cplx(0.0, 0.0));
  CHECK(SurfaceCoefficients::from_json(c.to_json()).absent);
}

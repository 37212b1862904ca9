#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "tsig/special.hpp"

using namespace tsig;

namespace {

// Independent power-series oracle: J_n(x) = sum_m (-1)^m (x/2)^{n+2m} / (m! (n+m)!),
// converges fast for the moderate arguments used here.
double series_j(int n, double x) {
  double term = std::pow(0.5 * x, n);
  for (int i = 2; i <= n; ++i) term /= i;
  double sum = term;
  for (int m = 1; m < 60; ++m) {
    term *= -0.25 * x * x / (m * (n + m));
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("bessel_j matches the power series") {
  for (int n = 0; n <= 5; ++n)
    for (double x : {0.3, 1.0, 2.0, 4.0})
      CHECK(bessel_j(n, x) == doctest::Approx(series_j(n, x)).epsilon(1e-12));
}

TEST_CASE("negative order parity J_{-n} = (-1)^n J_n") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(bessel_j(-n, 1.7) == doctest::Approx((n % 2 ? -1.0 : 1.0) * bessel_j(n, 1.7)));
    CHECK(bessel_y(-n, 1.7) == doctest::Approx((n % 2 ? -1.0 : 1.0) * bessel_y(n, 1.7)));
  }
}

TEST_CASE("Wronskian J_{n+1} Y_n - J_n Y_{n+1} = 2/(pi x)") {
  for (int n = 0; n <= 6; ++n)
    for (double x : {0.5, 1.0, 2.5, 5.0}) {
      const double w = bessel_j(n + 1, x) * bessel_y(n, x) - bessel_j(n, x) * bessel_y(n + 1, x);
      CHECK(w == doctest::Approx(2.0 / (pi * x)).epsilon(1e-12));
    }
}

TEST_CASE("derivatives agree with central differences") {
  const double e = 1e-6;
  for (int n = 0; n <= 4; ++n)
    for (double x : {0.8, 2.0, 3.5}) {
      CHECK(bessel_j_deriv(n, x) ==
            doctest::Approx((bessel_j(n, x + e) - bessel_j(n, x - e)) / (2 * e)).epsilon(1e-7));
      const cplx hd = (hankel1(n, x + e) - hankel1(n, x - e)) / (2 * e);
      CHECK(std::abs(hankel1_deriv(n, x) - hd) < 1e-6 * std::abs(hd));
    }
}

TEST_CASE("dtn_symbol equals the radial log-derivative of H_n(kr) at r=R") {
  const double k = 1.3, R = 2.0, e = 1e-6;
  for (int n = 0; n <= 8; ++n) {
    const cplx fd = (hankel1(n, k * (R + e)) - hankel1(n, k * (R - e))) / (2 * e);
    const cplx want = fd / hankel1(n, k * R);
    CHECK(std::abs(dtn_symbol(k, R, n) - want) < 1e-5 * std::abs(want));
  }
}

TEST_CASE("dtn_symbol is symmetric in n -> -n") {
  for (int n = 1; n <= 12; ++n)
    CHECK(std::abs(dtn_symbol(1.0, 2.0, n) - dtn_symbol(1.0, 2.0, -n)) < 1e-14);
}

TEST_CASE("dtn_symbol large-order asymptote -|n|/R") {
  const cplx v = dtn_symbol(1.0, 2.0, 20);  // |n| = 10 kR
  CHECK(std::abs(v / cplx(-20.0 / 2.0) - 1.0) < 0.02);
}

TEST_CASE("dtn_symbol saturates on Hankel overflow with the asymptotic value") {
  const auto ok = dtn_symbol_checked(1.0, 2.0, 150);
  CHECK(!ok.saturated);
  const auto sat = dtn_symbol_checked(1.0, 2.0, 400);
  CHECK(sat.saturated);
  CHECK(sat.value == cplx(-400.0 / 2.0, 0.0));
}

TEST_CASE("dtn_symbol rejects nonpositive k or R") {
  CHECK_THROWS_AS(dtn_symbol(0.0, 2.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(dtn_symbol(1.0, -1.0, 1), std::invalid_argument);
}

TEST_CASE("ff_constant matches the large-r limit of the fundamental solution") {
  // Phi(x,0) = (i/4) H_0(k r) ~ C2 e^{ikr}/sqrt(r); the defect is O(1/r).
  const double k = 2.0;
  auto rel = [&](double r) {
    const cplx phi = cplx(0.0, 0.25) * hankel1(0, k * r);
    const cplx asym = ff_constant(k) * std::polar(1.0, k * r) / std::sqrt(r);
    return std::abs(phi - asym) / std::abs(asym);
  };
  CHECK(rel(1e3) < 1e-4);
  CHECK(rel(1e3) < 0.2 * rel(1e2));  // first-order decay of the remainder
}

TEST_CASE("scattering_constant modulus and phase") {
  const cplx c2 = scattering_constant(2.0);
  CHECK(std::abs(c2) == doctest::Approx(std::sqrt(2.0 / (2.0 * pi))).epsilon(1e-14));
  CHECK(std::arg(c2) == doctest::Approx(pi / 4.0).epsilon(1e-14));
}

TEST_CASE("soft disk series: unimodular partial-wave S-matrix entries") {
  // 1 - 2 J_n/H_n = -conj(H_n)/H_n has modulus 1: the series is lossless.
  for (int n = 0; n <= 10; ++n)
    CHECK(std::abs(1.0 - 2.0 * bessel_j(n, 2.0) / hankel1(n, 2.0)) ==
          doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("soft disk series: converged and rotation invariant") {
  const double k = 2.0, a = 1.0;
  CHECK(std::abs(soft_disk_far_field(k, a, 0.7, 0.2, 40) -
                 soft_disk_far_field(k, a, 0.7, 0.2, 80)) < 1e-12);
  // depends on theta - theta_d only
  CHECK(std::abs(soft_disk_far_field(k, a, 0.7, 0.2) - soft_disk_far_field(k, a, 1.2, 0.7)) <
        1e-12);
}

TEST_CASE("j0_first_zero") {
  CHECK(j0_first_zero() == doctest::Approx(2.404825557695773).epsilon(1e-12));
  CHECK(std::abs(bessel_j(0, j0_first_zero())) < 1e-12);
}

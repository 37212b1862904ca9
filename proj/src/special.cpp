#include "tsig/special.hpp"

#include <cmath>
#include <cstdio>

namespace tsig {

std::string to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double bessel_j(int n, double x) {
  const int m = std::abs(n);
  double v = std::cyl_bessel_j(static_cast<double>(m), x);
  return (n < 0 && (m & 1)) ? -v : v;
}

double bessel_y(int n, double x) {
  const int m = std::abs(n);
  double v = std::cyl_neumann(static_cast<double>(m), x);
  return (n < 0 && (m & 1)) ? -v : v;
}

double bessel_j_deriv(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  return bessel_j(n - 1, x) - (n / x) * bessel_j(n, x);
}

cplx hankel1(int n, double x) { return {bessel_j(n, x), bessel_y(n, x)}; }

cplx hankel1_deriv(int n, double x) {
  if (n == 0) return -hankel1(1, x);
  return hankel1(n - 1, x) - (static_cast<double>(n) / x) * hankel1(n, x);
}

DtnValue dtn_symbol_checked(double k, double R, int n) {
  if (k <= 0 || R <= 0) throw std::invalid_argument("dtn_symbol: k and R must be positive");
  const int m = std::abs(n);
  const double x = k * R;
  const cplx h = hankel1(m, x);
  const cplx hp = hankel1_deriv(m, x);
  if (!std::isfinite(h.real()) || !std::isfinite(h.imag()) ||
      !std::isfinite(hp.real()) || !std::isfinite(hp.imag())) {
    return {cplx(-static_cast<double>(m) / R, 0.0), true};
  }
  return {k * hp / h, false};
}

cplx dtn_symbol(double k, double R, int n) { return dtn_symbol_checked(k, R, n).value; }

cplx ff_constant(double k) {
  // (i/4) sqrt(2/(pi k)) e^{-i pi/4} = e^{i pi/4} / sqrt(8 pi k)
  return std::polar(1.0 / std::sqrt(8.0 * pi * k), pi / 4.0);
}

cplx scattering_constant(double k) { return std::polar(std::sqrt(k / (2.0 * pi)), pi / 4.0); }

cplx soft_disk_far_field(double k, double a, double theta, double theta_d, int n_terms) {
  // u_inf = -sqrt(2/(pi k)) e^{-i pi/4} sum_n (J_n(ka)/H_n(ka)) e^{in(theta - theta_d)}
  const cplx pref = -std::sqrt(2.0 / (pi * k)) * std::polar(1.0, -pi / 4.0);
  cplx sum = bessel_j(0, k * a) / hankel1(0, k * a);
  for (int n = 1; n <= n_terms; ++n) {
    const cplx ratio = bessel_j(n, k * a) / hankel1(n, k * a);
    sum += ratio * 2.0 * std::cos(n * (theta - theta_d));
  }
  return pref * sum;
}

double j0_first_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j(0, lo) * bessel_j(0, mid) <= 0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace tsig

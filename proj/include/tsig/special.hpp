#pragma once

#include "tsig/common.hpp"

namespace tsig {

// Bessel functions of integer order for real positive argument.
double bessel_j(int n, double x);
double bessel_y(int n, double x);
double bessel_j_deriv(int n, double x);

// Hankel function of the first kind, H_n^{(1)}(x) = J_n(x) + i Y_n(x).
cplx hankel1(int n, double x);
cplx hankel1_deriv(int n, double x);

struct DtnValue {
  cplx value;
  bool saturated = false;  // Hankel evaluation overflowed; asymptotic -|n|/R used
};

// Exact Dirichlet-to-Neumann eigenvalue for Fourier mode e^{in theta} on the
// circle |x| = R:  k H_n^{(1)'}(kR) / H_n^{(1)}(kR).  Symmetric in n -> -n.
DtnValue dtn_symbol_checked(double k, double R, int n);
cplx dtn_symbol(double k, double R, int n);

// Far-field normalization constant for 2D: the far field of the fundamental
// solution Phi(.,z) = (i/4) H_0^{(1)}(k|x-z|) under the convention
// u^s ~ e^{ikr}/sqrt(r) u_inf is  ff_constant(k) * e^{-ik xhat.z}.
cplx ff_constant(double k);

// Energy-conservation constant: S = I + scattering_constant(k) * F is unitary
// for a lossless scatterer, with F the continuous far-field operator.
cplx scattering_constant(double k);

// Far field of the sound-soft disk of radius a (Mie-type series), incident
// plane wave from angle theta_d, observed at angle theta.
cplx soft_disk_far_field(double k, double a, double theta, double theta_d, int n_terms = 40);

// First positive zero of J_0 (via root bracketing + bisection on bessel_j).
double j0_first_zero();

}  // namespace tsig

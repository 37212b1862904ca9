#pragma once

#include <string>
#include <vector>

#include "tsig/common.hpp"

namespace tsig {

// Piecewise-linear scalar field on the arc parameter s.  Each piece carries
// its own endpoint values, so jumps across breakpoints are allowed.  Values
// at a breakpoint follow the left-limit convention.
struct PiecewiseField {
  struct Piece {
    double s0 = 0, s1 = 0;
    double v0 = 0, v1 = 0;  // value at s0 resp. s1 (constant piece: v0 == v1)
    bool operator==(const Piece&) const = default;
  };
  std::vector<Piece> pieces;

  static PiecewiseField constant(double length, double value);

  double eval(double s) const;
  double min_value() const;  // over piece endpoints (exact for linear pieces)
  double max_value() const;
  double min_abs() const;  // 0 when a linear piece changes sign

  // Domain covered by the pieces must be contiguous [0, length].
  void check_cover(double length, const char* name) const;

  // Copy with values multiplied by `factor` on [s0, s1] (pieces split as
  // needed) — the "damage patch" edit.
  PiecewiseField patched(double s0, double s1, double factor) const;

  bool operator==(const PiecewiseField&) const = default;
};

struct AdmissibilityReport {
  double inf_abs_alpha = 0;
  double inf_mu = 0;
  double sup_beta_im = 0;  // beta = beta_re + (i/k) beta_im, need beta_im <= 0
  bool screen_absent = false;
};

struct CoeffValues {
  double alpha = 0, mu = 0;
  cplx beta;
};

// alpha, mu and the two parts of beta = beta_re + (i/k) beta_im on Gamma.
// alpha may be +infinity on pieces (sound-hard limit, 1/alpha = 0).
struct SurfaceCoefficients {
  PiecewiseField alpha, mu, beta_re, beta_im;
  bool absent = false;  // degenerate "no screen" limit: [u] = 0, no Gamma terms

  static SurfaceCoefficients constant(double length, double a, double m, double b_re,
                                      double b_im = 0.0);
  // Degenerate admissible limit alpha -> 0, mu = beta = 0: double nodes tied,
  // all Gamma terms dropped, hence zero scattering.
  static SurfaceCoefficients no_screen();

  AdmissibilityReport validate(double gamma_length) const;
  CoeffValues eval(double s, double k) const;

  std::string to_json() const;
  static SurfaceCoefficients from_json(const std::string& text);

  bool operator==(const SurfaceCoefficients&) const = default;
};

}  // namespace tsig

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsig/forward.hpp"
#include "tsig/mesh.hpp"

namespace tsig {

// C2-normalized far field of the point source at z (interior of D):
// ff_constant(k) * exp(-i k xhat.z).
std::vector<cplx> point_source_far_field(double k, const Vec2& z,
                                         const std::vector<double>& obs, double disk_radius);

// F - F^(lambda), entry-wise; direction lists and k must match.
FarFieldMatrix modified_operator(const FarFieldMatrix& F, const FarFieldMatrix& Fl);

struct TikhonovResult {
  Eigen::VectorXcd g;
  double g_norm = 0;           // sqrt(w) * |g|_2, the discrete L2 norm on the circle
  double normal_residual = 0;  // relative residual of the normal equations
};

// Solves (A* A + eps I) g = A* rhs.  A must already include the quadrature
// weighting of the discrete direction integral.
TikhonovResult tikhonov_solve(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& rhs, double eps,
                              double w = 1.0);

struct DetectionOptions {
  double delta_known = -1;         // >= 0 enables the eps = delta*|Fcal| rule
  double eps_floor_factor = 1e-5;  // default: eps = factor * |Fcal|
  int threads = 1;                 // independent lambda tasks
  ForwardOptions fwd;
  // Override for obtaining F^(lambda); lets the orchestrator plug in a disk
  // cache.  Must be safe to call from several threads at once.
  std::function<FarFieldMatrix(cplx)> aux_provider;
};

struct IndicatorCurve {
  std::vector<cplx> lambdas;
  std::vector<double> values;  // median over z of |g_z|
  std::vector<double> eps;
  std::vector<char> ok;        // failed lambda points recorded missing
  std::vector<Vec2> z;
  double delta = 0;

  void save_csv(const std::string& path) const;
  static IndicatorCurve load_csv(const std::string& path);
};

std::vector<Vec2> default_sampling_points(double disk_radius, int count = 8);

IndicatorCurve indicator_curve(const FarFieldMatrix& F_data, const std::vector<cplx>& grid,
                               const std::vector<Vec2>& zs, const CrackMesh& mesh, double k,
                               DetectionOptions opt = {});

struct Peak {
  double lambda = 0;
  double prominence = 0;  // peak value relative to the median curve level
  bool unresolved = false;
  int index = -1;
};

struct DetectionReport {
  std::vector<Peak> peaks;
  double grid_step = 0;
  std::vector<double> matched_reference;    // reference eigenvalues hit by a peak
  std::vector<double> unmatched_reference;  // reference eigenvalues with no peak nearby

  std::string to_json() const;
};

DetectionReport detect_peaks(const IndicatorCurve& curve, double prominence,
                             const std::vector<double>* reference = nullptr);

// Multiplicative measurement noise F_ij (1 + delta xi_ij), xi with independent
// uniform real/imag parts in [-1, 1]; deterministic for a fixed seed.
FarFieldMatrix add_noise(const FarFieldMatrix& F, double delta, std::uint64_t seed);

}  // namespace tsig

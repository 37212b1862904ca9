#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tsig/coefficients.hpp"
#include "tsig/fem.hpp"
#include "tsig/mesh.hpp"

namespace tsig {

// Discrete forms of the interior eigenproblem on V0(D):
//   M h = -lambda K h,   M = stiffness - k^2 mass + Gamma impedance terms,
// with K the boundary mass on dD\Gamma.  A null coefficient set selects the
// degenerate Gamma-empty (full Robin circle, Steklov-type) configuration.
struct EigenForms {
  const CrackMesh* mesh = nullptr;
  const SurfaceCoefficients* coeffs = nullptr;
  double k = 0;
  fem::SpMat M;            // full-dof matrix (D-side support)
  fem::SpMat K;            // full-dof boundary mass on dD\Gamma
  fem::DofMap map;         // free dofs of V0(D)
  std::vector<int> bdofs;  // full-dof ids on dD\Gamma
};

EigenForms assemble_eigen_forms(const CrackMesh& mesh, const SurfaceCoefficients* coeffs,
                                double k);

struct EigenPair {
  cplx lambda;
  double residual = 0;    // ||(M + lambda K) h|| / ||h|| over free dofs
  Eigen::VectorXcd h;     // eigenfunction, full dof vector
};

struct EigenSpectrum {
  std::vector<EigenPair> pairs;  // sorted by Re(lambda) descending
  double tau = 0;                // shift that produced the factorization
  double h = 0;                  // mesh resolution
};

struct EigenOptions {
  double tau = 1.0;
  double tau_step = 0.5;
  int max_retries = 5;
  int n_eigs = 64;
  double lambda_max = 20.0;       // report window [-lambda_max, lambda_max]
  double residual_keep = 1e-7;    // drop unconverged ghost pairs
  bool keep_functions = true;
};

// The paper's compact reformulation: R maps Robin data on dD\Gamma to the
// trace of the (M + tau K)-solution; eigenvalues rho give lambda = tau - 1/rho.
// Throws solver_error when M + tau K is numerically singular.
Eigen::MatrixXcd r_route_matrix(const EigenForms& forms, double tau);

EigenSpectrum solve_spectrum(const EigenForms& forms, EigenOptions opt = {});

// Dense QZ on the pencil (M, -K): independent cross-check route for coarse
// meshes (real arithmetic, so intended for real-beta scenarios).
std::vector<cplx> solve_spectrum_dense(const EigenForms& forms, double lambda_max);

// Relative defect of the Lemma-4.1 energy identity
//   (k^2/4) int_Gamma Im(beta) |h|^2 = -Im(lambda) int_{dD\Gamma} |h|^2.
double energy_identity_residual(const EigenForms& forms, const EigenPair& pair);

// Smallest eigenvalue of -Delta u = eta u with the quarter-weighted mu term on
// Gamma, Robin weight tau on dD\Gamma, u = 0 at the tips.  Null mu selects the
// Gamma-empty configuration (pure Robin circle).
double eta1(const CrackMesh& mesh, const PiecewiseField* mu, double tau);

// First Dirichlet eigenvalue of D.
double dirichlet_eta0(const CrackMesh& mesh);

struct RayleighReport {
  bool applicable = false;
  double quotient = 0;
  double lambda1 = 0;
  double defect = 0;
  std::string note;
};

// Evaluates the sup-characterization of the leading eigenvalue at its own
// extremizer; guarded by inf_Gamma(k^2 beta + 4/alpha) > 0 and k^2 < eta_1.
RayleighReport rayleigh_lambda1(const EigenSpectrum& spec, const EigenForms& forms,
                                double tau_for_eta1 = 1.0);

std::string spectrum_to_json(const EigenSpectrum& spec, const std::string& scenario_hash);
EigenSpectrum spectrum_from_json(const std::string& text);  // values/residuals only

}  // namespace tsig

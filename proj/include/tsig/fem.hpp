#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "tsig/coefficients.hpp"
#include "tsig/mesh.hpp"

namespace tsig::fem {

using SpMat = Eigen::SparseMatrix<cplx>;
using Trip = Eigen::Triplet<cplx>;
using VecXc = Eigen::VectorXcd;

// P1 volume forms over triangles of the given region (-1 = all).
void add_stiffness(const CrackMesh& m, int region, cplx scale, std::vector<Trip>& out);
void add_mass(const CrackMesh& m, int region, cplx scale, std::vector<Trip>& out);

// One quadrature point on a paired Gamma edge.  Shape functions are shared by
// the plus and minus traces (the edges are geometrically coincident).
struct GammaQuad {
  double s = 0;              // arc parameter
  double w = 0;              // quadrature weight, jacobian included
  int ap = -1, bp = -1;      // plus-side endpoint dofs
  int am = -1, bm = -1;      // minus-side endpoint dofs
  double Na = 0, Nb = 0;     // P1 values at the point
  double dNa = 0, dNb = 0;   // d/ds
};

// Two-point Gauss quadrature on every Gamma edge pair, each edge split at the
// supplied arc-parameter breakpoints so piecewise coefficients are integrated
// exactly per piece.
void for_each_gamma_qp(const CrackMesh& m, const std::vector<double>& breaks,
                       const std::function<void(const GammaQuad&)>& fn);

// Arc-parameter breakpoints of all four coefficient fields.
std::vector<double> coeff_breaks(const SurfaceCoefficients& c);

// Screen coupling terms of the scattering form:
//   (1/alpha)[u][v] + mu d_s<u> d_s<v> + k^2 beta <u><v>   integrated over Gamma.
void add_screen_terms(const CrackMesh& m, const SurfaceCoefficients& c, double k,
                      std::vector<Trip>& out);

// Single-trace Gamma form on the minus-side dofs: integrand w(s) u v, or
// w(s) u' v' when deriv is set.
void add_gamma_trace(const CrackMesh& m, const std::vector<double>& breaks,
                     const std::function<cplx(double)>& w, bool deriv, std::vector<Trip>& out);

// Consistent P1 boundary mass over edges carrying any of the given tags.
void add_boundary_mass(const CrackMesh& m, const std::vector<EdgeTag>& tags, cplx scale,
                       std::vector<Trip>& out);

// Truncated exact DtN on |x| = outer_radius, added with the given sign
// (the scattering form subtracts it, so sign = -1 there).  Sets *saturated
// when any modal symbol had to fall back to its large-order asymptote.
void add_dtn(const CrackMesh& m, double k, int n_modes, double sign, std::vector<Trip>& out,
             bool* saturated = nullptr);

// Dofs appearing on edges with any of the given tags.
std::vector<int> boundary_dofs(const CrackMesh& m, const std::vector<EdgeTag>& tags);

SpMat assemble(int n, const std::vector<Trip>& trips);

// Elimination of essential dofs.  Constrained dofs keep prescribed values g;
// the reduced system is A_ff u_f = b_f - A_fc g_c.
struct DofMap {
  std::vector<int> to_free;  // -1 for constrained dofs
  std::vector<int> to_full;
  int n_free() const { return static_cast<int>(to_full.size()); }
};
DofMap make_dof_map(int n, const std::vector<int>& constrained);
SpMat reduce(const SpMat& A, const DofMap& map);
VecXc reduce_rhs(const SpMat& A, const DofMap& map, const VecXc& rhs_full, const VecXc& g_full);
VecXc expand(const DofMap& map, const VecXc& u_free, const VecXc& g_full);

}  // namespace tsig::fem

#include "tsig/fem.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tsig/special.hpp"

namespace tsig::fem {

namespace {
// 2- and 4-point Gauss rules on [0, 1].
constexpr double g2x[2] = {0.21132486540518713, 0.78867513459481287};
constexpr double g2w[2] = {0.5, 0.5};
constexpr double g4x[4] = {0.06943184420297371, 0.33000947820757187, 0.66999052179242813,
                           0.93056815579702629};
constexpr double g4w[4] = {0.17392742256872693, 0.32607257743127307, 0.32607257743127307,
                           0.17392742256872693};
}  // namespace

void add_stiffness(const CrackMesh& m, int region, cplx scale, std::vector<Trip>& out) {
  for (const auto& t : m.tris) {
    if (region >= 0 && t.region != region) continue;
    const Vec2 A = m.xy[t.v[0]], B = m.xy[t.v[1]], C = m.xy[t.v[2]];
    const double det = cross(B - A, C - A);  // 2 * area, positive by integrity
    // gradients of the barycentric shape functions
    const Vec2 g[3] = {{(B[1] - C[1]) / det, (C[0] - B[0]) / det},
                       {(C[1] - A[1]) / det, (A[0] - C[0]) / det},
                       {(A[1] - B[1]) / det, (B[0] - A[0]) / det}};
    const double area = 0.5 * det;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out.emplace_back(t.v[i], t.v[j], scale * (area * dot(g[i], g[j])));
  }
}

void add_mass(const CrackMesh& m, int region, cplx scale, std::vector<Trip>& out) {
  for (const auto& t : m.tris) {
    if (region >= 0 && t.region != region) continue;
    const double area = 0.5 * cross(m.xy[t.v[1]] - m.xy[t.v[0]], m.xy[t.v[2]] - m.xy[t.v[0]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out.emplace_back(t.v[i], t.v[j], scale * (area / 12.0 * (i == j ? 2.0 : 1.0)));
  }
}

std::vector<double> coeff_breaks(const SurfaceCoefficients& c) {
  std::vector<double> br;
  if (c.absent) return br;
  for (const PiecewiseField* f : {&c.alpha, &c.mu, &c.beta_re, &c.beta_im})
    for (const auto& p : f->pieces) {
      br.push_back(p.s0);
      br.push_back(p.s1);
    }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           br.end());
  return br;
}

void for_each_gamma_qp(const CrackMesh& m, const std::vector<double>& breaks,
                       const std::function<void(const GammaQuad&)>& fn) {
  const double L = m.gamma_length();
  for (std::size_t i = 0; i < m.edges.size(); ++i) {
    const auto& em = m.edges[i];
    if (em.tag != EdgeTag::GammaMinus) continue;
    const auto& ep = m.edges[em.pair];
    double sa = m.gamma_arclen(m.xy[em.a]);
    double sb = m.gamma_arclen(m.xy[em.b]);
    if (sb <= sa + 1e-12) sb += L;  // closed screen: the wrap-around edge
    std::vector<double> cuts{sa};
    for (double b : breaks)
      if (b > sa + 1e-12 && b < sb - 1e-12) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(sb);
    const double inv = 1.0 / (sb - sa);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a0 = cuts[c], a1 = cuts[c + 1];
      for (int q = 0; q < 2; ++q) {
        GammaQuad qp;
        qp.s = a0 + g2x[q] * (a1 - a0);
        qp.w = g2w[q] * (a1 - a0);
        qp.ap = ep.a; qp.bp = ep.b;
        qp.am = em.a; qp.bm = em.b;
        const double t = (qp.s - sa) * inv;
        qp.Na = 1.0 - t; qp.Nb = t;
        qp.dNa = -inv; qp.dNb = inv;
        fn(qp);
      }
    }
  }
}

void add_screen_terms(const CrackMesh& m, const SurfaceCoefficients& c, double k,
                      std::vector<Trip>& out) {
  if (c.absent) return;
  const auto breaks = coeff_breaks(c);
  const double L = m.gamma_length();
  for_each_gamma_qp(m, breaks, [&](const GammaQuad& q) {
    const auto v = c.eval(std::min(q.s, L), k);
    const double inv_alpha = std::isinf(v.alpha) ? 0.0 : 1.0 / v.alpha;
    const int dof[4] = {q.ap, q.bp, q.am, q.bm};
    const double jmp[4] = {q.Na, q.Nb, -q.Na, -q.Nb};
    const double avg[4] = {0.5 * q.Na, 0.5 * q.Nb, 0.5 * q.Na, 0.5 * q.Nb};
    const double avd[4] = {0.5 * q.dNa, 0.5 * q.dNb, 0.5 * q.dNa, 0.5 * q.dNb};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const cplx val = q.w * (inv_alpha * jmp[i] * jmp[j] + v.mu * avd[i] * avd[j] +
                                k * k * v.beta * avg[i] * avg[j]);
        if (val != 0.0) out.emplace_back(dof[i], dof[j], val);
      }
  });
}

void add_gamma_trace(const CrackMesh& m, const std::vector<double>& breaks,
                     const std::function<cplx(double)>& w, bool deriv, std::vector<Trip>& out) {
  for_each_gamma_qp(m, breaks, [&](const GammaQuad& q) {
    const cplx c = w(q.s) * q.w;
    const int dof[2] = {q.am, q.bm};
    const double N[2] = {deriv ? q.dNa : q.Na, deriv ? q.dNb : q.Nb};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.emplace_back(dof[i], dof[j], c * N[i] * N[j]);
  });
}

void add_boundary_mass(const CrackMesh& m, const std::vector<EdgeTag>& tags, cplx scale,
                       std::vector<Trip>& out) {
  for (const auto& e : m.edges) {
    if (std::find(tags.begin(), tags.end(), e.tag) == tags.end()) continue;
    const double le = norm(m.xy[e.b] - m.xy[e.a]);
    const cplx d = scale * (le / 3.0), o = scale * (le / 6.0);
    out.emplace_back(e.a, e.a, d);
    out.emplace_back(e.b, e.b, d);
    out.emplace_back(e.a, e.b, o);
    out.emplace_back(e.b, e.a, o);
  }
}

std::vector<int> boundary_dofs(const CrackMesh& m, const std::vector<EdgeTag>& tags) {
  std::unordered_set<int> s;
  for (const auto& e : m.edges)
    if (std::find(tags.begin(), tags.end(), e.tag) != tags.end()) {
      s.insert(e.a);
      s.insert(e.b);
    }
  std::vector<int> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

void add_dtn(const CrackMesh& m, double k, int n_modes, double sign, std::vector<Trip>& out,
             bool* saturated) {
  const double R = m.meta.outer_radius;
  const auto dofs = boundary_dofs(m, {EdgeTag::Outer});
  const int nd = static_cast<int>(dofs.size());
  std::vector<int> local(m.num_dofs(), -1);
  for (int i = 0; i < nd; ++i) local[dofs[i]] = i;

  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(nd, nd);
  Eigen::VectorXcd c(nd);
  for (int n = 0; n <= n_modes; ++n) {
    const auto sym = dtn_symbol_checked(k, R, n);
    if (sym.saturated && saturated) *saturated = true;
    c.setZero();
    for (const auto& e : m.edges) {
      if (e.tag != EdgeTag::Outer) continue;
      const double ta = std::atan2(m.xy[e.a][1], m.xy[e.a][0]);
      double dth = std::atan2(m.xy[e.b][1], m.xy[e.b][0]) - ta;
      dth -= 2.0 * pi * std::floor(dth / (2.0 * pi));  // CCW gap in (0, 2pi)
      const double ds = R * dth;                       // arc-length measure
      for (int q = 0; q < 4; ++q) {
        const cplx ph = ds * g4w[q] * std::polar(1.0, -n * (ta + g4x[q] * dth));
        c[local[e.a]] += (1.0 - g4x[q]) * ph;
        c[local[e.b]] += g4x[q] * ph;
      }
    }
    const cplx fac = sym.value / (2.0 * pi * R);
    B.noalias() += fac * (c.conjugate() * c.transpose());
    if (n > 0) B.noalias() += fac * (c * c.adjoint());  // the -n mode
  }
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j)
      if (B(i, j) != 0.0) out.emplace_back(dofs[i], dofs[j], sign * B(i, j));
}

SpMat assemble(int n, const std::vector<Trip>& trips) {
  SpMat A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

DofMap make_dof_map(int n, const std::vector<int>& constrained) {
  DofMap map;
  map.to_free.assign(n, 0);
  for (int c : constrained) map.to_free[c] = -1;
  for (int i = 0; i < n; ++i)
    if (map.to_free[i] == 0) {
      map.to_free[i] = static_cast<int>(map.to_full.size());
      map.to_full.push_back(i);
    }
  return map;
}

SpMat reduce(const SpMat& A, const DofMap& map) {
  std::vector<Trip> trips;
  trips.reserve(A.nonZeros());
  for (int col = 0; col < A.outerSize(); ++col) {
    const int jc = map.to_free[col];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(A, col); it; ++it) {
      const int ir = map.to_free[it.row()];
      if (ir >= 0) trips.emplace_back(ir, jc, it.value());
    }
  }
  return assemble(map.n_free(), trips);
}

VecXc reduce_rhs(const SpMat& A, const DofMap& map, const VecXc& rhs_full, const VecXc& g_full) {
  const VecXc corr = A * g_full;
  VecXc b(map.n_free());
  for (int i = 0; i < map.n_free(); ++i) {
    const int f = map.to_full[i];
    b[i] = rhs_full[f] - corr[f];
  }
  return b;
}

VecXc expand(const DofMap& map, const VecXc& u_free, const VecXc& g_full) {
  VecXc u = g_full;
  for (int i = 0; i < map.n_free(); ++i) u[map.to_full[i]] = u_free[i];
  return u;
}

}  // namespace tsig::fem

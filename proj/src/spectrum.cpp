#include "tsig/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace tsig {

namespace {

using SpMatd = Eigen::SparseMatrix<double>;

std::vector<char> region_dofs(const CrackMesh& m, int region) {
  std::vector<char> in(m.num_dofs(), 0);
  for (const auto& t : m.tris)
    if (t.region == region)
      for (int v : t.v) in[v] = 1;
  return in;
}

// Free dofs of V0(D): vertices of interior-region triangles, minus the
// essential set.
fem::DofMap v0_map(const CrackMesh& m, const std::vector<int>& essential) {
  const auto in0 = region_dofs(m, 0);
  std::vector<int> constrained = essential;
  for (int i = 0; i < m.num_dofs(); ++i)
    if (!in0[i]) constrained.push_back(i);
  std::sort(constrained.begin(), constrained.end());
  constrained.erase(std::unique(constrained.begin(), constrained.end()), constrained.end());
  return fem::make_dof_map(m.num_dofs(), constrained);
}

SpMatd real_part(const fem::SpMat& A) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c)
    for (fem::SpMat::InnerIterator it(A, c); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), c, it.value().real());
  SpMatd B(A.rows(), A.cols());
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

struct RFactor {
  Eigen::SparseLU<fem::SpMat> lu;
  fem::SpMat Mred, Kred;
  std::vector<int> bfree;  // free-index positions of the dD\Gamma dofs
};

std::unique_ptr<RFactor> build_rfactor(const EigenForms& f, double tau) {
  auto r = std::make_unique<RFactor>();
  r->Mred = fem::reduce(f.M, f.map);
  r->Kred = fem::reduce(f.K, f.map);
  for (int b : f.bdofs) {
    const int fb = f.map.to_free[b];
    if (fb >= 0) r->bfree.push_back(fb);
  }
  fem::SpMat A = r->Mred + cplx(tau) * r->Kred;
  A.makeCompressed();
  r->lu.compute(A);
  if (r->lu.info() != Eigen::Success) throw solver_error("M + tau K factorization failed");
  // near-singularity probe: factorization may "succeed" numerically while the
  // shift sits on an interior resonance
  Eigen::VectorXcd probe = Eigen::VectorXcd::Constant(A.rows(), cplx(1.0, 0.3));
  const Eigen::VectorXcd x = r->lu.solve(probe);
  if ((A * x - probe).norm() > 1e-8 * probe.norm())
    throw solver_error("M + tau K numerically singular at tau = " + std::to_string(tau));
  return r;
}

Eigen::MatrixXcd materialize(const RFactor& rf) {
  const int n_b = static_cast<int>(rf.bfree.size());
  const int n = static_cast<int>(rf.Mred.rows());
  Eigen::MatrixXcd R(n_b, n_b);
  const int chunk = 64;
  for (int c0 = 0; c0 < n_b; c0 += chunk) {
    const int nc = std::min(chunk, n_b - c0);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, nc);
    for (int j = 0; j < nc; ++j) B.col(j) = rf.Kred.col(rf.bfree[c0 + j]);
    const Eigen::MatrixXcd X = rf.lu.solve(B);
    for (int j = 0; j < nc; ++j)
      for (int i = 0; i < n_b; ++i) R(i, c0 + j) = X(rf.bfree[i], j);
  }
  return R;
}

// Inverse subspace iteration with Rayleigh-Ritz for the smallest eigenvalue
// of the SPD pencil A x = eta B x.
double smallest_gen_eig(const SpMatd& A, const SpMatd& B) {
  const int n = static_cast<int>(A.rows());
  Eigen::SimplicialLDLT<SpMatd> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw solver_error("LDLT factorization failed in symmetric eigensolve");
  const int m = std::min(8, n);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd X(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = uni(rng);
  double eta = 0, prev = 1e300;
  for (int it = 0; it < 200; ++it) {
    X = ldlt.solve(B * X);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    const Eigen::MatrixXd Am = X.transpose() * (A * X);
    const Eigen::MatrixXd Bm = X.transpose() * (B * X);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Am, Bm);
    if (es.info() != Eigen::Success) throw solver_error("Rayleigh-Ritz solve failed");
    X = X * es.eigenvectors();
    eta = es.eigenvalues()(0);
    if (std::abs(eta - prev) < 1e-12 * std::max(1.0, std::abs(eta))) break;
    prev = eta;
  }
  return eta;
}

}  // namespace

EigenForms assemble_eigen_forms(const CrackMesh& mesh, const SurfaceCoefficients* coeffs,
                                double k) {
  EigenForms f;
  f.mesh = &mesh;
  f.coeffs = coeffs;
  f.k = k;
  const int n = mesh.num_dofs();

  std::vector<fem::Trip> mt;
  fem::add_stiffness(mesh, 0, 1.0, mt);
  fem::add_mass(mesh, 0, -k * k, mt);
  std::vector<int> essential;
  std::vector<EdgeTag> robin_tags{EdgeTag::BoundaryRest};
  if (coeffs) {
    coeffs->validate(mesh.gamma_length());
    if (coeffs->absent) throw admissibility_error("eigenproblem needs a screen on Gamma");
    const auto breaks = fem::coeff_breaks(*coeffs);
    fem::add_gamma_trace(mesh, breaks,
                         [&](double s) { return cplx(0.25 * coeffs->mu.eval(s)); }, true, mt);
    fem::add_gamma_trace(
        mesh, breaks,
        [&](double s) {
          const auto v = coeffs->eval(s, k);
          const double inv_a = std::isinf(v.alpha) ? 0.0 : 1.0 / v.alpha;
          return 0.25 * (k * k * v.beta + 4.0 * inv_a);
        },
        false, mt);
    essential = mesh.tips;
  } else {
    // Gamma-empty degenerate mode: the whole inner circle carries the Robin
    // boundary, the screen edges losing their special role.
    robin_tags.push_back(EdgeTag::GammaMinus);
  }
  f.M = fem::assemble(n, mt);

  std::vector<fem::Trip> kt;
  fem::add_boundary_mass(mesh, robin_tags, 1.0, kt);
  f.K = fem::assemble(n, kt);

  f.bdofs = fem::boundary_dofs(mesh, robin_tags);
  if (coeffs) {
    // tips are essential, remove them from the trace dof list
    std::vector<int> keep;
    for (int b : f.bdofs)
      if (std::find(mesh.tips.begin(), mesh.tips.end(), b) == mesh.tips.end()) keep.push_back(b);
    f.bdofs = keep;
  }
  f.map = v0_map(mesh, essential);
  return f;
}

Eigen::MatrixXcd r_route_matrix(const EigenForms& forms, double tau) {
  return materialize(*build_rfactor(forms, tau));
}

EigenSpectrum solve_spectrum(const EigenForms& forms, EigenOptions opt) {
  std::unique_ptr<RFactor> rf;
  double tau = opt.tau;
  std::string last_err;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    tau = opt.tau + attempt * opt.tau_step;
    try {
      rf = build_rfactor(forms, tau);
      break;
    } catch (const solver_error& e) {
      last_err = e.what();
    }
  }
  if (!rf) throw spectral_error("no usable shift after retries: " + last_err);

  const Eigen::MatrixXcd R = materialize(*rf);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(R);
  if (es.info() != Eigen::Success) throw spectral_error("dense eigensolve of R failed");

  const int n_b = static_cast<int>(R.rows());
  const double rho_floor = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();

  EigenSpectrum spec;
  spec.tau = tau;
  spec.h = forms.mesh->meta.target_h;
  for (int j = 0; j < n_b; ++j) {
    const cplx rho = es.eigenvalues()(j);
    if (std::abs(rho) <= rho_floor) continue;  // lambda at infinity
    const cplx lambda = tau - 1.0 / rho;
    if (std::abs(lambda.real()) > opt.lambda_max || std::abs(lambda.imag()) > opt.lambda_max)
      continue;
    // recover the volume eigenfunction from the boundary eigenvector
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(rf->Mred.rows());
    for (int i = 0; i < n_b; ++i) t[rf->bfree[i]] = es.eigenvectors()(i, j);
    Eigen::VectorXcd h = rf->lu.solve(rf->Kred * t);
    const double hn = h.norm();
    if (hn < 1e-300) continue;
    h /= hn;
    const double res = ((rf->Mred * h) + lambda * (rf->Kred * h)).norm();
    if (res > opt.residual_keep) continue;
    EigenPair p;
    p.lambda = lambda;
    p.residual = res;
    if (opt.keep_functions)
      p.h = fem::expand(forms.map, h, Eigen::VectorXcd::Zero(forms.mesh->num_dofs()));
    spec.pairs.push_back(std::move(p));
  }
  std::sort(spec.pairs.begin(), spec.pairs.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.lambda.real() > b.lambda.real(); });
  if (static_cast<int>(spec.pairs.size()) > opt.n_eigs) spec.pairs.resize(opt.n_eigs);
  return spec;
}

std::vector<cplx> solve_spectrum_dense(const EigenForms& forms, double lambda_max) {
  const Eigen::MatrixXd Md = Eigen::MatrixXd(real_part(fem::reduce(forms.M, forms.map)));
  const Eigen::MatrixXd Kd = Eigen::MatrixXd(real_part(fem::reduce(forms.K, forms.map)));
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
  ges.compute(Md, -Kd);
  if (ges.info() != Eigen::Success) throw spectral_error("QZ cross-check solve failed");
  std::vector<cplx> out;
  const double bscale = ges.betas().cwiseAbs().maxCoeff();
  for (int i = 0; i < ges.alphas().size(); ++i) {
    const double beta = ges.betas()(i);
    if (std::abs(beta) < 1e-10 * bscale) continue;
    const cplx lam = ges.alphas()(i) / beta;
    if (std::abs(lam.real()) <= lambda_max && std::abs(lam.imag()) <= lambda_max)
      out.push_back(lam);
  }
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
  return out;
}

double energy_identity_residual(const EigenForms& forms, const EigenPair& pair) {
  const auto& h = pair.h;
  if (h.size() == 0) throw spectral_error("eigenpair stored without its eigenfunction");
  double lhs = 0;
  if (forms.coeffs) {
    const auto breaks = fem::coeff_breaks(*forms.coeffs);
    const double k = forms.k, L = forms.mesh->gamma_length();
    fem::for_each_gamma_qp(*forms.mesh, breaks, [&](const fem::GammaQuad& q) {
      const cplx hv = q.Na * h[q.am] + q.Nb * h[q.bm];
      lhs += q.w * (k * k / 4.0) * forms.coeffs->beta_im.eval(std::min(q.s, L)) / k *
             std::norm(hv);
    });
  }
  const double bnorm2 = (h.adjoint() * (forms.K * h)).real()(0, 0);
  const double rhs = -pair.lambda.imag() * bnorm2;
  const double den = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
  return std::abs(lhs - rhs) / den;
}

double eta1(const CrackMesh& mesh, const PiecewiseField* mu, double tau) {
  if (tau <= 0) throw spectral_error("eta1 requires tau > 0");
  std::vector<fem::Trip> at;
  fem::add_stiffness(mesh, 0, 1.0, at);
  std::vector<EdgeTag> robin{EdgeTag::BoundaryRest};
  std::vector<int> essential;
  if (mu) {
    std::vector<double> breaks;
    for (const auto& p : mu->pieces) {
      breaks.push_back(p.s0);
      breaks.push_back(p.s1);
    }
    std::sort(breaks.begin(), breaks.end());
    fem::add_gamma_trace(mesh, breaks, [&](double s) { return cplx(0.25 * mu->eval(s)); }, true,
                         at);
    essential = mesh.tips;
  } else {
    robin.push_back(EdgeTag::GammaMinus);
  }
  fem::add_boundary_mass(mesh, robin, tau, at);
  std::vector<fem::Trip> bt;
  fem::add_mass(mesh, 0, 1.0, bt);

  const auto map = v0_map(mesh, essential);
  const int n = mesh.num_dofs();
  const SpMatd A = real_part(fem::reduce(fem::assemble(n, at), map));
  const SpMatd B = real_part(fem::reduce(fem::assemble(n, bt), map));
  return smallest_gen_eig(A, B);
}

double dirichlet_eta0(const CrackMesh& mesh) {
  std::vector<int> essential =
      fem::boundary_dofs(mesh, {EdgeTag::BoundaryRest, EdgeTag::GammaMinus});
  for (int t : mesh.tips) essential.push_back(t);
  const auto map = v0_map(mesh, essential);
  std::vector<fem::Trip> at, bt;
  fem::add_stiffness(mesh, 0, 1.0, at);
  fem::add_mass(mesh, 0, 1.0, bt);
  const int n = mesh.num_dofs();
  const SpMatd A = real_part(fem::reduce(fem::assemble(n, at), map));
  const SpMatd B = real_part(fem::reduce(fem::assemble(n, bt), map));
  return smallest_gen_eig(A, B);
}

RayleighReport rayleigh_lambda1(const EigenSpectrum& spec, const EigenForms& forms,
                                double tau_for_eta1) {
  RayleighReport r;
  if (spec.pairs.empty()) {
    r.note = "empty spectrum";
    return r;
  }
  if (!forms.coeffs) {
    r.note = "no screen coefficients; hypothesis (4.9) not applicable";
    return r;
  }
  const double k = forms.k, L = forms.mesh->gamma_length();
  double inf_combo = 1e300;
  for (int i = 0; i <= 10000; ++i) {
    const double s = L * i / 10000.0;
    const auto v = forms.coeffs->eval(s, k);
    const double inv_a = std::isinf(v.alpha) ? 0.0 : 1.0 / v.alpha;
    inf_combo = std::min(inf_combo, k * k * v.beta.real() + 4.0 * inv_a);
  }
  if (!(inf_combo > 0)) {
    r.note = "inf_Gamma(k^2 beta + 4/alpha) <= 0";
    return r;
  }
  const double e1 = eta1(*forms.mesh, &forms.coeffs->mu, tau_for_eta1);
  if (!(k * k < e1)) {
    r.note = "k^2 >= eta_1";
    return r;
  }
  const auto& p = spec.pairs.front();
  if (p.h.size() == 0) {
    r.note = "leading eigenfunction not stored";
    return r;
  }
  const double num = (p.h.adjoint() * (forms.M * p.h)).real()(0, 0);
  const double den = (p.h.adjoint() * (forms.K * p.h)).real()(0, 0);
  r.applicable = true;
  r.quotient = -num / den;
  r.lambda1 = p.lambda.real();
  r.defect = std::abs(r.quotient - r.lambda1) / (1.0 + std::abs(r.lambda1));
  return r;
}

std::string spectrum_to_json(const EigenSpectrum& spec, const std::string& scenario_hash) {
  nlohmann::json j;
  j["tau"] = spec.tau;
  j["h"] = spec.h;
  j["scenario"] = scenario_hash;
  j["eigenvalues"] = nlohmann::json::array();
  for (const auto& p : spec.pairs)
    j["eigenvalues"].push_back(
        {{"re", p.lambda.real()}, {"im", p.lambda.imag()}, {"residual", p.residual}});
  return j.dump(2);
}

EigenSpectrum spectrum_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EigenSpectrum spec;
  spec.tau = j.at("tau").get<double>();
  spec.h = j.at("h").get<double>();
  for (const auto& e : j.at("eigenvalues")) {
    EigenPair p;
    p.lambda = {e.at("re").get<double>(), e.at("im").get<double>()};
    p.residual = e.at("residual").get<double>();
    spec.pairs.push_back(std::move(p));
  }
  return spec;
}

}  // namespace tsig

#include "tsig/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "tsig/special.hpp"

namespace tsig {

namespace {

constexpr double g4x[4] = {0.06943184420297371, 0.33000947820757187, 0.66999052179242813,
                           0.93056815579702629};
constexpr double g4w[4] = {0.17392742256872693, 0.32607257743127307, 0.32607257743127307,
                           0.17392742256872693};

cplx plane_wave(double k, const Vec2& d, const Vec2& x) {
  return std::polar(1.0, k * dot(x, d));
}

void check_angles(const std::vector<double>& a, const char* name) {
  if (a.size() < 8) throw config_error(std::string(name) + ": need at least 8 directions");
  for (std::size_t i = 1; i < a.size(); ++i)
    if (!(a[i] > a[i - 1])) throw config_error(std::string(name) + ": angles must be strictly increasing");
}

void check_residual(const fem::SpMat& A, const Eigen::VectorXcd& x, const Eigen::VectorXcd& b) {
  const double res = (A * x - b).norm();
  if (res > 1e-10 * (b.norm() + 1e-30))
    throw solver_error("linear solve residual " + std::to_string(res) + " above tolerance");
}

double effective_rff(const CrackMesh& m, const ForwardOptions& opt) {
  const double r = opt.r_ff > 0 ? opt.r_ff : 0.5 * (m.meta.disk_radius + m.meta.outer_radius);
  if (r <= m.meta.disk_radius || r >= m.meta.outer_radius)
    throw config_error("far-field sampling radius must lie strictly between the two circles");
  return r;
}

}  // namespace

int default_n_modes(double k, double R) {
  return std::max(20, static_cast<int>(std::ceil(2.0 * k * R)));
}

std::vector<double> uniform_angles(int n) {
  std::vector<double> a(n);
  for (int j = 0; j < n; ++j) a[j] = 2.0 * pi * j / n;
  return a;
}

cplx eval_field(const CrackMesh& mesh, const Eigen::VectorXcd& u, const Vec2& p, int region_pref) {
  const auto loc = mesh.locate(p, region_pref);
  const auto& t = mesh.tris[loc.tri];
  cplx v = 0;
  for (int i = 0; i < 3; ++i) v += loc.bary[i] * u[t.v[i]];
  return v;
}

// ---------------------------------------------------------------------------
// screen scattering system

ScreenSystem::ScreenSystem(const CrackMesh& mesh, const SurfaceCoefficients& coeffs, double k,
                           ForwardOptions opt)
    : mesh_(mesh), coeffs_(coeffs), k_(k), opt_(opt) {
  coeffs_.validate(mesh.gamma_length());
  if (opt_.n_modes <= 0) opt_.n_modes = default_n_modes(k, mesh.meta.outer_radius);
  const int n = mesh.num_dofs();

  std::vector<fem::Trip> trips;
  fem::add_stiffness(mesh, -1, 1.0, trips);
  fem::add_mass(mesh, -1, -k * k, trips);
  fem::add_screen_terms(mesh, coeffs_, k, trips);
  fem::add_dtn(mesh, k, opt_.n_modes, opt_.dtn_sign, trips, &saturated_);

  std::vector<int> constrained;
  if (coeffs_.absent) {
    // [u] = 0 limit: identify each plus dof with its minus partner and park
    // the plus dof on a unit diagonal.
    std::vector<int> ident(n);
    for (int i = 0; i < n; ++i) ident[i] = i;
    for (const auto& [p, mn] : mesh.double_nodes) ident[p] = mn;
    for (auto& t : trips) t = {ident[t.row()], ident[t.col()], t.value()};
    for (const auto& [p, mn] : mesh.double_nodes) trips.emplace_back(p, p, 1.0);
  } else {
    constrained = mesh.tips;
  }

  A_ = fem::assemble(n, trips);
  map_ = fem::make_dof_map(n, constrained);
  Ared_ = fem::reduce(A_, map_);
  lu_.compute(Ared_);
  if (lu_.info() != Eigen::Success)
    throw solver_error("screen system factorization failed (k near a resonance of the truncated "
                       "formulation; change R or n_modes)");
}

FieldSolution ScreenSystem::solve(double dir_angle) const {
  const int n = mesh_.num_dofs();
  const Vec2 d = unit_dir(dir_angle);
  const double a = mesh_.meta.disk_radius, L = mesh_.gamma_length();
  const cplx ik(0.0, k_);

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n);
  if (!coeffs_.absent) {
    const auto breaks = fem::coeff_breaks(coeffs_);
    fem::for_each_gamma_qp(mesh_, breaks, [&](const fem::GammaQuad& q) {
      const double s = std::min(q.s, L);
      const auto v = coeffs_.eval(s, k_);
      const Vec2 y = mesh_.gamma_point(s);
      const Vec2 nu = (1.0 / a) * y;
      const Vec2 tau{-nu[1], nu[0]};
      const cplx ui = plane_wave(k_, d, y);
      const cplx dn_ui = ik * dot(nu, d) * ui;
      const cplx ds_ui = ik * dot(tau, d) * ui;
      const int dof[4] = {q.ap, q.bp, q.am, q.bm};
      const double jmp[4] = {q.Na, q.Nb, -q.Na, -q.Nb};
      const double avg[4] = {0.5 * q.Na, 0.5 * q.Nb, 0.5 * q.Na, 0.5 * q.Nb};
      const double avd[4] = {0.5 * q.dNa, 0.5 * q.dNb, 0.5 * q.dNa, 0.5 * q.dNb};
      for (int i = 0; i < 4; ++i)
        rhs[dof[i]] += q.w * (dn_ui * jmp[i] - v.mu * ds_ui * avd[i] -
                              k_ * k_ * v.beta * ui * avg[i]);
    });
    for (int t : mesh_.tips) g[t] = -plane_wave(k_, d, mesh_.xy[t]);
  }

  const Eigen::VectorXcd b = fem::reduce_rhs(A_, map_, rhs, g);
  const Eigen::VectorXcd x = lu_.solve(b);
  if (lu_.info() != Eigen::Success) throw solver_error("screen system solve failed");
  check_residual(Ared_, x, b);

  FieldSolution sol;
  sol.scattered = fem::expand(map_, x, g);
  if (coeffs_.absent)
    for (const auto& [p, mn] : mesh_.double_nodes) sol.scattered[p] = sol.scattered[mn];
  sol.total.resize(n);
  for (int i = 0; i < n; ++i) sol.total[i] = sol.scattered[i] + plane_wave(k_, d, mesh_.xy[i]);
  sol.k = k_;
  sol.dir_angle = dir_angle;
  sol.kind = ProblemKind::Scattering;
  return sol;
}

// ---------------------------------------------------------------------------
// auxiliary impedance system on the annulus

AuxSystem::AuxSystem(const CrackMesh& mesh, double k, cplx lambda, ForwardOptions opt)
    : mesh_(mesh), k_(k), lambda_(lambda), opt_(opt) {
  if (opt_.n_modes <= 0) opt_.n_modes = default_n_modes(k, mesh.meta.outer_radius);
  const int n = mesh.num_dofs();

  std::vector<fem::Trip> trips;
  fem::add_stiffness(mesh, 1, 1.0, trips);
  fem::add_mass(mesh, 1, -k * k, trips);
  // Robin on the inner circle away from Gamma; nu points out of D, i.e. into
  // the annulus, which flips the usual boundary-term sign.
  fem::add_boundary_mass(mesh, {EdgeTag::BoundaryRest}, -lambda, trips);
  bool sat = false;
  fem::add_dtn(mesh, k, opt_.n_modes, opt_.dtn_sign, trips, &sat);

  in_annulus_.assign(n, 0);
  for (const auto& t : mesh.tris)
    if (t.region == 1)
      for (int v : t.v) in_annulus_[v] = 1;

  for (const auto& e : mesh.edges)
    if (e.tag == EdgeTag::GammaPlus) {
      dirichlet_.push_back(e.a);
      dirichlet_.push_back(e.b);
    }
  std::sort(dirichlet_.begin(), dirichlet_.end());
  dirichlet_.erase(std::unique(dirichlet_.begin(), dirichlet_.end()), dirichlet_.end());

  std::vector<char> fixed(n, 0);
  std::vector<int> constrained;
  for (int d : dirichlet_) {
    fixed[d] = 1;
    constrained.push_back(d);
  }
  for (int i = 0; i < n; ++i)
    if (!in_annulus_[i] && !fixed[i]) {
      constrained.push_back(i);  // D-side dofs play no role here
      trips.emplace_back(i, i, 1.0);
    }

  A_ = fem::assemble(n, trips);
  map_ = fem::make_dof_map(n, constrained);
  Ared_ = fem::reduce(A_, map_);
  lu_.compute(Ared_);
  if (lu_.info() != Eigen::Success) throw solver_error("auxiliary system factorization failed");
}

FieldSolution AuxSystem::solve(double dir_angle) const {
  const int n = mesh_.num_dofs();
  const Vec2 d = unit_dir(dir_angle);
  const cplx ik(0.0, k_);

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n);
  for (int t : dirichlet_) g[t] = -plane_wave(k_, d, mesh_.xy[t]);

  for (const auto& e : mesh_.edges) {
    if (e.tag != EdgeTag::BoundaryRest) continue;
    const Vec2 A = mesh_.xy[e.a], B = mesh_.xy[e.b];
    const double le = norm(B - A);
    for (int q = 0; q < 4; ++q) {
      const double t = g4x[q];
      const Vec2 x = (1.0 - t) * A + t * B;
      const Vec2 nu = (1.0 / norm(x)) * x;
      const cplx ui = plane_wave(k_, d, x);
      const cplx f = (ik * dot(nu, d) + lambda_) * ui;  // d_nu u^i + lambda u^i
      rhs[e.a] += le * g4w[q] * (1.0 - t) * f;
      rhs[e.b] += le * g4w[q] * t * f;
    }
  }

  const Eigen::VectorXcd b = fem::reduce_rhs(A_, map_, rhs, g);
  const Eigen::VectorXcd x = lu_.solve(b);
  if (lu_.info() != Eigen::Success) throw solver_error("auxiliary system solve failed");
  check_residual(Ared_, x, b);

  FieldSolution sol;
  sol.scattered = fem::expand(map_, x, g);
  for (int i = 0; i < n; ++i)
    if (!in_annulus_[i]) sol.scattered[i] = 0;
  sol.total = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (in_annulus_[i]) sol.total[i] = sol.scattered[i] + plane_wave(k_, d, mesh_.xy[i]);
  sol.k = k_;
  sol.dir_angle = dir_angle;
  sol.kind = ProblemKind::Auxiliary;
  sol.lambda = lambda_;
  return sol;
}

// ---------------------------------------------------------------------------
// far field

std::vector<cplx> far_field(const CrackMesh& mesh, const Eigen::VectorXcd& scattered, double k,
                            const std::vector<double>& obs, ForwardOptions opt) {
  const double r = effective_rff(mesh, opt);
  const int M = opt.ff_samples;
  if (M < 16) throw config_error("far-field sampling needs at least 16 points");

  std::vector<cplx> u(M);
  std::vector<double> th(M);
  for (int j = 0; j < M; ++j) {
    th[j] = 2.0 * pi * j / M;
    u[j] = eval_field(mesh, scattered, {r * std::cos(th[j]), r * std::sin(th[j])}, 1);
  }

  // normal derivative via the modal (Hankel-ratio) symbol on the circle
  const int nff = std::min(M / 2 - 1, default_n_modes(k, r) + 10);
  std::vector<cplx> dnu(M, 0.0);
  for (int n = -nff; n <= nff; ++n) {
    cplx hat = 0;
    for (int j = 0; j < M; ++j) hat += u[j] * std::polar(1.0, -n * th[j]);
    hat /= static_cast<double>(M);
    const cplx gam = dtn_symbol(k, r, n);
    for (int j = 0; j < M; ++j) dnu[j] += gam * hat * std::polar(1.0, n * th[j]);
  }

  const cplx C2 = ff_constant(k);
  const double w = 2.0 * pi * r / M;  // trapezoid weight, ds included
  std::vector<cplx> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Vec2 xh = unit_dir(obs[i]);
    cplx sum = 0;
    for (int j = 0; j < M; ++j) {
      const Vec2 y{r * std::cos(th[j]), r * std::sin(th[j])};
      const Vec2 nu = (1.0 / r) * y;
      const cplx ker = std::polar(1.0, -k * dot(xh, y));
      sum += u[j] * (cplx(0.0, -k) * dot(xh, nu)) * ker - dnu[j] * ker;
    }
    out[i] = C2 * w * sum;
  }
  return out;
}

FarFieldMatrix far_field_matrix(const CrackMesh& mesh, const SurfaceCoefficients& coeffs, double k,
                                const std::vector<double>& inc, const std::vector<double>& obs,
                                ForwardOptions opt) {
  check_angles(inc, "incident directions");
  check_angles(obs, "observation directions");
  ScreenSystem sys(mesh, coeffs, k, opt);
  FarFieldMatrix F;
  F.obs = obs;
  F.inc = inc;
  F.k = k;
  F.kind = "F";
  F.entries.resize(static_cast<int>(obs.size()), static_cast<int>(inc.size()));
  for (std::size_t j = 0; j < inc.size(); ++j) {
    const auto sol = sys.solve(inc[j]);
    const auto col = far_field(mesh, sol.scattered, k, obs, opt);
    for (std::size_t i = 0; i < obs.size(); ++i) F.entries(static_cast<int>(i), static_cast<int>(j)) = col[i];
  }
  return F;
}

FarFieldMatrix aux_far_field_matrix(const CrackMesh& mesh, double k, cplx lambda,
                                    const std::vector<double>& inc, const std::vector<double>& obs,
                                    ForwardOptions opt) {
  check_angles(inc, "incident directions");
  check_angles(obs, "observation directions");
  AuxSystem sys(mesh, k, lambda, opt);
  FarFieldMatrix F;
  F.obs = obs;
  F.inc = inc;
  F.k = k;
  F.kind = "F_lambda";
  F.lambda = lambda;
  F.entries.resize(static_cast<int>(obs.size()), static_cast<int>(inc.size()));
  for (std::size_t j = 0; j < inc.size(); ++j) {
    const auto sol = sys.solve(inc[j]);
    const auto col = far_field(mesh, sol.scattered, k, obs, opt);
    for (std::size_t i = 0; i < obs.size(); ++i) F.entries(static_cast<int>(i), static_cast<int>(j)) = col[i];
  }
  return F;
}

// ---------------------------------------------------------------------------
// file I/O

void FarFieldMatrix::save(const std::string& base_path) const {
  nlohmann::json meta;
  meta["k"] = k;
  meta["delta"] = delta;
  meta["kind"] = kind;
  meta["lambda"] = {lambda.real(), lambda.imag()};
  meta["obs"] = obs;
  meta["inc"] = inc;
  std::ofstream jf(base_path + ".json");
  if (!jf) throw config_error("cannot write " + base_path + ".json");
  jf << meta.dump(2) << "\n";

  std::ofstream cf(base_path + ".csv");
  if (!cf) throw config_error("cannot write " + base_path + ".csv");
  cf << "i,j,re,im\n";
  cf.precision(17);
  for (int i = 0; i < entries.rows(); ++i)
    for (int j = 0; j < entries.cols(); ++j)
      cf << i << "," << j << "," << entries(i, j).real() << "," << entries(i, j).imag() << "\n";
}

FarFieldMatrix FarFieldMatrix::load(const std::string& base_path) {
  std::ifstream jf(base_path + ".json");
  if (!jf) throw config_error("cannot read " + base_path + ".json");
  nlohmann::json meta;
  jf >> meta;
  FarFieldMatrix F;
  F.k = meta.at("k").get<double>();
  F.delta = meta.at("delta").get<double>();
  F.kind = meta.at("kind").get<std::string>();
  F.lambda = {meta.at("lambda").at(0).get<double>(), meta.at("lambda").at(1).get<double>()};
  F.obs = meta.at("obs").get<std::vector<double>>();
  F.inc = meta.at("inc").get<std::vector<double>>();
  F.entries = Eigen::MatrixXcd::Zero(static_cast<int>(F.obs.size()), static_cast<int>(F.inc.size()));

  std::ifstream cf(base_path + ".csv");
  if (!cf) throw config_error("cannot read " + base_path + ".csv");
  std::string line;
  std::getline(cf, line);  // header
  while (std::getline(cf, line)) {
    if (line.empty()) continue;
    int i, j;
    double re, im;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &i, &j, &re, &im) != 4)
      throw config_error("malformed far-field CSV line: " + line);
    F.entries(i, j) = cplx(re, im);
  }
  return F;
}

void save_field_csv(const std::string& path, const Eigen::VectorXcd& u) {
  std::ofstream f(path);
  if (!f) throw config_error("cannot write " + path);
  f << "vertex,re,im\n";
  f.precision(17);
  for (int i = 0; i < u.size(); ++i) f << i << "," << u[i].real() << "," << u[i].imag() << "\n";
}

}  // namespace tsig

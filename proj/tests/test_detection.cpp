#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "tsig/detection.hpp"
#include "tsig/special.hpp"
#include "tsig/spectrum.hpp"

using namespace tsig;

namespace {

const ScreenArc kUpper{0.0, pi, false};

Eigen::MatrixXcd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXcd A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = cplx(uni(rng), uni(rng));
  return A;
}

IndicatorCurve synthetic_curve(const std::vector<double>& values, double step = 0.1) {
  IndicatorCurve c;
  for (std::size_t i = 0; i < values.size(); ++i) {
    c.lambdas.emplace_back(step * static_cast<double>(i), 0.0);
    c.values.push_back(values[i]);
    c.eps.push_back(1e-6);
    c.ok.push_back(1);
  }
  return c;
}

}  // namespace

TEST_CASE("point source far field: centered source, symmetry, domain guard") {
  const double k = 2.0;
  const auto obs = uniform_angles(16);
  const auto center = point_source_far_field(k, {0.0, 0.0}, obs, 1.0);
  for (const cplx& v : center) CHECK(std::abs(v - ff_constant(k)) < 1e-14);

  const Vec2 z{0.2, 0.1};
  const auto off = point_source_far_field(k, z, obs, 1.0);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const cplx want = ff_constant(k) * std::polar(1.0, -k * dot(unit_dir(obs[i]), z));
    CHECK(std::abs(off[i] - want) < 1e-14);
    // opposite directions flip the phase of the plane-wave factor
    const cplx p = off[i] / ff_constant(k);
    const cplx q = off[(i + 8) % 16] / ff_constant(k);
    CHECK(std::abs(p * q - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(point_source_far_field(k, {1.0, 0.0}, obs, 1.0), std::domain_error);
  CHECK_THROWS_AS(point_source_far_field(k, {1.5, 0.0}, obs, 1.0), std::domain_error);
}

TEST_CASE("point source far field agrees with the forward-module Green route") {
  const double k = 2.0;
  const Vec2 z{0.3, 0.0};
  const CrackMesh m = build_screen_disk_mesh(kUpper, 1.0, 2.0, 0.05, 2.0);
  Eigen::VectorXcd u(m.num_dofs());
  for (int i = 0; i < m.num_dofs(); ++i) {
    const double r = norm(Vec2{m.xy[i][0] - z[0], m.xy[i][1] - z[1]});
    u[i] = r > 1e-12 ? cplx(0.0, 0.25) * hankel1(0, k * r) : cplx(0.0, 0.0);
  }
  const auto obs = uniform_angles(16);
  const auto via_mesh = far_field(m, u, k, obs);
  const auto direct = point_source_far_field(k, z, obs, 1.0);
  for (std::size_t i = 0; i < obs.size(); ++i)
    CHECK(std::abs(via_mesh[i] - direct[i]) < 1e-2 * std::abs(direct[i]));
}

TEST_CASE("modified operator: difference, metadata, compatibility guards") {
  FarFieldMatrix F, Fl;
  F.obs = Fl.obs = uniform_angles(8);
  F.inc = Fl.inc = uniform_angles(8);
  F.k = Fl.k = 2.0;
  F.entries = random_matrix(8, 8, 1);
  Fl.entries = random_matrix(8, 8, 2);
  Fl.kind = "F_lambda";
  Fl.lambda = cplx(0.7, 0.0);

  const auto Fc = modified_operator(F, Fl);
  CHECK(Fc.kind == "Fcal");
  CHECK(Fc.lambda == Fl.lambda);
  CHECK((Fc.entries - (F.entries - Fl.entries)).norm() == 0.0);
  CHECK(modified_operator(F, F).entries.norm() == 0.0);
  CHECK(Fc.entries.norm() <= F.entries.norm() + Fl.entries.norm());

  FarFieldMatrix bad = Fl;
  bad.k = 3.0;
  CHECK_THROWS_AS(modified_operator(F, bad), incompatibility_error);
  bad = Fl;
  bad.inc[3] += 0.1;
  CHECK_THROWS_AS(modified_operator(F, bad), incompatibility_error);
}

TEST_CASE("tikhonov: identity operator, penalty monotonicity, phase invariance") {
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(12, 12);
  Eigen::VectorXcd rhs = random_matrix(12, 1, 5);
  CHECK((tikhonov_solve(I, rhs, 0.0).g - rhs).norm() < 1e-12);

  const Eigen::MatrixXcd A = random_matrix(16, 12, 7);
  const Eigen::VectorXcd rhs16 = random_matrix(16, 1, 6);
  double prev = 1e300;
  for (double eps : {1e-4, 1e-2, 1.0, 100.0}) {
    const double n = tikhonov_solve(A, rhs16, eps).g_norm;
    CHECK(n < prev);
    prev = n;
  }
  // global unimodular phase on the operator leaves |g| unchanged
  const cplx phase = std::polar(1.0, 1.234);
  CHECK(tikhonov_solve(phase * A, rhs16, 0.01).g_norm ==
        doctest::Approx(tikhonov_solve(A, rhs16, 0.01).g_norm).epsilon(1e-12));
  CHECK_THROWS_AS(tikhonov_solve(A, rhs16, -1.0), config_error);
  CHECK_THROWS_AS(tikhonov_solve(A, rhs, 0.01), config_error);  // 12-vector vs 16 rows
}

TEST_CASE("tikhonov matches the SVD filter-factor formula") {
  const Eigen::MatrixXcd A = random_matrix(20, 14, 9);
  const Eigen::VectorXcd rhs = random_matrix(20, 1, 10);
  const double eps = 0.03;
  const auto tk = tikhonov_solve(A, rhs, eps);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(14);
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    g += (s / (s * s + eps)) * (svd.matrixU().col(i).adjoint() * rhs)(0, 0) * svd.matrixV().col(i);
  }
  CHECK((tk.g - g).norm() / g.norm() < 1e-10);
}

TEST_CASE("add_noise: level, determinism, bound") {
  FarFieldMatrix F;
  F.obs = F.inc = uniform_angles(8);
  F.k = 2.0;
  F.entries = random_matrix(8, 8, 21);

  CHECK((add_noise(F, 0.0, 1).entries - F.entries).norm() == 0.0);
  const auto N1 = add_noise(F, 0.01, 42);
  const auto N2 = add_noise(F, 0.01, 42);
  const auto N3 = add_noise(F, 0.01, 43);
  CHECK((N1.entries - N2.entries).norm() == 0.0);
  CHECK((N1.entries - N3.entries).norm() > 0.0);
  CHECK(N1.delta == 0.01);
  // |xi| <= sqrt(2) entrywise
  CHECK((N1.entries - F.entries).norm() <= 0.01 * std::sqrt(2.0) * F.entries.norm() + 1e-15);
  CHECK_THROWS_AS(add_noise(F, -0.1, 1), config_error);
}

TEST_CASE("detect_peaks on synthetic curves") {
  // monotone: no peaks
  CHECK(detect_peaks(synthetic_curve({1, 2, 3, 4, 5, 6}), 1.0).peaks.empty());

  // single Gaussian bump centered at index 5
  std::vector<double> bump(11);
  for (int i = 0; i <= 10; ++i) bump[i] = 1.0 + 10.0 * std::exp(-0.5 * (i - 5.0) * (i - 5.0));
  const auto rep = detect_peaks(synthetic_curve(bump), 2.0);
  REQUIRE(rep.peaks.size() == 1);
  CHECK(rep.peaks[0].index == 5);
  CHECK(!rep.peaks[0].unresolved);

  // two maxima one grid step apart: merged and flagged unresolved
  const auto two = detect_peaks(synthetic_curve({1, 1, 8, 7.5, 9, 1, 1, 1}), 2.0);
  REQUIRE(two.peaks.size() == 1);
  CHECK(two.peaks[0].index == 4);
  CHECK(two.peaks[0].unresolved);

  // reference matching
  std::vector<double> ref{0.5, 0.71};
  const auto matched = detect_peaks(synthetic_curve(bump), 2.0, &ref);
  CHECK(matched.matched_reference == std::vector<double>{0.5});
  CHECK(matched.unmatched_reference == std::vector<double>{0.71});

  CHECK_THROWS_AS(detect_peaks(synthetic_curve({1, 2, 3}), 1.0), config_error);
}

TEST_CASE("indicator curve: positive and negative controls against the direct spectrum") {
  const double k = 2.0;
  const CrackMesh m = build_screen_disk_mesh(kUpper, 1.0, 2.0, 0.05, 2.0);
  const auto c = SurfaceCoefficients::constant(m.gamma_length(), 1.0, 1.0, 3.0, 0.0);
  const auto dirs = uniform_angles(32);
  const auto F = far_field_matrix(m, c, k, dirs, dirs);

  DetectionOptions opt;
  opt.threads = 4;

  // positive control: a grid straddling the eigenvalue near -0.79 peaks there
  std::vector<cplx> grid;
  for (double x = -1.1; x <= -0.5 + 1e-12; x += 0.05) grid.emplace_back(x, 0.0);
  const auto zs8 = default_sampling_points(1.0, 8);
  const auto curve = indicator_curve(F, grid, zs8, m, k, opt);
  int arg = 0;
  for (std::size_t i = 0; i < curve.values.size(); ++i)
    if (curve.values[i] > curve.values[arg]) arg = static_cast<int>(i);
  const double peak8 = curve.lambdas[arg].real();
  CHECK(std::abs(peak8 - (-0.80)) < 0.05 + 1e-9);

  // stability: doubling the z samples moves the peak by < 1 grid step
  const auto zs16 = default_sampling_points(1.0, 16);
  const auto curve16 = indicator_curve(F, grid, zs16, m, k, opt);
  int arg16 = 0;
  for (std::size_t i = 0; i < curve16.values.size(); ++i)
    if (curve16.values[i] > curve16.values[arg16]) arg16 = static_cast<int>(i);
  CHECK(std::abs(curve16.lambdas[arg16].real() - peak8) < 0.05 + 1e-9);

  // negative control: a window far from every eigenvalue stays flat
  std::vector<cplx> far_grid;
  for (double x = 1.0; x <= 2.0 + 1e-12; x += 0.1) far_grid.emplace_back(x, 0.0);
  const auto flat = indicator_curve(F, far_grid, zs8, m, k, opt);
  double lo = 1e300, hi = 0;
  for (double v : flat.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo < 10.0);
}

TEST_CASE("indicator curve CSV round-trip including a failed point") {
  IndicatorCurve c = synthetic_curve({1, 2, 3, 2, 1}, 0.05);
  c.ok[3] = 0;
  const std::string path =
      (std::filesystem::temp_directory_path() / "tsig_indicator_roundtrip.csv").string();
  c.save_csv(path);
  const auto b = IndicatorCurve::load_csv(path);
  REQUIRE(b.lambdas.size() == c.lambdas.size());
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    CHECK(std::abs(b.lambdas[i] - c.lambdas[i]) < 1e-15);
    CHECK(b.ok[i] == c.ok[i]);
    if (c.ok[i]) CHECK(b.values[i] == doctest::Approx(c.values[i]));
  }
  std::filesystem::remove(path);
}

#include "tsig/detection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include "json.hpp"
#include "tsig/special.hpp"

namespace tsig {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<cplx> point_source_far_field(double k, const Vec2& z,
                                         const std::vector<double>& obs, double disk_radius) {
  if (norm(z) >= disk_radius) throw std::domain_error("point source must lie strictly inside D");
  const cplx C2 = ff_constant(k);
  std::vector<cplx> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i)
    out[i] = C2 * std::polar(1.0, -k * dot(unit_dir(obs[i]), z));
  return out;
}

FarFieldMatrix modified_operator(const FarFieldMatrix& F, const FarFieldMatrix& Fl) {
  if (F.k != Fl.k) throw incompatibility_error("modified operator: wave numbers differ");
  if (F.obs != Fl.obs || F.inc != Fl.inc)
    throw incompatibility_error("modified operator: direction lists differ");
  FarFieldMatrix out = F;
  out.kind = "Fcal";
  out.lambda = Fl.lambda;
  out.entries = F.entries - Fl.entries;
  return out;
}

TikhonovResult tikhonov_solve(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& rhs, double eps,
                              double w) {
  if (eps < 0) throw config_error("tikhonov_solve: eps must be nonnegative");
  if (rhs.size() != A.rows()) throw config_error("tikhonov_solve: rhs size does not match A");
  const Eigen::MatrixXcd N =
      A.adjoint() * A + eps * Eigen::MatrixXcd::Identity(A.cols(), A.cols());
  const Eigen::VectorXcd b = A.adjoint() * rhs;
  TikhonovResult r;
  r.g = N.ldlt().solve(b);
  const double bn = b.norm();
  r.normal_residual = bn > 0 ? (N * r.g - b).norm() / bn : 0.0;
  if (r.normal_residual > 1e-10)
    throw solver_error("Tikhonov normal-equation residual above tolerance");
  r.g_norm = std::sqrt(w) * r.g.norm();
  return r;
}

std::vector<Vec2> default_sampling_points(double disk_radius, int count) {
  std::vector<Vec2> z(count);
  const double r = 0.5 * disk_radius;
  for (int i = 0; i < count; ++i) {
    const double th = 2.0 * pi * i / count + 0.39;  // fixed offset avoids symmetry axes
    z[i] = {r * std::cos(th), r * std::sin(th)};
  }
  return z;
}

IndicatorCurve indicator_curve(const FarFieldMatrix& F_data, const std::vector<cplx>& grid,
                               const std::vector<Vec2>& zs, const CrackMesh& mesh, double k,
                               DetectionOptions opt) {
  if (F_data.k != k) throw incompatibility_error("far-field data carries a different wave number");
  const int n = static_cast<int>(grid.size());
  IndicatorCurve curve;
  curve.lambdas = grid;
  curve.values.assign(n, 0.0);
  curve.eps.assign(n, 0.0);
  curve.ok.assign(n, 0);
  curve.z = zs;
  curve.delta = opt.delta_known >= 0 ? opt.delta_known : F_data.delta;

  const double w = 2.0 * pi / static_cast<double>(F_data.inc.size());
  const double a = mesh.meta.disk_radius;

  auto run_one = [&](int i) {
    const FarFieldMatrix Fl =
        opt.aux_provider ? opt.aux_provider(grid[i])
                         : aux_far_field_matrix(mesh, k, grid[i], F_data.inc, F_data.obs, opt.fwd);
    const FarFieldMatrix Fc = modified_operator(F_data, Fl);
    const Eigen::MatrixXcd A = w * Fc.entries;
    const double sigma = A.jacobiSvd().singularValues()(0);
    const double eps = (opt.delta_known >= 0 ? opt.delta_known : opt.eps_floor_factor) * sigma;
    std::vector<double> norms;
    norms.reserve(zs.size());
    for (const auto& z : zs) {
      const auto ps = point_source_far_field(k, z, F_data.obs, a);
      Eigen::VectorXcd rhs(ps.size());
      for (std::size_t j = 0; j < ps.size(); ++j) rhs[static_cast<int>(j)] = ps[j];
      norms.push_back(tikhonov_solve(A, rhs, eps, w).g_norm);
    }
    curve.values[i] = median(norms);
    curve.eps[i] = eps;
    curve.ok[i] = 1;
  };

  const int nthreads = std::max(1, opt.threads);
  if (nthreads == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        run_one(i);
      } catch (const std::exception&) {
        curve.ok[i] = 0;  // recorded missing, never interpolated
      }
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          run_one(i);
        } catch (const std::exception&) {
          curve.ok[i] = 0;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return curve;
}

DetectionReport detect_peaks(const IndicatorCurve& curve, double prominence,
                             const std::vector<double>* reference) {
  const int n = static_cast<int>(curve.lambdas.size());
  if (n < 5) throw config_error("detect_peaks: need at least 5 grid points");

  DetectionReport rep;
  rep.grid_step = n > 1 ? std::abs(curve.lambdas[1].real() - curve.lambdas[0].real()) : 0.0;

  std::vector<double> level;
  for (int i = 0; i < n; ++i)
    if (curve.ok[i]) level.push_back(curve.values[i]);
  const double base = std::max(median(level), 1e-300);

  std::vector<Peak> raw;
  for (int i = 1; i + 1 < n; ++i) {
    if (!curve.ok[i] || !curve.ok[i - 1] || !curve.ok[i + 1]) continue;
    if (curve.values[i] > curve.values[i - 1] && curve.values[i] >= curve.values[i + 1]) {
      Peak p;
      p.lambda = curve.lambdas[i].real();
      p.prominence = curve.values[i] / base;
      p.index = i;
      if (p.prominence >= prominence) raw.push_back(p);
    }
  }
  // peaks with at most one grid point between them cannot be told apart at
  // this resolution: merge into the taller one and flag it
  std::sort(raw.begin(), raw.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Peak p = raw[i];
    while (i + 1 < raw.size() && raw[i + 1].index - p.index <= 2) {
      if (raw[i + 1].prominence > p.prominence) {
        p.lambda = raw[i + 1].lambda;
        p.prominence = raw[i + 1].prominence;
        p.index = raw[i + 1].index;
      }
      p.unresolved = true;
      ++i;
    }
    rep.peaks.push_back(p);
  }

  if (reference) {
    for (double ref : *reference) {
      bool hit = false;
      for (const auto& p : rep.peaks)
        if (std::abs(p.lambda - ref) <= rep.grid_step + 1e-12) hit = true;
      (hit ? rep.matched_reference : rep.unmatched_reference).push_back(ref);
    }
  }
  return rep;
}

FarFieldMatrix add_noise(const FarFieldMatrix& F, double delta, std::uint64_t seed) {
  if (delta < 0) throw config_error("noise level must be nonnegative");
  FarFieldMatrix out = F;
  out.delta = delta;
  if (delta == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < out.entries.rows(); ++i)
    for (int j = 0; j < out.entries.cols(); ++j) {
      const double xr = uni(rng), xi = uni(rng);
      out.entries(i, j) *= 1.0 + delta * cplx(xr, xi);
    }
  return out;
}

void IndicatorCurve::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw config_error("cannot write " + path);
  f << "lambda_re,lambda_im,indicator,epsilon\n";
  f.precision(17);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    f << lambdas[i].real() << "," << lambdas[i].imag() << ",";
    if (ok[i])
      f << values[i] << "," << eps[i] << "\n";
    else
      f << "nan,nan\n";
  }
}

IndicatorCurve IndicatorCurve::load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot read " + path);
  IndicatorCurve c;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    double lr, li, v, e;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &lr, &li, &v, &e) != 4)
      throw config_error("malformed indicator CSV line: " + line);
    if (std::isnan(v)) {  // failed lambda point, recorded missing
      c.lambdas.emplace_back(lr, li);
      c.values.push_back(0);
      c.eps.push_back(0);
      c.ok.push_back(0);
      continue;
    }
    c.lambdas.emplace_back(lr, li);
    c.values.push_back(v);
    c.eps.push_back(e);
    c.ok.push_back(1);
  }
  return c;
}

std::string DetectionReport::to_json() const {
  nlohmann::json j;
  j["grid_step"] = grid_step;
  j["peaks"] = nlohmann::json::array();
  for (const auto& p : peaks)
    j["peaks"].push_back({{"lambda", p.lambda},
                          {"prominence", p.prominence},
                          {"unresolved", p.unresolved},
                          {"index", p.index}});
  j["matched_reference"] = matched_reference;
  j["unmatched_reference"] = unmatched_reference;
  return j.dump(2);
}

}  // namespace tsig

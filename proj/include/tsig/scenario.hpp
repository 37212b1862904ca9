#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsig/coefficients.hpp"
#include "tsig/common.hpp"
#include "tsig/mesh.hpp"

namespace tsig {

// One experiment as data: geometry, screen coefficients, wave number,
// direction apertures, the lambda sweep, and the noise model.
struct Scenario {
  // geometry
  ScreenArc arc{0.0, pi, false};
  double disk_radius = 1.0;
  double outer_radius = 2.0;
  double h = 0.05;
  double tip_grading = 2.0;
  // physics
  SurfaceCoefficients coeffs;
  double k = 2.0;
  // directions (aperture arcs per side; full circle by default)
  int n_inc = 32, n_obs = 32;
  double inc_arc0 = 0.0, inc_arc1 = 2.0 * pi;
  double obs_arc0 = 0.0, obs_arc1 = 2.0 * pi;
  // lambda sweep
  double sweep_min = -2.5, sweep_max = 5.5;
  double grid_step = 0.05;
  double im_offset = 0.0;
  // direct-spectrum window and shift
  double lambda_window = 20.0;
  double tau = 1.0;
  // noise
  double delta = 0.01;
  std::uint64_t seed = 1;
  // detection
  int z_count = 16;
  double prominence = 1.8;

  static Scenario defaults();

  std::vector<double> incident_angles() const;
  std::vector<double> observation_angles() const;
  bool limited_aperture() const;
  std::vector<cplx> sweep_grid() const;

  std::string to_json() const;
  static Scenario from_json(const std::string& text);
  std::uint64_t hash() const;           // canonical content hash
  std::uint64_t geometry_hash() const;  // geometry + k only (cache key part)
};

// Pipeline stages, in order: mesh, forward, eigs, detect.  Artifacts land in
// out_dir with a manifest of content hashes; a stage is skipped when the
// manifest shows it already ran for this scenario and its files still match.
struct RunOutcome {
  std::vector<std::string> stages_run;
  std::vector<std::string> stages_skipped;
};
RunOutcome run_scenario(const Scenario& sc, const std::string& out_dir, int threads,
                        const std::vector<std::string>& stages = {});

// Eigenvalue drift between two completed bundles (same geometry and k).
std::string compare_bundles(const std::string& baseline_dir, const std::string& damaged_dir);

struct VerifyRow {
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
};
std::vector<VerifyRow> verify_suite();

// write-temp-rename, so concurrent readers never observe a partial file
void atomic_write(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
std::string cache_directory(const std::string& out_dir);  // honors TSIG_CACHE_DIR

}  // namespace tsig

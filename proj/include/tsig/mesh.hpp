#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tsig/common.hpp"

namespace tsig {

enum class EdgeTag { GammaPlus, GammaMinus, BoundaryRest, Outer };

// Boundary edge, endpoints stored in increasing-angle (CCW) order along the
// circle the edge lies on.  pair links Gamma+ and Gamma- edges.
struct BoundaryEdge {
  int a = -1, b = -1;
  EdgeTag tag = EdgeTag::BoundaryRest;
  int pair = -1;
};

struct Triangle {
  std::array<int, 3> v;
  int region = 0;  // 0 = interior of D, 1 = annulus
};

struct ScreenArc {
  double theta0 = 0.0;
  double theta1 = pi;
  bool closed = false;  // Gamma = whole circle (degenerate closed-screen case)
};

struct MeshMeta {
  ScreenArc arc;
  double disk_radius = 1.0;
  double outer_radius = 2.0;
  double target_h = 0.1;
  double tip_grading = 2.0;
  int refinements = 0;
};

struct BoundaryReport {
  struct Entry {
    int count = 0;
    double length = 0.0;
  };
  Entry gamma_plus, gamma_minus, rest, outer;
};

// Conforming triangulation of the disk |x| < outer_radius with the screen
// Gamma realized as an arc of the circle |x| = disk_radius via duplicated
// dofs.  Immutable after construction; safe for concurrent read.
class CrackMesh {
 public:
  std::vector<Vec2> xy;  // one coordinate per dof
  std::vector<Triangle> tris;
  std::vector<BoundaryEdge> edges;
  std::vector<std::pair<int, int>> double_nodes;  // (plus-side dof, minus-side dof)
  std::vector<int> tips;                          // dofs on the screen boundary (essential)
  MeshMeta meta;

  int num_dofs() const { return static_cast<int>(xy.size()); }

  // Screen parametrization: arc length s in [0, gamma_length()].
  double gamma_length() const;
  Vec2 gamma_point(double s) const;
  double gamma_arclen(const Vec2& p) const;

  double max_diameter() const;

  void check_integrity() const;
  BoundaryReport classify_boundary() const;
  CrackMesh refined() const;

  struct Location {
    int tri = -1;
    std::array<double, 3> bary{};
  };
  // Point location with barycentric coordinates; throws geometry_error when
  // the point is outside the mesh.  region_pref selects a side for points on
  // the shared circle (-1 = any).
  Location locate(const Vec2& p, int region_pref = -1) const;

  std::string to_json() const;
  static CrackMesh from_json(const std::string& text);

  // Called by the builders once the connectivity is final.
  void finalize();

 private:
  // locator grid, built by finalize()
  double cell_ = 0.0;
  int ncell_ = 0;
  std::vector<std::vector<int>> grid_;
};

CrackMesh build_screen_disk_mesh(const ScreenArc& arc, double disk_radius, double outer_radius,
                                 double target_h, double tip_grading = 2.0);

}  // namespace tsig

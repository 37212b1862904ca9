#include "tsig/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

namespace tsig {

namespace {

constexpr double kAngTol = 1e-12;

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Partition [t0, t1] into roughly (t1-t0)/h intervals, with the interval at
// each end subdivided geometrically (ratio g, `layers` pieces, smallest piece
// at the endpoint) to grade toward the screen tips.
std::vector<double> graded_partition(double t0, double t1, double h, double g, int layers) {
  const int n = std::max(2, static_cast<int>(std::ceil((t1 - t0) / h)));
  const double d = (t1 - t0) / n;
  std::vector<double> sizes;
  auto geo = [&](bool small_first) {
    std::vector<double> w(layers);
    double s = 0;
    for (int i = 0; i < layers; ++i) {
      w[i] = std::pow(g, i);
      s += w[i];
    }
    if (!small_first) std::reverse(w.begin(), w.end());
    for (double& x : w) x *= d / s;
    return w;
  };
  const bool grade = g > 1.0 + 1e-12 && layers > 0;
  if (grade)
    for (double s : geo(true)) sizes.push_back(s);
  else
    sizes.push_back(d);
  for (int i = 1; i + 1 < n; ++i) sizes.push_back(d);
  if (n > 1) {
    if (grade)
      for (double s : geo(false)) sizes.push_back(s);
    else
      sizes.push_back(d);
  }
  std::vector<double> pts{t0};
  double x = t0;
  for (double s : sizes) pts.push_back(x += s);
  pts.back() = t1;  // kill accumulated roundoff
  return pts;
}

}  // namespace

double CrackMesh::gamma_length() const {
  const double len = meta.arc.closed ? 2.0 * pi : meta.arc.theta1 - meta.arc.theta0;
  return meta.disk_radius * len;
}

Vec2 CrackMesh::gamma_point(double s) const {
  const double L = gamma_length();
  if (s < -1e-12 || s > L + 1e-12)
    throw std::domain_error("gamma_point: arc parameter outside screen");
  const double th = meta.arc.theta0 + std::clamp(s, 0.0, L) / meta.disk_radius;
  return {meta.disk_radius * std::cos(th), meta.disk_radius * std::sin(th)};
}

double CrackMesh::gamma_arclen(const Vec2& p) const {
  double dth = std::atan2(p[1], p[0]) - meta.arc.theta0;
  dth -= 2.0 * pi * std::floor(dth / (2.0 * pi));
  const double span = meta.arc.closed ? 2.0 * pi : meta.arc.theta1 - meta.arc.theta0;
  if (dth > span) {
    if (2.0 * pi - dth < 1e-9) dth = 0.0;
    else if (dth - span < 1e-9) dth = span;
    else throw std::domain_error("gamma_arclen: point not on the screen arc");
  }
  return meta.disk_radius * dth;
}

double CrackMesh::max_diameter() const {
  double d = 0;
  for (const auto& t : tris)
    for (int e = 0; e < 3; ++e) d = std::max(d, norm(xy[t.v[e]] - xy[t.v[(e + 1) % 3]]));
  return d;
}

CrackMesh build_screen_disk_mesh(const ScreenArc& arc_in, double disk_radius, double outer_radius,
                                 double target_h, double tip_grading) {
  if (disk_radius <= 0 || target_h <= 0) throw geometry_error("disk_radius and target_h must be positive");
  if (outer_radius <= disk_radius) throw geometry_error("outer_radius must exceed disk_radius");
  if (tip_grading < 1.0) throw geometry_error("tip_grading must be >= 1");

  ScreenArc arc = arc_in;
  double span = arc.theta1 - arc.theta0;
  if (arc.closed) {
    span = 2.0 * pi;
    arc.theta1 = arc.theta0 + span;
  } else {
    if (span <= kAngTol) throw geometry_error("degenerate arc: zero length");
    if (span >= 2.0 * pi - kAngTol)
      throw geometry_error("full-circle arc requires the explicit closed flag");
  }

  const double a = disk_radius, R = outer_radius, h = target_h;
  const double h_ang = h / a;
  const int layers = 3;

  // Shared angular partition: positions plus node kind (0 tip, 1 gamma, 2 rest).
  std::vector<double> ang;
  std::vector<int> kind;
  int n_gamma_edges = 0;
  if (arc.closed) {
    const int n = std::max(8, static_cast<int>(std::ceil(2.0 * pi / h_ang)));
    for (int j = 0; j < n; ++j) {
      ang.push_back(arc.theta0 + 2.0 * pi * j / n);
      kind.push_back(1);
    }
    n_gamma_edges = n;
  } else {
    const auto part1 = graded_partition(arc.theta0, arc.theta1, h_ang, tip_grading, layers);
    const auto part2 = graded_partition(arc.theta1, arc.theta0 + 2.0 * pi, h_ang, tip_grading, layers);
    for (std::size_t j = 0; j < part1.size(); ++j) {
      ang.push_back(part1[j]);
      kind.push_back(j == 0 || j + 1 == part1.size() ? 0 : 1);
    }
    for (std::size_t j = 1; j + 1 < part2.size(); ++j) {
      ang.push_back(part2[j]);
      kind.push_back(2);
    }
    n_gamma_edges = static_cast<int>(part1.size()) - 1;
  }
  const int nA = static_cast<int>(ang.size());

  const int nr1 = std::max(1, static_cast<int>(std::lround(a / h)));
  const int nr2 = std::max(1, static_cast<int>(std::lround((R - a) / h)));

  CrackMesh m;
  m.meta = MeshMeta{arc, disk_radius, outer_radius, target_h, tip_grading, 0};
  auto add = [&m](double x, double y) {
    m.xy.push_back({x, y});
    return static_cast<int>(m.xy.size()) - 1;
  };
  auto ring_at = [&](double r) {
    std::vector<int> ring(nA);
    for (int j = 0; j < nA; ++j) ring[j] = add(r * std::cos(ang[j]), r * std::sin(ang[j]));
    return ring;
  };

  const int center = add(0.0, 0.0);

  std::vector<std::vector<int>> rings0;  // interior-of-D rings, innermost first
  for (int i = 1; i < nr1; ++i) rings0.push_back(ring_at(a * i / nr1));
  std::vector<int> minus_ring = ring_at(a);
  rings0.push_back(minus_ring);

  std::vector<int> plus_ring(nA);
  for (int j = 0; j < nA; ++j) {
    if (kind[j] == 1) {
      const Vec2 c = m.xy[minus_ring[j]];
      plus_ring[j] = add(c[0], c[1]);
      m.double_nodes.push_back({plus_ring[j], minus_ring[j]});
    } else {
      plus_ring[j] = minus_ring[j];
      if (kind[j] == 0) m.tips.push_back(minus_ring[j]);
    }
  }

  std::vector<std::vector<int>> rings1{plus_ring};
  for (int i = 1; i < nr2; ++i) rings1.push_back(ring_at(a + (R - a) * i / nr2));
  std::vector<int> outer_ring = ring_at(R);
  rings1.push_back(outer_ring);

  auto next = [nA](int j) { return (j + 1) % nA; };
  for (int j = 0; j < nA; ++j) m.tris.push_back({{center, rings0[0][j], rings0[0][next(j)]}, 0});
  auto band = [&](const std::vector<int>& lo, const std::vector<int>& hi, int region) {
    for (int j = 0; j < nA; ++j) {
      const int A = lo[j], B = lo[next(j)], C = hi[next(j)], D = hi[j];
      m.tris.push_back({{A, C, B}, region});
      m.tris.push_back({{A, D, C}, region});
    }
  };
  for (std::size_t i = 0; i + 1 < rings0.size(); ++i) band(rings0[i], rings0[i + 1], 0);
  for (std::size_t i = 0; i + 1 < rings1.size(); ++i) band(rings1[i], rings1[i + 1], 1);

  for (int j = 0; j < nA; ++j) {
    const bool on_gamma = arc.closed || j < n_gamma_edges;
    if (on_gamma) {
      BoundaryEdge minus{minus_ring[j], minus_ring[next(j)], EdgeTag::GammaMinus, -1};
      BoundaryEdge plus{plus_ring[j], plus_ring[next(j)], EdgeTag::GammaPlus, -1};
      const int im = static_cast<int>(m.edges.size());
      minus.pair = im + 1;
      plus.pair = im;
      m.edges.push_back(minus);
      m.edges.push_back(plus);
    } else {
      m.edges.push_back({minus_ring[j], minus_ring[next(j)], EdgeTag::BoundaryRest, -1});
    }
  }
  for (int j = 0; j < nA; ++j)
    m.edges.push_back({outer_ring[j], outer_ring[next(j)], EdgeTag::Outer, -1});

  m.finalize();
  m.check_integrity();
  return m;
}

void CrackMesh::check_integrity() const {
  const int n = num_dofs();
  for (const auto& t : tris) {
    for (int v : t.v)
      if (v < 0 || v >= n) throw mesh_integrity_error("triangle vertex out of range");
    const double A2 = cross(xy[t.v[1]] - xy[t.v[0]], xy[t.v[2]] - xy[t.v[0]]);
    if (!(A2 > 0))
      throw mesh_integrity_error(
          "triangle with non-positive signed area at (" + std::to_string(xy[t.v[0]][0]) + ", " +
          std::to_string(xy[t.v[0]][1]) + "), 2A = " + std::to_string(A2));
  }
  std::unordered_map<std::uint64_t, int> use;
  for (const auto& t : tris)
    for (int e = 0; e < 3; ++e) ++use[pair_key(t.v[e], t.v[(e + 1) % 3])];
  std::unordered_map<std::uint64_t, int> tagged;
  for (const auto& e : edges) ++tagged[pair_key(e.a, e.b)];
  for (const auto& [key, cnt] : use) {
    if (cnt > 2) throw mesh_integrity_error("non-conforming edge shared by >2 triangles");
    if (cnt == 1 && tagged.find(key) == tagged.end())
      throw mesh_integrity_error("untagged boundary edge");
  }
  for (const auto& [key, cnt] : tagged)
    if (cnt != 1) throw mesh_integrity_error("duplicate boundary edge tag");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const bool is_gamma = e.tag == EdgeTag::GammaPlus || e.tag == EdgeTag::GammaMinus;
    if (is_gamma) {
      if (e.pair < 0 || e.pair >= static_cast<int>(edges.size()))
        throw mesh_integrity_error("gamma edge without partner");
      const auto& p = edges[e.pair];
      if (p.pair != static_cast<int>(i)) throw mesh_integrity_error("gamma pairing not mutual");
      if (!(xy[e.a] == xy[p.a] && xy[e.b] == xy[p.b]))
        throw mesh_integrity_error("paired gamma edges not geometrically coincident");
    }
    if (e.tag == EdgeTag::GammaPlus) {
      const Vec2 t = xy[e.b] - xy[e.a];
      const Vec2 nu{t[1], -t[0]};
      const Vec2 c = 0.5 * (xy[e.a] + xy[e.b]);
      if (!(dot(nu, c) > 0)) throw mesh_integrity_error("gamma+ normal not outward from D");
    }
  }
  for (const auto& [p, mns] : double_nodes) {
    if (p == mns) throw mesh_integrity_error("double node maps dof to itself");
    if (!(xy[p] == xy[mns])) throw mesh_integrity_error("double node coordinates differ");
  }
}

BoundaryReport CrackMesh::classify_boundary() const {
  BoundaryReport r;
  for (const auto& e : edges) {
    const double len = norm(xy[e.b] - xy[e.a]);
    BoundaryReport::Entry* ent = nullptr;
    switch (e.tag) {
      case EdgeTag::GammaPlus: ent = &r.gamma_plus; break;
      case EdgeTag::GammaMinus: ent = &r.gamma_minus; break;
      case EdgeTag::BoundaryRest: ent = &r.rest; break;
      case EdgeTag::Outer: ent = &r.outer; break;
    }
    ++ent->count;
    ent->length += len;
  }
  return r;
}

CrackMesh CrackMesh::refined() const {
  CrackMesh out;
  out.meta = meta;
  out.meta.target_h *= 0.5;
  out.meta.refinements += 1;
  out.xy = xy;
  out.tips = tips;
  out.double_nodes = double_nodes;

  std::unordered_map<std::uint64_t, double> circle;  // boundary pair -> circle radius
  for (const auto& e : edges)
    circle[pair_key(e.a, e.b)] = e.tag == EdgeTag::Outer ? meta.outer_radius : meta.disk_radius;

  std::unordered_map<std::uint64_t, int> mid;
  auto midpoint = [&](int p, int q) {
    const auto key = pair_key(p, q);
    if (auto it = mid.find(key); it != mid.end()) return it->second;
    Vec2 c = 0.5 * (xy[p] + xy[q]);
    if (auto it = circle.find(key); it != circle.end()) c = (it->second / norm(c)) * c;
    out.xy.push_back(c);
    const int id = static_cast<int>(out.xy.size()) - 1;
    mid.emplace(key, id);
    return id;
  };

  for (const auto& t : tris) {
    const int v0 = t.v[0], v1 = t.v[1], v2 = t.v[2];
    const int m01 = midpoint(v0, v1), m12 = midpoint(v1, v2), m20 = midpoint(v2, v0);
    out.tris.push_back({{v0, m01, m20}, t.region});
    out.tris.push_back({{v1, m12, m01}, t.region});
    out.tris.push_back({{v2, m20, m12}, t.region});
    out.tris.push_back({{m01, m12, m20}, t.region});
  }

  std::vector<std::array<int, 2>> children(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const int mm = midpoint(e.a, e.b);
    children[i][0] = static_cast<int>(out.edges.size());
    out.edges.push_back({e.a, mm, e.tag, -1});
    children[i][1] = static_cast<int>(out.edges.size());
    out.edges.push_back({mm, e.b, e.tag, -1});
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.pair < 0) continue;
    for (int c = 0; c < 2; ++c) {
      out.edges[children[i][c]].pair = children[e.pair][c];
      out.edges[children[e.pair][c]].pair = children[i][c];
    }
    if (e.tag == EdgeTag::GammaPlus) {
      const auto& p = edges[e.pair];
      out.double_nodes.push_back({midpoint(e.a, e.b), midpoint(p.a, p.b)});
    }
  }

  out.finalize();
  out.check_integrity();
  return out;
}

void CrackMesh::finalize() {
  const double R = meta.outer_radius;
  cell_ = std::max(4.0 * meta.target_h, 1e-3 * R);
  ncell_ = std::max(1, static_cast<int>(std::ceil(2.0 * R / cell_)));
  grid_.assign(static_cast<std::size_t>(ncell_) * ncell_, {});
  auto clampc = [&](int c) { return std::clamp(c, 0, ncell_ - 1); };
  for (std::size_t t = 0; t < tris.size(); ++t) {
    double x0 = 1e30, x1 = -1e30, y0 = 1e30, y1 = -1e30;
    for (int v : tris[t].v) {
      x0 = std::min(x0, xy[v][0]); x1 = std::max(x1, xy[v][0]);
      y0 = std::min(y0, xy[v][1]); y1 = std::max(y1, xy[v][1]);
    }
    const int i0 = clampc(static_cast<int>((x0 + R) / cell_));
    const int i1 = clampc(static_cast<int>((x1 + R) / cell_));
    const int j0 = clampc(static_cast<int>((y0 + R) / cell_));
    const int j1 = clampc(static_cast<int>((y1 + R) / cell_));
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) grid_[static_cast<std::size_t>(j) * ncell_ + i].push_back(static_cast<int>(t));
  }
}

CrackMesh::Location CrackMesh::locate(const Vec2& p, int region_pref) const {
  const double R = meta.outer_radius;
  auto try_tri = [&](int t, Location& loc) {
    const auto& tr = tris[t];
    const Vec2 A = xy[tr.v[0]], B = xy[tr.v[1]], C = xy[tr.v[2]];
    const double det = cross(B - A, C - A);
    const double b1 = cross(p - A, C - A) / det;
    const double b2 = cross(B - A, p - A) / det;
    const double b0 = 1.0 - b1 - b2;
    const double tol = -1e-9;
    if (b0 >= tol && b1 >= tol && b2 >= tol) {
      loc = {t, {b0, b1, b2}};
      return true;
    }
    return false;
  };
  auto scan = [&](const std::vector<int>& cand) {
    Location best;
    for (int t : cand) {
      Location loc;
      if (try_tri(t, loc)) {
        if (region_pref < 0 || tris[t].region == region_pref) return loc;
        if (best.tri < 0) best = loc;
      }
    }
    return best;
  };
  if (ncell_ > 0) {
    const int i = std::clamp(static_cast<int>((p[0] + R) / cell_), 0, ncell_ - 1);
    const int j = std::clamp(static_cast<int>((p[1] + R) / cell_), 0, ncell_ - 1);
    const Location loc = scan(grid_[static_cast<std::size_t>(j) * ncell_ + i]);
    if (loc.tri >= 0) return loc;
  }
  std::vector<int> all(tris.size());
  for (std::size_t t = 0; t < tris.size(); ++t) all[t] = static_cast<int>(t);
  const Location loc = scan(all);
  if (loc.tri < 0) throw geometry_error("locate: point outside mesh");
  return loc;
}

namespace {
const char* tag_name(EdgeTag t) {
  switch (t) {
    case EdgeTag::GammaPlus: return "gamma+";
    case EdgeTag::GammaMinus: return "gamma-";
    case EdgeTag::BoundaryRest: return "rest";
    default: return "outer";
  }
}
EdgeTag tag_from(const std::string& s) {
  if (s == "gamma+") return EdgeTag::GammaPlus;
  if (s == "gamma-") return EdgeTag::GammaMinus;
  if (s == "rest") return EdgeTag::BoundaryRest;
  if (s == "outer") return EdgeTag::Outer;
  throw config_error("unknown edge tag: " + s);
}
}  // namespace

std::string CrackMesh::to_json() const {
  nlohmann::json j;
  for (const auto& v : xy) j["vertices"].push_back({v[0], v[1]});
  for (const auto& t : tris) j["triangles"].push_back({t.v[0], t.v[1], t.v[2], t.region});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges)
    j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"tag", tag_name(e.tag)}, {"pair", e.pair}});
  for (const auto& [p, mn] : double_nodes) j["double_nodes"].push_back({p, mn});
  j["tips"] = tips;
  j["meta"] = {{"theta0", meta.arc.theta0}, {"theta1", meta.arc.theta1},
               {"closed", meta.arc.closed}, {"disk_radius", meta.disk_radius},
               {"outer_radius", meta.outer_radius}, {"h", meta.target_h},
               {"tip_grading", meta.tip_grading}, {"refinements", meta.refinements}};
  if (double_nodes.empty()) j["double_nodes"] = nlohmann::json::array();
  if (tips.empty()) j["tips"] = nlohmann::json::array();
  return j.dump();
}

CrackMesh CrackMesh::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CrackMesh m;
  for (const auto& v : j.at("vertices")) m.xy.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  for (const auto& t : j.at("triangles"))
    m.tris.push_back({{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()}, t.at(3).get<int>()});
  for (const auto& e : j.at("edges"))
    m.edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(),
                       tag_from(e.at("tag").get<std::string>()), e.at("pair").get<int>()});
  for (const auto& d : j.at("double_nodes"))
    m.double_nodes.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
  m.tips = j.at("tips").get<std::vector<int>>();
  const auto& mm = j.at("meta");
  m.meta.arc = {mm.at("theta0").get<double>(), mm.at("theta1").get<double>(), mm.at("closed").get<bool>()};
  m.meta.disk_radius = mm.at("disk_radius").get<double>();
  m.meta.outer_radius = mm.at("outer_radius").get<double>();
  m.meta.target_h = mm.at("h").get<double>();
  m.meta.tip_grading = mm.at("tip_grading").get<double>();
  m.meta.refinements = mm.at("refinements").get<int>();
  m.finalize();
  m.check_integrity();
  return m;
}

}  // namespace tsig

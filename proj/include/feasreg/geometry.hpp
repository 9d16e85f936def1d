#pragma once

#include "feasreg/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace feasreg {

/// Closed halfspace {x : a.dot(x) <= b} with unit normal a.
struct Halfspace2 {
  Vec2 a;
  double b = 0.0;

  double eval(const Vec2& x) const { return b - a.dot(x); }  // >= 0 inside
};

namespace detail {

inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

inline double signed_area(const std::vector<Vec2>& ring) {
  if (ring.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % ring.size()];
    acc += cross2(p, q);
  }
  return 0.5 * acc;
}

// Drops duplicate and collinear-in-sequence points. Keeps orientation.
inline std::vector<Vec2> normalize_ring(std::vector<Vec2> ring) {
  auto dedupe = [](std::vector<Vec2>& r) {
    std::vector<Vec2> out;
    for (const Vec2& p : r) {
      if (out.empty() || (p - out.back()).norm() > tol::collinear) out.push_back(p);
    }
    while (out.size() > 1 && (out.front() - out.back()).norm() <= tol::collinear) out.pop_back();
    r = std::move(out);
  };
  dedupe(ring);
  if (ring.size() < 3) return ring;
  // Remove middle points within tol::collinear (perpendicular distance) of the
  // line through their neighbours; repeat until stable.
  bool changed = true;
  while (changed && ring.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec2& a = ring[(i + ring.size() - 1) % ring.size()];
      const Vec2& b = ring[i];
      const Vec2& c = ring[(i + 1) % ring.size()];
      const double len = (c - a).norm();
      if (len < tol::collinear || std::abs(cross2(b - a, c - a)) <= len * tol::collinear) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return ring;
}

// Sutherland-Hodgman clip of a convex ring against a.dot(x) <= b.
inline std::vector<Vec2> clip(const std::vector<Vec2>& ring, const Vec2& a, double b) {
  std::vector<Vec2> out;
  const std::size_t n = ring.size();
  if (n == 0) return out;
  constexpr double eps = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % n];
    const double dp = b - a.dot(p);
    const double dq = b - a.dot(q);
    if (dp >= -eps) out.push_back(p);
    if ((dp > eps && dq < -eps) || (dp < -eps && dq > eps)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace detail

/// Convex polygon holding both the CCW vertex list and the matching
/// halfspace list {a.x <= b}. Constructed through from_vertices /
/// from_halfspaces / convex_hull_2d; immutable afterwards, so instances may
/// be read from any number of threads.
class Polygon2 {
 public:
  static Polygon2 from_vertices(std::vector<Vec2> vertices);
  static Polygon2 from_halfspaces(const std::vector<Halfspace2>& halfspaces);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Halfspace2>& halfspaces() const { return halfspaces_; }
  std::size_t size() const { return vertices_.size(); }

  /// Average of the vertices (the planner's scaling pivot).
  Vec2 vertex_centroid() const {
    Vec2 c = Vec2::Zero();
    for (const Vec2& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
  }

 private:
  Polygon2() = default;
  std::vector<Vec2> vertices_;     // CCW, no three consecutive collinear
  std::vector<Halfspace2> halfspaces_;  // one per edge, unit normals

  friend Polygon2 convex_hull_2d(std::vector<Vec2> points);
};

enum class PointLocation { inside, boundary, outside };

struct PointQuery {
  PointLocation location = PointLocation::outside;
  double signed_distance = 0.0;  // m; min over halfspaces of (b - a.x), > 0 inside
};

namespace detail {

inline std::vector<Halfspace2> edges_to_halfspaces(const std::vector<Vec2>& ring) {
  std::vector<Halfspace2> hs;
  hs.reserve(ring.size());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % ring.size()];
    const Vec2 e = q - p;
    const double len = e.norm();
    if (len <= tol::collinear) continue;
    const Vec2 a(e.y() / len, -e.x() / len);  // outward for CCW
    hs.push_back({a, a.dot(p)});
  }
  return hs;
}

}  // namespace detail

inline Polygon2 Polygon2::from_vertices(std::vector<Vec2> vertices) {
  std::vector<Vec2> ring = detail::normalize_ring(std::move(vertices));
  if (ring.size() < 3) throw DegenerateInput("Polygon2: fewer than 3 distinct vertices");
  if (detail::signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
  // Convexity in CCW order: every turn strictly left.
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    const Vec2& c = ring[(i + 2) % n];
    if (detail::cross2(b - a, c - b) <= 0.0)
      throw DegenerateInput("Polygon2: vertex list is not strictly convex CCW");
  }
  Polygon2 p;
  p.vertices_ = std::move(ring);
  p.halfspaces_ = detail::edges_to_halfspaces(p.vertices_);
  return p;
}

/// Intersection of halfspaces, returned with the vertex form completed.
/// Throws UnboundedSet when the intersection is unbounded and EmptySet when
/// it is empty (or has dimension < 2).
inline Polygon2 Polygon2::from_halfspaces(const std::vector<Halfspace2>& halfspaces) {
  constexpr double kBig = 1e7;  // m, far outside any meter-scale scene
  std::vector<Vec2> ring = {{-kBig, -kBig}, {kBig, -kBig}, {kBig, kBig}, {-kBig, kBig}};
  for (const Halfspace2& h : halfspaces) {
    const double na = h.a.norm();
    if (na <= 0.0) throw DegenerateInput("Polygon2: zero halfspace normal");
    ring = detail::clip(ring, h.a / na, h.b / na);
    if (ring.empty()) throw EmptySet("Polygon2: halfspace intersection is empty");
  }
  ring = detail::normalize_ring(std::move(ring));
  for (const Vec2& v : ring) {
    if (std::abs(v.x()) >= 0.9 * kBig || std::abs(v.y()) >= 0.9 * kBig)
      throw UnboundedSet("Polygon2: halfspace intersection is unbounded");
  }
  if (ring.size() < 3 || detail::signed_area(ring) <= tol::collinear * tol::collinear)
    throw EmptySet("Polygon2: halfspace intersection is empty or lower-dimensional");
  Polygon2 p;
  p.vertices_ = std::move(ring);
  p.halfspaces_ = detail::edges_to_halfspaces(p.vertices_);
  return p;
}

/// Monotone-chain convex hull, CCW output. The chain itself pops on exact
/// non-left turns (a tolerance there mistakes doubled-back collinear runs for
/// droppable points); the 1e-9 collinearity band is applied afterwards on the
/// convex ring, where every vertex projects between its neighbours.
/// Throws DegenerateInput for < 3 distinct points or an all-collinear set.
inline Polygon2 convex_hull_2d(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& p, const Vec2& q) {
    return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
  });
  std::vector<Vec2> distinct;
  for (const Vec2& p : points) {
    if (distinct.empty() || (p - distinct.back()).norm() > tol::collinear) distinct.push_back(p);
  }
  if (distinct.size() < 3) throw DegenerateInput("convex_hull_2d: fewer than 3 distinct points");

  auto turns_right = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return detail::cross2(a - o, b - o) <= 0.0;
  };
  const std::size_t n = distinct.size();
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && turns_right(hull[k - 2], hull[k - 1], distinct[i])) --k;
    hull[k++] = distinct[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
    while (k >= lower && turns_right(hull[k - 2], hull[k - 1], distinct[i])) --k;
    hull[k++] = distinct[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateInput("convex_hull_2d: input points are collinear");
  Polygon2 p;
  p.vertices_ = detail::normalize_ring(std::move(hull));
  if (p.vertices_.size() < 3) throw DegenerateInput("convex_hull_2d: input points are collinear");
  p.halfspaces_ = detail::edges_to_halfspaces(p.vertices_);
  return p;
}

/// Shoelace area, always >= 0 for a valid polygon.
inline double polygon_area(const Polygon2& p) {
  return std::max(0.0, detail::signed_area(p.vertices()));
}

inline PointQuery point_in_polygon(const Polygon2& p, const Vec2& x) {
  double sd = std::numeric_limits<double>::infinity();
  for (const Halfspace2& h : p.halfspaces()) sd = std::min(sd, h.eval(x));
  PointQuery q;
  q.signed_distance = sd;
  if (std::abs(sd) <= tol::boundary_band)
    q.location = PointLocation::boundary;
  else
    q.location = sd > 0.0 ? PointLocation::inside : PointLocation::outside;
  return q;
}

/// Affine scaling about an explicit pivot: v' = s (v - pivot) + pivot,
/// s in (0, 1].
inline Polygon2 scale_polygon(const Polygon2& p, double s, const Vec2& pivot) {
  if (s <= 0.0 || s > 1.0) throw DegenerateInput("scale_polygon: s must be in (0, 1]");
  std::vector<Vec2> scaled;
  scaled.reserve(p.size());
  for (const Vec2& v : p.vertices()) scaled.push_back(s * (v - pivot) + pivot);
  return Polygon2::from_vertices(std::move(scaled));
}

/// Scaling about the vertex centroid (the cheap pivot; see the optim header
/// for the Chebyshev-center variant).
inline Polygon2 scale_polygon(const Polygon2& p, double s) {
  return scale_polygon(p, s, p.vertex_centroid());
}

inline double point_polygon_distance(const Vec2& x, const Polygon2& p) {
  if (point_in_polygon(p, x).location != PointLocation::outside) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  const auto& v = p.vertices();
  for (std::size_t i = 0; i < v.size(); ++i)
    d = std::min(d, detail::point_segment_distance(x, v[i], v[(i + 1) % v.size()]));
  return d;
}

inline double hausdorff_distance(const Polygon2& p, const Polygon2& q) {
  double d = 0.0;
  for (const Vec2& v : p.vertices()) d = std::max(d, point_polygon_distance(v, q));
  for (const Vec2& v : q.vertices()) d = std::max(d, point_polygon_distance(v, p));
  return d;
}

/// Centrally symmetric polytope {center + sum_i alpha_i g_i, alpha in [-1,1]^p}.
struct Zonotope {
  VecX center;
  std::vector<VecX> generators;

  VecX point(const VecX& alphas) const {
    if (static_cast<std::size_t>(alphas.size()) != generators.size())
      throw DimensionMismatch("Zonotope::point: coefficient count mismatch");
    VecX p = center;
    for (std::size_t i = 0; i < generators.size(); ++i) p += alphas[static_cast<int>(i)] * generators[i];
    return p;
  }

  VecX reflect(const VecX& p) const { return 2.0 * center - p; }
};

/// Polyhedral cone through the origin; R-representation is primary, the
/// H-representation (rows c with c.x <= 0) is optional.
struct PolyhedralCone {
  std::vector<VecX> rays;
  std::optional<std::vector<VecX>> halfspace_normals;

  int dimension() const { return rays.empty() ? 0 : static_cast<int>(rays.front().size()); }

  void validate() const {
    for (const VecX& r : rays) {
      if (r.norm() <= 0.0) throw DegenerateInput("PolyhedralCone: zero ray");
      if (static_cast<std::size_t>(r.size()) != static_cast<std::size_t>(dimension()))
        throw DimensionMismatch("PolyhedralCone: inconsistent ray dimensions");
    }
    if (halfspace_normals) {
      for (const VecX& c : *halfspace_normals)
        for (const VecX& r : rays)
          if (c.dot(r) > 1e-9 * r.norm() * std::max(1.0, c.norm()))
            throw DegenerateInput("PolyhedralCone: ray violates halfspace form");
    }
  }
};

/// Ray-union Minkowski sum of two cones in R-representation. The result is
/// deliberately left redundant (interior rays are kept); prune_cone_rays in
/// the optim header removes them for display.
inline PolyhedralCone minkowski_sum_cones(const PolyhedralCone& c1, const PolyhedralCone& c2) {
  if (c1.dimension() != c2.dimension() && !c1.rays.empty() && !c2.rays.empty())
    throw DimensionMismatch("minkowski_sum_cones: ambient dimensions differ");
  PolyhedralCone out;
  out.rays = c1.rays;
  out.rays.insert(out.rays.end(), c2.rays.begin(), c2.rays.end());
  return out;
}

/// Pairwise Minkowski sum of finite point sets, O(a*b). Test-oracle helper.
inline std::vector<VecX> minkowski_sum_points(const std::vector<VecX>& a,
                                              const std::vector<VecX>& b) {
  std::vector<VecX> out;
  out.reserve(a.size() * b.size());
  for (const VecX& p : a)
    for (const VecX& q : b) {
      if (p.size() != q.size()) throw DimensionMismatch("minkowski_sum_points");
      out.push_back(p + q);
    }
  return out;
}

}  // namespace feasreg

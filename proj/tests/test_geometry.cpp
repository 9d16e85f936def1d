#include "feasreg/geometry.hpp"
#include "feasreg/linprog.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace feasreg;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Vec2> random_disk_points(std::mt19937& rng, int n, double radius = 1.0) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < n) {
    Vec2 p(u(rng), u(rng));
    if (p.norm() <= radius) pts.push_back(p);
  }
  return pts;
}

// Brute-force hull validity: every input point lies on the inner side of
// every hull edge (left of the CCW edge), within the collinearity band.
bool all_points_left_of_every_edge(const Polygon2& hull, const std::vector<Vec2>& pts) {
  const auto& v = hull.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const Vec2 e = b - a;
    for (const Vec2& p : pts) {
      if (detail::cross2(e, p - a) < -e.norm() * 1e-9) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("hull of a triangle is itself", "[geometry]") {
  const Polygon2 h = convex_hull_2d({{0, 0}, {1, 0}, {0, 1}});
  REQUIRE(h.size() == 3);
  for (const Vec2& v : h.vertices()) {
    const bool known = (v - Vec2(0, 0)).norm() < 1e-12 || (v - Vec2(1, 0)).norm() < 1e-12 ||
                       (v - Vec2(0, 1)).norm() < 1e-12;
    CHECK(known);
  }
}

TEST_CASE("hull drops interior points", "[geometry]") {
  const Polygon2 h = convex_hull_2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  REQUIRE(h.size() == 4);
  for (const Vec2& v : h.vertices()) CHECK((v - Vec2(0.5, 0.5)).norm() > 1e-9);
}

TEST_CASE("hull matches edge-sidedness oracle on random disks", "[geometry]") {
  std::mt19937 rng(7001);
  const std::vector<Vec2> pts = random_disk_points(rng, 200);
  const Polygon2 h = convex_hull_2d(pts);
  CHECK(all_points_left_of_every_edge(h, pts));
  for (const Vec2& p : pts)
    for (const Halfspace2& hs : h.halfspaces()) CHECK(hs.eval(p) >= -1e-9);
}

TEST_CASE("hull is idempotent", "[geometry]") {
  std::mt19937 rng(7002);
  for (int rep = 0; rep < 20; ++rep) {
    const Polygon2 h = convex_hull_2d(random_disk_points(rng, 40));
    const Polygon2 hh = convex_hull_2d(h.vertices());
    REQUIRE(hh.size() == h.size());
    // Same vertex set (possibly rotated start index).
    for (const Vec2& v : h.vertices()) {
      double best = 1e9;
      for (const Vec2& w : hh.vertices()) best = std::min(best, (v - w).norm());
      CHECK(best < 1e-12);
    }
  }
}

TEST_CASE("hull degenerate inputs are rejected", "[geometry]") {
  CHECK_THROWS_AS(convex_hull_2d({{0, 0}, {1, 1}}), DegenerateInput);
  CHECK_THROWS_AS(convex_hull_2d({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), DegenerateInput);
  CHECK_THROWS_AS(convex_hull_2d({{0, 0}, {0, 0}, {1e-10, 1e-10}}), DegenerateInput);
}

TEST_CASE("hull distributes over Minkowski sums of point sets", "[geometry]") {
  std::mt19937 rng(7003);
  std::uniform_int_distribution<int> count(3, 8);
  for (int rep = 0; rep < 25; ++rep) {
    const auto as2 = random_disk_points(rng, count(rng));
    const auto bs2 = random_disk_points(rng, count(rng));
    auto lift = [](const std::vector<Vec2>& v) {
      std::vector<VecX> out;
      for (const Vec2& p : v) out.push_back(p);
      return out;
    };
    const auto sum = minkowski_sum_points(lift(as2), lift(bs2));
    std::vector<Vec2> sum2;
    for (const VecX& p : sum) sum2.emplace_back(p[0], p[1]);
    const Polygon2 hull_of_sum = convex_hull_2d(sum2);

    const Polygon2 ha = convex_hull_2d(as2);
    const Polygon2 hb = convex_hull_2d(bs2);
    std::vector<Vec2> hull_sum2;
    for (const Vec2& p : ha.vertices())
      for (const Vec2& q : hb.vertices()) hull_sum2.push_back(p + q);
    const Polygon2 sum_of_hulls = convex_hull_2d(hull_sum2);

    CHECK(hausdorff_distance(hull_of_sum, sum_of_hulls) < 1e-9);
  }
}

TEST_CASE("polygon area: squares, triangles, Monte-Carlo", "[geometry]") {
  const Polygon2 sq = Polygon2::from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(polygon_area(sq) == Catch::Approx(1.0));
  const Polygon2 tri = Polygon2::from_vertices({{0, 0}, {1, 0}, {0, 1}});
  CHECK(polygon_area(tri) == Catch::Approx(0.5));

  std::mt19937 rng(7004);
  const Polygon2 h = convex_hull_2d(random_disk_points(rng, 60));
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const Vec2& v : h.vertices()) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  std::uniform_real_distribution<double> ux(xmin, xmax), uy(ymin, ymax);
  int hits = 0;
  const int samples = 400000;
  for (int i = 0; i < samples; ++i) {
    if (point_in_polygon(h, Vec2(ux(rng), uy(rng))).location != PointLocation::outside) ++hits;
  }
  const double mc = (xmax - xmin) * (ymax - ymin) * hits / samples;
  CHECK(std::abs(mc - polygon_area(h)) / polygon_area(h) < 0.01);
}

TEST_CASE("scale_polygon identity and area ratio", "[geometry]") {
  const Polygon2 sq = Polygon2::from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const Polygon2 same = scale_polygon(sq, 1.0);
  CHECK(hausdorff_distance(sq, same) < 1e-12);

  const Polygon2 small = scale_polygon(sq, 0.8);
  REQUIRE(small.size() == 4);
  CHECK(polygon_area(small) == Catch::Approx(0.64));
  CHECK(small.vertex_centroid().x() == Catch::Approx(0.5));
  CHECK(small.vertex_centroid().y() == Catch::Approx(0.5));
  for (const Vec2& v : small.vertices()) {
    CHECK(std::abs(std::abs(v.x() - 0.5) - 0.4) < 1e-12);
    CHECK(std::abs(std::abs(v.y() - 0.5) - 0.4) < 1e-12);
  }

  std::mt19937 rng(7005);
  for (int rep = 0; rep < 30; ++rep) {
    const Polygon2 h = convex_hull_2d(random_disk_points(rng, 25));
    const double s = 0.65;
    const Polygon2 hs = scale_polygon(h, s);
    CHECK(hs.size() == h.size());
    CHECK(std::abs(polygon_area(hs) / polygon_area(h) - 0.4225) < 1e-9);
  }
}

TEST_CASE("point_in_polygon classifications", "[geometry]") {
  std::mt19937 rng(7006);
  for (int rep = 0; rep < 20; ++rep) {
    const Polygon2 h = convex_hull_2d(random_disk_points(rng, 30));
    CHECK(point_in_polygon(h, h.vertex_centroid()).location == PointLocation::inside);
    CHECK(point_in_polygon(h, h.vertices().front()).location == PointLocation::boundary);

    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 100; ++k) {
      const Vec2 x(u(rng), u(rng));
      const PointQuery q = point_in_polygon(h, x);
      // Direct per-halfspace oracle.
      double sd = 1e18;
      for (const Halfspace2& hs : h.halfspaces()) sd = std::min(sd, hs.b - hs.a.dot(x));
      CHECK(q.signed_distance == Catch::Approx(sd).margin(1e-15));
      if (std::abs(sd) > 1e-9) CHECK((sd > 0) == (q.location == PointLocation::inside));
    }
  }
}

TEST_CASE("vertex/halfspace round trips", "[geometry]") {
  const Polygon2 sq = Polygon2::from_halfspaces({{Vec2(1, 0), 1.0},
                                                 {Vec2(-1, 0), 0.0},
                                                 {Vec2(0, 1), 1.0},
                                                 {Vec2(0, -1), 0.0}});
  REQUIRE(sq.size() == 4);
  CHECK(polygon_area(sq) == Catch::Approx(1.0));

  CHECK_THROWS_AS(Polygon2::from_halfspaces(
                      {{Vec2(1, 0), 0.0}, {Vec2(-1, 0), -1.0}, {Vec2(0, 1), 5.0}}),
                  EmptySet);
  CHECK_THROWS_AS(Polygon2::from_halfspaces({{Vec2(1, 0), 1.0}, {Vec2(0, 1), 1.0}}),
                  UnboundedSet);

  std::mt19937 rng(7007);
  for (int rep = 0; rep < 30; ++rep) {
    const Polygon2 h = convex_hull_2d(random_disk_points(rng, 25));
    const Polygon2 back = Polygon2::from_halfspaces(h.halfspaces());
    CHECK(hausdorff_distance(h, back) <= 1e-7);

    // Sandwich: vertices satisfy all halfspaces; each halfspace tight at >= 2
    // vertices.
    for (const Halfspace2& hs : h.halfspaces()) {
      int tight = 0;
      for (const Vec2& v : h.vertices()) {
        CHECK(hs.eval(v) >= -1e-7);
        if (std::abs(hs.eval(v)) <= 1e-7) ++tight;
      }
      CHECK(tight >= 2);
    }
  }
}

TEST_CASE("zonotope symmetry under reflection", "[geometry]") {
  std::mt19937 rng(7008);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Zonotope z;
  z.center = Vec3(0.3, -0.2, 0.5);
  for (int g = 0; g < 5; ++g) z.generators.push_back(Vec3(u(rng), u(rng), u(rng)));
  for (int k = 0; k < 1000; ++k) {
    VecX alphas(5);
    for (int i = 0; i < 5; ++i) alphas[i] = u(rng);
    const VecX p = z.point(alphas);
    const VecX r = z.reflect(p);
    REQUIRE(zonotope_contains(z, p));
    REQUIRE(zonotope_contains(z, r));
  }
}

TEST_CASE("minkowski cone sum is the ray union", "[geometry]") {
  PolyhedralCone c1;
  c1.rays = {VecX(Vec2(1, 0)), VecX(Vec2(std::cos(kPi / 6), std::sin(kPi / 6)))};
  PolyhedralCone zero;  // no rays: the trivial cone {0}
  const PolyhedralCone same = minkowski_sum_cones(c1, zero);
  REQUIRE(same.rays.size() == c1.rays.size());
  for (std::size_t i = 0; i < c1.rays.size(); ++i) CHECK((same.rays[i] - c1.rays[i]).norm() == 0.0);

  // Single-ray cone summed with itself: duplicated ray, same set.
  PolyhedralCone single;
  single.rays = {VecX(Vec2(0.5, 0.25))};
  const PolyhedralCone dup = minkowski_sum_cones(single, single);
  REQUIRE(dup.rays.size() == 2);
  CHECK(cone_contains(dup, VecX(Vec2(1.0, 0.5))));
  CHECK_FALSE(cone_contains(dup, VecX(Vec2(1.0, 0.0))));
  const PolyhedralCone pruned = prune_cone_rays(dup);
  CHECK(pruned.rays.size() == 1);

  // [0,30] deg + [60,90] deg spans [0,90] deg; sampled membership oracle.
  PolyhedralCone c2;
  c2.rays = {VecX(Vec2(std::cos(kPi / 3), std::sin(kPi / 3))), VecX(Vec2(0, 1))};
  const PolyhedralCone sum = minkowski_sum_cones(c1, c2);
  std::mt19937 rng(7009);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const double th = angle(rng);
    const double margin = 1e-4;  // skip the boundary band
    if (std::abs(th) < margin || std::abs(th - kPi / 2) < margin) continue;
    const bool expect = th > 0 && th < kPi / 2;
    const VecX d = VecX(Vec2(std::cos(th), std::sin(th)));
    CHECK(cone_contains(sum, d) == expect);
    ++checked;
  }
  CHECK(checked > 900);

  PolyhedralCone c3;
  c3.rays = {VecX(Vec3(1, 0, 0))};
  CHECK_THROWS_AS(minkowski_sum_cones(c1, c3), DimensionMismatch);
}

TEST_CASE("cone validates H and R forms against each other", "[geometry]") {
  PolyhedralCone c;
  c.rays = {VecX(Vec2(1, 0)), VecX(Vec2(0, 1))};
  c.halfspace_normals = std::vector<VecX>{VecX(Vec2(-1, 0)), VecX(Vec2(0, -1))};
  CHECK_NOTHROW(c.validate());
  c.halfspace_normals = std::vector<VecX>{VecX(Vec2(1, 0))};
  CHECK_THROWS_AS(c.validate(), DegenerateInput);
}

#include <doctest.h>

#include <random>

#include "planeline/core.hpp"
#include "planeline/error.hpp"
#include "support.hpp"

using namespace planeline;
using namespace planeline::test;

TEST_SUITE("core") {

TEST_CASE("plane axes of identity and quarter-turn rotations") {
  PlanarPrimitive p;
  auto axes = plane_axes(p);
  CHECK((axes.x - Vec3::UnitX()).norm() < 1e-15);
  CHECK((axes.y - Vec3::UnitY()).norm() < 1e-15);
  CHECK((axes.normal - Vec3::UnitZ()).norm() < 1e-15);

  p.rotation = Vec4(std::cos(M_PI / 4), 0.0, 0.0, std::sin(M_PI / 4));
  axes = plane_axes(p);
  CHECK((axes.x - Vec3(0, 1, 0)).norm() < 1e-12);
  CHECK((axes.y - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((axes.normal - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("axes stay orthonormal for random quaternions") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    PlanarPrimitive p;
    // Unnormalized on purpose: the axes normalize internally.
    p.rotation = random_quaternion(rng) * uniform(rng, 0.5, 2.0);
    const auto a = plane_axes(p);
    REQUIRE(std::abs(a.x.dot(a.y)) < 1e-9);
    REQUIRE(std::abs(a.x.norm() - 1.0) < 1e-9);
    REQUIRE(std::abs(a.y.norm() - 1.0) < 1e-9);
    REQUIRE((a.x.cross(a.y) - a.normal).norm() < 1e-9);
  }
}

TEST_CASE("vertices of a unit square and of asymmetric radii") {
  PlanarPrimitive p;
  p.radii = Vec4(1, 1, 1, 1);
  auto v = plane_vertices(p);
  CHECK((v[0] - Vec3(1, 1, 0)).norm() == 0.0);
  CHECK((v[1] - Vec3(1, -1, 0)).norm() == 0.0);
  CHECK((v[2] - Vec3(-1, -1, 0)).norm() == 0.0);
  CHECK((v[3] - Vec3(-1, 1, 0)).norm() == 0.0);

  p.radii = Vec4(2, 1, 1, 1);
  v = plane_vertices(p);
  CHECK((v[0] - Vec3(2, 1, 0)).norm() == 0.0);
  CHECK((v[1] - Vec3(2, -1, 0)).norm() == 0.0);
  CHECK((v[2] - Vec3(-1, -1, 0)).norm() == 0.0);
  CHECK((v[3] - Vec3(-1, 1, 0)).norm() == 0.0);
}

TEST_CASE("random planes: vertices coplanar, edges join adjacent vertices") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto p = make_plane(i, random_vec3(rng, -5, 5), random_quaternion(rng),
                              random_radii(rng, 0.01, 3));
    const auto n = plane_axes(p).normal;
    const auto v = plane_vertices(p);
    const auto e = plane_edges(p);
    for (int k = 0; k < 4; ++k) {
      REQUIRE(std::abs((v[k] - p.center).dot(n)) < 1e-9);
      REQUIRE(e[k].u == v[k]);
      REQUIRE(e[k].v == v[(k + 1) % 4]);
      REQUIRE(e[k].plane_id == i);
      REQUIRE(e[k].edge == k);
    }
    // Edge lengths are sums of the spanned radii.
    REQUIRE(std::abs(e[0].length() - (p.radii(2) + p.radii(3))) < 1e-9);
    REQUIRE(std::abs(e[1].length() - (p.radii(0) + p.radii(1))) < 1e-9);
  }
}

TEST_CASE("edge lengths") {
  PlanarPrimitive p;
  p.radii = Vec4(1, 1, 1, 1);
  auto e = plane_edges(p);
  CHECK((e[0].u - Vec3(1, 1, 0)).norm() == 0.0);
  CHECK((e[0].v - Vec3(1, -1, 0)).norm() == 0.0);
  CHECK(e[0].length() == doctest::Approx(2.0));

  p.radii = Vec4(2, 1, 3, 1);
  CHECK(plane_edges(p)[1].length() == doctest::Approx(3.0));

  p.radii = Vec4::Constant(kRadiusFloor);
  for (const auto& edge : plane_edges(p)) CHECK(edge.length() >= 2 * kRadiusFloor - 1e-18);
}

TEST_CASE("params round trip") {
  const auto p = make_plane(3, Vec3(1, 2, 3), Vec4(0.5, 0.5, 0.5, 0.5), Vec4(1, 2, 3, 4));
  const auto q = PlanarPrimitive::from_params(3, p.params());
  CHECK(q.center == p.center);
  CHECK(q.rotation == p.rotation);
  CHECK(q.radii == p.radii);
}

TEST_CASE("quaternion from normal rotates +Z onto the normal") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    Vec3 n = random_vec3(rng, -1, 1).normalized();
    if (i == 0) n = Vec3::UnitZ();
    if (i == 1) n = -Vec3::UnitZ();
    PlanarPrimitive p;
    p.rotation = quaternion_from_normal(n);
    REQUIRE(std::abs(p.rotation.norm() - 1.0) < 1e-12);
    REQUIRE((plane_axes(p).normal - n).norm() < 1e-9);
  }
  PlanarPrimitive p;
  p.rotation = quaternion_from_normal(Vec3::UnitZ());
  CHECK((p.rotation - Vec4(1, 0, 0, 0)).norm() < 1e-12);
}

TEST_CASE("pinhole projection") {
  const Camera cam = simple_camera(100, 100, 100.0);
  auto pr = project_point(cam, Vec3(0, 0, 2));
  CHECK(pr.pixel.x() == doctest::Approx(50.0));
  CHECK(pr.pixel.y() == doctest::Approx(50.0));
  CHECK(pr.depth == doctest::Approx(2.0));
  pr = project_point(cam, Vec3(0.5, 0, 2));
  CHECK(pr.pixel.x() == doctest::Approx(75.0));
  CHECK(pr.pixel.y() == doctest::Approx(50.0));

  try {
    project_point(cam, Vec3(0, 0, -1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBehindCamera);
  }
  CHECK_FALSE(try_project(cam, Vec3(0, 0, 0)).has_value());
}

TEST_CASE("pixel rays") {
  Camera cam = simple_camera(101, 101, 80.0);  // principal point at the center of pixel 50
  auto ray = pixel_ray(cam, 50, 50);
  CHECK((ray.direction - cam.forward()).norm() < 1e-12);
  CHECK(std::abs(ray.direction.norm() - 1.0) < 1e-12);

  try {
    pixel_ray(cam, 101, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfBounds);
  }
  CHECK_THROWS_AS(pixel_ray(cam, 0, -1), Error);

  const Camera posed = look_at(Vec3(1, -2, 0.5), Vec3(0, 0, 0), 64, 64, 55.0);
  double worst = 0.0;
  for (int v = 0; v < 64; ++v) {
    for (int u = 0; u < 64; ++u) {
      const Ray r = pixel_ray(posed, u, v, 3);
      REQUIRE(r.u == u);
      REQUIRE(r.v == v);
      REQUIRE(r.view == 3);
      REQUIRE(std::abs(r.direction.norm() - 1.0) < 1e-9);
      for (double t : {0.1, 1.0, 7.5}) {
        const auto px = project_point(posed, r.origin + t * r.direction).pixel;
        worst = std::max(worst, (px - Vec2(u + 0.5, v + 0.5)).norm());
      }
    }
  }
  CHECK(worst < 1e-6);
}

}  // TEST_SUITE

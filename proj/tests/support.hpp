#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "planeline/core.hpp"

namespace planeline::test {

inline Vec4 random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec4 q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

inline Vec3 random_vec3(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline Vec4 random_radii(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng), u(rng)};
}

inline Vec2 random_vec2(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline PlanarPrimitive make_plane(int id, const Vec3& center, const Vec4& rotation,
                                  const Vec4& radii) {
  PlanarPrimitive p;
  p.id = id;
  p.center = center;
  p.rotation = rotation;
  p.radii = radii;
  return p;
}

/// Camera at the origin looking down +z.
inline Camera simple_camera(int width, int height, double focal) {
  Camera c;
  c.width = width;
  c.height = height;
  c.intrinsics = {focal, focal, 0.5 * width, 0.5 * height};
  return c;
}

/// Camera at `eye` looking at `target`, image y pointing down.
inline Camera look_at(const Vec3& eye, const Vec3& target, int width, int height, double focal) {
  Camera c = simple_camera(width, height, focal);
  const Vec3 f = (target - eye).normalized();
  Vec3 up = std::abs(f.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitY();
  const Vec3 right = f.cross(up).normalized();
  const Vec3 down = f.cross(right);
  c.pose.rotation.row(0) = right.transpose();
  c.pose.rotation.row(1) = down.transpose();
  c.pose.rotation.row(2) = f.transpose();
  c.pose.translation = -c.pose.rotation * eye;
  return c;
}

/// |a - b| / max(|a|, |b|), or the absolute error when both are below `floor`.
inline double rel_err(double a, double b, double floor = 1e-6) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < floor ? std::abs(a - b) : std::abs(a - b) / scale;
}

}  // namespace planeline::test

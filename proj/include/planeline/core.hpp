#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace planeline {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Lower bound applied to every radius after an optimizer update.
inline constexpr double kRadiusFloor = 1e-4;

/// Flat parameter block of one primitive: center (3), quaternion w,x,y,z (4),
/// radii x+,x-,y+,y- (4).
inline constexpr int kPlaneParamCount = 11;
using PlaneParams = Eigen::Matrix<double, kPlaneParamCount, 1>;

inline constexpr int kCenterOffset = 0;
inline constexpr int kRotationOffset = 3;
inline constexpr int kRadiiOffset = 7;

enum RadiusSlot : int { kRadiusXPos = 0, kRadiusXNeg = 1, kRadiusYPos = 2, kRadiusYNeg = 3 };

/// A learnable finite rectangle. The quaternion may drift from unit norm
/// between optimizer updates; every derived quantity normalizes it first.
struct PlanarPrimitive {
  int id = 0;
  Vec3 center = Vec3::Zero();
  Vec4 rotation = Vec4(1.0, 0.0, 0.0, 0.0);
  Vec4 radii = Vec4::Constant(kRadiusFloor);

  PlaneParams params() const;
  static PlanarPrimitive from_params(int id, const PlaneParams& params);
};

struct LineSegment2D {
  Vec2 p1 = Vec2::Zero();
  Vec2 p2 = Vec2::Zero();
  int index = 0;

  double length() const { return (p2 - p1).norm(); }
};

/// Reference to one detected 2D segment: (view id, line index).
struct DetectionRef {
  int view = 0;
  int line = 0;

  friend bool operator==(const DetectionRef&, const DetectionRef&) = default;
  friend auto operator<=>(const DetectionRef&, const DetectionRef&) = default;
};

struct LineSegment3D {
  Vec3 u = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  int plane_id = -1;
  int edge = 0;  // 0..3, edge k joins vertex k and vertex (k+1) % 4
  std::vector<DetectionRef> track;

  double length() const { return (v - u).norm(); }
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  int u = 0;
  int v = 0;
  int view = 0;
};

// ---------------------------------------------------------------------------
// Templated plane geometry, shared by the double path and autodiff Jacobians.

template <typename T>
using Vec2T = Eigen::Matrix<T, 2, 1>;
template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Vec4T = Eigen::Matrix<T, 4, 1>;
template <typename T>
using ParamsT = Eigen::Matrix<T, kPlaneParamCount, 1>;

/// Rotation matrix of q / |q| with q = (w, x, y, z).
template <typename T>
Eigen::Matrix<T, 3, 3> quaternion_to_matrix(const Vec4T<T>& q_raw) {
  using std::sqrt;
  const T norm = sqrt(q_raw.squaredNorm());
  const T w = q_raw(0) / norm, x = q_raw(1) / norm, y = q_raw(2) / norm, z = q_raw(3) / norm;
  Eigen::Matrix<T, 3, 3> r;
  r(0, 0) = T(1) - T(2) * (y * y + z * z);
  r(0, 1) = T(2) * (x * y - w * z);
  r(0, 2) = T(2) * (x * z + w * y);
  r(1, 0) = T(2) * (x * y + w * z);
  r(1, 1) = T(1) - T(2) * (x * x + z * z);
  r(1, 2) = T(2) * (y * z - w * x);
  r(2, 0) = T(2) * (x * z - w * y);
  r(2, 1) = T(2) * (y * z + w * x);
  r(2, 2) = T(1) - T(2) * (x * x + y * y);
  return r;
}

template <typename T>
struct PlaneFrame {
  Vec3T<T> center;
  Vec3T<T> axis_x;
  Vec3T<T> axis_y;
  Vec3T<T> normal;
  Vec4T<T> radii;
};

template <typename T>
PlaneFrame<T> make_frame(const ParamsT<T>& params) {
  const Eigen::Matrix<T, 3, 3> r =
      quaternion_to_matrix<T>(params.template segment<4>(kRotationOffset));
  PlaneFrame<T> frame;
  frame.center = params.template segment<3>(kCenterOffset);
  frame.axis_x = r.col(0);
  frame.axis_y = r.col(1);
  frame.normal = r.col(2);
  frame.radii = params.template segment<4>(kRadiiOffset);
  return frame;
}

/// Vertices in cyclic order: (+x,+y), (+x,-y), (-x,-y), (-x,+y).
template <typename T>
std::array<Vec3T<T>, 4> frame_vertices(const PlaneFrame<T>& f) {
  const Vec3T<T> xp = f.axis_x * f.radii(kRadiusXPos);
  const Vec3T<T> xn = f.axis_x * f.radii(kRadiusXNeg);
  const Vec3T<T> yp = f.axis_y * f.radii(kRadiusYPos);
  const Vec3T<T> yn = f.axis_y * f.radii(kRadiusYNeg);
  return {f.center + xp + yp, f.center + xp - yn, f.center - xn - yn, f.center - xn + yp};
}

inline constexpr std::array<std::pair<int, int>, 4> kEdgeVertices = {
    std::pair{0, 1}, std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 0}};

struct PlaneAxes {
  Vec3 x;
  Vec3 y;
  Vec3 normal;
};

PlaneAxes plane_axes(const PlanarPrimitive& plane);
std::array<Vec3, 4> plane_vertices(const PlanarPrimitive& plane);
/// Edges e1..e4 as segments carrying (plane id, edge) provenance.
std::array<LineSegment3D, 4> plane_edges(const PlanarPrimitive& plane);

/// Unit quaternion (w,x,y,z) of the minimal rotation taking +Z onto `normal`.
Vec4 quaternion_from_normal(const Vec3& normal);

// ---------------------------------------------------------------------------
// Cameras

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// World-to-camera rigid transform: X_cam = rotation * X_world + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Pinhole camera. Pixel (u, v) covers [u, u+1) x [v, v+1); its center is
/// (u + 0.5, v + 0.5) in continuous image coordinates.
struct Camera {
  int width = 0;
  int height = 0;
  Intrinsics intrinsics;
  Pose pose;

  Vec3 center() const { return -pose.rotation.transpose() * pose.translation; }
  Vec3 forward() const { return pose.rotation.row(2).transpose(); }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
};

/// One posed input view. Normals are stored in the world frame; depth is the
/// camera-frame z of the surface point, 0 marking an invalid pixel.
struct CameraView {
  int id = 0;
  Camera camera;
  std::vector<double> depth;
  std::vector<Vec3> normals;
  std::vector<LineSegment2D> lines;

  bool valid_depth(int u, int v) const { return depth[pixel_index(u, v)] > 0.0; }
  std::size_t pixel_index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(camera.width) +
           static_cast<std::size_t>(u);
  }
};

struct Projection {
  Vec2 pixel;
  double depth;
};

/// Throws Error(kBehindCamera) when the point's camera depth is <= 0.
Projection project_point(const Camera& camera, const Vec3& point);
std::optional<Projection> try_project(const Camera& camera, const Vec3& point);

/// Ray through the center of pixel (u, v). Throws Error(kOutOfBounds).
Ray pixel_ray(const Camera& camera, int u, int v, int view_id = 0);

/// Projection usable with autodiff scalars; `depth` receives camera z.
template <typename T>
Vec2T<T> project_generic(const Camera& camera, const Vec3T<T>& point, T& depth) {
  const Mat3& r = camera.pose.rotation;
  const Vec3& t = camera.pose.translation;
  Vec3T<T> pc;
  for (int i = 0; i < 3; ++i) {
    pc(i) = point(0) * r(i, 0) + point(1) * r(i, 1) + point(2) * r(i, 2) + t(i);
  }
  depth = pc(2);
  const Intrinsics& k = camera.intrinsics;
  return Vec2T<T>(pc(0) / pc(2) * k.fx + k.cx, pc(1) / pc(2) * k.fy + k.cy);
}

}  // namespace planeline

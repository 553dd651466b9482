#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "planeline/core.hpp"

namespace planeline {

/// Rays with |d . n| at or below this are treated as parallel to a plane.
inline constexpr double kParallelEpsilon = 1e-8;

struct RenderOptions {
  int blend_count = 5;         // M nearest intersections blended per ray
  double weight_filter = 1e-4; // intersections lighter than this are dropped
};

struct Intersection {
  Vec3 point = Vec3::Zero();
  double depth = 0.0;  // ray parameter t along the unit direction
  int plane = -1;      // index into the plane span
  double weight = 0.0;
};

/// lambda = min(20 * exp(-(1 - 0.001 * iteration)), 300).
double lambda_schedule(long iteration);

/// Intersection with the infinite supporting plane; the weight is left at 0.
std::optional<Intersection> intersect(const Ray& ray, const PlanarPrimitive& plane,
                                      int plane_index = 0);

/// Splat weight before clamping: min of the per-axis 2*sigmoid(5*lambda*(r - |P|)).
double splat_weight_raw(const PlanarPrimitive& plane, const Vec3& point, double lambda);
/// splat_weight_raw clamped to [0, 1].
double splat_weight(const PlanarPrimitive& plane, const Vec3& point, double lambda);

/// Distance outside the rectangle beyond which the weight falls under `weight_filter`.
double splat_margin(double lambda, double weight_filter);

template <typename T>
T sigmoid(const T& x) {
  using std::exp;
  if (x < T(0)) {
    const T e = exp(x);
    return e / (T(1) + e);
  }
  return T(1) / (T(1) + exp(-x));
}

/// Clamped splat weight of `point` (assumed on the plane) for a generic scalar.
template <typename T>
T splat_weight_generic(const PlaneFrame<T>& frame, const Vec3T<T>& point, double lambda,
                       bool clamp = true) {
  using std::abs;
  const Vec3T<T> offset = point - frame.center;
  const T px = offset.dot(frame.axis_x);
  const T py = offset.dot(frame.axis_y);
  const T rx = px > T(0) ? frame.radii(kRadiusXPos) : frame.radii(kRadiusXNeg);
  const T ry = py > T(0) ? frame.radii(kRadiusYPos) : frame.radii(kRadiusYNeg);
  const T wx = T(2) * sigmoid<T>(T(5.0 * lambda) * (rx - abs(px)));
  const T wy = T(2) * sigmoid<T>(T(5.0 * lambda) * (ry - abs(py)));
  T w = wx < wy ? wx : wy;
  if (clamp && w > T(1)) w = T(1);
  return w;
}

/// Ray parameter, weight and normal of one ray/plane pair. Returns false on a miss.
template <typename T>
bool trace_plane(const Ray& ray, const PlaneFrame<T>& frame, double lambda, T& depth,
                 T& weight) {
  using std::abs;
  const Vec3T<T> o = ray.origin.cast<T>();
  const Vec3T<T> d = ray.direction.cast<T>();
  const T denom = d.dot(frame.normal);
  if (!(abs(denom) > T(kParallelEpsilon))) return false;
  depth = (frame.center - o).dot(frame.normal) / denom;
  if (!(depth > T(0))) return false;
  const Vec3T<T> point = o + d * depth;
  weight = splat_weight_generic<T>(frame, point, lambda);
  return true;
}

struct Contribution {
  int plane = -1;
  double depth = 0.0;  // ray parameter t
  double weight = 0.0;
  double transmittance = 1.0;
};

struct PixelRender {
  double depth = 0.0;  // sum T_j w_j t_j along the ray
  Vec3 normal = Vec3::Zero();
  bool valid = false;
  std::vector<Contribution> contributions;
};

/// Front-to-back blend of the M nearest sufficiently heavy intersections.
/// `candidates`, when given, restricts the scan to those plane indices.
PixelRender render_pixel(std::span<const PlanarPrimitive> planes, const Ray& ray, double lambda,
                         const RenderOptions& options = {},
                         std::optional<std::span<const int>> candidates = std::nullopt);

/// Per-pixel candidate lists from conservative image-space bounds of each
/// plane's weight support; never drops a plane that could pass the filter.
class PlaneBins {
 public:
  PlaneBins() = default;
  PlaneBins(std::span<const PlanarPrimitive> planes, const Camera& camera, double lambda,
            double weight_filter);

  std::span<const int> candidates(int u, int v) const;
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<int> offsets_;
  std::vector<int> entries_;
};

struct RenderedView {
  int width = 0;
  int height = 0;
  std::vector<double> depth;   // camera z, 0 where invalid
  std::vector<Vec3> normal;    // world frame
  std::vector<unsigned char> valid;
  std::vector<PixelRender> pixels;
  std::vector<double> z_per_range;  // camera z per unit of ray parameter, per pixel
};

RenderedView render_view(std::span<const PlanarPrimitive> planes, const Camera& camera,
                         double lambda, const RenderOptions& options = {}, int view_id = 0);

/// Back-propagates d(loss)/d(range depth) and d(loss)/d(normal) of one pixel
/// into `gradients` (indexed like `planes`).
void backward_pixel(std::span<const PlanarPrimitive> planes, const Ray& ray,
                    const PixelRender& pixel, double lambda, double grad_depth,
                    const Vec3& grad_normal, std::span<PlaneParams> gradients);

/// Back-propagates per-pixel gradients w.r.t. the rendered z-depth and normal maps.
void backward_view(std::span<const PlanarPrimitive> planes, const Camera& camera,
                   const RenderedView& rendered, double lambda,
                   std::span<const double> grad_depth, std::span<const Vec3> grad_normal,
                   std::span<PlaneParams> gradients, int view_id = 0);

}  // namespace planeline

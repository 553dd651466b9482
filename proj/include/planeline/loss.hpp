#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "planeline/assign.hpp"
#include "planeline/autodiff.hpp"
#include "planeline/core.hpp"
#include "planeline/raster.hpp"

namespace planeline {

struct LossWeights {
  double alpha_1 = 5.0;       // normal terms of the render loss
  double alpha_2 = 1.0;       // depth term of the render loss
  double alpha_3 = 2.0;       // parsed, not used by any term
  double alpha_depth = 5.0;   // parsed, not used by any term
  double alpha_normal = 1.0;  // parsed, not used by any term
  double alpha_plane = 10.0;
  double alpha_line = 0.1;
};

struct LossBreakdown {
  double render = 0.0;
  double euc2d = 0.0;
  double ort2d = 0.0;
  double group = 0.0;
  double total = 0.0;
  std::vector<PlaneParams> gradients;  // d(total)/d(params), indexed like the plane set
};

struct RenderLossGradient {
  std::vector<double> depth;
  std::vector<Vec3> normal;
};

/// alpha_1 * sum |1 - N.N'| + alpha_1 * sum |N - N'|_1 + alpha_2 * sum |D - D'|
/// over pixels whose target depth is valid. Throws Error(kShapeMismatch).
double render_loss(std::span<const double> depth, std::span<const Vec3> normal,
                   std::span<const double> target_depth, std::span<const Vec3> target_normal,
                   const LossWeights& weights, RenderLossGradient* gradient = nullptr);

/// Endpoint loss: best pairing of summed endpoint distances.
template <typename T>
T euc_loss_generic(const Vec2& x1, const Vec2& x2, const Vec2T<T>& a, const Vec2T<T>& b) {
  const T straight = safe_norm<T, 2>(x1.cast<T>() - a) + safe_norm<T, 2>(x2.cast<T>() - b);
  const T swapped = safe_norm<T, 2>(x1.cast<T>() - b) + safe_norm<T, 2>(x2.cast<T>() - a);
  return swapped < straight ? swapped : straight;
}

/// Sum of the perpendicular distances of a and b to the detected line's support.
template <typename T>
T ort_loss_generic(const Vec2& x1, const Vec2& x2, const Vec2T<T>& a, const Vec2T<T>& b) {
  using std::abs;
  const Vec2 dir = x1 - x2;
  const double len = dir.norm();
  auto dist = [&](const Vec2T<T>& p) -> T {
    const T rx = p(0) - T(x2.x());
    const T ry = p(1) - T(x2.y());
    return abs(rx * T(dir.y()) - ry * T(dir.x())) / T(len);
  };
  return dist(a) + dist(b);
}

double euc_loss(const LineSegment2D& line, const Vec2& a, const Vec2& b);
/// Throws Error(kDegenerateDetection) for a zero-length detection.
double ort_loss(const LineSegment2D& line, const Vec2& a, const Vec2& b);

/// Perpendicular distance of p to the infinite 3D line through a and b.
template <typename T>
T point_line_distance_3d(const Vec3T<T>& p, const Vec3T<T>& a, const Vec3T<T>& b) {
  const Vec3T<T> e = b - a;
  const T len = safe_norm<T, 3>(e);
  if (!(value_of(len) > 0.0)) return safe_norm<T, 3>(Vec3T<T>(p - a));
  return safe_norm<T, 3>(Vec3T<T>((p - a).cross(e))) / len;
}

/// Symmetric 3D edge-to-edge distance: both endpoints of each edge against the
/// other edge's support line.
template <typename T>
T edge_pair_distance(const Vec3T<T>& a1, const Vec3T<T>& a2, const Vec3T<T>& b1,
                     const Vec3T<T>& b2) {
  return point_line_distance_3d<T>(a1, b1, b2) + point_line_distance_3d<T>(a2, b1, b2) +
         point_line_distance_3d<T>(b1, a1, a2) + point_line_distance_3d<T>(b2, a1, a2);
}

/// Sum over unordered pairs within each group of edge_pair_distance.
double group_loss(const std::vector<std::vector<LineSegment3D>>& groups);

struct TotalLossOptions {
  RenderOptions render;
  int group_cap = 64;      // assignments sampled per detected line for the group term
  std::uint64_t seed = 0;  // drives group sampling
};

/// Weighted objective for one view with assignments held fixed.
LossBreakdown total_loss(const CameraView& view, std::span<const PlanarPrimitive> planes,
                         const LossWeights& weights, double lambda,
                         std::span<const Assignment> assignments,
                         const TotalLossOptions& options = {});

/// Rebuilds assignments for the current plane state, then evaluates total_loss.
LossBreakdown total_loss(const CameraView& view, std::span<const PlanarPrimitive> planes,
                         const LossWeights& weights, double lambda,
                         const TotalLossOptions& options = {});

}  // namespace planeline

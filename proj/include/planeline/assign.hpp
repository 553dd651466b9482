#pragma once

#include <optional>
#include <span>
#include <vector>

#include "planeline/core.hpp"
#include "planeline/raster.hpp"

namespace planeline {

struct Pixel {
  int u = 0;
  int v = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Pixels whose centers lie within 1 px of a detected segment (end caps included).
struct PixelRegion {
  DetectionRef owner;
  std::vector<Pixel> pixels;  // row-major order
};

struct Assignment {
  DetectionRef detection;
  int plane = -1;  // index into the plane set the assignment was built from
  int plane_id = -1;
  int edge = 0;    // 0..3
  Pixel pixel;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

double point_segment_distance(const Vec2& point, const Vec2& a, const Vec2& b);

/// Throws Error(kEmptyRegion) when no pixel center qualifies.
PixelRegion one_pixel_region(const LineSegment2D& line, int width, int height, int view_id = 0);
/// Non-throwing variant; returns an empty list instead.
std::vector<Pixel> region_pixels(const LineSegment2D& line, int width, int height);

/// Nearest plane (by ray parameter, then id) whose weight passes the filter.
std::optional<int> first_hit(std::span<const PlanarPrimitive> planes, const Ray& ray,
                             double lambda, double weight_filter = 1e-4,
                             std::optional<std::span<const int>> candidates = std::nullopt);

struct EdgeChoice {
  int edge = 0;
  Vec2 a = Vec2::Zero();  // projected endpoints of the chosen edge
  Vec2 b = Vec2::Zero();
};

/// Two-stage choice: keep the two projected edges closest in angle to the
/// detection, then take the one with the smaller max endpoint distance to it.
/// Returns nullopt if a vertex projects behind the camera.
std::optional<EdgeChoice> try_select_edge(const PlanarPrimitive& plane, const LineSegment2D& line,
                                          const Camera& camera);
/// As try_select_edge but throws Error(kProjectionDegenerate).
int select_edge(const PlanarPrimitive& plane, const LineSegment2D& line, const Camera& camera);

struct AssignOptions {
  double weight_filter = 1e-4;
  double min_line_length = 1e-6;
};

/// Assignments ordered by (line index, pixel row-major).
std::vector<Assignment> build_assignments(const CameraView& view,
                                          std::span<const PlanarPrimitive> planes, double lambda,
                                          const AssignOptions& options = {});

}  // namespace planeline

#pragma once

#include <cstdint>
#include <vector>

#include "planeline/core.hpp"

namespace planeline {

struct DegradationSpec {
  double jitter_sigma = 0.0;      // px, per endpoint coordinate
  double fragment_prob = 0.0;
  int fragment_count = 2;
  double dropout_prob = 0.0;
  double spurious_rate = 0.0;     // spurious detections per true detection in a view
  double depth_noise = 0.0;       // world units, added to camera z
  std::uint64_t seed = 0;

  /// Throws Error(kBadConfig) for rates outside [0, 1] or negative sigmas.
  void validate() const;
};

struct SceneOptions {
  int width = 64;
  int height = 64;
  double elevation_deg = 35.0;
  double azimuth_offset_deg = 20.0;
  double distance_factor = 2.5;  // camera distance in units of the bounding-sphere radius
  double fill = 0.95;            // fraction of the half-image spanned by the bounding sphere
};

/// Axis-aligned box centered at the origin seen from an inward-looking camera ring.
struct SyntheticScene {
  Vec3 dims = Vec3::Ones();
  std::vector<PlanarPrimitive> planes;  // one per face, normals pointing outward
  std::vector<LineSegment3D> gt_lines;  // the 12 box edges
  std::vector<Camera> cameras;
};

/// Throws Error(kBadDims) for non-positive dims or fewer than two cameras.
SyntheticScene make_box_scene(const Vec3& dims, int cameras, const SceneOptions& options = {});

struct GtView {
  std::vector<double> depth;   // camera z of the first hit, 0 on a miss
  std::vector<Vec3> normals;   // world-frame face normal of the first hit
  std::vector<int> face;       // face index, -1 on a miss
};

/// Exact first-hit ray casting against the box faces.
GtView render_gt_view(const SyntheticScene& scene, const Camera& camera);

struct LabeledDetections {
  std::vector<LineSegment2D> lines;
  std::vector<int> labels;  // GT line index, -1 for spurious
};

/// Exact projections of the visible parts of every GT line, clipped to the image.
LabeledDetections exact_gt_projections(const SyntheticScene& scene, const Camera& camera);

/// Visible GT edges projected, clipped and then degraded per `spec`, one list per camera.
std::vector<LabeledDetections> project_gt_lines(const SyntheticScene& scene,
                                                const DegradationSpec& spec);

/// Complete input views: GT depth (with optional noise), normals and degraded detections.
/// `labels`, when given, receives the per-view detection labels.
std::vector<CameraView> make_views(const SyntheticScene& scene, const DegradationSpec& spec,
                                   std::vector<std::vector<int>>* labels = nullptr);

/// Liang-Barsky clip of a segment to [0, width] x [0, height]; false when nothing remains.
bool clip_segment(Vec2& a, Vec2& b, double width, double height);

}  // namespace planeline

#pragma once

#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "planeline/assign.hpp"
#include "planeline/core.hpp"

namespace planeline {

struct Thresholds {
  double extract_dist = 1.0;     // px, summed endpoint distance to the detection
  double extract_angle = 0.01;   // rad
  double extract_lambda = 300.0; // sharpness used when re-running assignment
  double track_angle = 0.01;     // rad
  double track_dist = 2.0;       // px
  double track_overlap = 0.2;
  double dbscan_eps = 0.01;      // world units
};

// --- Geometric consistency measures between 2D segments -------------------

/// Perpendicular distance of p to the infinite line through a and b.
double orthogonal_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Unsigned angle in [0, pi/2]. Throws Error(kDegenerateSegment).
double angle_distance(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);
/// Larger of the two distances from a's endpoints to b's support line.
double max_orthogonal_distance(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);
/// Length of a's orthogonal projection that falls inside b, over |b|, in [0, 1].
double overlap_ratio(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

// --- Line maps -------------------------------------------------------------

struct LineMap3D {
  std::vector<LineSegment3D> lines;
  /// Lines retained because of an assignment to this detection.
  std::map<DetectionRef, std::vector<int>> sources;
  /// Lines lying on any plane hit by rays cast from the detection's 1-pixel region.
  std::map<DetectionRef, std::vector<int>> hits;
};

/// Distinct views and total 2D segments supporting a line.
struct TrackSupport {
  int images = 0;
  int lines = 0;
};
TrackSupport track_support(const LineSegment3D& line);

/// Keeps every plane edge with at least one assignment whose projection is
/// within extract_angle and extract_dist of its detection.
LineMap3D extract_line_map(std::span<const PlanarPrimitive> planes,
                           std::span<const CameraView> views, const Thresholds& thresholds,
                           double weight_filter = 1e-4);

/// Whether detection `det` supports a line projecting to (a, b).
bool supports_track(const Vec2& a, const Vec2& b, const LineSegment2D& det,
                    const Thresholds& thresholds);

/// Fills LineSegment3D::track for every line from all detections of all views.
void build_tracks(LineMap3D& map, std::span<const CameraView> views,
                  const Thresholds& thresholds);

// --- Merging ----------------------------------------------------------------

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x);
  void unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

/// Density clustering over an implicit distance; labels are 0-based cluster
/// ids, -1 for noise. Points within `eps` (inclusive) are neighbours.
std::vector<int> dbscan(std::size_t count, const std::function<double(std::size_t, std::size_t)>& distance,
                        double eps, std::size_t min_points);

/// Mean distance of `samples` evenly spaced points of a to b's support line,
/// symmetrized by taking the larger of both directions.
double line_pair_distance(const LineSegment3D& a, const LineSegment3D& b, int samples = 10);

/// Segment along the principal direction of all endpoints, spanning their projections.
LineSegment3D pca_merge(std::span<const LineSegment3D> lines);

/// Replaces each detection's source group by one merged segment.
LineMap3D local_merge(const LineMap3D& map);

/// Per-detection DBSCAN over hit groups, identifier union across views, PCA per identifier.
LineMap3D global_merge(const LineMap3D& map, double eps);

}  // namespace planeline

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "planeline/core.hpp"

namespace planeline {

struct GroundTruth {
  std::vector<Vec3> points;
};

/// n evenly spaced points from u to v, both endpoints included.
/// Throws Error(kBadArgument) for n < 2.
std::vector<Vec3> sample_line_points(const LineSegment3D& line, int n);

/// Dense points along segments, spaced at most `spacing` apart (at least two per segment).
std::vector<Vec3> densify_lines(std::span<const LineSegment3D> lines, double spacing);

using Triangle = std::array<Vec3, 3>;
/// Area-weighted uniform sampling of a triangle soup, `density` points per unit area.
GroundTruth sample_mesh(std::span<const Triangle> triangles, double density, std::uint64_t seed);

/// Nearest-neighbour distances to a fixed point set. The tree backend and the
/// brute-force scan return identical values.
class PointIndex {
 public:
  PointIndex(std::span<const Vec3> points, bool use_tree = true);
  ~PointIndex();
  PointIndex(const PointIndex&) = delete;
  PointIndex& operator=(const PointIndex&) = delete;

  double nearest_distance(const Vec3& query) const;
  /// Distances for every query, evaluated in parallel.
  std::vector<double> nearest_distances(std::span<const Vec3> queries) const;

 private:
  struct Tree;
  std::vector<Vec3> points_;
  std::unique_ptr<Tree> tree_;
};

struct M1Block {
  double acc = 0.0;
  double comp = 0.0;
  double prec = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct M1Report {
  M1Block junction;
  M1Block line;
  int line_count = 0;
  double tau = 0.0;
};

/// Block from predicted-to-GT and GT-to-predicted distances.
M1Block m1_block(std::span<const double> pred_to_gt, std::span<const double> gt_to_pred,
                 double tau);

/// Throws Error(kEmptyInput) when either side is empty.
M1Report m1_metrics(std::span<const LineSegment3D> pred, const GroundTruth& gt, double tau = 0.05,
                    bool use_tree = true, int samples_per_line = 100);

struct M2Entry {
  double tau = 0.0;
  double length_recall = 0.0;  // sum of Len_i * ratio_i
  double inlier_percent = 0.0; // 100 * fraction of lines with ratio_i > 0
};

struct M2Report {
  std::vector<M2Entry> entries;
  double avg_image_supports = 0.0;
  double avg_line_supports = 0.0;
};

/// Throws Error(kEmptyInput) when either side is empty.
M2Report m2_metrics(std::span<const LineSegment3D> lines, const GroundTruth& gt,
                    std::span<const double> taus, bool use_tree = true,
                    int samples_per_line = 1000);

}  // namespace planeline

#include "planeline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "planeline/error.hpp"
#include "planeline/finalize.hpp"
#include "planeline/parallel.hpp"

namespace planeline {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

std::vector<Vec3> sample_line_points(const LineSegment3D& line, int n) {
  if (n < 2) throw Error(ErrorCode::kBadArgument, "need at least two samples per line");
  std::vector<Vec3> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    out[static_cast<std::size_t>(i)] = line.u + s * (line.v - line.u);
  }
  out.back() = line.v;
  return out;
}

std::vector<Vec3> densify_lines(std::span<const LineSegment3D> lines, double spacing) {
  std::vector<Vec3> out;
  for (const auto& line : lines) {
    const double len = (line.v - line.u).norm();
    const int n = std::max(2, static_cast<int>(std::ceil(len / spacing)) + 1);
    const auto pts = sample_line_points(line, n);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

GroundTruth sample_mesh(std::span<const Triangle> triangles, double density, std::uint64_t seed) {
  GroundTruth gt;
  if (triangles.empty()) return gt;
  std::vector<double> area(triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i];
    area[i] = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
    total += area[i];
  }
  const auto count = static_cast<std::size_t>(std::max(1.0, std::round(total * density)));
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(area.begin(), area.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  gt.points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& t = triangles[pick(rng)];
    double a = unit(rng);
    double b = unit(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    gt.points.push_back(t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]));
  }
  return gt;
}

using BoostPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using TreeValue = std::pair<BoostPoint, std::size_t>;

struct PointIndex::Tree {
  bgi::rtree<TreeValue, bgi::rstar<16>> rtree;
};

PointIndex::PointIndex(std::span<const Vec3> points, bool use_tree)
    : points_(points.begin(), points.end()) {
  if (!use_tree) return;
  std::vector<TreeValue> values;
  values.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    values.emplace_back(BoostPoint(points_[i].x(), points_[i].y(), points_[i].z()), i);
  }
  tree_ = std::make_unique<Tree>(Tree{bgi::rtree<TreeValue, bgi::rstar<16>>(values)});
}

PointIndex::~PointIndex() = default;

double PointIndex::nearest_distance(const Vec3& query) const {
  if (points_.empty()) return std::numeric_limits<double>::infinity();
  if (tree_) {
    std::vector<TreeValue> hit;
    tree_->rtree.query(bgi::nearest(BoostPoint(query.x(), query.y(), query.z()), 1),
                       std::back_inserter(hit));
    return (points_[hit.front().second] - query).norm();
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : points_) best = std::min(best, (p - query).squaredNorm());
  return std::sqrt(best);
}

std::vector<double> PointIndex::nearest_distances(std::span<const Vec3> queries) const {
  std::vector<double> out(queries.size());
  parallel_for(0, static_cast<int>(queries.size()), [&](int i) {
    out[static_cast<std::size_t>(i)] = nearest_distance(queries[static_cast<std::size_t>(i)]);
  });
  return out;
}

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double fraction_within(std::span<const double> v, double tau) {
  std::size_t n = 0;
  for (double x : v) n += x <= tau ? 1 : 0;
  return v.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(v.size());
}

}  // namespace

M1Block m1_block(std::span<const double> pred_to_gt, std::span<const double> gt_to_pred,
                 double tau) {
  M1Block b;
  b.acc = mean(pred_to_gt);
  b.comp = mean(gt_to_pred);
  b.prec = fraction_within(pred_to_gt, tau);
  b.recall = fraction_within(gt_to_pred, tau);
  b.f1 = b.prec + b.recall > 0.0 ? 2.0 * b.prec * b.recall / (b.prec + b.recall) : 0.0;
  return b;
}

M1Report m1_metrics(std::span<const LineSegment3D> pred, const GroundTruth& gt, double tau,
                    bool use_tree, int samples_per_line) {
  if (pred.empty()) throw Error(ErrorCode::kEmptyInput, "no predicted lines");
  if (gt.points.empty()) throw Error(ErrorCode::kEmptyInput, "empty ground truth");
  const PointIndex gt_index(gt.points, use_tree);

  auto level = [&](const std::vector<Vec3>& pred_points) {
    const PointIndex pred_index(pred_points, use_tree);
    const auto d_pred = gt_index.nearest_distances(pred_points);
    const auto d_gt = pred_index.nearest_distances(gt.points);
    return m1_block(d_pred, d_gt, tau);
  };

  std::vector<Vec3> junctions;
  std::vector<Vec3> samples;
  for (const auto& line : pred) {
    junctions.push_back(line.u);
    junctions.push_back(line.v);
    const auto pts = sample_line_points(line, samples_per_line);
    samples.insert(samples.end(), pts.begin(), pts.end());
  }
  M1Report report;
  report.junction = level(junctions);
  report.line = level(samples);
  report.line_count = static_cast<int>(pred.size());
  report.tau = tau;
  return report;
}

M2Report m2_metrics(std::span<const LineSegment3D> lines, const GroundTruth& gt,
                    std::span<const double> taus, bool use_tree, int samples_per_line) {
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "no lines");
  if (gt.points.empty()) throw Error(ErrorCode::kEmptyInput, "empty ground truth");
  const PointIndex gt_index(gt.points, use_tree);

  std::vector<std::vector<double>> distances(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    distances[i] = gt_index.nearest_distances(sample_line_points(lines[i], samples_per_line));
  }

  M2Report report;
  for (double tau : taus) {
    M2Entry e;
    e.tau = tau;
    std::size_t inliers = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const double ratio = fraction_within(distances[i], tau);
      e.length_recall += (lines[i].v - lines[i].u).norm() * ratio;
      inliers += ratio > 0.0 ? 1 : 0;
    }
    e.inlier_percent = 100.0 * static_cast<double>(inliers) / static_cast<double>(lines.size());
    report.entries.push_back(e);
  }
  double images = 0.0, supports = 0.0;
  for (const auto& line : lines) {
    const TrackSupport s = track_support(line);
    images += s.images;
    supports += s.lines;
  }
  report.avg_image_supports = images / static_cast<double>(lines.size());
  report.avg_line_supports = supports / static_cast<double>(lines.size());
  return report;
}

}  // namespace planeline

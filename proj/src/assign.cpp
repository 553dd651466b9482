#include "planeline/assign.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "planeline/error.hpp"
#include "planeline/finalize.hpp"
#include "planeline/parallel.hpp"

namespace planeline {

namespace {

// Relative slack for treating two angles or distances as tied.
constexpr double kTieEpsilon = 1e-9;

}  // namespace

double point_segment_distance(const Vec2& point, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (point - a).norm();
  const double t = std::clamp((point - a).dot(ab) / len2, 0.0, 1.0);
  return (point - (a + t * ab)).norm();
}

std::vector<Pixel> region_pixels(const LineSegment2D& line, int width, int height) {
  std::vector<Pixel> pixels;
  const double xmin = std::min(line.p1.x(), line.p2.x()) - 1.0;
  const double xmax = std::max(line.p1.x(), line.p2.x()) + 1.0;
  const double ymin = std::min(line.p1.y(), line.p2.y()) - 1.0;
  const double ymax = std::max(line.p1.y(), line.p2.y()) + 1.0;
  // Centers at (u + 0.5, v + 0.5).
  const int u0 = std::max(0, static_cast<int>(std::floor(xmin - 0.5)));
  const int u1 = std::min(width - 1, static_cast<int>(std::ceil(xmax - 0.5)));
  const int v0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int v1 = std::min(height - 1, static_cast<int>(std::ceil(ymax - 0.5)));
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      if (point_segment_distance(Vec2(u + 0.5, v + 0.5), line.p1, line.p2) <= 1.0) {
        pixels.push_back({u, v});
      }
    }
  }
  return pixels;
}

PixelRegion one_pixel_region(const LineSegment2D& line, int width, int height, int view_id) {
  PixelRegion region{{view_id, line.index}, region_pixels(line, width, height)};
  if (region.pixels.empty()) {
    throw Error(ErrorCode::kEmptyRegion, "line " + std::to_string(line.index) +
                                             " has no pixels inside the image");
  }
  return region;
}

std::optional<int> first_hit(std::span<const PlanarPrimitive> planes, const Ray& ray,
                             double lambda, double weight_filter,
                             std::optional<std::span<const int>> candidates) {
  std::optional<int> best;
  double best_depth = 0.0;
  auto consider = [&](int index) {
    const PlanarPrimitive& plane = planes[static_cast<std::size_t>(index)];
    double depth = 0.0, weight = 0.0;
    if (!trace_plane<double>(ray, make_frame<double>(plane.params()), lambda, depth, weight)) {
      return;
    }
    if (weight < weight_filter) return;
    if (!best || depth < best_depth ||
        (depth == best_depth && plane.id < planes[static_cast<std::size_t>(*best)].id)) {
      best = index;
      best_depth = depth;
    }
  };
  if (candidates) {
    for (int index : *candidates) consider(index);
  } else {
    for (int i = 0; i < static_cast<int>(planes.size()); ++i) consider(i);
  }
  return best;
}

std::optional<EdgeChoice> try_select_edge(const PlanarPrimitive& plane, const LineSegment2D& line,
                                          const Camera& camera) {
  std::array<Vec2, 4> projected;
  const auto vertices = plane_vertices(plane);
  for (int i = 0; i < 4; ++i) {
    const auto proj = try_project(camera, vertices[i]);
    if (!proj) return std::nullopt;
    projected[i] = proj->pixel;
  }
  const Vec2 dir = line.p2 - line.p1;
  const double dir_norm = dir.norm();

  std::array<double, 4> angle{};
  std::array<double, 4> distance{};
  for (int k = 0; k < 4; ++k) {
    const Vec2& a = projected[kEdgeVertices[k].first];
    const Vec2& b = projected[kEdgeVertices[k].second];
    const Vec2 e = b - a;
    const double e_norm = e.norm();
    if (e_norm <= 0.0 || dir_norm <= 0.0) {
      angle[k] = 0.5 * M_PI;
    } else {
      angle[k] = std::acos(std::clamp(std::abs(e.dot(dir)) / (e_norm * dir_norm), -1.0, 1.0));
    }
    distance[k] = dir_norm > 0.0 ? std::max(orthogonal_distance(a, line.p1, line.p2),
                                            orthogonal_distance(b, line.p1, line.p2))
                                 : 0.0;
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    if (std::abs(angle[i] - angle[j]) <= kTieEpsilon) return false;
    return angle[i] < angle[j];
  });
  int first = std::min(order[0], order[1]);
  int second = std::max(order[0], order[1]);
  const double tol = kTieEpsilon * std::max({1.0, distance[first], distance[second]});
  const int best = distance[second] < distance[first] - tol ? second : first;

  EdgeChoice choice;
  choice.edge = best;
  choice.a = projected[kEdgeVertices[best].first];
  choice.b = projected[kEdgeVertices[best].second];
  return choice;
}

int select_edge(const PlanarPrimitive& plane, const LineSegment2D& line, const Camera& camera) {
  if (auto choice = try_select_edge(plane, line, camera)) return choice->edge;
  throw Error(ErrorCode::kProjectionDegenerate, "plane vertex behind the camera");
}

std::vector<Assignment> build_assignments(const CameraView& view,
                                          std::span<const PlanarPrimitive> planes, double lambda,
                                          const AssignOptions& options) {
  if (planes.empty() || view.lines.empty()) return {};
  const Camera& camera = view.camera;
  const PlaneBins bins(planes, camera, lambda, options.weight_filter);

  std::vector<std::vector<Assignment>> per_line(view.lines.size());
  parallel_for(0, static_cast<int>(view.lines.size()), [&](int li) {
    const LineSegment2D& line = view.lines[static_cast<std::size_t>(li)];
    if (line.length() < options.min_line_length) return;
    std::map<int, std::optional<EdgeChoice>> edge_cache;
    auto& out = per_line[static_cast<std::size_t>(li)];
    for (const Pixel& px : region_pixels(line, camera.width, camera.height)) {
      const Ray ray = pixel_ray(camera, px.u, px.v, view.id);
      const auto hit = first_hit(planes, ray, lambda, options.weight_filter,
                                 bins.candidates(px.u, px.v));
      if (!hit) continue;
      auto it = edge_cache.find(*hit);
      if (it == edge_cache.end()) {
        it = edge_cache
                 .emplace(*hit, try_select_edge(planes[static_cast<std::size_t>(*hit)], line,
                                                camera))
                 .first;
      }
      if (!it->second) continue;
      Assignment a;
      a.detection = {view.id, line.index};
      a.plane = *hit;
      a.plane_id = planes[static_cast<std::size_t>(*hit)].id;
      a.edge = it->second->edge;
      a.pixel = px;
      out.push_back(a);
    }
  });

  std::vector<Assignment> all;
  for (auto& chunk : per_line) all.insert(all.end(), chunk.begin(), chunk.end());
  return all;
}

}  // namespace planeline

#include "planeline/finalize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include <Eigen/Eigenvalues>

#include "planeline/error.hpp"
#include "planeline/loss.hpp"

namespace planeline {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

void require_segment(const Vec2& a, const Vec2& b, const char* what) {
  if (!((b - a).norm() > 0.0)) {
    throw Error(ErrorCode::kDegenerateSegment, std::string(what) + " has zero length");
  }
}

}  // namespace

double orthogonal_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return std::abs(cross2(p - a, p - b)) / (b - a).norm();
}

double angle_distance(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  require_segment(a1, a2, "first segment");
  require_segment(b1, b2, "second segment");
  const Vec2 da = a2 - a1;
  const Vec2 db = b2 - b1;
  const double c = std::abs(da.dot(db)) / (da.norm() * db.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double max_orthogonal_distance(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  require_segment(b1, b2, "reference segment");
  return std::max(orthogonal_distance(a1, b1, b2), orthogonal_distance(a2, b1, b2));
}

double overlap_ratio(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  require_segment(b1, b2, "reference segment");
  const Vec2 dir = b2 - b1;
  const double len = dir.norm();
  const Vec2 unit = dir / len;
  const double t1 = (a1 - b1).dot(unit);
  const double t2 = (a2 - b1).dot(unit);
  const double lo = std::max(std::min(t1, t2), 0.0);
  const double hi = std::min(std::max(t1, t2), len);
  return std::clamp((hi - lo) / len, 0.0, 1.0);
}

TrackSupport track_support(const LineSegment3D& line) {
  std::set<int> views;
  for (const auto& ref : line.track) views.insert(ref.view);
  return {static_cast<int>(views.size()), static_cast<int>(line.track.size())};
}

namespace {

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

LineMap3D extract_line_map(std::span<const PlanarPrimitive> planes,
                           std::span<const CameraView> views, const Thresholds& thresholds,
                           double weight_filter) {
  LineMap3D map;
  std::map<std::pair<int, int>, int> index_of;  // (plane id, edge) -> line
  std::map<int, std::size_t> plane_by_id;
  for (std::size_t i = 0; i < planes.size(); ++i) plane_by_id[planes[i].id] = i;
  std::map<DetectionRef, std::set<int>> planes_hit;  // by plane id

  AssignOptions options;
  options.weight_filter = weight_filter;
  for (const CameraView& view : views) {
    std::map<int, const LineSegment2D*> line_by_index;
    for (const auto& line : view.lines) line_by_index[line.index] = &line;
    const auto assignments = build_assignments(view, planes, thresholds.extract_lambda, options);
    for (const Assignment& a : assignments) {
      planes_hit[a.detection].insert(a.plane_id);
      const LineSegment2D& det = *line_by_index.at(a.detection.line);
      const PlanarPrimitive& plane = planes[static_cast<std::size_t>(a.plane)];
      const auto edge = plane_edges(plane)[static_cast<std::size_t>(a.edge)];
      const auto pu = try_project(view.camera, edge.u);
      const auto pv = try_project(view.camera, edge.v);
      if (!pu || !pv || !((pv->pixel - pu->pixel).norm() > 0.0)) continue;
      const double d_ang = angle_distance(pu->pixel, pv->pixel, det.p1, det.p2);
      const double d_orth = ort_loss(det, pu->pixel, pv->pixel);
      if (d_ang > thresholds.extract_angle || d_orth > thresholds.extract_dist) continue;
      auto [it, inserted] = index_of.try_emplace({plane.id, a.edge},
                                                 static_cast<int>(map.lines.size()));
      if (inserted) map.lines.push_back(edge);
      map.sources[a.detection].push_back(it->second);
    }
  }
  for (auto& [det, lines] : map.sources) sort_unique(lines);

  std::map<int, std::vector<int>> lines_on_plane;
  for (std::size_t i = 0; i < map.lines.size(); ++i) {
    lines_on_plane[map.lines[i].plane_id].push_back(static_cast<int>(i));
  }
  for (const auto& [det, ids] : planes_hit) {
    std::vector<int> lines;
    for (int id : ids) {
      auto it = lines_on_plane.find(id);
      if (it != lines_on_plane.end()) lines.insert(lines.end(), it->second.begin(), it->second.end());
    }
    sort_unique(lines);
    if (!lines.empty()) map.hits[det] = std::move(lines);
  }
  return map;
}

bool supports_track(const Vec2& a, const Vec2& b, const LineSegment2D& det,
                    const Thresholds& thresholds) {
  if (!((b - a).norm() > 0.0) || !(det.length() > 0.0)) return false;
  return angle_distance(det.p1, det.p2, a, b) < thresholds.track_angle &&
         max_orthogonal_distance(a, b, det.p1, det.p2) < thresholds.track_dist &&
         overlap_ratio(a, b, det.p1, det.p2) > thresholds.track_overlap;
}

void build_tracks(LineMap3D& map, std::span<const CameraView> views,
                  const Thresholds& thresholds) {
  for (LineSegment3D& line : map.lines) {
    line.track.clear();
    for (const CameraView& view : views) {
      const auto pu = try_project(view.camera, line.u);
      const auto pv = try_project(view.camera, line.v);
      if (!pu || !pv) continue;
      for (const LineSegment2D& det : view.lines) {
        if (supports_track(pu->pixel, pv->pixel, det, thresholds)) {
          line.track.push_back({view.id, det.index});
        }
      }
    }
  }
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

std::vector<int> dbscan(std::size_t count,
                        const std::function<double(std::size_t, std::size_t)>& distance,
                        double eps, std::size_t min_points) {
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> labels(count, kUnvisited);
  auto region = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < count; ++j) {
      if (j == i || distance(i, j) <= eps) out.push_back(j);
    }
    return out;
  };
  int cluster = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (labels[i] != kUnvisited) continue;
    const auto seeds = region(i);
    if (seeds.size() < min_points) {
      labels[i] = kNoise;
      continue;
    }
    labels[i] = cluster;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (labels[j] == kNoise) labels[j] = cluster;
      if (labels[j] != kUnvisited) continue;
      labels[j] = cluster;
      const auto more = region(j);
      if (more.size() >= min_points) queue.insert(queue.end(), more.begin(), more.end());
    }
    ++cluster;
  }
  return labels;
}

double line_pair_distance(const LineSegment3D& a, const LineSegment3D& b, int samples) {
  auto directed = [samples](const LineSegment3D& from, const LineSegment3D& to) {
    double sum = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double s = samples > 1 ? static_cast<double>(k) / (samples - 1) : 0.5;
      const Vec3 p = from.u + s * (from.v - from.u);
      sum += point_line_distance_3d<double>(p, to.u, to.v);
    }
    return sum / samples;
  };
  return std::max(directed(a, b), directed(b, a));
}

LineSegment3D pca_merge(std::span<const LineSegment3D> lines) {
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to merge");
  Vec3 mean = Vec3::Zero();
  for (const auto& l : lines) mean += l.u + l.v;
  mean /= 2.0 * static_cast<double>(lines.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& l : lines) {
    cov += (l.u - mean) * (l.u - mean).transpose();
    cov += (l.v - mean) * (l.v - mean).transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  Vec3 dir = solver.eigenvectors().col(2).normalized();
  Eigen::Index largest = 0;
  dir.cwiseAbs().maxCoeff(&largest);
  if (dir(largest) < 0.0) dir = -dir;

  double t_min = std::numeric_limits<double>::infinity();
  double t_max = -t_min;
  for (const auto& l : lines) {
    for (const Vec3* p : {&l.u, &l.v}) {
      const double t = (*p - mean).dot(dir);
      t_min = std::min(t_min, t);
      t_max = std::max(t_max, t);
    }
  }
  LineSegment3D out;
  out.u = mean + t_min * dir;
  out.v = mean + t_max * dir;
  out.plane_id = lines.front().plane_id;
  out.edge = lines.front().edge;
  std::set<DetectionRef> track;
  for (const auto& l : lines) track.insert(l.track.begin(), l.track.end());
  out.track.assign(track.begin(), track.end());
  return out;
}

namespace {

/// Builds the merged map for `groups` (each a sorted list of old line
/// indices) and remaps both association tables.
LineMap3D assemble(const LineMap3D& map, const std::vector<std::vector<int>>& groups) {
  LineMap3D out;
  std::vector<std::vector<int>> new_of(map.lines.size());
  for (const auto& group : groups) {
    std::vector<LineSegment3D> members;
    members.reserve(group.size());
    for (int i : group) {
      members.push_back(map.lines[static_cast<std::size_t>(i)]);
      new_of[static_cast<std::size_t>(i)].push_back(static_cast<int>(out.lines.size()));
    }
    out.lines.push_back(pca_merge(members));
  }
  auto remap = [&](const std::map<DetectionRef, std::vector<int>>& table,
                   std::map<DetectionRef, std::vector<int>>& into) {
    for (const auto& [det, olds] : table) {
      std::vector<int> news;
      for (int o : olds) {
        const auto& n = new_of[static_cast<std::size_t>(o)];
        news.insert(news.end(), n.begin(), n.end());
      }
      sort_unique(news);
      if (!news.empty()) into[det] = std::move(news);
    }
  };
  remap(map.sources, out.sources);
  remap(map.hits, out.hits);
  return out;
}

}  // namespace

LineMap3D local_merge(const LineMap3D& map) {
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> groups;
  std::vector<bool> covered(map.lines.size(), false);
  for (const auto& [det, members] : map.sources) {
    if (members.empty() || !seen.insert(members).second) continue;
    groups.push_back(members);
    for (int i : members) covered[static_cast<std::size_t>(i)] = true;
  }
  for (std::size_t i = 0; i < map.lines.size(); ++i) {
    if (!covered[i]) groups.push_back({static_cast<int>(i)});
  }
  return assemble(map, groups);
}

LineMap3D global_merge(const LineMap3D& map, double eps) {
  UnionFind identifiers(map.lines.size());
  for (const auto& [det, members] : map.hits) {
    if (members.size() < 2) continue;
    const std::size_t n = members.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = line_pair_distance(map.lines[static_cast<std::size_t>(members[i])],
                                            map.lines[static_cast<std::size_t>(members[j])]);
        dist[i * n + j] = dist[j * n + i] = d;
      }
    }
    const auto labels = dbscan(
        n, [&](std::size_t i, std::size_t j) { return dist[i * n + j]; }, eps, 1);
    std::map<int, std::size_t> first_of_cluster;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] < 0) continue;
      auto [it, inserted] = first_of_cluster.try_emplace(labels[i], i);
      if (!inserted) {
        identifiers.unite(static_cast<std::size_t>(members[it->second]),
                          static_cast<std::size_t>(members[i]));
      }
    }
  }
  std::map<std::size_t, std::vector<int>> by_root;
  std::vector<std::vector<int>> groups;
  std::map<std::size_t, std::size_t> group_of_root;
  for (std::size_t i = 0; i < map.lines.size(); ++i) {
    const std::size_t root = identifiers.find(i);
    auto [it, inserted] = group_of_root.try_emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(static_cast<int>(i));
  }
  return assemble(map, groups);
}

}  // namespace planeline

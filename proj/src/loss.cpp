#include "planeline/loss.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "planeline/error.hpp"

namespace planeline {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

using Jet12 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 12, 1>>;

}  // namespace

double render_loss(std::span<const double> depth, std::span<const Vec3> normal,
                   std::span<const double> target_depth, std::span<const Vec3> target_normal,
                   const LossWeights& weights, RenderLossGradient* gradient) {
  const std::size_t n = target_depth.size();
  if (depth.size() != n || normal.size() != n || target_normal.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "rendered and target maps differ in size");
  }
  if (gradient) {
    gradient->depth.assign(n, 0.0);
    gradient->normal.assign(n, Vec3::Zero());
  }
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (!(target_depth[p] > 0.0)) continue;
    const Vec3& nr = normal[p];
    const Vec3& nt = target_normal[p];
    const double cos_residual = 1.0 - nr.dot(nt);
    const Vec3 diff = nr - nt;
    const double depth_residual = depth[p] - target_depth[p];
    total += weights.alpha_1 * std::abs(cos_residual) + weights.alpha_1 * diff.lpNorm<1>() +
             weights.alpha_2 * std::abs(depth_residual);
    if (gradient) {
      gradient->depth[p] = weights.alpha_2 * sign(depth_residual);
      Vec3 g = -weights.alpha_1 * sign(cos_residual) * nt;
      for (int k = 0; k < 3; ++k) g(k) += weights.alpha_1 * sign(diff(k));
      gradient->normal[p] = g;
    }
  }
  return total;
}

double euc_loss(const LineSegment2D& line, const Vec2& a, const Vec2& b) {
  return euc_loss_generic<double>(line.p1, line.p2, a, b);
}

double ort_loss(const LineSegment2D& line, const Vec2& a, const Vec2& b) {
  if (!(line.length() > 0.0)) {
    throw Error(ErrorCode::kDegenerateDetection, "zero-length detected line");
  }
  return ort_loss_generic<double>(line.p1, line.p2, a, b);
}

double group_loss(const std::vector<std::vector<LineSegment3D>>& groups) {
  double total = 0.0;
  for (const auto& group : groups) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        total += edge_pair_distance<double>(group[i].u, group[i].v, group[j].u, group[j].v);
      }
    }
  }
  return total;
}

namespace {

/// One plane edge with endpoint values and their Jacobian w.r.t. the plane.
struct EdgeJacobian {
  Vec3 u;
  Vec3 v;
  Eigen::Matrix<double, 6, kPlaneParamCount> jacobian;
};

EdgeJacobian edge_jacobian(const PlanarPrimitive& plane, int edge) {
  const auto vertices = frame_vertices(make_frame<Jet>(seed_params(plane.params())));
  const auto& a = vertices[kEdgeVertices[edge].first];
  const auto& b = vertices[kEdgeVertices[edge].second];
  EdgeJacobian out;
  for (int k = 0; k < 3; ++k) {
    out.u(k) = a(k).value();
    out.v(k) = b(k).value();
    out.jacobian.row(k) = a(k).derivatives().transpose();
    out.jacobian.row(3 + k) = b(k).derivatives().transpose();
  }
  return out;
}

Vec3T<Jet12> seed_point(const Vec3& p, int offset) {
  Vec3T<Jet12> out;
  for (int k = 0; k < 3; ++k) out(k) = Jet12(p(k), 12, offset + k);
  return out;
}

}  // namespace

LossBreakdown total_loss(const CameraView& view, std::span<const PlanarPrimitive> planes,
                         const LossWeights& weights, double lambda,
                         std::span<const Assignment> assignments,
                         const TotalLossOptions& options) {
  LossBreakdown out;
  out.gradients.assign(planes.size(), PlaneParams::Zero());
  const Camera& camera = view.camera;

  // Plane rendering term.
  const RenderedView rendered = render_view(planes, camera, lambda, options.render, view.id);
  RenderLossGradient render_grad;
  out.render = render_loss(rendered.depth, rendered.normal, view.depth, view.normals, weights,
                           &render_grad);
  for (auto& g : render_grad.depth) g *= weights.alpha_plane;
  for (auto& g : render_grad.normal) g *= weights.alpha_plane;
  backward_view(planes, camera, rendered, lambda, render_grad.depth, render_grad.normal,
                out.gradients, view.id);

  // 2D alignment terms, one evaluation per distinct (line, plane, edge).
  std::map<std::tuple<int, int, int>, int> multiplicity;
  for (const Assignment& a : assignments) {
    ++multiplicity[{a.detection.line, a.plane, a.edge}];
  }
  std::map<int, const LineSegment2D*> line_by_index;
  for (const auto& line : view.lines) line_by_index[line.index] = &line;

  for (const auto& [key, count] : multiplicity) {
    const auto [line_index, plane_index, edge] = key;
    const auto line_it = line_by_index.find(line_index);
    if (line_it == line_by_index.end() || !(line_it->second->length() > 0.0)) continue;
    const LineSegment2D& line = *line_it->second;
    const PlanarPrimitive& plane = planes[static_cast<std::size_t>(plane_index)];
    const auto vertices = frame_vertices(make_frame<Jet>(seed_params(plane.params())));
    Jet depth_a, depth_b;
    const Vec2T<Jet> a = project_generic<Jet>(camera, vertices[kEdgeVertices[edge].first], depth_a);
    const Vec2T<Jet> b =
        project_generic<Jet>(camera, vertices[kEdgeVertices[edge].second], depth_b);
    if (!(depth_a.value() > 0.0) || !(depth_b.value() > 0.0)) continue;
    const Jet euc = euc_loss_generic<Jet>(line.p1, line.p2, a, b);
    const Jet ort = ort_loss_generic<Jet>(line.p1, line.p2, a, b);
    out.euc2d += count * euc.value();
    out.ort2d += count * ort.value();
    out.gradients[static_cast<std::size_t>(plane_index)] +=
        (weights.alpha_line * count) * (euc.derivatives() + ort.derivatives());
  }

  // Group term over sampled assignments of each detected line.
  std::map<int, std::vector<const Assignment*>> by_line;
  for (const Assignment& a : assignments) by_line[a.detection.line].push_back(&a);
  std::mt19937_64 rng(options.seed);
  std::map<std::pair<int, int>, EdgeJacobian> edge_cache;
  auto edge_of = [&](int plane_index, int edge) -> const EdgeJacobian& {
    auto it = edge_cache.find({plane_index, edge});
    if (it == edge_cache.end()) {
      it = edge_cache
               .emplace(std::pair{plane_index, edge},
                        edge_jacobian(planes[static_cast<std::size_t>(plane_index)], edge))
               .first;
    }
    return it->second;
  };

  for (auto& [line_index, members] : by_line) {
    std::vector<const Assignment*> sample = members;
    if (options.group_cap > 0 && sample.size() > static_cast<std::size_t>(options.group_cap)) {
      std::vector<std::size_t> idx(sample.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(options.group_cap));
      std::sort(idx.begin(), idx.end());
      std::vector<const Assignment*> picked;
      picked.reserve(idx.size());
      for (std::size_t i : idx) picked.push_back(members[i]);
      sample = std::move(picked);
    }
    std::map<std::pair<int, int>, int> counts;
    for (const Assignment* a : sample) ++counts[{a->plane, a->edge}];
    std::vector<std::pair<std::pair<int, int>, int>> keys(counts.begin(), counts.end());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const EdgeJacobian& ea = edge_of(keys[i].first.first, keys[i].first.second);
      for (std::size_t j = i + 1; j < keys.size(); ++j) {
        const EdgeJacobian& eb = edge_of(keys[j].first.first, keys[j].first.second);
        const double pairs = static_cast<double>(keys[i].second) * keys[j].second;
        const Jet12 d = edge_pair_distance<Jet12>(seed_point(ea.u, 0), seed_point(ea.v, 3),
                                                  seed_point(eb.u, 6), seed_point(eb.v, 9));
        out.group += pairs * d.value();
        const double scale = weights.alpha_line * pairs;
        out.gradients[static_cast<std::size_t>(keys[i].first.first)] +=
            scale * ea.jacobian.transpose() * d.derivatives().head<6>();
        out.gradients[static_cast<std::size_t>(keys[j].first.first)] +=
            scale * eb.jacobian.transpose() * d.derivatives().tail<6>();
      }
    }
  }

  out.total = weights.alpha_plane * out.render +
              weights.alpha_line * (out.euc2d + out.ort2d + out.group);
  return out;
}

LossBreakdown total_loss(const CameraView& view, std::span<const PlanarPrimitive> planes,
                         const LossWeights& weights, double lambda,
                         const TotalLossOptions& options) {
  AssignOptions assign_options;
  assign_options.weight_filter = options.render.weight_filter;
  const auto assignments = build_assignments(view, planes, lambda, assign_options);
  return total_loss(view, planes, weights, lambda, assignments, options);
}

}  // namespace planeline

#include "planeline/raster.hpp"

#include <algorithm>
#include <limits>

#include "planeline/autodiff.hpp"
#include "planeline/parallel.hpp"

namespace planeline {

double lambda_schedule(long iteration) {
  return std::min(20.0 * std::exp(-(1.0 - 0.001 * static_cast<double>(iteration))), 300.0);
}

std::optional<Intersection> intersect(const Ray& ray, const PlanarPrimitive& plane,
                                      int plane_index) {
  const Vec3 normal = plane_axes(plane).normal;
  const double denom = ray.direction.dot(normal);
  if (!(std::abs(denom) > kParallelEpsilon)) return std::nullopt;
  const double t = (plane.center - ray.origin).dot(normal) / denom;
  if (!(t > 0.0)) return std::nullopt;
  Intersection hit;
  hit.depth = t;
  hit.point = ray.origin + t * ray.direction;
  hit.plane = plane_index;
  return hit;
}

double splat_weight_raw(const PlanarPrimitive& plane, const Vec3& point, double lambda) {
  return splat_weight_generic<double>(make_frame<double>(plane.params()), point, lambda, false);
}

double splat_weight(const PlanarPrimitive& plane, const Vec3& point, double lambda) {
  return std::clamp(splat_weight_raw(plane, point, lambda), 0.0, 1.0);
}

double splat_margin(double lambda, double weight_filter) {
  // 2 sigmoid(s) >= f  <=>  s >= logit(f / 2)
  const double half = 0.5 * weight_filter;
  const double logit = std::log(half / (1.0 - half));
  return -logit / (5.0 * lambda);
}

namespace {

struct Hit {
  double depth;
  double weight;
  int plane;
  int id;
};

bool hit_before(const Hit& a, const Hit& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  return a.id < b.id;
}

}  // namespace

PixelRender render_pixel(std::span<const PlanarPrimitive> planes, const Ray& ray, double lambda,
                         const RenderOptions& options,
                         std::optional<std::span<const int>> candidates) {
  std::vector<Hit> hits;
  auto consider = [&](int index) {
    const PlanarPrimitive& plane = planes[static_cast<std::size_t>(index)];
    const PlaneFrame<double> frame = make_frame<double>(plane.params());
    double depth = 0.0, weight = 0.0;
    if (!trace_plane<double>(ray, frame, lambda, depth, weight)) return;
    if (weight < options.weight_filter) return;
    hits.push_back({depth, weight, index, plane.id});
  };
  if (candidates) {
    for (int index : *candidates) consider(index);
  } else {
    for (int i = 0; i < static_cast<int>(planes.size()); ++i) consider(i);
  }

  const auto keep = std::min<std::size_t>(hits.size(),
                                          static_cast<std::size_t>(std::max(options.blend_count, 0)));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    hit_before);

  PixelRender out;
  out.contributions.reserve(keep);
  double transmittance = 1.0;
  for (std::size_t j = 0; j < keep; ++j) {
    const Hit& h = hits[j];
    const Vec3 normal = plane_axes(planes[static_cast<std::size_t>(h.plane)]).normal;
    out.depth += transmittance * h.weight * h.depth;
    out.normal += transmittance * h.weight * normal;
    out.contributions.push_back({h.plane, h.depth, h.weight, transmittance});
    transmittance *= 1.0 - h.weight;
  }
  out.valid = keep > 0;
  return out;
}

PlaneBins::PlaneBins(std::span<const PlanarPrimitive> planes, const Camera& camera, double lambda,
                     double weight_filter)
    : width_(camera.width), height_(camera.height) {
  const double margin = splat_margin(lambda, weight_filter) * (1.0 + 1e-9) + 1e-9;
  const std::size_t pixel_count = static_cast<std::size_t>(width_) * height_;
  struct Box {
    int u0, u1, v0, v1;
  };
  std::vector<Box> boxes(planes.size());
  std::vector<int> counts(pixel_count + 1, 0);

  for (std::size_t i = 0; i < planes.size(); ++i) {
    PlanarPrimitive grown = planes[i];
    grown.radii.array() += margin;
    bool all_front = true;
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
    double xmax = -xmin, ymax = -xmin;
    for (const Vec3& corner : plane_vertices(grown)) {
      const auto proj = try_project(camera, corner);
      if (!proj || proj->depth < 1e-9) {
        all_front = false;
        break;
      }
      xmin = std::min(xmin, proj->pixel.x());
      xmax = std::max(xmax, proj->pixel.x());
      ymin = std::min(ymin, proj->pixel.y());
      ymax = std::max(ymax, proj->pixel.y());
    }
    Box box{0, width_ - 1, 0, height_ - 1};
    if (all_front) {
      // One pixel of slack around the projected hull.
      const double lo_u = std::floor(xmin - 0.5) - 1.0, hi_u = std::ceil(xmax - 0.5) + 1.0;
      const double lo_v = std::floor(ymin - 0.5) - 1.0, hi_v = std::ceil(ymax - 0.5) + 1.0;
      if (hi_u < 0 || hi_v < 0 || lo_u > width_ - 1 || lo_v > height_ - 1) {
        box = {1, 0, 1, 0};
      } else {
        box.u0 = static_cast<int>(std::max(lo_u, 0.0));
        box.u1 = static_cast<int>(std::min(hi_u, static_cast<double>(width_ - 1)));
        box.v0 = static_cast<int>(std::max(lo_v, 0.0));
        box.v1 = static_cast<int>(std::min(hi_v, static_cast<double>(height_ - 1)));
      }
    }
    boxes[i] = box;
    for (int v = box.v0; v <= box.v1; ++v) {
      for (int u = box.u0; u <= box.u1; ++u) {
        ++counts[static_cast<std::size_t>(v) * width_ + u + 1];
      }
    }
  }
  offsets_.assign(pixel_count + 1, 0);
  for (std::size_t p = 0; p < pixel_count; ++p) offsets_[p + 1] = offsets_[p] + counts[p + 1];
  entries_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const Box& box = boxes[i];
    for (int v = box.v0; v <= box.v1; ++v) {
      for (int u = box.u0; u <= box.u1; ++u) {
        entries_[static_cast<std::size_t>(fill[static_cast<std::size_t>(v) * width_ + u]++)] =
            static_cast<int>(i);
      }
    }
  }
}

std::span<const int> PlaneBins::candidates(int u, int v) const {
  const std::size_t p = static_cast<std::size_t>(v) * width_ + u;
  return std::span<const int>(entries_).subspan(
      static_cast<std::size_t>(offsets_[p]), static_cast<std::size_t>(offsets_[p + 1] - offsets_[p]));
}

RenderedView render_view(std::span<const PlanarPrimitive> planes, const Camera& camera,
                         double lambda, const RenderOptions& options, int view_id) {
  RenderedView out;
  out.width = camera.width;
  out.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(camera.width) * camera.height;
  out.depth.assign(n, 0.0);
  out.normal.assign(n, Vec3::Zero());
  out.valid.assign(n, 0);
  out.pixels.resize(n);
  out.z_per_range.assign(n, 1.0);
  const PlaneBins bins(planes, camera, lambda, options.weight_filter);
  const Vec3 forward = camera.forward();

  parallel_for(0, camera.height, [&](int v) {
    for (int u = 0; u < camera.width; ++u) {
      const std::size_t p = static_cast<std::size_t>(v) * camera.width + u;
      const Ray ray = pixel_ray(camera, u, v, view_id);
      PixelRender pixel = render_pixel(planes, ray, lambda, options, bins.candidates(u, v));
      out.z_per_range[p] = ray.direction.dot(forward);
      out.depth[p] = pixel.depth * out.z_per_range[p];
      out.normal[p] = pixel.normal;
      out.valid[p] = pixel.valid ? 1 : 0;
      out.pixels[p] = std::move(pixel);
    }
  });
  return out;
}

namespace {

using LocalGradient = std::pair<int, PlaneParams>;

void pixel_gradients(std::span<const PlanarPrimitive> planes, const Ray& ray,
                     const PixelRender& pixel, double lambda, double grad_depth,
                     const Vec3& grad_normal, std::vector<LocalGradient>& out) {
  const auto& contribs = pixel.contributions;
  const std::size_t m = contribs.size();
  if (m == 0 || (grad_depth == 0.0 && grad_normal.isZero())) return;

  std::vector<Vec3> normals(m);
  for (std::size_t j = 0; j < m; ++j) {
    normals[j] = plane_axes(planes[static_cast<std::size_t>(contribs[j].plane)]).normal;
  }
  // Composite of everything behind j, blended as if starting from j + 1.
  std::vector<double> behind_depth(m, 0.0);
  std::vector<Vec3> behind_normal(m, Vec3::Zero());
  for (std::size_t j = m - 1; j > 0; --j) {
    const Contribution& c = contribs[j];
    behind_depth[j - 1] = c.weight * c.depth + (1.0 - c.weight) * behind_depth[j];
    behind_normal[j - 1] = c.weight * normals[j] + (1.0 - c.weight) * behind_normal[j];
  }

  for (std::size_t j = 0; j < m; ++j) {
    const Contribution& c = contribs[j];
    const double dl_dt = grad_depth * c.transmittance * c.weight;
    const double dl_dw = grad_depth * c.transmittance * (c.depth - behind_depth[j]) +
                         grad_normal.dot(c.transmittance * (normals[j] - behind_normal[j]));
    const Vec3 dl_dn = grad_normal * (c.transmittance * c.weight);

    const PlanarPrimitive& plane = planes[static_cast<std::size_t>(c.plane)];
    const PlaneFrame<Jet> frame = make_frame<Jet>(seed_params(plane.params()));
    Jet depth, weight;
    if (!trace_plane<Jet>(ray, frame, lambda, depth, weight)) continue;
    PlaneParams g = dl_dt * depth.derivatives() + dl_dw * weight.derivatives();
    for (int k = 0; k < 3; ++k) g += dl_dn(k) * frame.normal(k).derivatives();
    out.emplace_back(c.plane, g);
  }
}

}  // namespace

void backward_pixel(std::span<const PlanarPrimitive> planes, const Ray& ray,
                    const PixelRender& pixel, double lambda, double grad_depth,
                    const Vec3& grad_normal, std::span<PlaneParams> gradients) {
  std::vector<LocalGradient> local;
  pixel_gradients(planes, ray, pixel, lambda, grad_depth, grad_normal, local);
  for (const auto& [plane, g] : local) gradients[static_cast<std::size_t>(plane)] += g;
}

void backward_view(std::span<const PlanarPrimitive> planes, const Camera& camera,
                   const RenderedView& rendered, double lambda,
                   std::span<const double> grad_depth, std::span<const Vec3> grad_normal,
                   std::span<PlaneParams> gradients, int view_id) {
  std::vector<std::vector<LocalGradient>> rows(static_cast<std::size_t>(camera.height));
  parallel_for(0, camera.height, [&](int v) {
    auto& row = rows[static_cast<std::size_t>(v)];
    for (int u = 0; u < camera.width; ++u) {
      const std::size_t p = static_cast<std::size_t>(v) * camera.width + u;
      if (grad_depth[p] == 0.0 && grad_normal[p].isZero()) continue;
      const Ray ray = pixel_ray(camera, u, v, view_id);
      pixel_gradients(planes, ray, rendered.pixels[p], lambda,
                      grad_depth[p] * rendered.z_per_range[p], grad_normal[p], row);
    }
  });
  for (const auto& row : rows) {
    for (const auto& [plane, g] : row) gradients[static_cast<std::size_t>(plane)] += g;
  }
}

}  // namespace planeline

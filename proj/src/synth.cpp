#include "planeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "planeline/error.hpp"

namespace planeline {

void DegradationSpec::validate() const {
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate(fragment_prob) || !rate(dropout_prob) || !rate(spurious_rate)) {
    throw Error(ErrorCode::kBadConfig, "degradation rates must lie in [0, 1]");
  }
  if (!(jitter_sigma >= 0.0) || !(depth_noise >= 0.0)) {
    throw Error(ErrorCode::kBadConfig, "degradation sigmas must be >= 0");
  }
  if (fragment_count < 1) throw Error(ErrorCode::kBadConfig, "fragment_count must be >= 1");
}

namespace {

/// Box face as corner + two edge vectors; kept apart from the primitive
/// parameterization so the GT renderer shares nothing with the rasterizer.
struct Face {
  Vec3 corner;
  Vec3 a;
  Vec3 b;
  Vec3 normal;
};

std::array<Face, 6> box_faces(const Vec3& dims) {
  std::array<Face, 6> faces;
  const Vec3 h = 0.5 * dims;
  int f = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const int i = (axis + 1) % 3;
    const int j = (axis + 2) % 3;
    for (double s : {1.0, -1.0}) {
      Face face;
      face.normal = Vec3::Zero();
      face.normal(axis) = s;
      face.corner = -h;
      face.corner(axis) = s * h(axis);
      face.a = Vec3::Zero();
      face.a(i) = dims(i);
      face.b = Vec3::Zero();
      face.b(j) = dims(j);
      faces[static_cast<std::size_t>(f++)] = face;
    }
  }
  return faces;
}

/// Ray through the pixel point (x, y) scaled so the ray parameter is camera z.
Vec3 z_ray(const Camera& camera, double x, double y) {
  const Intrinsics& k = camera.intrinsics;
  const Vec3 local((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
  return camera.pose.rotation.transpose() * local;
}

struct Hit {
  double z = std::numeric_limits<double>::infinity();
  int face = -1;
};

Hit cast(const std::array<Face, 6>& faces, const Vec3& origin, const Vec3& dir) {
  Hit best;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    const double denom = dir.dot(face.normal);
    if (denom == 0.0) continue;
    const double t = (face.corner - origin).dot(face.normal) / denom;
    if (!(t > 0.0) || t >= best.z) continue;
    const Vec3 rel = origin + t * dir - face.corner;
    const double s = rel.dot(face.a) / face.a.squaredNorm();
    const double r = rel.dot(face.b) / face.b.squaredNorm();
    if (s < 0.0 || s > 1.0 || r < 0.0 || r > 1.0) continue;
    best.z = t;
    best.face = static_cast<int>(f);
  }
  return best;
}

constexpr int kOcclusionSamples = 32;
constexpr double kOcclusionTolerance = 1e-4;

}  // namespace

SyntheticScene make_box_scene(const Vec3& dims, int cameras, const SceneOptions& options) {
  if (!(dims.minCoeff() > 0.0) || !dims.allFinite()) {
    throw Error(ErrorCode::kBadDims, "box dimensions must be positive");
  }
  if (cameras < 2) throw Error(ErrorCode::kBadDims, "need at least two cameras");
  if (options.width < 1 || options.height < 1) {
    throw Error(ErrorCode::kBadDims, "image size must be positive");
  }
  SyntheticScene scene;
  scene.dims = dims;
  const Vec3 h = 0.5 * dims;

  int id = 0;
  for (const Face& face : box_faces(dims)) {
    PlanarPrimitive plane;
    plane.id = id++;
    plane.center = face.corner + 0.5 * (face.a + face.b);
    plane.rotation = quaternion_from_normal(face.normal);
    const PlaneAxes axes = plane_axes(plane);
    const double rx = 0.5 * axes.x.cwiseAbs().dot(dims);
    const double ry = 0.5 * axes.y.cwiseAbs().dot(dims);
    plane.radii = Vec4(rx, rx, ry, ry);
    scene.planes.push_back(plane);
  }

  for (int axis = 0; axis < 3; ++axis) {
    const int i = (axis + 1) % 3;
    const int j = (axis + 2) % 3;
    for (double si : {-1.0, 1.0}) {
      for (double sj : {-1.0, 1.0}) {
        LineSegment3D line;
        line.u = Vec3::Zero();
        line.u(i) = si * h(i);
        line.u(j) = sj * h(j);
        line.v = line.u;
        line.u(axis) = -h(axis);
        line.v(axis) = h(axis);
        line.plane_id = -1;
        line.edge = -1;
        scene.gt_lines.push_back(line);
      }
    }
  }

  const double radius = h.norm();
  const double distance = options.distance_factor * radius;
  const double tangent = radius / std::sqrt(distance * distance - radius * radius);
  const double elevation = options.elevation_deg * M_PI / 180.0;
  for (int c = 0; c < cameras; ++c) {
    const double azimuth =
        options.azimuth_offset_deg * M_PI / 180.0 + 2.0 * M_PI * c / static_cast<double>(cameras);
    const Vec3 center = distance * Vec3(std::cos(elevation) * std::cos(azimuth),
                                        std::cos(elevation) * std::sin(azimuth),
                                        std::sin(elevation));
    const Vec3 forward = (-center).normalized();
    const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
    const Vec3 down = forward.cross(right);
    Camera cam;
    cam.width = options.width;
    cam.height = options.height;
    const double half = 0.5 * std::min(options.width, options.height);
    const double focal = options.fill * half / tangent;
    cam.intrinsics = {focal, focal, 0.5 * options.width, 0.5 * options.height};
    cam.pose.rotation.row(0) = right.transpose();
    cam.pose.rotation.row(1) = down.transpose();
    cam.pose.rotation.row(2) = forward.transpose();
    cam.pose.translation = -cam.pose.rotation * center;
    scene.cameras.push_back(cam);
  }
  return scene;
}

GtView render_gt_view(const SyntheticScene& scene, const Camera& camera) {
  const auto faces = box_faces(scene.dims);
  const std::size_t n = static_cast<std::size_t>(camera.width) * camera.height;
  GtView out;
  out.depth.assign(n, 0.0);
  out.normals.assign(n, Vec3::Zero());
  out.face.assign(n, -1);
  const Vec3 origin = camera.center();
  for (int v = 0; v < camera.height; ++v) {
    for (int u = 0; u < camera.width; ++u) {
      const Hit hit = cast(faces, origin, z_ray(camera, u + 0.5, v + 0.5));
      if (hit.face < 0) continue;
      const std::size_t p = static_cast<std::size_t>(v) * camera.width + u;
      out.depth[p] = hit.z;
      out.normals[p] = faces[static_cast<std::size_t>(hit.face)].normal;
      out.face[p] = hit.face;
    }
  }
  return out;
}

bool clip_segment(Vec2& a, Vec2& b, double width, double height) {
  const Vec2 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x(), width - a.x(), a.y(), height - a.y()};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double r = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  const Vec2 start = a + t0 * d;
  b = a + t1 * d;
  a = start;
  return true;
}

LabeledDetections exact_gt_projections(const SyntheticScene& scene, const Camera& camera) {
  const auto faces = box_faces(scene.dims);
  const Vec3 origin = camera.center();
  LabeledDetections out;
  for (std::size_t g = 0; g < scene.gt_lines.size(); ++g) {
    const LineSegment3D& line = scene.gt_lines[g];
    std::array<bool, kOcclusionSamples> visible{};
    std::array<double, kOcclusionSamples> param{};
    for (int k = 0; k < kOcclusionSamples; ++k) {
      const double s = static_cast<double>(k) / (kOcclusionSamples - 1);
      param[static_cast<std::size_t>(k)] = s;
      const Vec3 point = line.u + s * (line.v - line.u);
      const auto proj = try_project(camera, point);
      if (!proj) continue;
      const Hit hit = cast(faces, origin, z_ray(camera, proj->pixel.x(), proj->pixel.y()));
      visible[static_cast<std::size_t>(k)] = !(hit.z < proj->depth - kOcclusionTolerance);
    }
    // One detection per maximal run of visible samples.
    int k = 0;
    while (k < kOcclusionSamples) {
      if (!visible[static_cast<std::size_t>(k)]) {
        ++k;
        continue;
      }
      const int first = k;
      while (k + 1 < kOcclusionSamples && visible[static_cast<std::size_t>(k + 1)]) ++k;
      const int last = k;
      ++k;
      if (first == last) continue;
      const Vec3 p = line.u + param[static_cast<std::size_t>(first)] * (line.v - line.u);
      const Vec3 q = line.u + param[static_cast<std::size_t>(last)] * (line.v - line.u);
      Vec2 a = project_point(camera, p).pixel;
      Vec2 b = project_point(camera, q).pixel;
      if (!clip_segment(a, b, camera.width, camera.height)) continue;
      if (!((b - a).norm() > 0.0)) continue;
      LineSegment2D det;
      det.p1 = a;
      det.p2 = b;
      det.index = static_cast<int>(out.lines.size());
      out.lines.push_back(det);
      out.labels.push_back(static_cast<int>(g));
    }
  }
  return out;
}

std::vector<LabeledDetections> project_gt_lines(const SyntheticScene& scene,
                                                const DegradationSpec& spec) {
  spec.validate();
  std::vector<LabeledDetections> out;
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    const Camera& camera = scene.cameras[c];
    std::mt19937_64 rng(spec.seed * 1000003ULL + c);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const LabeledDetections exact = exact_gt_projections(scene, camera);

    LabeledDetections view;
    auto push = [&](Vec2 a, Vec2 b, int label) {
      if (spec.jitter_sigma > 0.0) {
        a += spec.jitter_sigma * Vec2(jitter(rng), jitter(rng));
        b += spec.jitter_sigma * Vec2(jitter(rng), jitter(rng));
      }
      if (!clip_segment(a, b, camera.width, camera.height) || !((b - a).norm() > 0.0)) return;
      LineSegment2D det;
      det.p1 = a;
      det.p2 = b;
      det.index = static_cast<int>(view.lines.size());
      view.lines.push_back(det);
      view.labels.push_back(label);
    };

    for (std::size_t i = 0; i < exact.lines.size(); ++i) {
      if (unit(rng) < spec.dropout_prob) continue;
      const Vec2 a = exact.lines[i].p1;
      const Vec2 b = exact.lines[i].p2;
      if (spec.fragment_count > 1 && unit(rng) < spec.fragment_prob) {
        std::vector<double> cuts{0.0, 1.0};
        for (int f = 1; f < spec.fragment_count; ++f) cuts.push_back(unit(rng));
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t f = 0; f + 1 < cuts.size(); ++f) {
          push(a + cuts[f] * (b - a), a + cuts[f + 1] * (b - a), exact.labels[i]);
        }
      } else {
        push(a, b, exact.labels[i]);
      }
    }

    const auto spurious =
        static_cast<int>(std::round(spec.spurious_rate * static_cast<double>(exact.lines.size())));
    for (int s = 0; s < spurious; ++s) {
      Vec2 a, b;
      do {
        a = Vec2(unit(rng) * camera.width, unit(rng) * camera.height);
        b = Vec2(unit(rng) * camera.width, unit(rng) * camera.height);
      } while ((b - a).norm() < 0.1 * std::min(camera.width, camera.height));
      LineSegment2D det;
      det.p1 = a;
      det.p2 = b;
      det.index = static_cast<int>(view.lines.size());
      view.lines.push_back(det);
      view.labels.push_back(-1);
    }
    out.push_back(std::move(view));
  }
  return out;
}

std::vector<CameraView> make_views(const SyntheticScene& scene, const DegradationSpec& spec,
                                   std::vector<std::vector<int>>* labels) {
  const auto detections = project_gt_lines(scene, spec);
  std::vector<CameraView> views;
  if (labels) labels->clear();
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    CameraView view;
    view.id = static_cast<int>(c);
    view.camera = scene.cameras[c];
    GtView gt = render_gt_view(scene, view.camera);
    if (spec.depth_noise > 0.0) {
      std::mt19937_64 rng(spec.seed * 1000003ULL + 500009ULL + c);
      std::normal_distribution<double> noise(0.0, spec.depth_noise);
      for (double& z : gt.depth) {
        if (z > 0.0) z = std::max(1e-6, z + noise(rng));
      }
    }
    view.depth = std::move(gt.depth);
    view.normals = std::move(gt.normals);
    view.lines = detections[c].lines;
    if (labels) labels->push_back(detections[c].labels);
    views.push_back(std::move(view));
  }
  return views;
}

}  // namespace planeline

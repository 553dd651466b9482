#include "planeline/core.hpp"

#include <string>

#include "planeline/error.hpp"
#include "planeline/parallel.hpp"

namespace planeline {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBehindCamera: return "E_BEHIND_CAMERA";
    case ErrorCode::kOutOfBounds: return "E_OUT_OF_BOUNDS";
    case ErrorCode::kEmptyRegion: return "E_EMPTY_REGION";
    case ErrorCode::kProjectionDegenerate: return "E_PROJECTION_DEGENERATE";
    case ErrorCode::kShapeMismatch: return "E_SHAPE_MISMATCH";
    case ErrorCode::kDegenerateDetection: return "E_DEGENERATE_DETECTION";
    case ErrorCode::kDegenerateSegment: return "E_DEGENERATE_SEGMENT";
    case ErrorCode::kTooFewSamples: return "E_TOO_FEW_SAMPLES";
    case ErrorCode::kEmptyInput: return "E_EMPTY_INPUT";
    case ErrorCode::kBadDims: return "E_BAD_DIMS";
    case ErrorCode::kBadConfig: return "E_BAD_CONFIG";
    case ErrorCode::kUnknownConfigKey: return "E_UNKNOWN_CONFIG_KEY";
    case ErrorCode::kBadArgument: return "E_BAD_ARGUMENT";
    case ErrorCode::kMissingFile: return "E_MISSING_FILE";
    case ErrorCode::kMissingCamera: return "E_MISSING_CAMERA";
    case ErrorCode::kMissingDepth: return "E_MISSING_DEPTH";
    case ErrorCode::kMissingNormal: return "E_MISSING_NORMAL";
    case ErrorCode::kMissingDetections: return "E_MISSING_DETECTIONS";
    case ErrorCode::kParse: return "E_PARSE";
    case ErrorCode::kWrite: return "E_WRITE";
    case ErrorCode::kNumerical: return "E_NUMERICAL";
  }
  return "E_UNKNOWN";
}

ExitCategory exit_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile:
    case ErrorCode::kMissingCamera:
    case ErrorCode::kMissingDepth:
    case ErrorCode::kMissingNormal:
    case ErrorCode::kMissingDetections:
    case ErrorCode::kParse:
    case ErrorCode::kWrite:
      return ExitCategory::kIo;
    case ErrorCode::kNumerical:
      return ExitCategory::kNumerical;
    default:
      return ExitCategory::kValidation;
  }
}

PlaneParams PlanarPrimitive::params() const {
  PlaneParams p;
  p.segment<3>(kCenterOffset) = center;
  p.segment<4>(kRotationOffset) = rotation;
  p.segment<4>(kRadiiOffset) = radii;
  return p;
}

PlanarPrimitive PlanarPrimitive::from_params(int id, const PlaneParams& params) {
  PlanarPrimitive plane;
  plane.id = id;
  plane.center = params.segment<3>(kCenterOffset);
  plane.rotation = params.segment<4>(kRotationOffset);
  plane.radii = params.segment<4>(kRadiiOffset);
  return plane;
}

PlaneAxes plane_axes(const PlanarPrimitive& plane) {
  const Mat3 r = quaternion_to_matrix<double>(plane.rotation);
  return {r.col(0), r.col(1), r.col(2)};
}

std::array<Vec3, 4> plane_vertices(const PlanarPrimitive& plane) {
  return frame_vertices(make_frame<double>(plane.params()));
}

std::array<LineSegment3D, 4> plane_edges(const PlanarPrimitive& plane) {
  const auto vertices = plane_vertices(plane);
  std::array<LineSegment3D, 4> edges;
  for (int k = 0; k < 4; ++k) {
    edges[k].u = vertices[kEdgeVertices[k].first];
    edges[k].v = vertices[kEdgeVertices[k].second];
    edges[k].plane_id = plane.id;
    edges[k].edge = k;
  }
  return edges;
}

Vec4 quaternion_from_normal(const Vec3& normal) {
  const Eigen::Quaterniond q =
      Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), normal.normalized());
  return Vec4(q.w(), q.x(), q.y(), q.z()).normalized();
}

std::optional<Projection> try_project(const Camera& camera, const Vec3& point) {
  const Vec3 pc = camera.pose.rotation * point + camera.pose.translation;
  if (!(pc.z() > 0.0)) return std::nullopt;
  const Intrinsics& k = camera.intrinsics;
  return Projection{Vec2(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy), pc.z()};
}

Projection project_point(const Camera& camera, const Vec3& point) {
  if (auto projection = try_project(camera, point)) return *projection;
  throw Error(ErrorCode::kBehindCamera, "point lies behind the camera");
}

Ray pixel_ray(const Camera& camera, int u, int v, int view_id) {
  if (!camera.contains(u, v)) {
    throw Error(ErrorCode::kOutOfBounds,
                "pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside image");
  }
  const Intrinsics& k = camera.intrinsics;
  const Vec3 dir_cam((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
  Ray ray;
  ray.origin = camera.center();
  ray.direction = (camera.pose.rotation.transpose() * dir_cam).normalized();
  ray.u = u;
  ray.v = v;
  ray.view = view_id;
  return ray;
}

namespace {
std::atomic<int> g_thread_count{1};
}  // namespace

void set_thread_count(int count) { g_thread_count = std::max(1, count); }
int thread_count() { return g_thread_count.load(); }

}  // namespace planeline

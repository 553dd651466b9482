#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "planeline/core.hpp"
#include "planeline/error.hpp"
#include "planeline/finalize.hpp"
#include "planeline/optim.hpp"

namespace planeline {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

// --- Binary maps: 16-byte header (magic, width, height, channels as LE u32) + LE f32 ----

inline constexpr std::uint32_t kDepthMagic = 0x48545044;   // "DPTH"
inline constexpr std::uint32_t kNormalMagic = 0x574d524e;  // "NRMW", world-frame normals

struct FloatMap {
  std::uint32_t magic = 0;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;
};

void write_float_map(const fs::path& path, const FloatMap& map);
/// `missing` is the error raised when the file does not exist.
FloatMap read_float_map(const fs::path& path, std::uint32_t magic, int channels,
                        ErrorCode missing = ErrorCode::kMissingFile);

// --- Scene directory -----------------------------------------------------------

/// view_%04d.cam / .depth / .normal / .lines
fs::path view_file(const fs::path& dir, int view, const char* extension);

void write_camera(const fs::path& path, const Camera& camera);
/// Width and height are left at zero; they come from the depth map.
Camera read_camera(const fs::path& path);

void write_detections(const fs::path& path, std::span<const LineSegment2D> lines);
std::vector<LineSegment2D> read_detections(const fs::path& path);

void write_view(const fs::path& dir, const CameraView& view);
void write_scene(const fs::path& dir, std::span<const CameraView> views);
/// Reads views 0, 1, ... until the first missing camera file.
/// Throws kMissingCamera when there is none, kMissingDepth / kMissingNormal /
/// kMissingDetections for an incomplete view, kShapeMismatch for size conflicts.
std::vector<CameraView> load_scene(const fs::path& dir);

void write_segments3d(const fs::path& path, std::span<const LineSegment3D> lines);
std::vector<LineSegment3D> read_segments3d(const fs::path& path);

void write_points(const fs::path& path, std::span<const Vec3> points);
std::vector<Vec3> read_points(const fs::path& path);

// --- Pipeline products -----------------------------------------------------------

void write_planes(const fs::path& path, std::span<const PlanarPrimitive> planes);
std::vector<PlanarPrimitive> read_planes(const fs::path& path);

void write_line_map(const fs::path& path, const LineMap3D& map);
LineMap3D read_line_map(const fs::path& path);

void write_loss_log(const fs::path& path, std::span<const EpochLog> history);

using Report = std::vector<std::pair<std::string, double>>;
void write_report(const fs::path& path, const Report& report);
Report read_report(const fs::path& path);

/// OBJ-style text: `v x y z` records, then `l i j` per segment.
void export_lines_obj(const fs::path& path, std::span<const LineSegment3D> lines);
/// OBJ-style text: four `v` records and one `f` quad per plane.
void export_planes_obj(const fs::path& path, std::span<const PlanarPrimitive> planes);

}  // namespace planeline

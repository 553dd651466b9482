#include "planeline/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "planeline/error.hpp"

namespace planeline {

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::kWrite, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, ErrorCode missing, bool binary = false) {
  if (!fs::exists(path)) throw Error(missing, "missing file " + path.string());
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(missing, "cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kWrite, "write failed for " + path.string());
}

/// Whitespace-separated tokens of one line.
std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T to_number(std::string_view token, const fs::path& path) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kParse, path.string() + ": bad number '" + std::string(token) + "'");
  }
  return value;
}

/// Data lines of a text file with comments and blanks skipped.
std::vector<std::vector<std::string_view>> read_records(std::ifstream& in, std::string& storage) {
  std::stringstream ss;
  ss << in.rdbuf();
  storage = ss.str();
  std::vector<std::vector<std::string_view>> out;
  std::string_view text(storage);
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split(line);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

void expect_count(const std::vector<std::string_view>& rec, std::size_t n, const fs::path& path) {
  if (rec.size() != n) {
    throw Error(ErrorCode::kParse, path.string() + ": expected " + std::to_string(n) +
                                       " fields, got " + std::to_string(rec.size()));
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_float_map(const fs::path& path, const FloatMap& map) {
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height * map.channels;
  if (map.data.size() != n) throw Error(ErrorCode::kShapeMismatch, "map data size mismatch");
  auto out = open_out(path, true);
  put_u32(out, map.magic);
  put_u32(out, static_cast<std::uint32_t>(map.width));
  put_u32(out, static_cast<std::uint32_t>(map.height));
  put_u32(out, static_cast<std::uint32_t>(map.channels));
  for (float f : map.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
  finish(out, path);
}

FloatMap read_float_map(const fs::path& path, std::uint32_t magic, int channels,
                        ErrorCode missing) {
  auto in = open_in(path, missing, true);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw Error(ErrorCode::kParse, path.string() + ": truncated header");
  FloatMap map;
  map.magic = get_u32(bytes.data());
  map.width = static_cast<int>(get_u32(bytes.data() + 4));
  map.height = static_cast<int>(get_u32(bytes.data() + 8));
  map.channels = static_cast<int>(get_u32(bytes.data() + 12));
  if (map.magic != magic) throw Error(ErrorCode::kParse, path.string() + ": bad magic");
  if (map.channels != channels || map.width <= 0 || map.height <= 0) {
    throw Error(ErrorCode::kParse, path.string() + ": bad dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height * map.channels;
  if (bytes.size() != 16 + 4 * n) throw Error(ErrorCode::kParse, path.string() + ": bad size");
  map.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = get_u32(bytes.data() + 16 + 4 * i);
    std::memcpy(&map.data[i], &bits, 4);
  }
  return map;
}

fs::path view_file(const fs::path& dir, int view, const char* extension) {
  char name[64];
  std::snprintf(name, sizeof(name), "view_%04d.%s", view, extension);
  return dir / name;
}

void write_camera(const fs::path& path, const Camera& camera) {
  auto out = open_out(path);
  const Intrinsics& k = camera.intrinsics;
  out << format_double(k.fx) << ' ' << format_double(k.fy) << ' ' << format_double(k.cx) << ' '
      << format_double(k.cy) << '\n';
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << format_double(camera.pose.rotation(r, c)) << ' ';
    out << format_double(camera.pose.translation(r)) << '\n';
  }
  finish(out, path);
}

Camera read_camera(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingCamera);
  std::string storage;
  std::vector<double> values;
  for (const auto& rec : read_records(in, storage)) {
    for (auto tok : rec) values.push_back(to_number<double>(tok, path));
  }
  if (values.size() != 16) {
    throw Error(ErrorCode::kParse, path.string() + ": expected 16 numbers");
  }
  Camera cam;
  cam.intrinsics = {values[0], values[1], values[2], values[3]};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cam.pose.rotation(r, c) = values[4 + 4 * r + c];
    cam.pose.translation(r) = values[4 + 4 * r + 3];
  }
  return cam;
}

void write_detections(const fs::path& path, std::span<const LineSegment2D> lines) {
  auto out = open_out(path);
  for (const auto& l : lines) {
    out << format_double(l.p1.x()) << ' ' << format_double(l.p1.y()) << ' '
        << format_double(l.p2.x()) << ' ' << format_double(l.p2.y()) << '\n';
  }
  finish(out, path);
}

std::vector<LineSegment2D> read_detections(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingDetections);
  std::string storage;
  std::vector<LineSegment2D> out;
  for (const auto& rec : read_records(in, storage)) {
    expect_count(rec, 4, path);
    LineSegment2D l;
    l.p1 = Vec2(to_number<double>(rec[0], path), to_number<double>(rec[1], path));
    l.p2 = Vec2(to_number<double>(rec[2], path), to_number<double>(rec[3], path));
    l.index = static_cast<int>(out.size());
    out.push_back(l);
  }
  return out;
}

void write_view(const fs::path& dir, const CameraView& view) {
  const Camera& cam = view.camera;
  write_camera(view_file(dir, view.id, "cam"), cam);
  FloatMap depth{kDepthMagic, cam.width, cam.height, 1, {}};
  depth.data.reserve(view.depth.size());
  for (double z : view.depth) depth.data.push_back(static_cast<float>(z));
  write_float_map(view_file(dir, view.id, "depth"), depth);
  FloatMap normal{kNormalMagic, cam.width, cam.height, 3, {}};
  normal.data.reserve(3 * view.normals.size());
  for (const Vec3& n : view.normals) {
    for (int k = 0; k < 3; ++k) normal.data.push_back(static_cast<float>(n(k)));
  }
  write_float_map(view_file(dir, view.id, "normal"), normal);
  write_detections(view_file(dir, view.id, "lines"), view.lines);
}

void write_scene(const fs::path& dir, std::span<const CameraView> views) {
  for (const auto& v : views) write_view(dir, v);
}

std::vector<CameraView> load_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kMissingFile, "scene directory " + dir.string() + " not found");
  }
  std::vector<CameraView> views;
  for (int id = 0;; ++id) {
    const fs::path cam_path = view_file(dir, id, "cam");
    if (!fs::exists(cam_path)) break;
    CameraView view;
    view.id = id;
    view.camera = read_camera(cam_path);
    const FloatMap depth =
        read_float_map(view_file(dir, id, "depth"), kDepthMagic, 1, ErrorCode::kMissingDepth);
    const FloatMap normal =
        read_float_map(view_file(dir, id, "normal"), kNormalMagic, 3, ErrorCode::kMissingNormal);
    if (depth.width != normal.width || depth.height != normal.height) {
      throw Error(ErrorCode::kShapeMismatch,
                  "view " + std::to_string(id) + ": depth and normal sizes differ");
    }
    view.camera.width = depth.width;
    view.camera.height = depth.height;
    view.depth.assign(depth.data.begin(), depth.data.end());
    view.normals.resize(view.depth.size());
    for (std::size_t i = 0; i < view.normals.size(); ++i) {
      view.normals[i] = Vec3(normal.data[3 * i], normal.data[3 * i + 1], normal.data[3 * i + 2]);
    }
    view.lines = read_detections(view_file(dir, id, "lines"));
    views.push_back(std::move(view));
  }
  if (views.empty()) {
    throw Error(ErrorCode::kMissingCamera, "no view_0000.cam in " + dir.string());
  }
  return views;
}

void write_segments3d(const fs::path& path, std::span<const LineSegment3D> lines) {
  auto out = open_out(path);
  for (const auto& l : lines) {
    for (int k = 0; k < 3; ++k) out << format_double(l.u(k)) << ' ';
    for (int k = 0; k < 3; ++k) out << format_double(l.v(k)) << (k < 2 ? ' ' : '\n');
  }
  finish(out, path);
}

std::vector<LineSegment3D> read_segments3d(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingFile);
  std::string storage;
  std::vector<LineSegment3D> out;
  for (const auto& rec : read_records(in, storage)) {
    expect_count(rec, 6, path);
    LineSegment3D l;
    for (int k = 0; k < 3; ++k) {
      l.u(k) = to_number<double>(rec[static_cast<std::size_t>(k)], path);
      l.v(k) = to_number<double>(rec[static_cast<std::size_t>(3 + k)], path);
    }
    l.plane_id = -1;
    l.edge = -1;
    out.push_back(l);
  }
  return out;
}

void write_points(const fs::path& path, std::span<const Vec3> points) {
  auto out = open_out(path);
  for (const auto& p : points) {
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  }
  finish(out, path);
}

std::vector<Vec3> read_points(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingFile);
  std::string storage;
  std::vector<Vec3> out;
  for (const auto& rec : read_records(in, storage)) {
    expect_count(rec, 3, path);
    out.emplace_back(to_number<double>(rec[0], path), to_number<double>(rec[1], path),
                     to_number<double>(rec[2], path));
  }
  return out;
}

void write_planes(const fs::path& path, std::span<const PlanarPrimitive> planes) {
  auto out = open_out(path);
  out << "# id cx cy cz qw qx qy qz rx+ rx- ry+ ry-\n";
  for (const auto& p : planes) {
    out << p.id;
    for (int k = 0; k < 3; ++k) out << ' ' << format_double(p.center(k));
    for (int k = 0; k < 4; ++k) out << ' ' << format_double(p.rotation(k));
    for (int k = 0; k < 4; ++k) out << ' ' << format_double(p.radii(k));
    out << '\n';
  }
  finish(out, path);
}

std::vector<PlanarPrimitive> read_planes(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingFile);
  std::string storage;
  std::vector<PlanarPrimitive> out;
  for (const auto& rec : read_records(in, storage)) {
    expect_count(rec, 12, path);
    PlanarPrimitive p;
    p.id = to_number<int>(rec[0], path);
    for (int k = 0; k < 3; ++k) p.center(k) = to_number<double>(rec[static_cast<std::size_t>(1 + k)], path);
    for (int k = 0; k < 4; ++k) p.rotation(k) = to_number<double>(rec[static_cast<std::size_t>(4 + k)], path);
    for (int k = 0; k < 4; ++k) p.radii(k) = to_number<double>(rec[static_cast<std::size_t>(8 + k)], path);
    out.push_back(p);
  }
  return out;
}

void write_line_map(const fs::path& path, const LineMap3D& map) {
  auto out = open_out(path);
  out << "# L ux uy uz vx vy vz plane edge(1-4, 0 = none)\n"
         "# T line view detection\n"
         "# S|H view detection line...\n";
  for (const auto& l : map.lines) {
    out << 'L';
    for (int k = 0; k < 3; ++k) out << ' ' << format_double(l.u(k));
    for (int k = 0; k < 3; ++k) out << ' ' << format_double(l.v(k));
    out << ' ' << l.plane_id << ' ' << (l.edge >= 0 ? l.edge + 1 : 0) << '\n';
  }
  for (std::size_t i = 0; i < map.lines.size(); ++i) {
    for (const auto& ref : map.lines[i].track) {
      out << "T " << i << ' ' << ref.view << ' ' << ref.line << '\n';
    }
  }
  auto table = [&](char tag, const std::map<DetectionRef, std::vector<int>>& t) {
    for (const auto& [det, lines] : t) {
      out << tag << ' ' << det.view << ' ' << det.line;
      for (int l : lines) out << ' ' << l;
      out << '\n';
    }
  };
  table('S', map.sources);
  table('H', map.hits);
  finish(out, path);
}

LineMap3D read_line_map(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingFile);
  std::string storage;
  LineMap3D map;
  for (const auto& rec : read_records(in, storage)) {
    const auto tag = rec[0];
    if (tag == "L") {
      expect_count(rec, 9, path);
      LineSegment3D l;
      for (int k = 0; k < 3; ++k) {
        l.u(k) = to_number<double>(rec[static_cast<std::size_t>(1 + k)], path);
        l.v(k) = to_number<double>(rec[static_cast<std::size_t>(4 + k)], path);
      }
      l.plane_id = to_number<int>(rec[7], path);
      l.edge = to_number<int>(rec[8], path) - 1;
      map.lines.push_back(l);
    } else if (tag == "T") {
      expect_count(rec, 4, path);
      const auto i = to_number<std::size_t>(rec[1], path);
      if (i >= map.lines.size()) throw Error(ErrorCode::kParse, path.string() + ": bad line index");
      map.lines[i].track.push_back({to_number<int>(rec[2], path), to_number<int>(rec[3], path)});
    } else if (tag == "S" || tag == "H") {
      if (rec.size() < 3) throw Error(ErrorCode::kParse, path.string() + ": short record");
      const DetectionRef det{to_number<int>(rec[1], path), to_number<int>(rec[2], path)};
      std::vector<int> lines;
      for (std::size_t k = 3; k < rec.size(); ++k) {
        const int l = to_number<int>(rec[k], path);
        if (l < 0 || static_cast<std::size_t>(l) >= map.lines.size()) {
          throw Error(ErrorCode::kParse, path.string() + ": bad line index");
        }
        lines.push_back(l);
      }
      (tag == "S" ? map.sources : map.hits)[det] = std::move(lines);
    } else {
      throw Error(ErrorCode::kParse, path.string() + ": unknown record '" + std::string(tag) + "'");
    }
  }
  return map;
}

void write_loss_log(const fs::path& path, std::span<const EpochLog> history) {
  auto out = open_out(path);
  out << "epoch,iteration,lambda,render,euc2d,ort2d,group,total,planes\n";
  for (const auto& e : history) {
    out << e.epoch << ',' << e.iteration << ',' << format_double(e.lambda) << ','
        << format_double(e.render) << ',' << format_double(e.euc2d) << ','
        << format_double(e.ort2d) << ',' << format_double(e.group) << ','
        << format_double(e.total) << ',' << e.planes << '\n';
  }
  finish(out, path);
}

void write_report(const fs::path& path, const Report& report) {
  auto out = open_out(path);
  for (const auto& [key, value] : report) out << key << ' ' << format_double(value) << '\n';
  finish(out, path);
}

Report read_report(const fs::path& path) {
  auto in = open_in(path, ErrorCode::kMissingFile);
  std::string storage;
  Report report;
  for (const auto& rec : read_records(in, storage)) {
    expect_count(rec, 2, path);
    report.emplace_back(std::string(rec[0]), to_number<double>(rec[1], path));
  }
  return report;
}

void export_lines_obj(const fs::path& path, std::span<const LineSegment3D> lines) {
  auto out = open_out(path);
  for (const auto& l : lines) {
    out << "v " << format_double(l.u.x()) << ' ' << format_double(l.u.y()) << ' '
        << format_double(l.u.z()) << '\n';
    out << "v " << format_double(l.v.x()) << ' ' << format_double(l.v.y()) << ' '
        << format_double(l.v.z()) << '\n';
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out << "l " << 2 * i + 1 << ' ' << 2 * i + 2 << '\n';
  }
  finish(out, path);
}

void export_planes_obj(const fs::path& path, std::span<const PlanarPrimitive> planes) {
  auto out = open_out(path);
  for (const auto& p : planes) {
    for (const Vec3& v : plane_vertices(p)) {
      out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
          << format_double(v.z()) << '\n';
    }
  }
  for (std::size_t i = 0; i < planes.size(); ++i) {
    out << "f " << 4 * i + 1 << ' ' << 4 * i + 2 << ' ' << 4 * i + 3 << ' ' << 4 * i + 4 << '\n';
  }
  finish(out, path);
}

}  // namespace planeline

#include "planeline/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include "planeline/error.hpp"
#include "planeline/io.hpp"

namespace planeline {

namespace {

using Field = std::variant<double*, int*, std::uint64_t*>;

std::vector<std::pair<std::string, Field>> fields(PipelineConfig& c) {
  OptimConfig& o = c.optim;
  LossWeights& w = c.optim.weights;
  Thresholds& t = c.thresholds;
  return {
      {"epochs", &o.epochs},
      {"learning_rate", &o.learning_rate},
      {"beta1", &o.beta1},
      {"beta2", &o.beta2},
      {"epsilon", &o.epsilon},
      {"split_threshold", &o.split_threshold},
      {"blend_count", &o.blend_count},
      {"weight_filter", &o.weight_filter},
      {"initial_planes", &o.initial_planes},
      {"group_cap", &o.group_cap},
      {"max_planes", &o.max_planes},
      {"seed", &o.seed},
      {"alpha_1", &w.alpha_1},
      {"alpha_2", &w.alpha_2},
      {"alpha_3", &w.alpha_3},
      {"alpha_depth", &w.alpha_depth},
      {"alpha_normal", &w.alpha_normal},
      {"alpha_plane", &w.alpha_plane},
      {"alpha_line", &w.alpha_line},
      {"extract_dist", &t.extract_dist},
      {"extract_angle", &t.extract_angle},
      {"extract_lambda", &t.extract_lambda},
      {"track_angle", &t.track_angle},
      {"track_dist", &t.track_dist},
      {"track_overlap", &t.track_overlap},
      {"dbscan_eps", &t.dbscan_eps},
  };
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::kBadConfig,
                "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
  }
  return out;
}

}  // namespace

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (auto& [name, field] : fields(config)) {
    if (name != key) continue;
    std::visit(
        [&](auto* ptr) { *ptr = parse_number<std::remove_pointer_t<decltype(ptr)>>(key, value); },
        field);
    return;
  }
  throw Error(ErrorCode::kUnknownConfigKey, "unknown config key '" + std::string(key) + "'");
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kBadConfig, "line " + std::to_string(line_no) + ": expected key=value");
    }
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::vector<std::string> config_keys() {
  PipelineConfig c;
  std::vector<std::string> keys;
  for (auto& [name, field] : fields(c)) keys.push_back(name);
  return keys;
}

std::string format_config(const PipelineConfig& config) {
  PipelineConfig copy = config;
  std::string out;
  for (auto& [name, field] : fields(copy)) {
    out += name + " = ";
    std::visit(
        [&](auto* ptr) {
          if constexpr (std::is_same_v<decltype(ptr), double*>) {
            out += format_double(*ptr);
          } else {
            out += std::to_string(*ptr);
          }
        },
        field);
    out += '\n';
  }
  return out;
}

}  // namespace planeline

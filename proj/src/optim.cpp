#include "planeline/optim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "planeline/error.hpp"
#include "planeline/parallel.hpp"
#include "planeline/raster.hpp"

namespace planeline {

void OptimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kBadConfig, what); };
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (!(split_threshold > 0.0)) fail("split_threshold must be > 0");
  if (blend_count < 1) fail("blend_count must be >= 1");
  if (!(weight_filter > 0.0 && weight_filter < 1.0)) fail("weight_filter must lie in (0, 1)");
  if (initial_planes < 2) fail("initial_planes must be >= 2");
  if (max_planes < 0) fail("max_planes must be >= 0");
}

std::vector<SurfaceSample> surface_samples(std::span<const CameraView> views) {
  std::vector<SurfaceSample> out;
  for (const CameraView& view : views) {
    const Camera& cam = view.camera;
    const Vec3 forward = cam.forward();
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const std::size_t p = view.pixel_index(u, v);
        if (!(view.depth[p] > 0.0)) continue;
        const Ray ray = pixel_ray(cam, u, v, view.id);
        const double t = view.depth[p] / ray.direction.dot(forward);
        out.push_back({ray.origin + t * ray.direction, view.normals[p]});
      }
    }
  }
  return out;
}

std::vector<PlanarPrimitive> initialize_planes(std::span<const SurfaceSample> samples,
                                               const OptimConfig& config) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::kTooFewSamples, "need at least two surface samples, got " +
                                               std::to_string(samples.size()));
  }
  const std::size_t count =
      std::min(samples.size(), static_cast<std::size_t>(std::max(2, config.initial_planes)));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  // Partial Fisher-Yates: the first `count` entries are a uniform draw.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(count);

  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  parallel_for(0, static_cast<int>(count), [&](int i) {
    const Vec3& p = samples[order[static_cast<std::size_t>(i)]].point;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      if (j == static_cast<std::size_t>(i)) continue;
      best = std::min(best, (samples[order[j]].point - p).squaredNorm());
    }
    nearest[static_cast<std::size_t>(i)] = std::sqrt(best);
  });

  std::vector<PlanarPrimitive> planes(count);
  for (std::size_t i = 0; i < count; ++i) {
    const SurfaceSample& s = samples[order[i]];
    PlanarPrimitive& plane = planes[i];
    plane.id = static_cast<int>(i);
    plane.center = s.point;
    plane.rotation = quaternion_from_normal(s.normal);
    plane.radii = Vec4::Constant(std::max(kRadiusFloor, 0.5 * nearest[i]));
  }
  return planes;
}

namespace {

void normalize_plane(PlanarPrimitive& plane) {
  const double n = plane.rotation.norm();
  if (n > 0.0) plane.rotation /= n;
  plane.radii = plane.radii.cwiseMax(kRadiusFloor);
}

}  // namespace

bool adam_step(PlanarPrimitive& plane, const PlaneParams& gradient, AdamState& state,
               const OptimConfig& config) {
  if (!gradient.allFinite()) return false;
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * gradient;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * gradient.cwiseAbs2();
  if (gradient.isZero(0.0)) return true;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const PlaneParams m_hat = state.m / c1;
  const PlaneParams v_hat = state.v / c2;
  PlaneParams params = plane.params();
  params -= config.learning_rate *
            m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + config.epsilon).matrix());
  plane = PlanarPrimitive::from_params(plane.id, params);
  normalize_plane(plane);
  return true;
}

std::vector<PlanarPrimitive> maybe_split(const PlanarPrimitive& plane, double x_gradient,
                                         double y_gradient, double threshold, int& next_id) {
  const bool split_x = x_gradient > threshold;
  const bool split_y = !split_x && y_gradient > threshold;
  if (!split_x && !split_y) return {plane};

  const PlaneAxes axes = plane_axes(plane);
  const int pos = split_x ? kRadiusXPos : kRadiusYPos;
  const int neg = split_x ? kRadiusXNeg : kRadiusYNeg;
  const Vec3 axis = split_x ? axes.x : axes.y;
  const double half = 0.5 * (plane.radii(pos) + plane.radii(neg));
  const Vec3 mid = plane.center + 0.5 * (plane.radii(pos) - plane.radii(neg)) * axis;

  std::vector<PlanarPrimitive> children(2, plane);
  for (int k = 0; k < 2; ++k) {
    PlanarPrimitive& child = children[static_cast<std::size_t>(k)];
    child.id = next_id++;
    child.center = mid + (k == 0 ? 0.5 : -0.5) * half * axis;
    child.radii(pos) = 0.5 * half;
    child.radii(neg) = 0.5 * half;
  }
  return children;
}

namespace {

/// Largest T*w of each plane over every pixel of every view.
std::vector<double> max_contributions(std::span<const PlanarPrimitive> planes,
                                      std::span<const CameraView> views, double lambda,
                                      const RenderOptions& options) {
  std::vector<double> best(planes.size(), 0.0);
  for (const CameraView& view : views) {
    const RenderedView rendered = render_view(planes, view.camera, lambda, options, view.id);
    for (const PixelRender& pixel : rendered.pixels) {
      for (const Contribution& c : pixel.contributions) {
        double& b = best[static_cast<std::size_t>(c.plane)];
        b = std::max(b, c.transmittance * c.weight);
      }
    }
  }
  return best;
}

}  // namespace

std::vector<PlanarPrimitive> prune_planes(std::span<const PlanarPrimitive> planes,
                                          std::span<const CameraView> views, double lambda,
                                          const RenderOptions& options) {
  const auto best = max_contributions(planes, views, lambda, options);
  std::vector<PlanarPrimitive> kept;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (best[i] >= options.weight_filter) kept.push_back(planes[i]);
  }
  return kept;
}

namespace {

double summed_render_loss(std::span<const PlanarPrimitive> planes,
                          std::span<const CameraView> views, double lambda,
                          const RenderOptions& options, const LossWeights& weights) {
  double total = 0.0;
  for (const CameraView& view : views) {
    const RenderedView r = render_view(planes, view.camera, lambda, options, view.id);
    total += render_loss(r.depth, r.normal, view.depth, view.normals, weights);
  }
  return total;
}

std::uint64_t iteration_seed(std::uint64_t seed, long iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

OptimResult optimize_planes(std::vector<PlanarPrimitive> planes,
                            std::span<const CameraView> views, const OptimConfig& config,
                            const ProgressFn& progress) {
  config.validate();
  if (views.empty()) throw Error(ErrorCode::kEmptyInput, "no views to optimize against");

  RenderOptions render;
  render.blend_count = config.blend_count;
  render.weight_filter = config.weight_filter;
  TotalLossOptions loss_options;
  loss_options.render = render;
  loss_options.group_cap = config.group_cap;

  std::vector<std::size_t> view_order(views.size());
  std::iota(view_order.begin(), view_order.end(), std::size_t{0});
  std::stable_sort(view_order.begin(), view_order.end(),
                   [&](std::size_t a, std::size_t b) { return views[a].id < views[b].id; });

  OptimResult result;
  result.initial_render =
      summed_render_loss(planes, views, lambda_schedule(0), render, config.weights);

  int next_id = 0;
  for (const auto& p : planes) next_id = std::max(next_id, p.id + 1);
  std::vector<AdamState> states(planes.size());
  long iteration = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    std::vector<double> grad_x(planes.size(), 0.0);
    std::vector<double> grad_y(planes.size(), 0.0);

    for (std::size_t vi : view_order) {
      const double lambda = lambda_schedule(iteration);
      loss_options.seed = iteration_seed(config.seed, iteration);
      const LossBreakdown loss = total_loss(views[vi], planes, config.weights, lambda, loss_options);
      for (std::size_t i = 0; i < planes.size(); ++i) {
        const PlaneParams& g = loss.gradients[i];
        if (!adam_step(planes[i], g, states[i], config)) {
          std::clog << "warning: non-finite gradient for plane " << planes[i].id
                    << " at iteration " << iteration << ", step skipped\n";
          continue;
        }
        grad_x[i] += 0.5 * (std::abs(g(kRadiiOffset + kRadiusXPos)) +
                            std::abs(g(kRadiiOffset + kRadiusXNeg)));
        grad_y[i] += 0.5 * (std::abs(g(kRadiiOffset + kRadiusYPos)) +
                            std::abs(g(kRadiiOffset + kRadiusYNeg)));
      }
      log.render += loss.render;
      log.euc2d += loss.euc2d;
      log.ort2d += loss.ort2d;
      log.group += loss.group;
      log.total += loss.total;
      ++iteration;
    }

    // Prune, keeping optimizer state and gradient statistics aligned.
    const double lambda = lambda_schedule(iteration);
    const auto best = max_contributions(planes, views, lambda, render);
    std::vector<PlanarPrimitive> kept;
    std::vector<AdamState> kept_states;
    std::vector<double> kept_x, kept_y;
    for (std::size_t i = 0; i < planes.size(); ++i) {
      if (best[i] < config.weight_filter) continue;
      kept.push_back(planes[i]);
      kept_states.push_back(states[i]);
      kept_x.push_back(grad_x[i] / static_cast<double>(views.size()));
      kept_y.push_back(grad_y[i] / static_cast<double>(views.size()));
    }

    // Split the strongest candidates first while the cap allows.
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (kept_x[i] > config.split_threshold || kept_y[i] > config.split_threshold) {
        candidates.push_back(i);
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return std::max(kept_x[a], kept_y[a]) > std::max(kept_x[b], kept_y[b]);
    });
    std::vector<bool> split(kept.size(), false);
    std::size_t size = kept.size();
    for (std::size_t i : candidates) {
      if (config.max_planes > 0 && size + 1 > static_cast<std::size_t>(config.max_planes)) break;
      split[i] = true;
      ++size;
    }
    planes.clear();
    states.clear();
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (!split[i]) {
        planes.push_back(kept[i]);
        states.push_back(kept_states[i]);
        continue;
      }
      for (auto& child : maybe_split(kept[i], kept_x[i], kept_y[i], config.split_threshold, next_id)) {
        planes.push_back(child);
        states.emplace_back();
      }
    }

    log.iteration = iteration;
    log.lambda = lambda;
    log.planes = static_cast<int>(planes.size());
    result.history.push_back(log);
    if (progress) progress(log);
  }

  result.final_render = summed_render_loss(planes, views, lambda_schedule(iteration), render,
                                           config.weights);
  result.planes = std::move(planes);
  return result;
}

OptimResult optimize_scene(std::span<const CameraView> views, const OptimConfig& config,
                           const ProgressFn& progress) {
  config.validate();
  const auto samples = surface_samples(views);
  return optimize_planes(initialize_planes(samples, config), views, config, progress);
}

}  // namespace planeline

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "planeline/core.hpp"
#include "planeline/loss.hpp"

namespace planeline {

struct OptimConfig {
  int epochs = 60;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double split_threshold = 0.2;
  int blend_count = 5;
  double weight_filter = 1e-4;
  int initial_planes = 2000;
  int group_cap = 64;
  /// Splitting stops once the set reaches this size; 0 disables the cap.
  int max_planes = 4000;
  std::uint64_t seed = 0;
  LossWeights weights;

  /// Throws Error(kBadConfig) on out-of-range values.
  void validate() const;
};

struct AdamState {
  PlaneParams m = PlaneParams::Zero();
  PlaneParams v = PlaneParams::Zero();
  long step = 0;
};

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
};

/// Back-projects every valid depth pixel of every view with its normal.
std::vector<SurfaceSample> surface_samples(std::span<const CameraView> views);

/// Samples `config.initial_planes` centers without replacement; each plane is a
/// square of half-size 0.5 * nearest-neighbour distance aligned to its normal.
/// Throws Error(kTooFewSamples) with fewer than two samples.
std::vector<PlanarPrimitive> initialize_planes(std::span<const SurfaceSample> samples,
                                               const OptimConfig& config);

/// Bias-corrected Adam step on one plane, followed by quaternion
/// renormalization and the radius floor. A non-finite gradient leaves the
/// plane and its state untouched and returns false.
bool adam_step(PlanarPrimitive& plane, const PlaneParams& gradient, AdamState& state,
               const OptimConfig& config);

/// Result of a split check: one plane (unchanged) or two children.
std::vector<PlanarPrimitive> maybe_split(const PlanarPrimitive& plane, double x_gradient,
                                         double y_gradient, double threshold, int& next_id);

/// Keeps planes whose largest blended contribution T*w over all pixels of all
/// views reaches the weight filter.
std::vector<PlanarPrimitive> prune_planes(std::span<const PlanarPrimitive> planes,
                                          std::span<const CameraView> views, double lambda,
                                          const RenderOptions& options);

struct EpochLog {
  int epoch = 0;
  long iteration = 0;  // global iteration at the end of the epoch
  double lambda = 0.0;
  double render = 0.0;
  double euc2d = 0.0;
  double ort2d = 0.0;
  double group = 0.0;
  double total = 0.0;
  int planes = 0;
};

struct OptimResult {
  std::vector<PlanarPrimitive> planes;
  std::vector<EpochLog> history;
  double initial_render = 0.0;  // summed over views before any update
  double final_render = 0.0;    // summed over views after the last epoch
};

using ProgressFn = std::function<void(const EpochLog&)>;

/// Full training loop: per iteration advance lambda, rebuild assignments,
/// evaluate the loss and step; per epoch prune then split.
OptimResult optimize_scene(std::span<const CameraView> views, const OptimConfig& config,
                           const ProgressFn& progress = {});

/// Same loop starting from an explicit plane set.
OptimResult optimize_planes(std::vector<PlanarPrimitive> planes,
                            std::span<const CameraView> views, const OptimConfig& config,
                            const ProgressFn& progress = {});

}  // namespace planeline

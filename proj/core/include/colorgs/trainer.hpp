#pragma once

#include "colorgs/dataset.hpp"
#include "colorgs/deformation.hpp"
#include "colorgs/gradients.hpp"
#include "colorgs/metrics.hpp"
#include "colorgs/parameters.hpp"
#include "colorgs/rasterizer.hpp"
#include "colorgs/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace colorgs {

/// Per-group learning rates. Centers decay exponentially from `center` to
/// `center_final` over the run; the deformation group does the same when
/// `deformation_final` is positive. Everything else is constant.
struct LearningRates {
  double center = 1.6e-3;
  double center_final = 1.6e-5;
  double rotation = 1e-3;
  double scale = 5e-3;
  double opacity = 0.05;
  double sh = 2.5e-3;
  double anchor = 2.5e-3;
  double deformation = 1.6e-3;
  double deformation_final = 1.6e-4;  ///< <= 0 keeps the deformation rate constant

  friend bool operator==(const LearningRates&, const LearningRates&) = default;
};

struct TrainConfig {
  int iterations = 3000;
  LearningRates lr;  ///< lr.center is the initial learning rate

  bool densify = true;
  int densify_freeze_iters = 600;
  int densify_until = 1500;
  int densify_interval = 100;
  double grad_threshold = 2e-4;
  double opacity_prune_threshold = 5e-3;
  double scale_split_threshold = 0.01;  ///< fraction of the initial scene extent
  int max_primitives = 0;               ///< 0 = no cap

  LossNorm loss_norm = LossNorm::l1;
  double omega_l2 = 0.0;         ///< L2 penalty on every basis weight
  bool train_canonical = true;   ///< false freezes centers, shapes and colors

  DeformationConfig deformation;
  int anchors = 4;
  double lambda_e = 0.1;
  int sh_degree = 1;
  InitOptions init;

  int eval_interval = 500;
  int checkpoint_interval = 500;
  int workers = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigurationError on negative counts or non-positive thresholds.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// JSON with one key per TrainConfig field (nested objects for lr,
/// deformation and init). Unknown keys are rejected.
std::string to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-15;

/// One bias-corrected Adam update with a per-coordinate learning rate.
/// Throws GradientError on a non-finite update.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               std::span<const double> lr, double beta1 = kAdamBeta1, double beta2 = kAdamBeta2,
               double eps = kAdamEpsilon);

/// Running screen-space gradient statistics used by densification.
struct DensifyStats {
  std::vector<double> grad_sum;
  std::vector<int> visible_count;

  void reset(std::size_t n);
  void accumulate(const GradientBuffer& grads);
  [[nodiscard]] double mean(std::size_t i) const;
};

/// Max distance of a center from the centroid.
double scene_extent(const GaussianScene& scene);

/// For each primitive of the updated scene: the index of the primitive whose
/// optimizer moments it keeps, or -1 for fresh (zero) moments.
using SourceMap = std::vector<std::ptrdiff_t>;

/// Clones (small) or splits (large) primitives whose mean screen gradient
/// exceeds the threshold, then drops primitives below the opacity
/// threshold. Split children are drawn from the parent's Gaussian with
/// log_scale reduced by ln 1.6; clones and children copy the parent's motion
/// and anchors.
SourceMap densify_and_prune(GaussianScene& scene, DeformationField& field, const DensifyStats& stats,
                            const TrainConfig& config, double extent, std::mt19937_64& rng);

struct IterationLog {
  int iteration = 0;
  double loss = 0.0;
  double psnr_test = 0.0;  ///< NaN when not evaluated at this iteration
  std::size_t primitives = 0;
};

struct TrainResult {
  GaussianScene scene;
  DeformationField field;
  std::vector<IterationLog> log;
};

struct TrainHooks {
  /// Called every checkpoint_interval iterations and after the last one.
  std::function<void(int iteration, const GaussianScene&, const DeformationField&)> on_checkpoint;
};

/// Render config matching a training config.
RenderConfig render_config(const TrainConfig& config);

/// Optimizes `scene` and `field` (shapes must agree with the config).
/// Throws DivergenceError when the loss stays above 10x its initial value for
/// 100 consecutive iterations.
TrainResult train(const Dataset& dataset, GaussianScene scene, DeformationField field,
                  const TrainConfig& config, const TrainHooks& hooks = {});

/// Initializes from the depth of frame 0 and a zero deformation field.
TrainResult train(const Dataset& dataset, const TrainConfig& config, const TrainHooks& hooks = {});

/// PSNR (and SSIM when `with_ssim`) of clamped renders over `indices`.
MetricReport evaluate_frames(const Dataset& dataset, const std::vector<int>& indices,
                             const GaussianScene& scene, const DeformationField& field,
                             const RenderConfig& config, bool with_ssim = true);

}  // namespace colorgs

#pragma once

#include "colorgs/camera.hpp"
#include "colorgs/deformation.hpp"
#include "colorgs/frame.hpp"
#include "colorgs/parameters.hpp"
#include "colorgs/rasterizer.hpp"
#include "colorgs/scene.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace colorgs {

/// Gradients shaped exactly like the parameters they belong to.
struct GradientBuffer {
  GaussianScene scene;     ///< d loss / d canonical raw parameters
  DeformationField field;  ///< d loss / d motion parameters
  /// |dL/d(projected center)| per primitive, in NDC-like units
  /// (pixel gradient scaled by half the image size).
  std::vector<double> screen_grad_norm;
  /// 1 when the primitive reached at least one pixel this pass.
  std::vector<std::uint8_t> visible;
};

/// Zero gradients shaped like (scene, field).
GradientBuffer zero_gradients(const GaussianScene& scene, const DeformationField& field);

struct BackwardResult {
  LossReport loss;
  GradientBuffer grads;
};

/// Loss of (scene, field) at time t against `frame`, and its gradient with
/// respect to every canonical and motion parameter.
///
/// Per-worker accumulators are merged in worker order, so results are
/// bitwise-reproducible for a fixed worker count. Throws GradientError on a
/// non-finite gradient.
BackwardResult backward(const FrameSample& frame, const CameraModel& camera,
                        const GaussianScene& scene, const DeformationField& field, double t,
                        const RenderConfig& config, LossNorm norm = LossNorm::l1);

/// Forward-only loss on the same path `backward` differentiates.
LossReport evaluate_loss(const FrameSample& frame, const CameraModel& camera,
                         const GaussianScene& scene, const DeformationField& field, double t,
                         const RenderConfig& config, LossNorm norm = LossNorm::l1);

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h for every i.
std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& loss_fn,
                                std::span<const double> params, double h = 1e-4);

struct GradCheckOptions {
  std::uint64_t seed = 0;
  int num_gaussians = 5;
  int image_size = 8;
  int anchors = 4;
  int bases = 4;
  int sh_degree = 1;
  DeformBackend backend = DeformBackend::edm;
  double step = 1e-4;
  double tolerance = 1e-4;
  double floor = 1e-8;  ///< skip coordinates where both magnitudes are below this
};

struct GradCheckRow {
  ParamClass cls;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  bool passed = true;
};

/// Builds a seeded random scene and compares `backward` with `finite_diff`
/// on every parameter.
GradCheckReport run_gradient_check(const GradCheckOptions& options);

/// Relative error |a - b| / max(|a|, |b|), 0 when both are 0.
double relative_error(double a, double b);

}  // namespace colorgs

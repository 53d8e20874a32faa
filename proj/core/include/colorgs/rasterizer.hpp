#pragma once

#include "colorgs/camera.hpp"
#include "colorgs/color_field.hpp"
#include "colorgs/common.hpp"
#include "colorgs/frame.hpp"
#include "colorgs/scene.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace colorgs {

inline constexpr double kAlphaMax = 0.99;
inline constexpr double kAlphaMin = 1.0 / 255.0;
inline constexpr double kTransmittanceStop = 1e-4;

struct RenderConfig {
  ColorFieldConfig color;
  double near_plane = kNearPlane;
  double dilation = kLowPassDilation;
  int tile_size = 16;
  int workers = 1;
};

/// Rendered color (H x W x 3), depth (H x W) and final transmittance (H x W).
struct RenderOutput {
  Image color;
  Image depth;
  Image transmittance;
};

enum class LossNorm { l1, l2 };
std::string_view to_string(LossNorm norm);
LossNorm parse_loss_norm(std::string_view name);

struct LossReport {
  double color_term = 0.0;
  double depth_term = 0.0;
  double total = 0.0;
};

/// Front-to-back alpha compositing of every primitive in `scene` (already at
/// the wanted time) into `camera`. Background is black.
///
/// Primitives are sorted once per frame by camera depth, ties broken by
/// index. Throws RenderError on non-finite intermediates.
RenderOutput render(const GaussianScene& scene, const CameraModel& camera, const RenderConfig& config);

/// Masked mean color and depth error. Throws DatasetError on an empty mask.
LossReport masked_loss(const RenderOutput& render, const FrameSample& frame,
                       LossNorm norm = LossNorm::l1);

/// Per-primitive blend weights at one pixel, in compositing order.
struct PixelBlend {
  std::vector<std::size_t> primitives;
  std::vector<double> weights;  ///< alpha_i * prod_{j<i} (1 - alpha_j)
  double transmittance = 1.0;
};

PixelBlend pixel_blend(const GaussianScene& scene, const CameraModel& camera,
                       const RenderConfig& config, int x, int y);

}  // namespace colorgs

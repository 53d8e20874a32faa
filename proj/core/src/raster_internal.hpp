#pragma once

#include "colorgs/rasterizer.hpp"

#include <cstdint>
#include <vector>

namespace colorgs::detail {

/// Screen-space state of one primitive for the current frame.
struct Projected {
  bool visible = false;
  Vec3 cam_point = Vec3::Zero();
  Vec2 center2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  Mat2 conic = Mat2::Identity();
  double opacity = 0.0;
  Vec3 base_color = Vec3::Zero();  ///< SH term, before anchors and clamp
  Vec3 view_dir = Vec3::UnitZ();
  double view_dist = 1.0;
  Vec4 unit_rotation = Vec4(1.0, 0.0, 0.0, 0.0);
  double rotation_norm = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 scale = Vec3::Ones();
  Mat3 cov3d = Mat3::Identity();
  Mat23 jacobian = Mat23::Zero();
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  ///< inclusive pixel bounds
};

struct PreparedFrame {
  std::vector<Projected> projected;
  std::vector<std::uint32_t> order;  ///< front-to-back
  int tiles_x = 0;
  int tiles_y = 0;
  int tile_size = 16;
  std::vector<std::vector<std::uint32_t>> tiles;  ///< sorted primitive ids per tile
};

PreparedFrame prepare_frame(const GaussianScene& scene, const CameraModel& camera,
                            const RenderConfig& config);

struct Contribution {
  std::uint32_t primitive = 0;
  double alpha = 0.0;
  double gauss = 0.0;    ///< exp(-q/2)
  bool clamped = false;  ///< alpha hit the upper clamp
  double transmittance = 1.0;  ///< before this contribution
  Vec3 color = Vec3::Zero();
  Vec3 raw_color = Vec3::Zero();
};

/// Replays the blend at pixel (x, y); fills `out` and returns the final
/// transmittance.
double shade_pixel(const PreparedFrame& frame, const GaussianScene& scene,
                   const RenderConfig& config, int x, int y, std::vector<Contribution>& out);

}  // namespace colorgs::detail

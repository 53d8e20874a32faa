#pragma once

#include "colorgs/common.hpp"

#include <filesystem>
#include <vector>

namespace colorgs {

inline constexpr double kNearPlane = 0.01;
inline constexpr double kLowPassDilation = 0.3;

/// Pinhole camera with a rigid world-to-camera transform.
///
/// Pixel centers sit at integer coordinates: column x, row y is shaded at
/// (x, y).
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  /// Throws ConfigurationError on bad intrinsics or a non-orthonormal rotation
  /// (tolerance 1e-6).
  void validate() const;

  [[nodiscard]] Vec3 to_camera(const Vec3& x_world) const { return rotation * x_world + translation; }
  [[nodiscard]] Vec3 position() const { return -rotation.transpose() * translation; }
  [[nodiscard]] Mat4 world_to_camera() const;
  static CameraModel from_world_to_camera(const Mat4& w2c, double fx, double fy, double cx, double cy,
                                          int width, int height);

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

struct PointProjection {
  Vec2 pixel = Vec2::Zero();
  double depth = 0.0;
  bool culled = false;
};

/// Pinhole projection; points with camera z below `near` are culled.
PointProjection project_point(const CameraModel& camera, const Vec3& x_world,
                              double near = kNearPlane);

/// Inverse of project_point at a known camera-space depth.
Vec3 back_project(const CameraModel& camera, const Vec2& pixel, double depth);

/// d(pixel)/d(camera point) at camera-space point `p`.
Mat23 projection_jacobian(const CameraModel& camera, const Vec3& p);

/// J W Sigma W^T J^T + dilation * I.
Mat2 project_covariance(const CameraModel& camera, const Vec3& mean_world, const Mat3& cov_world,
                        double dilation = kLowPassDilation);

/// Reads `cameras.json`: either one camera object or an array of them.
std::vector<CameraModel> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::filesystem::path& path, const std::vector<CameraModel>& cameras);

}  // namespace colorgs

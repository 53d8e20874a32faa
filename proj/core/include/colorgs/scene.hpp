#pragma once

#include "colorgs/color_field.hpp"
#include "colorgs/common.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace colorgs {

/// One splat in canonical (time-zero) space, stored as raw unconstrained
/// parameters. Rotation is a quaternion (w, x, y, z).
struct GaussianPrimitive {
  Vec3 center = Vec3::Zero();
  Vec4 rotation = Vec4(1.0, 0.0, 0.0, 0.0);
  Vec3 log_scale = Vec3::Zero();
  double opacity_logit = 0.0;
  std::vector<Vec3> sh;
  std::vector<AnchorSpec> anchors;

  friend bool operator==(const GaussianPrimitive&, const GaussianPrimitive&) = default;
};

/// All primitives share `sh_degree` and `anchor_count`.
struct GaussianScene {
  int sh_degree = 1;
  int anchor_count = 4;
  std::vector<GaussianPrimitive> primitives;

  [[nodiscard]] std::size_t size() const { return primitives.size(); }
  [[nodiscard]] bool empty() const { return primitives.empty(); }

  /// Throws ConfigurationError when a primitive disagrees with the shared
  /// SH degree or anchor count.
  void validate_shape() const;

  friend bool operator==(const GaussianScene&, const GaussianScene&) = default;
};

/// Activated (constrained) values of a primitive's raw parameters.
struct ActiveParameters {
  Vec3 scale;
  double opacity;
  Vec4 rotation;  ///< unit quaternion
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// exp(log_scale), sigmoid(opacity_logit), normalized rotation.
/// Throws InvalidParameterError naming `index` on non-finite input.
ActiveParameters activations(const GaussianPrimitive& primitive, std::size_t index);

/// Rotation matrix of a unit quaternion (w, x, y, z).
Mat3 rotation_matrix(const Vec4& q);

/// Quaternion (w, x, y, z) for a rotation of `angle` radians about `axis`.
Vec4 axis_angle_quaternion(const Vec3& axis, double angle);

/// R S S^T R^T with S = diag(exp(log_scale)); `rotation` is normalized first.
Mat3 build_covariance(const Vec4& rotation, const Vec3& log_scale);

/// exp(-1/2 (x - mu)^T Sigma^-1 (x - mu)).
double evaluate_gaussian(const GaussianPrimitive& primitive, const Vec3& x);

/// Identity rotation, unit scale, zero SH and default anchors.
GaussianPrimitive make_primitive(const Vec3& center, int sh_degree, int anchor_count);

/// Combined color of `primitive` at pixel `p`.
inline Vec3 combined_color(const GaussianPrimitive& primitive, int sh_degree, const Vec2& p,
                           const Vec2& center2d, const Vec3& dir, const ColorFieldConfig& config) {
  return combined_color(primitive.sh, sh_degree, primitive.anchors, p, center2d, dir, config);
}

/// SH coefficient whose DC term reproduces `rgb` through the 0.5 offset.
Vec3 dc_from_color(const Vec3& rgb);

}  // namespace colorgs

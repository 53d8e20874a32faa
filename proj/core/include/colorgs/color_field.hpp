#pragma once

#include "colorgs/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace colorgs {

inline constexpr double kShC0 = 0.28209479177387814;
inline constexpr double kShC1 = 0.4886025119029199;
inline constexpr int kMaxShDegree = 3;

/// One screen-space color anchor of a primitive.
///
/// `offset` is measured in pixels relative to the primitive's projected
/// center, so anchors follow the primitive as it moves. `color` is an
/// additive RGB correction and may be negative.
struct AnchorSpec {
  Vec2 offset = Vec2::Zero();
  Vec3 color = Vec3::Zero();

  friend bool operator==(const AnchorSpec&, const AnchorSpec&) = default;
};

struct ColorFieldConfig {
  double lambda_e = 0.1;  ///< decay rate, 1/pixel^2
  int k = 4;              ///< anchors per primitive; 0 disables anchors

  void validate() const;
};

/// Number of SH coefficients per channel for `degree`.
constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// exp(-lambda_e * |p - anchor_pos|^2)
double anchor_weight(const Vec2& p, const Vec2& anchor_pos, double lambda_e);

/// Sum of anchor colors weighted by their decay at pixel `p`.
Vec3 anchor_color(const Vec2& p, std::span<const AnchorSpec> anchors, const Vec2& center2d,
                  double lambda_e);

/// View-dependent base color: 0.5 + sum_k basis_k(d) * sh_k, per channel.
Vec3 sh_color(std::span<const Vec3> sh_coeffs, const Vec3& dir, int degree);

/// Real SH basis values for `degree` at unit direction `dir`.
std::vector<double> sh_basis(const Vec3& dir, int degree);

/// Gradient of every SH basis function with respect to the direction components.
std::vector<Vec3> sh_basis_gradient(const Vec3& dir, int degree);

/// Backward pass of `sh_color`.
///
/// Accumulates dL/dsh_k into `grad_coeffs` and returns dL/d(dir).
Vec3 sh_color_backward(std::span<const Vec3> sh_coeffs, const Vec3& dir, int degree,
                       const Vec3& grad_color, std::span<Vec3> grad_coeffs);

/// max(sh_color + anchor_color, 0) per channel.
Vec3 combined_color(std::span<const Vec3> sh_coeffs, int degree, std::span<const AnchorSpec> anchors,
                    const Vec2& p, const Vec2& center2d, const Vec3& dir,
                    const ColorFieldConfig& config);

/// Default anchors: axis-aligned offsets (+1,0), (-1,0), (0,+1), (0,-1)
/// repeating at growing radius for k > 4; all colors zero.
std::vector<AnchorSpec> default_anchors(int k);

}  // namespace colorgs

#pragma once

#include "colorgs/scene.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace colorgs {

/// Deformed attribute channels: center xyz (0..2), raw quaternion wxyz
/// (3..6), log_scale xyz (7..9).
inline constexpr int kDeformChannels = 10;
inline constexpr double kMinBasisWidth = 1e-3;

enum class DeformBackend {
  edm,  ///< Gaussian bases plus a time-independent global offset
  gs,   ///< Gaussian bases only (offset fixed at zero)
  fps,  ///< Fourier plus polynomial series
};

std::string_view to_string(DeformBackend backend);
DeformBackend parse_backend(std::string_view name);

/// Time-aware Gaussian bases of one channel. Widths are stored as logs.
struct BasisSet {
  std::vector<double> weights;
  std::vector<double> centers;
  std::vector<double> log_widths;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
  friend bool operator==(const BasisSet&, const BasisSet&) = default;
};

/// Ablation motion model: sum_m a_m cos(2 pi m t) + b_m sin(2 pi m t) + sum_n p_n t^n.
/// cos_coeffs[m-1] / sin_coeffs[m-1] hold a_m / b_m; poly_coeffs[n] holds p_n.
struct FourierPolySeries {
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  std::vector<double> poly_coeffs;

  friend bool operator==(const FourierPolySeries&, const FourierPolySeries&) = default;
};

/// Motion of one attribute channel of one primitive. Only the members
/// relevant to the field's backend are populated.
struct ChannelMotion {
  BasisSet basis;
  double delta = 0.0;
  FourierPolySeries series;

  friend bool operator==(const ChannelMotion&, const ChannelMotion&) = default;
};

using PrimitiveMotion = std::array<ChannelMotion, kDeformChannels>;

struct DeformationConfig {
  DeformBackend backend = DeformBackend::edm;
  int num_bases = 17;
  int fourier_terms = 8;
  int poly_degree = 3;

  void validate() const;
  friend bool operator==(const DeformationConfig&, const DeformationConfig&) = default;
};

struct DeformationField {
  DeformationConfig config;
  std::vector<PrimitiveMotion> motions;  ///< one per primitive

  [[nodiscard]] std::size_t size() const { return motions.size(); }
  friend bool operator==(const DeformationField&, const DeformationField&) = default;
};

/// exp(-(t - center)^2 / (2 width^2))
double basis_eval(double t, double center, double width);

/// sum_j w_j b(t; theta_j, sigma_j) + delta
double edm_eval(double t, const BasisSet& basis, double delta);

double fps_eval(double t, const FourierPolySeries& series);

/// Offset of one channel at time t under `backend`.
double channel_eval(double t, const ChannelMotion& motion, DeformBackend backend);

/// Zero motion: centers at j/(B-1), widths 1/B, weights and offsets zero.
PrimitiveMotion make_motion(const DeformationConfig& config);
DeformationField make_deformation_field(const DeformationConfig& config, std::size_t count);

/// Deformed copy of one primitive at time t. The rotation is the
/// renormalized sum of the canonical quaternion and its offsets.
GaussianPrimitive deform_primitive(const GaussianPrimitive& primitive, const PrimitiveMotion& motion,
                                   DeformBackend backend, double t);

/// Throws ConfigurationError when the field does not cover the scene.
GaussianScene deform_scene(const GaussianScene& scene, const DeformationField& field, double t);

}  // namespace colorgs

#pragma once

#include "colorgs/deformation.hpp"
#include "colorgs/scene.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace colorgs {

/// Learnable parameter classes, used for learning-rate groups and for
/// per-class gradient checks.
enum class ParamClass {
  center,
  rotation,
  log_scale,
  opacity,
  sh,
  anchor_offset,
  anchor_color,
  basis_weight,
  basis_center,
  basis_log_width,
  global_offset,
  fourier,
  polynomial,
};

inline constexpr std::array<ParamClass, 13> kAllParamClasses = {
    ParamClass::center,        ParamClass::rotation,       ParamClass::log_scale,
    ParamClass::opacity,       ParamClass::sh,             ParamClass::anchor_offset,
    ParamClass::anchor_color,  ParamClass::basis_weight,   ParamClass::basis_center,
    ParamClass::basis_log_width, ParamClass::global_offset, ParamClass::fourier,
    ParamClass::polynomial};

std::string_view to_string(ParamClass cls);

/// Every primitive owns one contiguous block of scalars (canonical
/// parameters followed by its motion), so flat vectors are primitive-major
/// with a fixed stride.
std::size_t block_size(const GaussianScene& scene, const DeformationField& field);

/// Class of each scalar within one block.
std::vector<ParamClass> block_layout(const GaussianScene& scene, const DeformationField& field);

std::vector<double> pack(const GaussianScene& scene, const DeformationField& field);

/// Inverse of pack; `scene` and `field` must already have the right shape.
void unpack(std::span<const double> flat, GaussianScene& scene, DeformationField& field);

}  // namespace colorgs

#pragma once

#include "colorgs/deformation.hpp"
#include "colorgs/scene.hpp"

#include <filesystem>

namespace colorgs {

/// Binary little-endian PLY, one vertex per primitive, every property a
/// double: x y z, rot_0..3, log_scale_0..2, opacity_logit, f_dc_0..2,
/// f_rest_* (channel-major), then anchor_<i>_{dx,dy,r,g,b}.
void save_scene_ply(const std::filesystem::path& path, const GaussianScene& scene);
GaussianScene load_scene_ply(const std::filesystem::path& path);

/// One JSON header line (backend, sizes, count) followed by little-endian
/// doubles, primitive-major then channel-major, in the same order as the
/// motion part of a parameter block.
void save_deformation(const std::filesystem::path& path, const DeformationField& field);
DeformationField load_deformation(const std::filesystem::path& path);

}  // namespace colorgs

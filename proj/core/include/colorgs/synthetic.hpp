#pragma once

#include "colorgs/dataset.hpp"
#include "colorgs/deformation.hpp"
#include "colorgs/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace colorgs {

enum class SyntheticMotion { static_scene, global_shift, periodic, composite };

std::string_view to_string(SyntheticMotion motion);
SyntheticMotion parse_motion(std::string_view name);

struct SyntheticSpec {
  int gaussians = 20;
  int width = 64;
  int height = 64;
  int frames = 16;
  SyntheticMotion motion = SyntheticMotion::static_scene;
  std::uint64_t seed = 0;
  double shift = 0.05;           ///< world-x offset for global_shift / composite
  double periodic_amplitude = 0.04;
  int sh_degree = 1;
  int anchors = 4;
  int bases = 17;
  double anchor_color_scale = 0.35;  ///< anchor colors drawn from +-this
};

/// Ground truth plus the frames it renders to.
struct SyntheticScene {
  SyntheticSpec spec;
  Dataset dataset;
  GaussianScene scene;
  DeformationField field;
};

/// Random ground-truth scene on a jittered grid in front of one camera,
/// rendered at every frame time. Colors are rounded to 8 bits and depths
/// to float so the in-memory frames equal what load_dataset returns after
/// a save. Masks are all ones.
SyntheticScene generate_synthetic(const SyntheticSpec& spec);

/// Dataset layout plus truth.json, truth_scene.ply and truth_deformation.bin.
void save_synthetic(const std::filesystem::path& root, const SyntheticScene& synthetic);

}  // namespace colorgs

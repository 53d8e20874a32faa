#pragma once

#include "colorgs/camera.hpp"
#include "colorgs/frame.hpp"
#include "colorgs/scene.hpp"

#include <filesystem>
#include <vector>

namespace colorgs {

/// Frames plus cameras plus the deterministic train/test split.
struct Dataset {
  std::vector<FrameSample> frames;
  std::vector<CameraModel> cameras;
  std::vector<int> train;  ///< indices into frames
  std::vector<int> test;

  [[nodiscard]] const CameraModel& camera_of(const FrameSample& frame) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Frame i is held out iff i % 8 == 7.
inline bool is_test_frame(int index) { return index % 8 == 7; }

/// Times i/(N-1) (a single frame gets 0) and the every-8th split.
void assign_times_and_split(Dataset& dataset);

/// Reads `cameras.json` and `frames/%06d_{color.png|color.ppm, depth.pfm, mask.pgm}`.
/// Frames are numbered contiguously from 0. Throws DatasetError naming the
/// offending file on missing files, dimension mismatches or empty masks.
Dataset load_dataset(const std::filesystem::path& root);

/// Writes the layout read by load_dataset (color as PNG).
void save_dataset(const std::filesystem::path& root, const Dataset& dataset);

/// Per-frame file names inside `frames/`.
std::filesystem::path color_path(const std::filesystem::path& root, int index, const char* ext = ".png");
std::filesystem::path depth_path(const std::filesystem::path& root, int index);
std::filesystem::path mask_path(const std::filesystem::path& root, int index);

struct InitOptions {
  int stride = 4;
  /// Initial isotropic scale is this multiple of the mean distance to the
  /// three nearest seeds; at 1 the sparse low-opacity seeds leave most of
  /// the frame uncovered.
  double scale_multiplier = 1.5;
  double opacity = 0.1;
  int sh_degree = 1;
  int anchor_count = 4;

  friend bool operator==(const InitOptions&, const InitOptions&) = default;
};

/// One primitive per stride-th masked pixel with positive depth, placed at
/// the back-projected point. Throws DatasetError with fewer than 10 seeds.
GaussianScene init_from_depth(const FrameSample& frame0, const CameraModel& camera,
                              const InitOptions& options = {});

}  // namespace colorgs

#include "colorgs/dataset.hpp"

#include "colorgs/errors.hpp"
#include "colorgs/image_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace fs = std::filesystem;

namespace colorgs {

std::size_t FrameSample::masked_count() const {
  return static_cast<std::size_t>(std::count_if(mask.data.begin(), mask.data.end(),
                                                [](double v) { return v != 0.0; }));
}

const CameraModel& Dataset::camera_of(const FrameSample& frame) const {
  if (frame.camera_index < 0 || static_cast<std::size_t>(frame.camera_index) >= cameras.size()) {
    throw ConfigurationError("frame " + std::to_string(frame.index) + " references camera " +
                             std::to_string(frame.camera_index) + " which does not exist");
  }
  return cameras[static_cast<std::size_t>(frame.camera_index)];
}

void assign_times_and_split(Dataset& dataset) {
  const std::size_t n = dataset.frames.size();
  dataset.train.clear();
  dataset.test.clear();
  for (std::size_t i = 0; i < n; ++i) {
    FrameSample& f = dataset.frames[i];
    f.index = static_cast<int>(i);
    f.time = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    (is_test_frame(f.index) ? dataset.test : dataset.train).push_back(f.index);
  }
}

namespace {

std::string frame_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

}  // namespace

fs::path color_path(const fs::path& root, int index, const char* ext) {
  return root / "frames" / (frame_stem(index) + "_color" + ext);
}
fs::path depth_path(const fs::path& root, int index) {
  return root / "frames" / (frame_stem(index) + "_depth.pfm");
}
fs::path mask_path(const fs::path& root, int index) {
  return root / "frames" / (frame_stem(index) + "_mask.pgm");
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw DatasetError(root.string(), "dataset directory not found");
  const fs::path cams = root / "cameras.json";
  if (!fs::exists(cams)) throw DatasetError(cams.string(), "missing file");
  Dataset ds;
  ds.cameras = load_cameras(cams);
  if (ds.cameras.empty()) throw DatasetError(cams.string(), "no cameras");

  for (int i = 0;; ++i) {
    fs::path color = color_path(root, i);
    if (!fs::exists(color)) color = color_path(root, i, ".ppm");
    if (!fs::exists(color)) {
      if (i == 0) throw DatasetError(color_path(root, 0).string(), "missing file");
      break;
    }
    FrameSample f;
    f.color = read_color(color);
    f.depth = read_pfm(depth_path(root, i));
    f.mask = read_mask(mask_path(root, i));
    if (!f.depth.same_shape(f.color)) {
      throw DatasetError(depth_path(root, i).string(), "depth size differs from color");
    }
    if (!f.mask.same_shape(f.color)) {
      throw DatasetError(mask_path(root, i).string(), "mask size differs from color");
    }
    if (f.masked_count() == 0) throw DatasetError(mask_path(root, i).string(), "all-zero mask");
    f.camera_index = ds.cameras.size() == 1 ? 0 : i;
    const CameraModel& cam = ds.camera_of(f);
    if (cam.width != f.color.width || cam.height != f.color.height) {
      throw DatasetError(color.string(), "image size differs from camera");
    }
    ds.frames.push_back(std::move(f));
  }
  if (ds.cameras.size() > 1 && ds.cameras.size() != ds.frames.size()) {
    throw DatasetError(cams.string(), "expected one camera or one per frame");
  }
  assign_times_and_split(ds);
  return ds;
}

void save_dataset(const fs::path& root, const Dataset& dataset) {
  fs::create_directories(root / "frames");
  save_cameras(root / "cameras.json", dataset.cameras);
  for (const FrameSample& f : dataset.frames) {
    write_color(color_path(root, f.index), f.color);
    write_pfm(depth_path(root, f.index), f.depth);
    write_mask(mask_path(root, f.index), f.mask);
  }
}

GaussianScene init_from_depth(const FrameSample& frame0, const CameraModel& camera,
                              const InitOptions& options) {
  if (options.stride < 1) throw ConfigurationError("seeding stride must be at least 1");
  GaussianScene scene;
  scene.sh_degree = options.sh_degree;
  scene.anchor_count = options.anchor_count;

  for (int y = 0; y < frame0.mask.height; y += options.stride) {
    for (int x = 0; x < frame0.mask.width; x += options.stride) {
      const double z = frame0.depth.at(x, y);
      if (frame0.mask.at(x, y) == 0.0 || !(z > kNearPlane)) continue;
      const Vec3 world = back_project(camera, Vec2(x, y), z);
      GaussianPrimitive p = make_primitive(world, options.sh_degree, options.anchor_count);
      p.sh[0] = dc_from_color(Vec3(frame0.color.at(x, y, 0), frame0.color.at(x, y, 1),
                                   frame0.color.at(x, y, 2)));
      p.opacity_logit = logit(options.opacity);
      scene.primitives.push_back(std::move(p));
    }
  }
  if (scene.size() < 10) {
    throw DatasetError("frame " + std::to_string(frame0.index),
                       "only " + std::to_string(scene.size()) + " seed points (need 10)");
  }

  // Mean distance to the three nearest seeds. Brute force is fine at the
  // seed counts a stride-4 grid produces.
  const std::size_t n = scene.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> best;
    best.fill(std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (scene.primitives[i].center - scene.primitives[j].center).squaredNorm();
      if (d < best[2]) {
        best[2] = d;
        std::sort(best.begin(), best.end());
      }
    }
    const double mean = (std::sqrt(best[0]) + std::sqrt(best[1]) + std::sqrt(best[2])) / 3.0;
    const double s = std::max(mean * options.scale_multiplier, 1e-7);
    scene.primitives[i].log_scale = Vec3::Constant(std::log(s));
  }
  return scene;
}

}  // namespace colorgs

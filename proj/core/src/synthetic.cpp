#include "colorgs/synthetic.hpp"

#include "colorgs/errors.hpp"
#include "colorgs/rasterizer.hpp"
#include "colorgs/scene_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

namespace colorgs {

std::string_view to_string(SyntheticMotion motion) {
  switch (motion) {
    case SyntheticMotion::static_scene: return "static";
    case SyntheticMotion::global_shift: return "global_shift";
    case SyntheticMotion::periodic: return "periodic";
    case SyntheticMotion::composite: return "composite";
  }
  return "static";
}

SyntheticMotion parse_motion(std::string_view name) {
  if (name == "static") return SyntheticMotion::static_scene;
  if (name == "global_shift") return SyntheticMotion::global_shift;
  if (name == "periodic") return SyntheticMotion::periodic;
  if (name == "composite") return SyntheticMotion::composite;
  throw ConfigurationError("unknown synthetic motion '" + std::string(name) + "'");
}

namespace {

double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

}  // namespace

SyntheticScene generate_synthetic(const SyntheticSpec& spec) {
  if (spec.gaussians < 1 || spec.width < 1 || spec.height < 1 || spec.frames < 1) {
    throw ConfigurationError("synthetic spec needs positive counts and sizes");
  }
  SyntheticScene out;
  out.spec = spec;
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  CameraModel cam;
  cam.fx = cam.fy = static_cast<double>(spec.width);
  cam.cx = spec.width / 2.0;
  cam.cy = spec.height / 2.0;
  cam.width = spec.width;
  cam.height = spec.height;

  // Near-square grid, one jittered primitive per cell. The grid overscans
  // the image by 5% per side so border pixels are fully covered; partially
  // covered pixels would carry depths far in front of any surface.
  const double overscan = 0.05;
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(spec.gaussians * spec.width /
                                                                    static_cast<double>(spec.height)))));
  const int rows = (spec.gaussians + cols - 1) / cols;
  const double cell_w = spec.width * (1.0 + 2.0 * overscan) / cols;
  const double cell_h = spec.height * (1.0 + 2.0 * overscan) / rows;

  GaussianScene& scene = out.scene;
  scene.sh_degree = spec.sh_degree;
  scene.anchor_count = spec.anchors;
  const int nsh = sh_coeff_count(spec.sh_degree);
  for (int i = 0; i < spec.gaussians; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    const Vec2 pixel((c + 0.5 + uniform(-0.25, 0.25)) * cell_w - overscan * spec.width,
                     (r + 0.5 + uniform(-0.25, 0.25)) * cell_h - overscan * spec.height);
    const double depth = uniform(2.2, 2.8);
    GaussianPrimitive p = make_primitive(back_project(cam, pixel, depth), spec.sh_degree, spec.anchors);
    const double sigma_px = 0.55 * std::min(cell_w, cell_h);
    const double s = sigma_px * depth / cam.fx;
    p.log_scale = Vec3(std::log(s * uniform(0.7, 1.3)), std::log(s * uniform(0.7, 1.3)),
                       std::log(s * uniform(0.7, 1.3)));
    p.rotation = axis_angle_quaternion(Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)), uniform(0.0, std::numbers::pi));
    p.opacity_logit = logit(uniform(0.85, 0.98));
    p.sh[0] = dc_from_color(Vec3(uniform(0.2, 0.8), uniform(0.2, 0.8), uniform(0.2, 0.8)));
    for (int k = 1; k < nsh; ++k) p.sh[static_cast<std::size_t>(k)] = Vec3(uniform(-0.05, 0.05), uniform(-0.05, 0.05), uniform(-0.05, 0.05));
    for (AnchorSpec& a : p.anchors) {
      a.offset = Vec2(uniform(-4.0, 4.0), uniform(-4.0, 4.0));
      const double m = spec.anchor_color_scale;
      a.color = Vec3(uniform(-m, m), uniform(-m, m), uniform(-m, m));
    }
    scene.primitives.push_back(std::move(p));
  }

  DeformationConfig dcfg;
  dcfg.backend = DeformBackend::edm;
  dcfg.num_bases = spec.bases;
  out.field = make_deformation_field(dcfg, scene.size());
  const bool shift = spec.motion == SyntheticMotion::global_shift || spec.motion == SyntheticMotion::composite;
  const bool periodic = spec.motion == SyntheticMotion::periodic || spec.motion == SyntheticMotion::composite;
  for (PrimitiveMotion& m : out.field.motions) {
    if (shift) m[0].delta = spec.shift;
    if (periodic) {
      for (int ch = 0; ch < 3; ++ch) {
        for (double& w : m[static_cast<std::size_t>(ch)].basis.weights) {
          w = uniform(-spec.periodic_amplitude, spec.periodic_amplitude);
        }
      }
    }
  }

  Dataset& ds = out.dataset;
  ds.cameras = {cam};
  ds.frames.resize(static_cast<std::size_t>(spec.frames));
  assign_times_and_split(ds);
  RenderConfig rcfg;
  rcfg.color.k = spec.anchors;
  for (FrameSample& f : ds.frames) {
    const RenderOutput r = render(deform_scene(scene, out.field, f.time), cam, rcfg);
    f.color = r.color;
    for (double& v : f.color.data) v = quantize8(v);
    f.depth = r.depth;
    for (double& v : f.depth.data) v = static_cast<double>(static_cast<float>(v));
    f.mask = Image(spec.width, spec.height, 1, 1.0);
  }
  return out;
}

void save_synthetic(const std::filesystem::path& root, const SyntheticScene& synthetic) {
  save_dataset(root, synthetic.dataset);
  save_scene_ply(root / "truth_scene.ply", synthetic.scene);
  save_deformation(root / "truth_deformation.bin", synthetic.field);
  const SyntheticSpec& s = synthetic.spec;
  const nlohmann::json truth = {
      {"gaussians", s.gaussians},
      {"width", s.width},
      {"height", s.height},
      {"frames", s.frames},
      {"motion", std::string(to_string(s.motion))},
      {"seed", s.seed},
      {"shift", s.shift},
      {"periodic_amplitude", s.periodic_amplitude},
      {"sh_degree", s.sh_degree},
      {"anchors", s.anchors},
      {"bases", s.bases},
      {"anchor_color_scale", s.anchor_color_scale},
      {"scene", "truth_scene.ply"},
      {"deformation", "truth_deformation.bin"},
  };
  std::ofstream out(root / "truth.json");
  if (!out) throw DatasetError((root / "truth.json").string(), "cannot open for writing");
  out << truth.dump(2) << '\n';
}

}  // namespace colorgs

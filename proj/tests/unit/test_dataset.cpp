#include "colorgs/dataset.hpp"
#include "colorgs/errors.hpp"
#include "colorgs/image_io.hpp"
#include "colorgs/rasterizer.hpp"
#include "colorgs/scene_io.hpp"
#include "colorgs/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace colorgs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("colorgs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Dataset blank_dataset(int frames, int w = 16, int h = 12) {
  Dataset d;
  CameraModel c;
  c.fx = c.fy = 20;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  c.width = w;
  c.height = h;
  d.cameras.push_back(c);
  for (int i = 0; i < frames; ++i) {
    FrameSample f;
    f.color = Image(w, h, 3, 0.5);
    f.depth = Image(w, h, 1, 1.0);
    f.mask = Image(w, h, 1, 1.0);
    d.frames.push_back(f);
  }
  assign_times_and_split(d);
  return d;
}

CameraModel posed_camera(int w, int h) {
  CameraModel c;
  c.fx = 30;
  c.fy = 28;
  c.cx = 8;
  c.cy = 8;
  c.width = w;
  c.height = h;
  c.rotation = rotation_matrix(axis_angle_quaternion(Vec3(0.3, 1, 0).normalized(), 0.4));
  c.translation = Vec3(0.2, -0.1, 0.5);
  return c;
}

}  // namespace

TEST_CASE("every eighth frame is held out") {
  const Dataset d8 = blank_dataset(8);
  CHECK(d8.train == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK(d8.test == std::vector<int>{7});

  const Dataset d2 = blank_dataset(2, 4, 4);
  CHECK(d2.frames[0].time == 0.0);
  CHECK(d2.frames[1].time == 1.0);

  const Dataset d156 = blank_dataset(156, 2, 2);
  REQUIRE(d156.test.size() == 19);
  for (std::size_t k = 0; k < 19; ++k) CHECK(d156.test[k] == static_cast<int>(8 * k + 7));
  CHECK(d156.train.size() + d156.test.size() == 156);
  for (int i : d156.train) CHECK_FALSE(is_test_frame(i));
  for (std::size_t i = 0; i < 156; ++i) {
    CHECK(d156.frames[i].time == doctest::Approx(static_cast<double>(i) / 155.0).epsilon(1e-15));
  }
}

TEST_CASE("image formats round trip") {
  const fs::path dir = temp_dir("images");
  Image rgb(5, 3, 3);
  for (std::size_t i = 0; i < rgb.data.size(); ++i) rgb.data[i] = static_cast<double>(i * 17 % 256) / 255.0;
  write_color(dir / "a.png", rgb);
  write_color(dir / "a.ppm", rgb);
  CHECK(read_color(dir / "a.png") == rgb);
  CHECK(read_color(dir / "a.ppm") == rgb);

  Image depth(5, 3, 1);
  for (std::size_t i = 0; i < depth.data.size(); ++i) depth.data[i] = static_cast<float>(0.1 * static_cast<double>(i) + 0.37);
  write_pfm(dir / "d.pfm", depth);
  CHECK(read_pfm(dir / "d.pfm") == depth);

  Image mask(5, 3, 1, 1.0);
  mask.at(2, 1) = 0.0;
  write_mask(dir / "m.pgm", mask);
  CHECK(read_mask(dir / "m.pgm") == mask);

  CHECK_THROWS_AS((void)read_color(dir / "missing.png"), DatasetError);
  fs::remove_all(dir);
}

TEST_CASE("dataset save and load round trip") {
  SyntheticSpec spec;
  spec.frames = 9;
  spec.width = 24;
  spec.height = 20;
  spec.motion = SyntheticMotion::composite;
  spec.gaussians = 8;
  SyntheticScene syn = generate_synthetic(spec);
  // Carve a tool region out of one mask.
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) syn.dataset.frames[3].mask.at(x, y) = 0.0;
  const fs::path dir = temp_dir("dataset");
  save_dataset(dir, syn.dataset);
  const Dataset loaded = load_dataset(dir);
  CHECK(loaded == syn.dataset);
  save_dataset(dir, loaded);
  CHECK(load_dataset(dir) == loaded);

  fs::remove(mask_path(dir, 4));
  try {
    (void)load_dataset(dir);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.path().find("000004_mask.pgm") != std::string::npos);
  }
  write_mask(mask_path(dir, 4), Image(24, 20, 1, 0.0));
  CHECK_THROWS_AS((void)load_dataset(dir), DatasetError);
  write_mask(mask_path(dir, 4), Image(10, 20, 1, 1.0));
  CHECK_THROWS_AS((void)load_dataset(dir), DatasetError);
  CHECK_THROWS_AS((void)load_dataset(dir / "nope"), DatasetError);
  fs::remove_all(dir);
}

TEST_CASE("depth seeding back-projects onto the frame") {
  const int w = 16, h = 16;
  const CameraModel cam = posed_camera(w, h);
  FrameSample f;
  f.color = Image(w, h, 3);
  f.depth = Image(w, h, 1, 1.0);
  f.mask = Image(w, h, 1, 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.color.at(x, y, 0) = 1.0;
    }
  const GaussianScene s = init_from_depth(f, cam, {});
  CHECK(s.size() == 16);
  // The principal-point seed lands on camera point (0, 0, 1).
  const Vec3 want = cam.rotation.transpose() * (Vec3(0, 0, 1) - cam.translation);
  const auto hit = std::find_if(s.primitives.begin(), s.primitives.end(),
                                [&](const GaussianPrimitive& p) { return (p.center - want).norm() < 1e-12; });
  CHECK(hit != s.primitives.end());
  for (const auto& p : s.primitives) {
    CHECK(p.sh[0] == s.primitives[0].sh[0]);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(0.5 + kShC0 * p.sh[0][c] - (c == 0 ? 1.0 : 0.0)) < 1e-15);
    CHECK(sigmoid(p.opacity_logit) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p.rotation == Vec4(1, 0, 0, 0));
    CHECK(p.anchors == default_anchors(4));
    CHECK(p.log_scale[0] == p.log_scale[1]);
  }

  FrameSample lonely = f;
  lonely.mask = Image(w, h, 1, 0.0);
  lonely.mask.at(8, 8) = 1.0;
  CHECK_THROWS_AS((void)init_from_depth(lonely, cam, {}), DatasetError);
}

TEST_CASE("seeds from a depth plane stay on the plane") {
  const int w = 32, h = 32;
  CameraModel cam = posed_camera(w, h);
  cam.cx = cam.cy = 16;
  // Camera-space plane n . p = c.
  const Vec3 n = Vec3(0.2, -0.3, 1.0).normalized();
  const double c = 1.5;
  FrameSample f;
  f.color = Image(w, h, 3, 0.4);
  f.depth = Image(w, h, 1);
  f.mask = Image(w, h, 1, 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Vec3 ray((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0);
      f.depth.at(x, y) = c / n.dot(ray);
    }
  const GaussianScene s = init_from_depth(f, cam, {});
  CHECK(s.size() == 64);
  for (const auto& p : s.primitives) CHECK(std::abs(n.dot(cam.to_camera(p.center)) - c) < 1e-9);
}

TEST_CASE("seeded scene roughly reproduces frame zero") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    SyntheticSpec spec;
    spec.seed = seed;
    const SyntheticScene syn = generate_synthetic(spec);
    const FrameSample& f0 = syn.dataset.frames[0];
    const GaussianScene init = init_from_depth(f0, syn.dataset.camera_of(f0), {});
    const LossReport l = masked_loss(render(init, syn.dataset.camera_of(f0), {}), f0);
    INFO("seed ", seed, " color L1 ", l.color_term);
    CHECK(l.color_term < 0.15);
  }
}

TEST_CASE("synthetic motions") {
  SyntheticSpec spec;
  spec.frames = 6;
  spec.width = spec.height = 32;

  const SyntheticScene still = generate_synthetic(spec);
  for (const auto& f : still.dataset.frames) {
    CHECK(f.color == still.dataset.frames[0].color);
    CHECK(f.depth == still.dataset.frames[0].depth);
  }
  for (const auto& f : still.dataset.frames) CHECK(f.masked_count() == 32u * 32u);

  spec.motion = SyntheticMotion::global_shift;
  const SyntheticScene shifted = generate_synthetic(spec);
  GaussianScene moved = shifted.scene;
  for (auto& p : moved.primitives) p.center.x() += 0.05;
  RenderConfig rc;
  rc.color.k = spec.anchors;
  const RenderOutput r = render(moved, shifted.dataset.cameras[0], rc);
  for (const auto& f : shifted.dataset.frames) {
    for (std::size_t i = 0; i < r.color.data.size(); ++i) {
      CHECK(f.color.data[i] == std::round(std::clamp(r.color.data[i], 0.0, 1.0) * 255.0) / 255.0);
    }
    for (std::size_t i = 0; i < r.depth.data.size(); ++i) {
      CHECK(f.depth.data[i] == static_cast<double>(static_cast<float>(r.depth.data[i])));
    }
  }

  spec.motion = SyntheticMotion::periodic;
  const SyntheticScene wave = generate_synthetic(spec);
  bool moving = false;
  for (const auto& f : wave.dataset.frames) {
    const GaussianScene at = deform_scene(wave.scene, wave.field, f.time);
    for (std::size_t i = 0; i < wave.scene.size(); ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        const BasisSet& b = wave.field.motions[i][static_cast<std::size_t>(axis)].basis;
        double want = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
          const double s = std::exp(b.log_widths[j]);
          want += b.weights[j] * std::exp(-(f.time - b.centers[j]) * (f.time - b.centers[j]) / (2 * s * s));
        }
        const double got = at.primitives[i].center[axis] - wave.scene.primitives[i].center[axis];
        CHECK(std::abs(got - want) < 1e-12);
        if (std::abs(want) > 1e-3) moving = true;
      }
    }
  }
  CHECK(moving);
  CHECK(wave.dataset.frames[1].color != wave.dataset.frames[4].color);

  bool colored = false;
  for (const auto& p : still.scene.primitives)
    for (const auto& a : p.anchors) colored = colored || a.color.norm() > 0.05;
  CHECK(colored);

  for (SyntheticMotion m : {SyntheticMotion::static_scene, SyntheticMotion::global_shift,
                            SyntheticMotion::periodic, SyntheticMotion::composite}) {
    CHECK(parse_motion(to_string(m)) == m);
  }
  CHECK_THROWS_AS((void)parse_motion("spin"), ConfigurationError);
}

TEST_CASE("scene and deformation files round trip") {
  SyntheticSpec spec;
  spec.motion = SyntheticMotion::composite;
  spec.gaussians = 7;
  spec.width = spec.height = 24;
  spec.frames = 3;
  const SyntheticScene syn = generate_synthetic(spec);
  const fs::path dir = temp_dir("scene_io");
  save_scene_ply(dir / "scene.ply", syn.scene);
  CHECK(load_scene_ply(dir / "scene.ply") == syn.scene);
  save_deformation(dir / "d.bin", syn.field);
  CHECK(load_deformation(dir / "d.bin") == syn.field);

  DeformationField fps = make_deformation_field({DeformBackend::fps, 17, 8, 3}, 3);
  fps.motions[1][5].series.sin_coeffs[2] = 0.125;
  save_deformation(dir / "f.bin", fps);
  CHECK(load_deformation(dir / "f.bin") == fps);

  GaussianScene deg0;
  deg0.sh_degree = 0;
  deg0.anchor_count = 0;
  deg0.primitives.push_back(make_primitive(Vec3(1, 2, 3), 0, 0));
  save_scene_ply(dir / "plain.ply", deg0);
  CHECK(load_scene_ply(dir / "plain.ply") == deg0);

  CHECK_THROWS_AS((void)load_scene_ply(dir / "none.ply"), DatasetError);
  save_synthetic(dir / "synth", syn);
  CHECK(fs::exists(dir / "synth" / "truth.json"));
  CHECK(load_scene_ply(dir / "synth" / "truth_scene.ply") == syn.scene);
  CHECK(load_dataset(dir / "synth") == syn.dataset);
  fs::remove_all(dir);
}

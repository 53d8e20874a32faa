#include "colorgs/errors.hpp"
#include "colorgs/rasterizer.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace colorgs;

namespace {

// Tight isotropic primitive at camera-space point (0, 0, z) of oracle::test_camera.
GaussianPrimitive on_axis(double z, double opacity, const Vec3& rgb) {
  GaussianPrimitive g = make_primitive(Vec3(0, 0, z), 1, 4);
  g.log_scale = Vec3::Constant(std::log(1e-3));
  g.opacity_logit = logit(opacity);
  g.sh[0] = dc_from_color(rgb);
  return g;
}

GaussianScene random_scene(std::mt19937_64& rng, int n, int anchors = 4) {
  GaussianScene s;
  s.anchor_count = anchors;
  for (int i = 0; i < n; ++i) s.primitives.push_back(oracle::random_primitive(rng, 1, anchors));
  return s;
}

}  // namespace

TEST_CASE("single primitive at a pixel center") {
  const CameraModel cam = oracle::test_camera();
  GaussianScene s;
  s.primitives.push_back(on_axis(2.0, 0.8, Vec3(1, 0, 0)));
  const RenderOutput r = render(s, cam, {});
  const int x = 16, y = 12;
  CHECK(r.color.at(x, y, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(std::abs(r.color.at(x, y, 1)) < 1e-12);
  CHECK(std::abs(r.color.at(x, y, 2)) < 1e-12);
  CHECK(r.depth.at(x, y) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(r.transmittance.at(x, y) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("two stacked primitives") {
  const CameraModel cam = oracle::test_camera();
  GaussianScene s;
  // Back one listed first; sorting must put the front one first.
  s.primitives.push_back(on_axis(2.0, 0.5, Vec3(0, 1, 0)));
  s.primitives.push_back(on_axis(1.0, 0.5, Vec3(1, 0, 0)));
  const RenderOutput r = render(s, cam, {});
  CHECK(r.color.at(16, 12, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.color.at(16, 12, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(r.color.at(16, 12, 2)) < 1e-12);
  CHECK(r.depth.at(16, 12) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.transmittance.at(16, 12) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("empty scene renders background") {
  const CameraModel cam = oracle::test_camera(9, 7);
  const RenderOutput r = render(GaussianScene{}, cam, {});
  CHECK(std::all_of(r.color.data.begin(), r.color.data.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(r.depth.data.begin(), r.depth.data.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(r.transmittance.data.begin(), r.transmittance.data.end(), [](double v) { return v == 1.0; }));
}

TEST_CASE("opaque limit depth") {
  const CameraModel cam = oracle::test_camera();
  GaussianScene s;
  s.primitives.push_back(on_axis(2.7, 1.0 - 1e-9, Vec3(0.2, 0.3, 0.4)));
  const RenderOutput r = render(s, cam, {});
  CHECK(r.transmittance.at(16, 12) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(std::abs(r.depth.at(16, 12) / (1 - r.transmittance.at(16, 12)) - 2.7) < 1e-9);
}

TEST_CASE("render matches a brute-force reference") {
  const CameraModel cam = oracle::test_camera(40, 28);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const GaussianScene s = random_scene(rng, 25);
    const RenderOutput r = render(s, cam, {});
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        const oracle::RefPixel p = oracle::shade(s, cam, x, y);
        for (int c = 0; c < 3; ++c) CHECK(std::abs(r.color.at(x, y, c) - p.color[c]) < 1e-10);
        CHECK(std::abs(r.depth.at(x, y) - p.depth) < 1e-10);
        CHECK(std::abs(r.transmittance.at(x, y) - p.transmittance) < 1e-10);
      }
    }
  }
}

TEST_CASE("blend weights and transmittance partition unity") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> px(0, 39), py(0, 27), count(1, 40);
  const CameraModel cam = oracle::test_camera(40, 28);
  for (int trial = 0; trial < 100; ++trial) {
    const GaussianScene s = random_scene(rng, count(rng));
    const int x = px(rng), y = py(rng);
    const PixelBlend b = pixel_blend(s, cam, {}, x, y);
    double sum = b.transmittance;
    for (double w : b.weights) sum += w;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(b.transmittance >= 0.0);
    CHECK(b.transmittance <= 1.0);
  }
}

TEST_CASE("render is invariant to primitive order and deterministic") {
  std::mt19937_64 rng(51);
  const CameraModel cam = oracle::test_camera(40, 28);
  GaussianScene s = random_scene(rng, 30);
  // Add an exact depth tie.
  s.primitives[3].center.z() = s.primitives[4].center.z();
  RenderConfig cfg;
  const RenderOutput a = render(s, cam, cfg);
  const RenderOutput again = render(s, cam, cfg);
  CHECK(a.color == again.color);
  CHECK(a.depth == again.depth);
  CHECK(a.transmittance == again.transmittance);

  GaussianScene shuffled = s;
  std::shuffle(shuffled.primitives.begin(), shuffled.primitives.end(), rng);
  const RenderOutput b = render(shuffled, cam, cfg);
  for (std::size_t i = 0; i < a.color.data.size(); ++i) CHECK(std::abs(a.color.data[i] - b.color.data[i]) < 1e-12);
  for (std::size_t i = 0; i < a.depth.data.size(); ++i) CHECK(std::abs(a.depth.data[i] - b.depth.data[i]) < 1e-12);

  cfg.workers = 3;
  const RenderOutput c = render(s, cam, cfg);
  CHECK(a.color == c.color);
  CHECK(a.depth == c.depth);
}

TEST_CASE("render output invariants") {
  std::mt19937_64 rng(61);
  const CameraModel cam = oracle::test_camera(40, 28);
  const RenderOutput r = render(random_scene(rng, 60), cam, {});
  for (double v : r.color.data) CHECK((std::isfinite(v) && v >= 0.0));
  for (double v : r.transmittance.data) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("masked_loss examples") {
  const int w = 6, h = 4;
  FrameSample f;
  f.color = Image(w, h, 3, 0.3);
  f.depth = Image(w, h, 1, 2.0);
  f.mask = Image(w, h, 1, 1.0);
  RenderOutput r{f.color, f.depth, Image(w, h, 1, 0.0)};
  CHECK(masked_loss(r, f).total == 0.0);

  for (double& v : r.color.data) v += 0.1;
  const LossReport l = masked_loss(r, f);
  CHECK(l.color_term == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(l.depth_term == 0.0);
  CHECK(l.total == l.color_term + l.depth_term);

  // Checkerboard mask with per-pixel differences.
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : r.color.data) v = u(rng);
  for (double& v : r.depth.data) v = u(rng);
  double csum = 0, dsum = 0, csq = 0, dsq = 0;
  int n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.mask.at(x, y) = (x + y) % 2 == 0 ? 1.0 : 0.0;
      if ((x + y) % 2 != 0) continue;
      ++n;
      for (int c = 0; c < 3; ++c) {
        const double d = r.color.at(x, y, c) - f.color.at(x, y, c);
        csum += std::abs(d);
        csq += d * d;
      }
      const double d = r.depth.at(x, y) - f.depth.at(x, y);
      dsum += std::abs(d);
      dsq += d * d;
    }
  }
  const LossReport l1 = masked_loss(r, f, LossNorm::l1);
  CHECK(l1.color_term == doctest::Approx(csum / (3 * n)).epsilon(1e-14));
  CHECK(l1.depth_term == doctest::Approx(dsum / n).epsilon(1e-14));
  const LossReport l2 = masked_loss(r, f, LossNorm::l2);
  CHECK(l2.color_term == doctest::Approx(csq / (3 * n)).epsilon(1e-14));
  CHECK(l2.depth_term == doctest::Approx(dsq / n).epsilon(1e-14));

  f.mask = Image(w, h, 1, 0.0);
  CHECK_THROWS_AS((void)masked_loss(r, f), DatasetError);
}

TEST_CASE("non-finite parameters are reported") {
  const CameraModel cam = oracle::test_camera();
  GaussianScene s;
  s.primitives.push_back(on_axis(2.0, 0.5, Vec3(1, 1, 1)));
  s.primitives[0].sh[0].x() = std::nan("");
  CHECK_THROWS_AS((void)render(s, cam, {}), RenderError);
  s.primitives[0] = on_axis(2.0, 0.5, Vec3(1, 1, 1));
  s.primitives[0].log_scale.x() = std::nan("");
  CHECK_THROWS_AS((void)render(s, cam, {}), InvalidParameterError);
}

TEST_CASE("loss norm names") {
  CHECK(parse_loss_norm("l1") == LossNorm::l1);
  CHECK(parse_loss_norm(to_string(LossNorm::l2)) == LossNorm::l2);
  CHECK_THROWS_AS((void)parse_loss_norm("huber"), ConfigurationError);
}

#include "colorgs/deformation.hpp"
#include "colorgs/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace colorgs;

namespace {

const double kPi = std::acos(-1.0);

BasisSet random_basis(std::mt19937_64& rng, int b) {
  std::uniform_real_distribution<double> u(-1, 1);
  BasisSet s;
  for (int j = 0; j < b; ++j) {
    s.weights.push_back(u(rng));
    s.centers.push_back(0.5 + 0.6 * u(rng));
    s.log_widths.push_back(std::log(0.05 + 0.2 * (u(rng) + 1)));
  }
  return s;
}

GaussianScene small_scene(std::mt19937_64& rng, int n) {
  GaussianScene s;
  for (int i = 0; i < n; ++i) s.primitives.push_back(oracle::random_primitive(rng, 1, 4));
  return s;
}

}  // namespace

TEST_CASE("basis_eval examples") {
  CHECK(basis_eval(0.3, 0.3, 0.1) == 1.0);
  CHECK(basis_eval(0.4, 0.3, 0.1) == doctest::Approx(0.6065306597126334).epsilon(1e-12));
  CHECK(basis_eval(0.3 + 3 * 0.07, 0.3, 0.07) == doctest::Approx(0.011108996538242306).epsilon(1e-12));
}

TEST_CASE("edm_eval examples") {
  BasisSet zero;
  zero.weights.assign(17, 0.0);
  zero.centers.assign(17, 0.5);
  zero.log_widths.assign(17, std::log(0.1));
  for (double t : {0.0, 0.25, 0.9, 1.0}) CHECK(edm_eval(t, zero, 0.3) == 0.3);

  BasisSet one{{2.0}, {0.4}, {std::log(0.2)}};
  CHECK(edm_eval(0.4, one, 0.0) == 2.0);

  BasisSet two{{0.7, -1.3}, {0.2, 0.9}, {std::log(0.15), std::log(0.3)}};
  const double t = 0.5;
  const double want = 0.7 * std::exp(-(0.3 * 0.3) / (2 * 0.15 * 0.15)) +
                      -1.3 * std::exp(-(0.4 * 0.4) / (2 * 0.3 * 0.3)) + 0.05;
  CHECK(std::abs(edm_eval(t, two, 0.05) - want) < 1e-15);
}

TEST_CASE("edm_eval property: the global offset is exactly additive") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const BasisSet b = random_basis(rng, 17);
    const double t = u(rng) * 0.5 + 0.5;
    const double d = u(rng);
    CHECK(edm_eval(t, b, d) - edm_eval(t, b, 0.0) == doctest::Approx(d).epsilon(1e-15));
  }
}

TEST_CASE("edm with zero offset equals the gs backend bitwise") {
  std::mt19937_64 rng(4);
  ChannelMotion m;
  m.basis = random_basis(rng, 17);
  m.delta = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    CHECK(channel_eval(t, m, DeformBackend::edm) == channel_eval(t, m, DeformBackend::gs));
  }
  // gs ignores a stored offset.
  m.delta = 0.7;
  CHECK(channel_eval(0.3, m, DeformBackend::gs) == edm_eval(0.3, m.basis, 0.0));
}

TEST_CASE("fps_eval examples") {
  FourierPolySeries s;
  s.cos_coeffs.assign(8, 0.0);
  s.sin_coeffs.assign(8, 0.0);
  s.poly_coeffs.assign(4, 0.0);
  CHECK(fps_eval(0.37, s) == 0.0);
  s.poly_coeffs[1] = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    CHECK(std::abs(fps_eval(t, s) - t) <= 1e-15);
  }
  s.poly_coeffs[1] = 0.0;
  s.cos_coeffs[0] = 1.0;
  CHECK(std::abs(fps_eval(0.25, s)) < 1e-15);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& c : s.cos_coeffs) c = u(rng);
  for (auto& c : s.sin_coeffs) c = u(rng);
  for (auto& c : s.poly_coeffs) c = u(rng);
  const double t = 0.61;
  double want = 0;
  for (int m = 1; m <= 8; ++m) {
    want += s.cos_coeffs[static_cast<std::size_t>(m - 1)] * std::cos(2 * kPi * m * t) +
            s.sin_coeffs[static_cast<std::size_t>(m - 1)] * std::sin(2 * kPi * m * t);
  }
  for (int n = 0; n < 4; ++n) want += s.poly_coeffs[static_cast<std::size_t>(n)] * std::pow(t, n);
  CHECK(std::abs(fps_eval(t, s) - want) < 1e-13);
}

TEST_CASE("initial motion layout") {
  DeformationConfig cfg;
  const PrimitiveMotion m = make_motion(cfg);
  for (const auto& ch : m) {
    REQUIRE(ch.basis.size() == 17);
    for (int j = 0; j < 17; ++j) {
      CHECK(ch.basis.centers[static_cast<std::size_t>(j)] == doctest::Approx(j / 16.0));
      CHECK(std::exp(ch.basis.log_widths[static_cast<std::size_t>(j)]) == doctest::Approx(1.0 / 17));
      CHECK(ch.basis.weights[static_cast<std::size_t>(j)] == 0.0);
    }
    CHECK(ch.delta == 0.0);
  }
  cfg.backend = DeformBackend::fps;
  const PrimitiveMotion f = make_motion(cfg);
  CHECK(f[0].series.cos_coeffs.size() == 8);
  CHECK(f[0].series.sin_coeffs.size() == 8);
  CHECK(f[0].series.poly_coeffs.size() == 4);
}

TEST_CASE("deform_scene examples") {
  std::mt19937_64 rng(9);
  const GaussianScene scene = small_scene(rng, 6);
  DeformationField field = make_deformation_field({}, scene.size());

  // Zero deformation keeps the scene up to quaternion normalization.
  const GaussianScene same = deform_scene(scene, field, 0.4);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    CHECK(same.primitives[i].center == scene.primitives[i].center);
    CHECK(same.primitives[i].log_scale == scene.primitives[i].log_scale);
    CHECK((same.primitives[i].rotation - scene.primitives[i].rotation.normalized()).norm() < 1e-15);
    CHECK(same.primitives[i].sh == scene.primitives[i].sh);
    CHECK(same.primitives[i].anchors == scene.primitives[i].anchors);
    CHECK(same.primitives[i].opacity_logit == scene.primitives[i].opacity_logit);
  }

  for (auto& m : field.motions) m[0].delta = 0.05;
  const GaussianScene a = deform_scene(scene, field, 0.1);
  const GaussianScene b = deform_scene(scene, field, 0.8);
  CHECK(a == b);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    CHECK(a.primitives[i].center.x() == scene.primitives[i].center.x() + 0.05);
    CHECK(a.primitives[i].center.y() == scene.primitives[i].center.y());
  }

  DeformationField single = make_deformation_field({}, scene.size());
  for (auto& m : single.motions) {
    m[1].basis = BasisSet{{0.12}, {0.3}, {std::log(0.1)}};
  }
  const GaussianScene c = deform_scene(scene, single, 0.3);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    CHECK(c.primitives[i].center.y() == scene.primitives[i].center.y() + 0.12);
  }
}

TEST_CASE("deform_scene rejects a field that does not cover the scene") {
  std::mt19937_64 rng(1);
  const GaussianScene scene = small_scene(rng, 3);
  CHECK_THROWS_AS((void)deform_scene(scene, make_deformation_field({}, 2), 0.0), ConfigurationError);
}

TEST_CASE("backend names round trip") {
  for (DeformBackend b : {DeformBackend::edm, DeformBackend::gs, DeformBackend::fps}) {
    CHECK(parse_backend(to_string(b)) == b);
  }
  CHECK_THROWS_AS((void)parse_backend("mlp"), ConfigurationError);
}

#include "colorgs/color_field.hpp"
#include "colorgs/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace colorgs;

TEST_CASE("anchor_weight examples") {
  CHECK(anchor_weight(Vec2(3, 4), Vec2(3, 4), 0.1) == 1.0);
  CHECK(anchor_weight(Vec2(0, 0), Vec2(1, 3), 0.1) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
  CHECK(anchor_weight(Vec2(0, 0), Vec2(0.1, 0), 0.1) == doctest::Approx(0.999000499833375).epsilon(1e-12));
}

TEST_CASE("anchor_weight property: translation invariant, decreasing, local") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p(u(rng), u(rng));
    const Vec2 a(u(rng), u(rng));
    const Vec2 t(u(rng), u(rng));
    CHECK(std::abs(anchor_weight(p, a, 0.1) - anchor_weight(p + t, a + t, 0.1)) < 1e-12);
    const Vec2 d = p - a;
    CHECK(anchor_weight(a + 1.1 * d, a, 0.1) <= anchor_weight(p, a, 0.1));
  }
  // |p - A|^2 = 200
  CHECK(anchor_weight(Vec2(10, 10), Vec2(0, 0), 0.1) < 2.1e-9);
  CHECK(anchor_weight(Vec2(20, 0), Vec2(0, 0), 0.1) < 2.1e-9);
}

TEST_CASE("anchor_color examples") {
  std::vector<AnchorSpec> zero(4);
  CHECK(anchor_color(Vec2(1, 2), zero, Vec2(0, 0), 0.1) == Vec3::Zero());

  std::vector<AnchorSpec> one{{Vec2(2, -1), Vec3(0.2, -0.1, 0)}};
  const Vec3 at = anchor_color(Vec2(7, 4), one, Vec2(5, 5), 0.1);
  CHECK(at == Vec3(0.2, -0.1, 0));

  std::vector<AnchorSpec> two{{Vec2(1, 0), Vec3(0.3, 0.1, -0.2)}, {Vec2(0, -2), Vec3(-0.4, 0.5, 0.25)}};
  const Vec2 c(10, 10);
  const Vec2 p(12, 9);
  // |p - (11,10)|^2 = 2, |p - (10,8)|^2 = 5
  const double w1 = std::exp(-0.1 * 2.0);
  const double w2 = std::exp(-0.1 * 5.0);
  const Vec3 got = anchor_color(p, two, c, 0.1);
  const double want[3] = {w1 * 0.3 - w2 * 0.4, w1 * 0.1 + w2 * 0.5, -w1 * 0.2 + w2 * 0.25};
  for (int k = 0; k < 3; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-15);
}

TEST_CASE("sh_color examples") {
  std::vector<Vec3> sh(4, Vec3::Zero());
  CHECK(sh_color(sh, Vec3(0, 0, 1), 1) == Vec3(0.5, 0.5, 0.5));

  std::vector<Vec3> dc{Vec3::Ones() / kShC0 * 0.25};
  for (const Vec3& d : {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.6, 0, -0.8)}) {
    const Vec3 c = sh_color(dc, d, 0);
    for (int k = 0; k < 3; ++k) CHECK(c[k] == doctest::Approx(0.75).epsilon(1e-14));
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 20; ++i) {
    for (auto& s : sh) s = Vec3(u(rng), u(rng), u(rng));
    const Vec3 up = sh_color(sh, Vec3(0, 0, 1), 1);
    const Vec3 down = sh_color(sh, Vec3(0, 0, -1), 1);
    // The band-1 z basis is coefficient 2.
    for (int k = 0; k < 3; ++k) CHECK(std::abs((up[k] - down[k]) - 2 * 0.4886025119029199 * sh[2][k]) < 1e-14);
  }
}

TEST_CASE("sh basis gradient matches finite differences") {
  const Vec3 d = Vec3(0.3, -0.5, 0.81).normalized();
  for (int degree = 0; degree <= kMaxShDegree; ++degree) {
    const auto g = sh_basis_gradient(d, degree);
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 e = Vec3::Zero();
      e[axis] = 1e-6;
      const auto hi = sh_basis(d + e, degree);
      const auto lo = sh_basis(d - e, degree);
      for (std::size_t k = 0; k < hi.size(); ++k) {
        CHECK(std::abs((hi[k] - lo[k]) / 2e-6 - g[k][axis]) < 1e-7);
      }
    }
  }
}

TEST_CASE("combined_color examples and properties") {
  ColorFieldConfig cfg;
  std::vector<Vec3> sh(4, Vec3::Zero());
  std::vector<AnchorSpec> anchors(4);
  CHECK(combined_color(sh, 1, anchors, Vec2(3, 3), Vec2(1, 1), Vec3(0, 0, 1), cfg) == Vec3(0.5, 0.5, 0.5));

  std::vector<AnchorSpec> dark{{Vec2(2, 2), Vec3(-0.7, 0, 0)}};
  CHECK(combined_color(sh, 1, dark, Vec2(3, 3), Vec2(1, 1), Vec3(0, 0, 1), cfg) == Vec3(0, 0.5, 0.5));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    for (auto& s : sh) s = Vec3(u(rng), u(rng), u(rng)) * 0.3;
    const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec2 p(10 * u(rng), 10 * u(rng));
    const Vec3 base = sh_color(sh, d, 1);
    CHECK(combined_color(sh, 1, std::span<const AnchorSpec>{}, p, Vec2::Zero(), d, cfg) == base.cwiseMax(0.0));
    CHECK(combined_color(sh, 1, anchors, p, Vec2::Zero(), d, cfg) == base.cwiseMax(0.0));

    // Changing the view direction only moves the SH term.
    std::vector<AnchorSpec> live(4);
    for (auto& a : live) a = {Vec2(3 * u(rng), 3 * u(rng)), Vec3(u(rng), u(rng), u(rng))};
    const Vec3 d2 = Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec3 extra = anchor_color(p, live, Vec2::Zero(), cfg.lambda_e);
    CHECK(combined_color(sh, 1, live, p, Vec2::Zero(), d2, cfg) == (sh_color(sh, d2, 1) + extra).cwiseMax(0.0));
  }
}

TEST_CASE("default anchors and config validation") {
  const auto a = default_anchors(4);
  REQUIRE(a.size() == 4);
  CHECK(a[0].offset == Vec2(1, 0));
  CHECK(a[1].offset == Vec2(-1, 0));
  CHECK(a[2].offset == Vec2(0, 1));
  CHECK(a[3].offset == Vec2(0, -1));
  for (const auto& s : a) CHECK(s.color == Vec3::Zero());
  const auto b = default_anchors(6);
  CHECK(b[4].offset.norm() > 1.0);

  ColorFieldConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda_e = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigurationError);
  cfg.lambda_e = 0.1;
  cfg.k = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigurationError);
}

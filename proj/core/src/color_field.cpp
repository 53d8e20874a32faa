#include "colorgs/color_field.hpp"

#include "colorgs/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace colorgs {

namespace {

constexpr std::array<double, 5> kShC2 = {1.0925484305920792, -1.0925484305920792,
                                         0.31539156525252005, -1.0925484305920792,
                                         0.5462742152960396};
constexpr std::array<double, 7> kShC3 = {-0.5900435899266435, 2.890611442640554,
                                         -0.4570457994644658, 0.3731763325901154,
                                         -0.4570457994644658, 1.445305721320277,
                                         -0.5900435899266435};

}  // namespace

void ColorFieldConfig::validate() const {
  if (!(lambda_e > 0.0) || !std::isfinite(lambda_e)) {
    throw ConfigurationError("color field lambda_e must be positive and finite");
  }
  if (k < 0) throw ConfigurationError("color field anchor count must be non-negative");
}

double anchor_weight(const Vec2& p, const Vec2& anchor_pos, double lambda_e) {
  return std::exp(-lambda_e * (p - anchor_pos).squaredNorm());
}

Vec3 anchor_color(const Vec2& p, std::span<const AnchorSpec> anchors, const Vec2& center2d,
                  double lambda_e) {
  Vec3 sum = Vec3::Zero();
  for (const AnchorSpec& a : anchors) {
    sum += anchor_weight(p, center2d + a.offset, lambda_e) * a.color;
  }
  return sum;
}

std::vector<double> sh_basis(const Vec3& d, int degree) {
  assert(degree >= 0 && degree <= kMaxShDegree);
  std::vector<double> b(static_cast<std::size_t>(sh_coeff_count(degree)));
  b[0] = kShC0;
  if (degree < 1) return b;
  const double x = d.x(), y = d.y(), z = d.z();
  b[1] = -kShC1 * y;
  b[2] = kShC1 * z;
  b[3] = -kShC1 * x;
  if (degree < 2) return b;
  const double xx = x * x, yy = y * y, zz = z * z;
  b[4] = kShC2[0] * x * y;
  b[5] = kShC2[1] * y * z;
  b[6] = kShC2[2] * (2.0 * zz - xx - yy);
  b[7] = kShC2[3] * x * z;
  b[8] = kShC2[4] * (xx - yy);
  if (degree < 3) return b;
  b[9] = kShC3[0] * y * (3.0 * xx - yy);
  b[10] = kShC3[1] * x * y * z;
  b[11] = kShC3[2] * y * (4.0 * zz - xx - yy);
  b[12] = kShC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  b[13] = kShC3[4] * x * (4.0 * zz - xx - yy);
  b[14] = kShC3[5] * z * (xx - yy);
  b[15] = kShC3[6] * x * (xx - 3.0 * yy);
  return b;
}

std::vector<Vec3> sh_basis_gradient(const Vec3& d, int degree) {
  std::vector<Vec3> g(static_cast<std::size_t>(sh_coeff_count(degree)), Vec3::Zero());
  if (degree < 1) return g;
  const double x = d.x(), y = d.y(), z = d.z();
  g[1] = Vec3(0.0, -kShC1, 0.0);
  g[2] = Vec3(0.0, 0.0, kShC1);
  g[3] = Vec3(-kShC1, 0.0, 0.0);
  if (degree < 2) return g;
  const double xx = x * x, yy = y * y, zz = z * z;
  g[4] = kShC2[0] * Vec3(y, x, 0.0);
  g[5] = kShC2[1] * Vec3(0.0, z, y);
  g[6] = kShC2[2] * Vec3(-2.0 * x, -2.0 * y, 4.0 * z);
  g[7] = kShC2[3] * Vec3(z, 0.0, x);
  g[8] = kShC2[4] * Vec3(2.0 * x, -2.0 * y, 0.0);
  if (degree < 3) return g;
  g[9] = kShC3[0] * Vec3(6.0 * x * y, 3.0 * xx - 3.0 * yy, 0.0);
  g[10] = kShC3[1] * Vec3(y * z, x * z, x * y);
  g[11] = kShC3[2] * Vec3(-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z);
  g[12] = kShC3[3] * Vec3(-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy);
  g[13] = kShC3[4] * Vec3(4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z);
  g[14] = kShC3[5] * Vec3(2.0 * x * z, -2.0 * y * z, xx - yy);
  g[15] = kShC3[6] * Vec3(3.0 * xx - 3.0 * yy, -6.0 * x * y, 0.0);
  return g;
}

Vec3 sh_color(std::span<const Vec3> sh_coeffs, const Vec3& dir, int degree) {
  assert(sh_coeffs.size() == static_cast<std::size_t>(sh_coeff_count(degree)));
  const std::vector<double> basis = sh_basis(dir, degree);
  Vec3 color = Vec3::Zero();
  for (std::size_t i = 0; i < basis.size(); ++i) color += basis[i] * sh_coeffs[i];
  return color + Vec3::Constant(0.5);
}

Vec3 sh_color_backward(std::span<const Vec3> sh_coeffs, const Vec3& dir, int degree,
                       const Vec3& grad_color, std::span<Vec3> grad_coeffs) {
  const std::vector<double> basis = sh_basis(dir, degree);
  const std::vector<Vec3> basis_grad = sh_basis_gradient(dir, degree);
  Vec3 grad_dir = Vec3::Zero();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    grad_coeffs[i] += basis[i] * grad_color;
    grad_dir += sh_coeffs[i].dot(grad_color) * basis_grad[i];
  }
  return grad_dir;
}

Vec3 combined_color(std::span<const Vec3> sh_coeffs, int degree, std::span<const AnchorSpec> anchors,
                    const Vec2& p, const Vec2& center2d, const Vec3& dir,
                    const ColorFieldConfig& config) {
  const Vec3 raw =
      sh_color(sh_coeffs, dir, degree) + anchor_color(p, anchors, center2d, config.lambda_e);
  return raw.cwiseMax(0.0);
}

std::vector<AnchorSpec> default_anchors(int k) {
  static const std::array<Vec2, 4> kDirections = {Vec2(1.0, 0.0), Vec2(-1.0, 0.0),
                                                  Vec2(0.0, 1.0), Vec2(0.0, -1.0)};
  std::vector<AnchorSpec> anchors(static_cast<std::size_t>(std::max(k, 0)));
  for (int i = 0; i < k; ++i) {
    const double radius = 1.0 + static_cast<double>(i / 4);
    anchors[static_cast<std::size_t>(i)].offset = radius * kDirections[static_cast<std::size_t>(i % 4)];
  }
  return anchors;
}

}  // namespace colorgs

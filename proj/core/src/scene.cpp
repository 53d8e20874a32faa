#include "colorgs/scene.hpp"

#include "colorgs/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace colorgs {

namespace {

bool all_finite(const auto& v) { return v.allFinite(); }

}  // namespace

void GaussianScene::validate_shape() const {
  if (sh_degree < 0 || sh_degree > kMaxShDegree) {
    throw ConfigurationError("sh_degree must be in 0..3, got " + std::to_string(sh_degree));
  }
  if (anchor_count < 0) throw ConfigurationError("anchor count must be non-negative");
  const auto n_sh = static_cast<std::size_t>(sh_coeff_count(sh_degree));
  const auto n_anchor = static_cast<std::size_t>(anchor_count);
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    if (primitives[i].sh.size() != n_sh) {
      throw ConfigurationError("primitive " + std::to_string(i) + " has " +
                               std::to_string(primitives[i].sh.size()) +
                               " SH coefficients, expected " + std::to_string(n_sh));
    }
    if (primitives[i].anchors.size() != n_anchor) {
      throw ConfigurationError("primitive " + std::to_string(i) + " has " +
                               std::to_string(primitives[i].anchors.size()) +
                               " anchors, expected " + std::to_string(n_anchor));
    }
  }
}

ActiveParameters activations(const GaussianPrimitive& primitive, std::size_t index) {
  if (!all_finite(primitive.log_scale)) throw InvalidParameterError(index, "non-finite log_scale");
  if (!std::isfinite(primitive.opacity_logit)) {
    throw InvalidParameterError(index, "non-finite opacity_logit");
  }
  if (!all_finite(primitive.rotation)) throw InvalidParameterError(index, "non-finite rotation");
  const double qn = primitive.rotation.norm();
  if (!(qn > 0.0)) throw InvalidParameterError(index, "zero-norm rotation quaternion");

  ActiveParameters active;
  active.scale = primitive.log_scale.array().exp().matrix();
  if (!all_finite(active.scale)) throw InvalidParameterError(index, "scale overflow");
  active.opacity = sigmoid(primitive.opacity_logit);
  active.rotation = primitive.rotation / qn;
  return active;
}

Mat3 rotation_matrix(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Vec4 axis_angle_quaternion(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized() * std::sin(0.5 * angle);
  return Vec4(std::cos(0.5 * angle), a.x(), a.y(), a.z());
}

Mat3 build_covariance(const Vec4& rotation, const Vec3& log_scale) {
  const Mat3 r = rotation_matrix(rotation.normalized());
  const Mat3 m = r * log_scale.array().exp().matrix().asDiagonal();
  return m * m.transpose();
}

double evaluate_gaussian(const GaussianPrimitive& primitive, const Vec3& x) {
  const Mat3 cov = build_covariance(primitive.rotation, primitive.log_scale);
  const Vec3 d = x - primitive.center;
  return std::exp(-0.5 * d.dot(cov.ldlt().solve(d)));
}

GaussianPrimitive make_primitive(const Vec3& center, int sh_degree, int anchor_count) {
  GaussianPrimitive p;
  p.center = center;
  p.sh.assign(static_cast<std::size_t>(sh_coeff_count(sh_degree)), Vec3::Zero());
  p.anchors = default_anchors(anchor_count);
  return p;
}

Vec3 dc_from_color(const Vec3& rgb) { return (rgb - Vec3::Constant(0.5)) / kShC0; }

}  // namespace colorgs

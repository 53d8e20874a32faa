#include "colorgs/deformation.hpp"

#include "colorgs/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace colorgs {

std::string_view to_string(DeformBackend backend) {
  switch (backend) {
    case DeformBackend::edm: return "edm";
    case DeformBackend::gs: return "gs";
    case DeformBackend::fps: return "fps";
  }
  return "edm";
}

DeformBackend parse_backend(std::string_view name) {
  if (name == "edm") return DeformBackend::edm;
  if (name == "gs") return DeformBackend::gs;
  if (name == "fps") return DeformBackend::fps;
  throw ConfigurationError("unknown deformation backend '" + std::string(name) + "'");
}

void DeformationConfig::validate() const {
  if (backend != DeformBackend::fps && num_bases < 1) {
    throw ConfigurationError("deformation needs at least one basis function");
  }
  if (fourier_terms < 0 || poly_degree < 0) {
    throw ConfigurationError("FPS term counts must be non-negative");
  }
}

double basis_eval(double t, double center, double width) {
  const double d = t - center;
  return std::exp(-(d * d) / (2.0 * width * width));
}

double edm_eval(double t, const BasisSet& basis, double delta) {
  double sum = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    sum += basis.weights[j] * basis_eval(t, basis.centers[j], std::exp(basis.log_widths[j]));
  }
  return sum + delta;
}

double fps_eval(double t, const FourierPolySeries& series) {
  double sum = 0.0;
  for (std::size_t m = 0; m < series.cos_coeffs.size(); ++m) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(m + 1) * t;
    sum += series.cos_coeffs[m] * std::cos(phase) + series.sin_coeffs[m] * std::sin(phase);
  }
  double poly = 0.0;
  for (auto it = series.poly_coeffs.rbegin(); it != series.poly_coeffs.rend(); ++it) {
    poly = poly * t + *it;
  }
  return sum + poly;
}

double channel_eval(double t, const ChannelMotion& motion, DeformBackend backend) {
  switch (backend) {
    case DeformBackend::edm: return edm_eval(t, motion.basis, motion.delta);
    case DeformBackend::gs: return edm_eval(t, motion.basis, 0.0);
    case DeformBackend::fps: return fps_eval(t, motion.series);
  }
  return 0.0;
}

PrimitiveMotion make_motion(const DeformationConfig& config) {
  PrimitiveMotion motion;
  for (ChannelMotion& ch : motion) {
    if (config.backend == DeformBackend::fps) {
      const auto m = static_cast<std::size_t>(config.fourier_terms);
      ch.series.cos_coeffs.assign(m, 0.0);
      ch.series.sin_coeffs.assign(m, 0.0);
      ch.series.poly_coeffs.assign(static_cast<std::size_t>(config.poly_degree + 1), 0.0);
      continue;
    }
    const int b = config.num_bases;
    ch.basis.weights.assign(static_cast<std::size_t>(b), 0.0);
    ch.basis.centers.resize(static_cast<std::size_t>(b));
    ch.basis.log_widths.assign(static_cast<std::size_t>(b), std::log(1.0 / b));
    for (int j = 0; j < b; ++j) {
      ch.basis.centers[static_cast<std::size_t>(j)] =
          b > 1 ? static_cast<double>(j) / static_cast<double>(b - 1) : 0.5;
    }
  }
  return motion;
}

DeformationField make_deformation_field(const DeformationConfig& config, std::size_t count) {
  config.validate();
  DeformationField field;
  field.config = config;
  field.motions.assign(count, make_motion(config));
  return field;
}

GaussianPrimitive deform_primitive(const GaussianPrimitive& primitive, const PrimitiveMotion& motion,
                                   DeformBackend backend, double t) {
  GaussianPrimitive out = primitive;
  for (int c = 0; c < 3; ++c) out.center[c] += channel_eval(t, motion[static_cast<std::size_t>(c)], backend);
  Vec4 q = primitive.rotation;
  for (int c = 0; c < 4; ++c) q[c] += channel_eval(t, motion[static_cast<std::size_t>(3 + c)], backend);
  out.rotation = q / q.norm();
  for (int c = 0; c < 3; ++c) {
    out.log_scale[c] += channel_eval(t, motion[static_cast<std::size_t>(7 + c)], backend);
  }
  return out;
}

GaussianScene deform_scene(const GaussianScene& scene, const DeformationField& field, double t) {
  if (field.size() != scene.size()) {
    throw ConfigurationError("deformation field covers " + std::to_string(field.size()) +
                             " primitives but the scene has " + std::to_string(scene.size()));
  }
  GaussianScene out;
  out.sh_degree = scene.sh_degree;
  out.anchor_count = scene.anchor_count;
  out.primitives.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    out.primitives.push_back(
        deform_primitive(scene.primitives[i], field.motions[i], field.config.backend, t));
  }
  return out;
}

}  // namespace colorgs

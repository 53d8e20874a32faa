#include "colorgs/parameters.hpp"

#include "colorgs/errors.hpp"

namespace colorgs {

namespace {

// Visits every scalar of one primitive block in layout order.
template <class Prim, class Motion, class Fn>
void visit_block(Prim& prim, Motion& motion, DeformBackend backend, Fn&& fn) {
  for (int i = 0; i < 3; ++i) fn(ParamClass::center, prim.center[i]);
  for (int i = 0; i < 4; ++i) fn(ParamClass::rotation, prim.rotation[i]);
  for (int i = 0; i < 3; ++i) fn(ParamClass::log_scale, prim.log_scale[i]);
  fn(ParamClass::opacity, prim.opacity_logit);
  for (auto& c : prim.sh) {
    for (int i = 0; i < 3; ++i) fn(ParamClass::sh, c[i]);
  }
  for (auto& a : prim.anchors) {
    for (int i = 0; i < 2; ++i) fn(ParamClass::anchor_offset, a.offset[i]);
    for (int i = 0; i < 3; ++i) fn(ParamClass::anchor_color, a.color[i]);
  }
  for (auto& ch : motion) {
    if (backend == DeformBackend::fps) {
      for (auto& v : ch.series.cos_coeffs) fn(ParamClass::fourier, v);
      for (auto& v : ch.series.sin_coeffs) fn(ParamClass::fourier, v);
      for (auto& v : ch.series.poly_coeffs) fn(ParamClass::polynomial, v);
    } else {
      for (auto& v : ch.basis.weights) fn(ParamClass::basis_weight, v);
      for (auto& v : ch.basis.centers) fn(ParamClass::basis_center, v);
      for (auto& v : ch.basis.log_widths) fn(ParamClass::basis_log_width, v);
      fn(ParamClass::global_offset, ch.delta);
    }
  }
}

void check_cover(const GaussianScene& scene, const DeformationField& field) {
  if (scene.size() != field.size()) {
    throw ConfigurationError("deformation field and scene sizes differ");
  }
}

}  // namespace

std::string_view to_string(ParamClass cls) {
  switch (cls) {
    case ParamClass::center: return "center";
    case ParamClass::rotation: return "quaternion";
    case ParamClass::log_scale: return "log_scale";
    case ParamClass::opacity: return "opacity_logit";
    case ParamClass::sh: return "sh";
    case ParamClass::anchor_offset: return "anchor_offset";
    case ParamClass::anchor_color: return "anchor_color";
    case ParamClass::basis_weight: return "omega";
    case ParamClass::basis_center: return "theta";
    case ParamClass::basis_log_width: return "log_sigma";
    case ParamClass::global_offset: return "delta";
    case ParamClass::fourier: return "fourier";
    case ParamClass::polynomial: return "polynomial";
  }
  return "?";
}

std::vector<ParamClass> block_layout(const GaussianScene& scene, const DeformationField& field) {
  GaussianPrimitive prim = make_primitive(Vec3::Zero(), scene.sh_degree, scene.anchor_count);
  PrimitiveMotion motion = make_motion(field.config);
  std::vector<ParamClass> layout;
  visit_block(prim, motion, field.config.backend, [&](ParamClass c, double&) { layout.push_back(c); });
  return layout;
}

std::size_t block_size(const GaussianScene& scene, const DeformationField& field) {
  return block_layout(scene, field).size();
}

std::vector<double> pack(const GaussianScene& scene, const DeformationField& field) {
  check_cover(scene, field);
  std::vector<double> flat;
  flat.reserve(scene.size() * block_size(scene, field));
  for (std::size_t i = 0; i < scene.size(); ++i) {
    visit_block(scene.primitives[i], field.motions[i], field.config.backend,
                [&](ParamClass, const double& v) { flat.push_back(v); });
  }
  return flat;
}

void unpack(std::span<const double> flat, GaussianScene& scene, DeformationField& field) {
  check_cover(scene, field);
  if (flat.size() != scene.size() * block_size(scene, field)) {
    throw ConfigurationError("flat parameter vector has the wrong length");
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    visit_block(scene.primitives[i], field.motions[i], field.config.backend,
                [&](ParamClass, double& v) { v = flat[k++]; });
  }
}

}  // namespace colorgs

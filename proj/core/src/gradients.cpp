#include "colorgs/gradients.hpp"

#include "colorgs/errors.hpp"
#include "colorgs/parallel.hpp"
#include "raster_internal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace colorgs {

namespace {

// Per-primitive accumulator slots filled by the pixel sweep.
enum Slot : std::size_t {
  kCenter2dX = 0,
  kCenter2dY,
  kConic00,
  kConic01,  // derivative w.r.t. the shared off-diagonal entry
  kConic11,
  kOpacity,
  kDepth,
  kBaseR,
  kBaseG,
  kBaseB,
  kHits,
  kAnchorStart,
};

std::size_t slot_stride(int anchors) { return kAnchorStart + 5 * static_cast<std::size_t>(anchors); }

// d(unit quaternion) from dL/dR for R(q), q = (w, x, y, z).
Vec4 rotation_backward(const Vec4& q, const Mat3& g) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Vec4 d;
  d[0] = 2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
  d[1] = 2.0 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2.0 * x * g(1, 1) - w * g(1, 2) +
                z * g(2, 0) + w * g(2, 1) - 2.0 * x * g(2, 2));
  d[2] = 2.0 * (-2.0 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
                w * g(2, 0) + z * g(2, 1) - 2.0 * y * g(2, 2));
  d[3] = 2.0 * (-2.0 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) - 2.0 * z * g(1, 1) +
                y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
  return d;
}

// Chain rule through v / |v|.
template <class V>
V normalize_backward(const V& unit, double norm, const V& grad) {
  return (grad - unit * unit.dot(grad)) / norm;
}

void motion_backward(const ChannelMotion& motion, DeformBackend backend, double t, double g,
                     ChannelMotion& out) {
  if (backend == DeformBackend::fps) {
    for (std::size_t m = 0; m < motion.series.cos_coeffs.size(); ++m) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(m + 1) * t;
      out.series.cos_coeffs[m] += g * std::cos(phase);
      out.series.sin_coeffs[m] += g * std::sin(phase);
    }
    double power = 1.0;
    for (double& p : out.series.poly_coeffs) {
      p += g * power;
      power *= t;
    }
    return;
  }
  const BasisSet& b = motion.basis;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double sigma = std::exp(b.log_widths[j]);
    const double d = t - b.centers[j];
    const double val = basis_eval(t, b.centers[j], sigma);
    const double s2 = sigma * sigma;
    out.basis.weights[j] += g * val;
    out.basis.centers[j] += g * b.weights[j] * val * d / s2;
    out.basis.log_widths[j] += g * b.weights[j] * val * d * d / s2;
  }
  if (backend == DeformBackend::edm) out.delta += g;
}

void zero_motion(ChannelMotion& m) {
  std::fill(m.basis.weights.begin(), m.basis.weights.end(), 0.0);
  std::fill(m.basis.centers.begin(), m.basis.centers.end(), 0.0);
  std::fill(m.basis.log_widths.begin(), m.basis.log_widths.end(), 0.0);
  m.delta = 0.0;
  std::fill(m.series.cos_coeffs.begin(), m.series.cos_coeffs.end(), 0.0);
  std::fill(m.series.sin_coeffs.begin(), m.series.sin_coeffs.end(), 0.0);
  std::fill(m.series.poly_coeffs.begin(), m.series.poly_coeffs.end(), 0.0);
}

void check_finite(const GradientBuffer& g) {
  const std::vector<double> flat = pack(g.scene, g.field);
  const std::vector<ParamClass> layout = block_layout(g.scene, g.field);
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (!std::isfinite(flat[k])) {
      throw GradientError("non-finite gradient on primitive " + std::to_string(k / layout.size()) +
                          ", parameter class " +
                          std::string(to_string(layout[k % layout.size()])));
    }
  }
}

}  // namespace

GradientBuffer zero_gradients(const GaussianScene& scene, const DeformationField& field) {
  GradientBuffer g;
  g.scene = scene;
  g.field = field;
  for (GaussianPrimitive& p : g.scene.primitives) {
    p.center.setZero();
    p.rotation.setZero();
    p.log_scale.setZero();
    p.opacity_logit = 0.0;
    for (Vec3& c : p.sh) c.setZero();
    for (AnchorSpec& a : p.anchors) {
      a.offset.setZero();
      a.color.setZero();
    }
  }
  for (PrimitiveMotion& m : g.field.motions) {
    for (ChannelMotion& ch : m) zero_motion(ch);
  }
  g.screen_grad_norm.assign(scene.size(), 0.0);
  g.visible.assign(scene.size(), 0);
  return g;
}

LossReport evaluate_loss(const FrameSample& frame, const CameraModel& camera,
                         const GaussianScene& scene, const DeformationField& field, double t,
                         const RenderConfig& config, LossNorm norm) {
  return masked_loss(render(deform_scene(scene, field, t), camera, config), frame, norm);
}

BackwardResult backward(const FrameSample& frame, const CameraModel& camera,
                        const GaussianScene& scene, const DeformationField& field, double t,
                        const RenderConfig& config, LossNorm norm) {
  scene.validate_shape();
  const GaussianScene deformed = deform_scene(scene, field, t);
  const detail::PreparedFrame prepared = detail::prepare_frame(deformed, camera, config);
  if (!frame.color.same_shape(frame.mask) || frame.color.width != camera.width ||
      frame.color.height != camera.height) {
    throw ConfigurationError("frame and camera dimensions differ");
  }

  const std::size_t masked = frame.masked_count();
  if (masked == 0) throw DatasetError("frame " + std::to_string(frame.index), "empty tissue mask");
  const double color_norm = 1.0 / (3.0 * static_cast<double>(masked));
  const double depth_norm = 1.0 / static_cast<double>(masked);

  const int anchors = scene.anchor_count;
  const std::size_t stride = slot_stride(anchors);
  const std::size_t n = scene.size();
  const double lambda = config.color.lambda_e;
  const int workers = effective_workers(config.workers, camera.height);

  std::vector<std::vector<double>> accum(static_cast<std::size_t>(workers),
                                         std::vector<double>(n * stride, 0.0));
  std::vector<double> color_loss(static_cast<std::size_t>(workers), 0.0);
  std::vector<double> depth_loss(static_cast<std::size_t>(workers), 0.0);

  parallel_rows(camera.height, workers, [&](int y_begin, int y_end, int worker) {
    std::vector<double>& acc = accum[static_cast<std::size_t>(worker)];
    std::vector<detail::Contribution> contribs;
    for (int y = y_begin; y < y_end; ++y) {
      for (int x = 0; x < camera.width; ++x) {
        if (frame.mask.at(x, y) == 0.0) continue;
        detail::shade_pixel(prepared, deformed, config, x, y, contribs);
        Vec3 color = Vec3::Zero();
        double depth = 0.0;
        for (const auto& c : contribs) {
          const double w = c.alpha * c.transmittance;
          color += w * c.color;
          depth += w * prepared.projected[c.primitive].cam_point.z();
        }

        Vec3 g_color;
        double g_depth = 0.0;
        const double rd = depth - frame.depth.at(x, y);
        for (int ch = 0; ch < 3; ++ch) {
          const double r = color[ch] - frame.color.at(x, y, ch);
          if (norm == LossNorm::l1) {
            color_loss[static_cast<std::size_t>(worker)] += std::abs(r);
            g_color[ch] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * color_norm;
          } else {
            color_loss[static_cast<std::size_t>(worker)] += r * r;
            g_color[ch] = 2.0 * r * color_norm;
          }
        }
        if (norm == LossNorm::l1) {
          depth_loss[static_cast<std::size_t>(worker)] += std::abs(rd);
          g_depth = (rd > 0.0 ? 1.0 : (rd < 0.0 ? -1.0 : 0.0)) * depth_norm;
        } else {
          depth_loss[static_cast<std::size_t>(worker)] += rd * rd;
          g_depth = 2.0 * rd * depth_norm;
        }

        const Vec2 p(static_cast<double>(x), static_cast<double>(y));
        double suffix = 0.0;  // sum_{j>i} w_j (c_j . gC + d_j gD)
        for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
          const detail::Projected& pr = prepared.projected[it->primitive];
          const GaussianPrimitive& prim = deformed.primitives[it->primitive];
          double* a = acc.data() + static_cast<std::size_t>(it->primitive) * stride;
          const double d_i = pr.cam_point.z();
          const double value = it->color.dot(g_color) + d_i * g_depth;
          const double w = it->alpha * it->transmittance;
          const double d_alpha = it->transmittance * value - suffix / (1.0 - it->alpha);
          suffix += w * value;

          a[kHits] += 1.0;
          a[kDepth] += w * g_depth;
          Vec3 g_raw = w * g_color;
          for (int ch = 0; ch < 3; ++ch) {
            if (!(it->raw_color[ch] > 0.0)) g_raw[ch] = 0.0;
          }
          a[kBaseR] += g_raw[0];
          a[kBaseG] += g_raw[1];
          a[kBaseB] += g_raw[2];
          for (int k = 0; k < anchors; ++k) {
            const AnchorSpec& anc = prim.anchors[static_cast<std::size_t>(k)];
            const Vec2 r = p - pr.center2d - anc.offset;
            const double wk = std::exp(-lambda * r.squaredNorm());
            double* s = a + kAnchorStart + 5 * static_cast<std::size_t>(k);
            const double d_wk = anc.color.dot(g_raw);
            const Vec2 g_pos = d_wk * 2.0 * lambda * wk * r;
            s[0] += g_pos.x();
            s[1] += g_pos.y();
            s[2] += wk * g_raw[0];
            s[3] += wk * g_raw[1];
            s[4] += wk * g_raw[2];
            a[kCenter2dX] += g_pos.x();
            a[kCenter2dY] += g_pos.y();
          }

          if (!it->clamped) {
            a[kOpacity] += d_alpha * it->gauss;
            const double d_q = -0.5 * it->alpha * d_alpha;
            const Vec2 dlt = p - pr.center2d;
            a[kConic00] += d_q * dlt.x() * dlt.x();
            a[kConic01] += d_q * 2.0 * dlt.x() * dlt.y();
            a[kConic11] += d_q * dlt.y() * dlt.y();
            const Vec2 dq_dd = 2.0 * (pr.conic * dlt);
            a[kCenter2dX] -= d_q * dq_dd.x();
            a[kCenter2dY] -= d_q * dq_dd.y();
          }
        }
      }
    }
  });

  for (int w = 1; w < workers; ++w) {
    const auto& src = accum[static_cast<std::size_t>(w)];
    auto& dst = accum[0];
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    color_loss[0] += color_loss[static_cast<std::size_t>(w)];
    depth_loss[0] += depth_loss[static_cast<std::size_t>(w)];
  }

  BackwardResult result;
  result.loss.color_term = color_loss[0] * color_norm;
  result.loss.depth_term = depth_loss[0] * depth_norm;
  result.loss.total = result.loss.color_term + result.loss.depth_term;
  result.grads = zero_gradients(scene, field);
  GradientBuffer& grads = result.grads;

  const Mat3& world_rot = camera.rotation;
  for (std::size_t i = 0; i < n; ++i) {
    const detail::Projected& pr = prepared.projected[i];
    if (!pr.visible) continue;
    const double* a = accum[0].data() + i * stride;
    if (a[kHits] == 0.0) continue;
    grads.visible[i] = 1;
    const GaussianPrimitive& prim = deformed.primitives[i];
    GaussianPrimitive& g = grads.scene.primitives[i];

    const Vec2 g_center2d(a[kCenter2dX], a[kCenter2dY]);
    grads.screen_grad_norm[i] =
        Vec2(g_center2d.x() * 0.5 * camera.width, g_center2d.y() * 0.5 * camera.height).norm();

    // conic -> 2D covariance -> 3D covariance and Jacobian
    Mat2 g_conic;
    g_conic << a[kConic00], 0.5 * a[kConic01], 0.5 * a[kConic01], a[kConic11];
    const Mat2 g_cov2d = -pr.conic * g_conic * pr.conic;
    const Mat23 tmat = pr.jacobian * world_rot;
    const Mat3 g_cov3d = tmat.transpose() * g_cov2d * tmat;
    const Mat23 g_t = 2.0 * g_cov2d * tmat * pr.cov3d;
    const Mat23 g_j = g_t * world_rot.transpose();

    const Vec3& pc = pr.cam_point;
    const double iz = 1.0 / pc.z();
    const double iz2 = iz * iz;
    const double iz3 = iz2 * iz;
    const double fx = camera.fx, fy = camera.fy;
    Vec3 g_cam = Vec3::Zero();
    g_cam.x() += g_j(0, 2) * (-fx * iz2);
    g_cam.y() += g_j(1, 2) * (-fy * iz2);
    g_cam.z() += g_j(0, 0) * (-fx * iz2) + g_j(1, 1) * (-fy * iz2) +
                 g_j(0, 2) * (2.0 * fx * pc.x() * iz3) + g_j(1, 2) * (2.0 * fy * pc.y() * iz3);
    g_cam.x() += g_center2d.x() * fx * iz;
    g_cam.y() += g_center2d.y() * fy * iz;
    g_cam.z() += -g_center2d.x() * fx * pc.x() * iz2 - g_center2d.y() * fy * pc.y() * iz2;
    g_cam.z() += a[kDepth];

    const Vec3 g_base(a[kBaseR], a[kBaseG], a[kBaseB]);
    const Vec3 g_dir = sh_color_backward(prim.sh, pr.view_dir, deformed.sh_degree, g_base, g.sh);
    const Vec3 g_center = world_rot.transpose() * g_cam +
                          normalize_backward<Vec3>(pr.view_dir, pr.view_dist, g_dir);

    // Sigma = M M^T, M = R S
    const Mat3 m = pr.rotation * pr.scale.asDiagonal();
    const Mat3 g_m = 2.0 * g_cov3d * m;
    Vec3 g_log_scale;
    Mat3 g_rot;
    for (int k = 0; k < 3; ++k) {
      g_log_scale[k] = pr.scale[k] * g_m.col(k).dot(pr.rotation.col(k));
      g_rot.col(k) = g_m.col(k) * pr.scale[k];
    }
    const Vec4 g_unit_q = rotation_backward(pr.unit_rotation, g_rot);
    // render-side normalization of the stored (already unit) deformed quaternion
    const Vec4 g_stored_q = normalize_backward<Vec4>(pr.unit_rotation, pr.rotation_norm, g_unit_q);
    // deformation-side normalization of canonical + offsets
    const PrimitiveMotion& motion = field.motions[i];
    Vec4 raw_q = scene.primitives[i].rotation;
    for (int c = 0; c < 4; ++c) raw_q[c] += channel_eval(t, motion[static_cast<std::size_t>(3 + c)], field.config.backend);
    const double raw_norm = raw_q.norm();
    const Vec4 g_raw_q = normalize_backward<Vec4>(raw_q / raw_norm, raw_norm, g_stored_q);

    g.center = g_center;
    g.rotation = g_raw_q;
    g.log_scale = g_log_scale;
    g.opacity_logit = pr.opacity * (1.0 - pr.opacity) * a[kOpacity];
    for (int k = 0; k < anchors; ++k) {
      const double* s = a + kAnchorStart + 5 * static_cast<std::size_t>(k);
      AnchorSpec& ga = g.anchors[static_cast<std::size_t>(k)];
      ga.offset = Vec2(s[0], s[1]);
      ga.color = Vec3(s[2], s[3], s[4]);
    }

    PrimitiveMotion& gm = grads.field.motions[i];
    for (int c = 0; c < 3; ++c) {
      motion_backward(motion[static_cast<std::size_t>(c)], field.config.backend, t, g_center[c],
                      gm[static_cast<std::size_t>(c)]);
      motion_backward(motion[static_cast<std::size_t>(7 + c)], field.config.backend, t,
                      g_log_scale[c], gm[static_cast<std::size_t>(7 + c)]);
    }
    for (int c = 0; c < 4; ++c) {
      motion_backward(motion[static_cast<std::size_t>(3 + c)], field.config.backend, t, g_raw_q[c],
                      gm[static_cast<std::size_t>(3 + c)]);
    }
  }

  check_finite(grads);
  return result;
}

std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& loss_fn,
                                std::span<const double> params, double h) {
  std::vector<double> work(params.begin(), params.end());
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double orig = work[i];
    work[i] = orig + h;
    const double plus = loss_fn(work);
    work[i] = orig - h;
    const double minus = loss_fn(work);
    work[i] = orig;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

GradCheckReport run_gradient_check(const GradCheckOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto normal = [&]() { return std::normal_distribution<double>(0.0, 1.0)(rng); };

  const int size = opt.image_size;
  CameraModel camera;
  camera.fx = camera.fy = static_cast<double>(size);
  camera.cx = camera.cy = 0.5 * static_cast<double>(size - 1);
  camera.width = camera.height = size;
  camera.rotation = rotation_matrix(axis_angle_quaternion(Vec3(0.2, 1.0, 0.1), 0.1));
  camera.translation = Vec3(0.05, -0.03, 0.1);

  GaussianScene scene;
  scene.sh_degree = opt.sh_degree;
  scene.anchor_count = opt.anchors;
  for (int i = 0; i < opt.num_gaussians; ++i) {
    const double z = 2.0 + 0.3 * i + uniform(0.0, 0.1);
    const Vec2 pixel(uniform(1.5, size - 2.5), uniform(1.5, size - 2.5));
    GaussianPrimitive p = make_primitive(back_project(camera, pixel, z), opt.sh_degree, opt.anchors);
    const double sigma = uniform(4.0, 5.0) * z / camera.fx;
    for (int k = 0; k < 3; ++k) p.log_scale[k] = std::log(sigma * uniform(0.6, 1.4));
    p.rotation = Vec4(normal(), normal(), normal(), normal()).normalized();
    p.opacity_logit = logit(uniform(0.3, 0.7));
    p.sh[0] = dc_from_color(Vec3(uniform(0.35, 0.65), uniform(0.35, 0.65), uniform(0.35, 0.65)));
    for (std::size_t k = 1; k < p.sh.size(); ++k) {
      p.sh[k] = Vec3(uniform(-0.05, 0.05), uniform(-0.05, 0.05), uniform(-0.05, 0.05));
    }
    for (AnchorSpec& a : p.anchors) {
      a.offset += Vec2(uniform(-0.5, 0.5), uniform(-0.5, 0.5));
      a.color = Vec3(uniform(-0.08, 0.08), uniform(-0.08, 0.08), uniform(-0.08, 0.08));
    }
    scene.primitives.push_back(std::move(p));
  }

  DeformationConfig dcfg;
  dcfg.backend = opt.backend;
  dcfg.num_bases = opt.bases;
  DeformationField field = make_deformation_field(dcfg, scene.size());
  const double t = uniform(0.2, 0.8);
  // Weights, widths and center offsets stay away from values where the
  // basis gradients vanish, so every checked coordinate is well above the
  // finite-difference rounding noise.
  auto away = [&](double lo, double hi) { return (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(lo, hi); };
  for (PrimitiveMotion& motion : field.motions) {
    for (std::size_t c = 0; c < motion.size(); ++c) {
      ChannelMotion& ch = motion[c];
      const double amp = c < 3 ? 0.05 : 0.03;
      for (std::size_t j = 0; j < ch.basis.size(); ++j) {
        ch.basis.weights[j] = away(0.5 * amp, amp);
        ch.basis.centers[j] = t + away(0.1, 0.4);
        ch.basis.log_widths[j] = std::log(uniform(0.3, 0.6));
      }
      if (opt.backend == DeformBackend::edm) ch.delta = uniform(-amp, amp);
      for (double& v : ch.series.cos_coeffs) v = uniform(-amp, amp) * 0.3;
      for (double& v : ch.series.sin_coeffs) v = uniform(-amp, amp) * 0.3;
      for (double& v : ch.series.poly_coeffs) v = uniform(-amp, amp) * 0.5;
    }
  }

  RenderConfig rcfg;
  rcfg.color.k = opt.anchors;
  const RenderOutput base = render(deform_scene(scene, field, t), camera, rcfg);

  // Ground truth sits well away from the render so no L1 residual crosses zero.
  FrameSample frame;
  frame.color = Image(size, size, 3);
  frame.depth = Image(size, size, 1);
  frame.mask = Image(size, size, 1);
  frame.time = t;
  auto offset = [&]() { return (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(0.2, 0.4); };
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) frame.color.at(x, y, c) = base.color.at(x, y, c) + offset();
      frame.depth.at(x, y) = base.depth.at(x, y) + offset();
      frame.mask.at(x, y) = uniform(0.0, 1.0) < 0.8 ? 1.0 : 0.0;
    }
  }
  frame.mask.at(size / 2, size / 2) = 1.0;

  const BackwardResult analytic = backward(frame, camera, scene, field, t, rcfg);
  const std::vector<double> g_analytic = pack(analytic.grads.scene, analytic.grads.field);

  const std::vector<double> params = pack(scene, field);
  GaussianScene work_scene = scene;
  DeformationField work_field = field;
  auto loss_fn = [&](std::span<const double> flat) {
    unpack(flat, work_scene, work_field);
    return evaluate_loss(frame, camera, work_scene, work_field, t, rcfg).total;
  };
  const std::vector<double> g_numeric = finite_diff(loss_fn, params, opt.step);

  const std::vector<ParamClass> layout = block_layout(scene, field);
  GradCheckReport report;
  for (ParamClass cls : kAllParamClasses) {
    if (std::find(layout.begin(), layout.end(), cls) == layout.end()) continue;
    GradCheckRow row;
    row.cls = cls;
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (layout[k % layout.size()] != cls) continue;
      const double a = g_analytic[k], b = g_numeric[k];
      if (std::abs(a) < opt.floor && std::abs(b) < opt.floor) {
        ++row.skipped;
        continue;
      }
      ++row.checked;
      row.max_rel_error = std::max(row.max_rel_error, relative_error(a, b));
    }
    row.passed = row.max_rel_error <= opt.tolerance;
    report.passed = report.passed && row.passed;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace colorgs

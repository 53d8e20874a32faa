#include "colorgs/rasterizer.hpp"

#include "colorgs/errors.hpp"
#include "colorgs/parallel.hpp"
#include "raster_internal.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace colorgs {

std::string_view to_string(LossNorm norm) { return norm == LossNorm::l1 ? "l1" : "l2"; }

LossNorm parse_loss_norm(std::string_view name) {
  if (name == "l1") return LossNorm::l1;
  if (name == "l2") return LossNorm::l2;
  throw ConfigurationError("unknown loss norm '" + std::string(name) + "'");
}

namespace detail {

PreparedFrame prepare_frame(const GaussianScene& scene, const CameraModel& camera,
                            const RenderConfig& config) {
  PreparedFrame frame;
  frame.tile_size = std::max(config.tile_size, 1);
  frame.tiles_x = (camera.width + frame.tile_size - 1) / frame.tile_size;
  frame.tiles_y = (camera.height + frame.tile_size - 1) / frame.tile_size;
  frame.tiles.assign(static_cast<std::size_t>(frame.tiles_x * frame.tiles_y), {});
  frame.projected.resize(scene.size());

  const Vec3 cam_pos = camera.position();
  std::vector<std::uint32_t> visible;
  visible.reserve(scene.size());

  for (std::size_t i = 0; i < scene.size(); ++i) {
    const GaussianPrimitive& prim = scene.primitives[i];
    Projected& pr = frame.projected[i];
    if (!prim.center.allFinite()) throw InvalidParameterError(i, "non-finite center");
    const ActiveParameters act = activations(prim, i);

    pr.cam_point = camera.to_camera(prim.center);
    if (!(pr.cam_point.z() > config.near_plane)) continue;
    pr.opacity = act.opacity;
    if (pr.opacity < kAlphaMin) continue;

    pr.rotation_norm = prim.rotation.norm();
    pr.unit_rotation = act.rotation;
    pr.rotation = rotation_matrix(act.rotation);
    pr.scale = act.scale;
    const Mat3 m = pr.rotation * pr.scale.asDiagonal();
    pr.cov3d = m * m.transpose();

    const double iz = 1.0 / pr.cam_point.z();
    pr.center2d = Vec2(camera.fx * pr.cam_point.x() * iz + camera.cx,
                       camera.fy * pr.cam_point.y() * iz + camera.cy);
    pr.jacobian = projection_jacobian(camera, pr.cam_point);
    const Mat23 t = pr.jacobian * camera.rotation;
    pr.cov2d = t * pr.cov3d * t.transpose() + config.dilation * Mat2::Identity();
    pr.cov2d(0, 1) = pr.cov2d(1, 0) = 0.5 * (pr.cov2d(0, 1) + pr.cov2d(1, 0));
    const double det = pr.cov2d.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw RenderError(-1, -1, i, "projected covariance is not positive definite");
    }
    pr.conic << pr.cov2d(1, 1) / det, -pr.cov2d(0, 1) / det, -pr.cov2d(1, 0) / det,
        pr.cov2d(0, 0) / det;

    const Vec3 v = prim.center - cam_pos;
    pr.view_dist = v.norm();
    pr.view_dir = v / pr.view_dist;
    pr.base_color = sh_color(prim.sh, pr.view_dir, scene.sh_degree);
    if (!pr.center2d.allFinite() || !pr.base_color.allFinite()) {
      throw RenderError(-1, -1, i, "non-finite projection");
    }

    // Beyond this radius alpha < 1/255 for every pixel.
    const double mid = 0.5 * (pr.cov2d(0, 0) + pr.cov2d(1, 1));
    const double lambda_max =
        mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double radius = std::sqrt(lambda_max * 2.0 * std::log(pr.opacity / kAlphaMin)) + 1.0;
    pr.x0 = std::max(0, static_cast<int>(std::floor(pr.center2d.x() - radius)));
    pr.x1 = std::min(camera.width - 1, static_cast<int>(std::ceil(pr.center2d.x() + radius)));
    pr.y0 = std::max(0, static_cast<int>(std::floor(pr.center2d.y() - radius)));
    pr.y1 = std::min(camera.height - 1, static_cast<int>(std::ceil(pr.center2d.y() + radius)));
    if (pr.x0 > pr.x1 || pr.y0 > pr.y1) continue;
    pr.visible = true;
    visible.push_back(static_cast<std::uint32_t>(i));
  }

  std::sort(visible.begin(), visible.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double za = frame.projected[a].cam_point.z();
    const double zb = frame.projected[b].cam_point.z();
    return za < zb || (za == zb && a < b);
  });
  frame.order = visible;

  for (const std::uint32_t id : frame.order) {
    const Projected& pr = frame.projected[id];
    for (int ty = pr.y0 / frame.tile_size; ty <= pr.y1 / frame.tile_size; ++ty) {
      for (int tx = pr.x0 / frame.tile_size; tx <= pr.x1 / frame.tile_size; ++tx) {
        frame.tiles[static_cast<std::size_t>(ty * frame.tiles_x + tx)].push_back(id);
      }
    }
  }
  return frame;
}

double shade_pixel(const PreparedFrame& frame, const GaussianScene& scene,
                   const RenderConfig& config, int x, int y, std::vector<Contribution>& out) {
  out.clear();
  const auto& tile = frame.tiles[static_cast<std::size_t>((y / frame.tile_size) * frame.tiles_x +
                                                          x / frame.tile_size)];
  const Vec2 p(static_cast<double>(x), static_cast<double>(y));
  double t = 1.0;
  for (const std::uint32_t id : tile) {
    const Projected& pr = frame.projected[id];
    if (x < pr.x0 || x > pr.x1 || y < pr.y0 || y > pr.y1) continue;
    const Vec2 d = p - pr.center2d;
    const double q = d.dot(pr.conic * d);
    const double gauss = std::exp(-0.5 * q);
    double alpha = pr.opacity * gauss;
    const bool clamped = alpha > kAlphaMax;
    if (clamped) alpha = kAlphaMax;
    if (alpha < kAlphaMin) continue;
    const double next_t = t * (1.0 - alpha);
    if (next_t < kTransmittanceStop) break;

    const GaussianPrimitive& prim = scene.primitives[id];
    Contribution c;
    c.primitive = id;
    c.alpha = alpha;
    c.gauss = gauss;
    c.clamped = clamped;
    c.transmittance = t;
    c.raw_color = pr.base_color + anchor_color(p, prim.anchors, pr.center2d, config.color.lambda_e);
    c.color = c.raw_color.cwiseMax(0.0);
    if (!std::isfinite(alpha) || !c.color.allFinite()) {
      throw RenderError(x, y, id, "non-finite alpha or color");
    }
    out.push_back(c);
    t = next_t;
  }
  return t;
}

}  // namespace detail

RenderOutput render(const GaussianScene& scene, const CameraModel& camera, const RenderConfig& config) {
  scene.validate_shape();
  const detail::PreparedFrame frame = detail::prepare_frame(scene, camera, config);
  RenderOutput out{Image(camera.width, camera.height, 3), Image(camera.width, camera.height, 1),
                   Image(camera.width, camera.height, 1, 1.0)};

  parallel_rows(camera.height, config.workers, [&](int y_begin, int y_end, int) {
    std::vector<detail::Contribution> contribs;
    for (int y = y_begin; y < y_end; ++y) {
      for (int x = 0; x < camera.width; ++x) {
        const double t = detail::shade_pixel(frame, scene, config, x, y, contribs);
        Vec3 color = Vec3::Zero();
        double depth = 0.0;
        for (const auto& c : contribs) {
          const double w = c.alpha * c.transmittance;
          color += w * c.color;
          depth += w * frame.projected[c.primitive].cam_point.z();
        }
        if (!color.allFinite() || !std::isfinite(depth)) {
          throw RenderError(x, y, contribs.empty() ? 0 : contribs.back().primitive,
                            "non-finite blended value");
        }
        for (int ch = 0; ch < 3; ++ch) out.color.at(x, y, ch) = color[ch];
        out.depth.at(x, y) = depth;
        out.transmittance.at(x, y) = t;
      }
    }
  });
  return out;
}

LossReport masked_loss(const RenderOutput& render, const FrameSample& frame, LossNorm norm) {
  if (!render.color.same_shape(frame.color) || !render.depth.same_shape(frame.depth) ||
      !render.color.same_shape(frame.mask)) {
    throw ConfigurationError("render and frame dimensions differ");
  }
  auto penalty = [norm](double r) { return norm == LossNorm::l1 ? std::abs(r) : r * r; };
  double color_sum = 0.0;
  double depth_sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < frame.mask.height; ++y) {
    for (int x = 0; x < frame.mask.width; ++x) {
      if (frame.mask.at(x, y) == 0.0) continue;
      ++count;
      for (int c = 0; c < 3; ++c) color_sum += penalty(render.color.at(x, y, c) - frame.color.at(x, y, c));
      depth_sum += penalty(render.depth.at(x, y) - frame.depth.at(x, y));
    }
  }
  if (count == 0) throw DatasetError("frame " + std::to_string(frame.index), "empty tissue mask");
  LossReport report;
  report.color_term = color_sum / (3.0 * static_cast<double>(count));
  report.depth_term = depth_sum / static_cast<double>(count);
  report.total = report.color_term + report.depth_term;
  return report;
}

PixelBlend pixel_blend(const GaussianScene& scene, const CameraModel& camera,
                       const RenderConfig& config, int x, int y) {
  const detail::PreparedFrame frame = detail::prepare_frame(scene, camera, config);
  std::vector<detail::Contribution> contribs;
  PixelBlend blend;
  blend.transmittance = detail::shade_pixel(frame, scene, config, x, y, contribs);
  for (const auto& c : contribs) {
    blend.primitives.push_back(c.primitive);
    blend.weights.push_back(c.alpha * c.transmittance);
  }
  return blend;
}

}  // namespace colorgs

#include "colorgs/trainer.hpp"

#include "colorgs/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace colorgs {

void TrainConfig::validate() const {
  if (iterations < 0) throw ConfigurationError("iterations must be non-negative");
  if (densify_freeze_iters < 0) throw ConfigurationError("densify_freeze_iters must be non-negative");
  if (densify_interval < 1) throw ConfigurationError("densify_interval must be positive");
  if (!(grad_threshold > 0.0) || !(opacity_prune_threshold > 0.0) || !(scale_split_threshold > 0.0)) {
    throw ConfigurationError("densification thresholds must be positive");
  }
  if (max_primitives < 0) throw ConfigurationError("max_primitives must be non-negative");
  if (omega_l2 < 0.0) throw ConfigurationError("omega_l2 must be non-negative");
  for (double rate : {lr.center, lr.center_final, lr.rotation, lr.scale, lr.opacity, lr.sh, lr.anchor,
                      lr.deformation}) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw ConfigurationError("learning rates must be finite and >= 0");
  }
  if (lr.center > 0.0 && !(lr.center_final > 0.0)) {
    throw ConfigurationError("center_final must be positive when center is");
  }
  if (anchors < 0) throw ConfigurationError("anchors must be non-negative");
  if (sh_degree < 0 || sh_degree > kMaxShDegree) throw ConfigurationError("sh_degree must be in [0, 3]");
  if (!(lambda_e > 0.0)) throw ConfigurationError("lambda_e must be positive");
  if (eval_interval < 1 || checkpoint_interval < 1) {
    throw ConfigurationError("eval and checkpoint intervals must be positive");
  }
  if (workers < 1) throw ConfigurationError("workers must be at least 1");
  deformation.validate();
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               std::span<const double> lr, double beta1, double beta2, double eps) {
  if (grads.size() != params.size() || lr.size() != params.size()) {
    throw ConfigurationError("adam_step: parameter, gradient and rate sizes differ");
  }
  if (state.m.size() != params.size()) state.m.assign(params.size(), 0.0);
  if (state.v.size() != params.size()) state.v.assign(params.size(), 0.0);
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    const double update = lr[i] * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + eps);
    if (!std::isfinite(update)) {
      throw GradientError("non-finite Adam update at coordinate " + std::to_string(i));
    }
    params[i] -= update;
  }
}

void DensifyStats::reset(std::size_t n) {
  grad_sum.assign(n, 0.0);
  visible_count.assign(n, 0);
}

void DensifyStats::accumulate(const GradientBuffer& grads) {
  for (std::size_t i = 0; i < grad_sum.size() && i < grads.visible.size(); ++i) {
    if (grads.visible[i] == 0) continue;
    grad_sum[i] += grads.screen_grad_norm[i];
    ++visible_count[i];
  }
}

double DensifyStats::mean(std::size_t i) const {
  return visible_count[i] > 0 ? grad_sum[i] / visible_count[i] : 0.0;
}

double scene_extent(const GaussianScene& scene) {
  if (scene.empty()) return 0.0;
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : scene.primitives) centroid += p.center;
  centroid /= static_cast<double>(scene.size());
  double extent = 0.0;
  for (const auto& p : scene.primitives) extent = std::max(extent, (p.center - centroid).norm());
  return extent;
}

SourceMap densify_and_prune(GaussianScene& scene, DeformationField& field, const DensifyStats& stats,
                            const TrainConfig& config, double extent, std::mt19937_64& rng) {
  const std::size_t n = scene.size();
  const double split_scale = config.scale_split_threshold * extent;
  std::size_t budget = config.max_primitives > 0 && static_cast<std::size_t>(config.max_primitives) > n
                           ? static_cast<std::size_t>(config.max_primitives) - n
                           : (config.max_primitives > 0 ? 0 : std::numeric_limits<std::size_t>::max());
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<GaussianPrimitive> prims;
  std::vector<PrimitiveMotion> motions;
  SourceMap source;
  std::vector<GaussianPrimitive> extra_prims;
  std::vector<PrimitiveMotion> extra_motions;

  for (std::size_t i = 0; i < n; ++i) {
    const GaussianPrimitive& p = scene.primitives[i];
    const bool grow = stats.mean(i) > config.grad_threshold && budget > 0;
    if (!grow) {
      prims.push_back(p);
      motions.push_back(field.motions[i]);
      source.push_back(static_cast<std::ptrdiff_t>(i));
      continue;
    }
    --budget;
    if (std::exp(p.log_scale.maxCoeff()) <= split_scale) {
      prims.push_back(p);
      motions.push_back(field.motions[i]);
      source.push_back(static_cast<std::ptrdiff_t>(i));
      extra_prims.push_back(p);
      extra_motions.push_back(field.motions[i]);
      continue;
    }
    const Mat3 r = rotation_matrix(p.rotation.normalized());
    const Vec3 s = p.log_scale.array().exp().matrix();
    for (int child = 0; child < 2; ++child) {
      GaussianPrimitive c = p;
      const Vec3 z(normal(rng), normal(rng), normal(rng));
      c.center = p.center + r * s.cwiseProduct(z);
      c.log_scale = p.log_scale.array() - std::log(1.6);
      extra_prims.push_back(std::move(c));
      extra_motions.push_back(field.motions[i]);
    }
  }
  for (std::size_t j = 0; j < extra_prims.size(); ++j) {
    prims.push_back(std::move(extra_prims[j]));
    motions.push_back(std::move(extra_motions[j]));
    source.push_back(-1);
  }

  GaussianScene out_scene{scene.sh_degree, scene.anchor_count, {}};
  DeformationField out_field{field.config, {}};
  SourceMap out_source;
  for (std::size_t j = 0; j < prims.size(); ++j) {
    if (sigmoid(prims[j].opacity_logit) < config.opacity_prune_threshold) continue;
    out_scene.primitives.push_back(std::move(prims[j]));
    out_field.motions.push_back(std::move(motions[j]));
    out_source.push_back(source[j]);
  }
  scene = std::move(out_scene);
  field = std::move(out_field);
  return out_source;
}

RenderConfig render_config(const TrainConfig& config) {
  RenderConfig rc;
  rc.color.k = config.anchors;
  rc.color.lambda_e = config.lambda_e;
  rc.workers = config.workers;
  return rc;
}

MetricReport evaluate_frames(const Dataset& dataset, const std::vector<int>& indices,
                             const GaussianScene& scene, const DeformationField& field,
                             const RenderConfig& config, bool with_ssim) {
  std::vector<FrameMetric> rows;
  for (int idx : indices) {
    const FrameSample& f = dataset.frames.at(static_cast<std::size_t>(idx));
    const RenderOutput r = render(deform_scene(scene, field, f.time), dataset.camera_of(f), config);
    const Image color = clamped(r.color, 0.0, 1.0);
    FrameMetric m;
    m.frame = f.index;
    m.psnr = psnr(color, f.color, f.mask);
    m.ssim = with_ssim ? ssim(color, f.color, f.mask) : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(m);
  }
  return summarize(std::move(rows));
}

namespace {

double log_lerp(double from, double to, double fraction) {
  if (from <= 0.0 || to <= 0.0) return from;
  return std::exp((1.0 - fraction) * std::log(from) + fraction * std::log(to));
}

bool is_canonical(ParamClass c) {
  switch (c) {
    case ParamClass::center:
    case ParamClass::rotation:
    case ParamClass::log_scale:
    case ParamClass::opacity:
    case ParamClass::sh:
    case ParamClass::anchor_offset:
    case ParamClass::anchor_color: return true;
    default: return false;
  }
}

std::array<double, kAllParamClasses.size()> class_rates(const TrainConfig& config, DeformBackend backend,
                                                        double fraction) {
  std::array<double, kAllParamClasses.size()> rates{};
  const double deform = config.lr.deformation_final > 0.0
                            ? log_lerp(config.lr.deformation, config.lr.deformation_final, fraction)
                            : config.lr.deformation;
  for (ParamClass c : kAllParamClasses) {
    double r = 0.0;
    switch (c) {
      case ParamClass::center: r = log_lerp(config.lr.center, config.lr.center_final, fraction); break;
      case ParamClass::rotation: r = config.lr.rotation; break;
      case ParamClass::log_scale: r = config.lr.scale; break;
      case ParamClass::opacity: r = config.lr.opacity; break;
      case ParamClass::sh: r = config.lr.sh; break;
      case ParamClass::anchor_offset:
      case ParamClass::anchor_color: r = config.lr.anchor; break;
      case ParamClass::global_offset: r = backend == DeformBackend::gs ? 0.0 : deform; break;
      default: r = deform; break;
    }
    if (!config.train_canonical && is_canonical(c)) r = 0.0;
    rates[static_cast<std::size_t>(c)] = r;
  }
  return rates;
}

// Canonical quaternions back on the unit sphere, basis widths above the floor.
void project_parameters(GaussianScene& scene, DeformationField& field) {
  for (auto& p : scene.primitives) {
    const double n = p.rotation.norm();
    if (n > 0.0) p.rotation /= n;
  }
  const double floor = std::log(kMinBasisWidth);
  for (auto& m : field.motions) {
    for (auto& ch : m) {
      for (double& lw : ch.basis.log_widths) lw = std::max(lw, floor);
    }
  }
}

void remap_moments(AdamState& state, const SourceMap& source, std::size_t stride) {
  std::vector<double> m(source.size() * stride, 0.0);
  std::vector<double> v(source.size() * stride, 0.0);
  for (std::size_t j = 0; j < source.size(); ++j) {
    if (source[j] < 0) continue;
    const auto from = static_cast<std::size_t>(source[j]) * stride;
    std::copy_n(state.m.begin() + static_cast<std::ptrdiff_t>(from), stride, m.begin() + static_cast<std::ptrdiff_t>(j * stride));
    std::copy_n(state.v.begin() + static_cast<std::ptrdiff_t>(from), stride, v.begin() + static_cast<std::ptrdiff_t>(j * stride));
  }
  state.m = std::move(m);
  state.v = std::move(v);
}

}  // namespace

TrainResult train(const Dataset& dataset, GaussianScene scene, DeformationField field,
                  const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  scene.validate_shape();
  if (scene.anchor_count != config.anchors) {
    throw ConfigurationError("scene anchor count differs from the training config");
  }
  if (field.size() != scene.size()) throw ConfigurationError("deformation field and scene sizes differ");
  if (dataset.train.empty()) throw DatasetError("dataset", "no training frames");

  const RenderConfig rcfg = render_config(config);
  const double extent = scene_extent(scene);
  const DeformBackend backend = field.config.backend;

  std::vector<ParamClass> layout = block_layout(scene, field);
  const std::size_t stride = layout.size();
  std::vector<double> flat = pack(scene, field);
  AdamState state;
  state.m.assign(flat.size(), 0.0);
  state.v.assign(flat.size(), 0.0);
  std::vector<double> lr;

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.train.size() - 1);
  DensifyStats stats;
  stats.reset(scene.size());

  TrainResult result;
  double initial_loss = std::numeric_limits<double>::quiet_NaN();
  int above = 0;

  for (int it = 1; it <= config.iterations; ++it) {
    const FrameSample& frame = dataset.frames[static_cast<std::size_t>(dataset.train[pick(rng)])];
    BackwardResult br = backward(frame, dataset.camera_of(frame), scene, field, frame.time, rcfg,
                                 config.loss_norm);
    if (config.omega_l2 > 0.0) {
      for (std::size_t i = 0; i < field.size(); ++i) {
        for (std::size_t ch = 0; ch < kDeformChannels; ++ch) {
          const auto& w = field.motions[i][ch].basis.weights;
          auto& g = br.grads.field.motions[i][ch].basis.weights;
          for (std::size_t j = 0; j < w.size(); ++j) g[j] += 2.0 * config.omega_l2 * w[j];
        }
      }
    }
    stats.accumulate(br.grads);

    const std::vector<double> grads = pack(br.grads.scene, br.grads.field);
    const double fraction = config.iterations > 1 ? static_cast<double>(it - 1) / (config.iterations - 1) : 0.0;
    const auto rates = class_rates(config, backend, fraction);
    lr.resize(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) lr[i] = rates[static_cast<std::size_t>(layout[i % stride])];
    adam_step(flat, grads, state, lr);
    unpack(flat, scene, field);
    project_parameters(scene, field);
    flat = pack(scene, field);

    const double loss = br.loss.total;
    if (!std::isfinite(loss)) throw DivergenceError("non-finite loss at iteration " + std::to_string(it));
    if (it == 1) initial_loss = loss;
    above = loss > 10.0 * initial_loss ? above + 1 : 0;
    if (above >= 100) {
      throw DivergenceError("loss above 10x its initial value (" + std::to_string(initial_loss) +
                            ") for 100 iterations, last " + std::to_string(loss) + " at iteration " +
                            std::to_string(it));
    }

    if (config.densify && it > config.densify_freeze_iters && it <= config.densify_until &&
        it % config.densify_interval == 0) {
      const std::size_t before = scene.size();
      const SourceMap source = densify_and_prune(scene, field, stats, config, extent, rng);
      remap_moments(state, source, stride);
      flat = pack(scene, field);
      stats.reset(scene.size());
      spdlog::debug("iteration {}: densify {} -> {} primitives", it, before, scene.size());
    }

    IterationLog row;
    row.iteration = it;
    row.loss = loss;
    row.primitives = scene.size();
    row.psnr_test = std::numeric_limits<double>::quiet_NaN();
    if (!dataset.test.empty() && (it % config.eval_interval == 0 || it == config.iterations)) {
      row.psnr_test = evaluate_frames(dataset, dataset.test, scene, field, rcfg, false).psnr;
      spdlog::info("iteration {}: loss {:.6f} test psnr {:.3f} dB, {} primitives", it, loss, row.psnr_test,
                   scene.size());
    }
    result.log.push_back(row);

    if (hooks.on_checkpoint && (it % config.checkpoint_interval == 0 || it == config.iterations)) {
      hooks.on_checkpoint(it, scene, field);
    }
  }
  result.scene = std::move(scene);
  result.field = std::move(field);
  return result;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, const TrainHooks& hooks) {
  if (dataset.frames.empty()) throw DatasetError("dataset", "no frames");
  InitOptions init = config.init;
  init.sh_degree = config.sh_degree;
  init.anchor_count = config.anchors;
  const FrameSample& first = dataset.frames.front();
  GaussianScene scene = init_from_depth(first, dataset.camera_of(first), init);
  DeformationField field = make_deformation_field(config.deformation, scene.size());
  return train(dataset, std::move(scene), std::move(field), config, hooks);
}

}  // namespace colorgs

#include "colorgs/cli.hpp"

#include "colorgs/dataset.hpp"
#include "colorgs/errors.hpp"
#include "colorgs/gradients.hpp"
#include "colorgs/image_io.hpp"
#include "colorgs/scene_io.hpp"
#include "colorgs/synthetic.hpp"
#include "colorgs/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace colorgs::cli {

namespace {

constexpr const char* kEngine = "colorgs";

void setup_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_logger_mt("colorgs");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    return true;
  }();
  (void)once;
  const char* env = std::getenv("COLORGS_LOG");
  spdlog::set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::info);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(path.string(), "cannot open for writing");
  out << text;
}

void write_manifest(const fs::path& dir, const std::string& subcommand, std::uint64_t seed,
                    const json& options, const json& config = nullptr) {
  fs::create_directories(dir);
  json m = {{"engine", kEngine},
            {"version", COLORGS_VERSION_STRING},
            {"subcommand", subcommand},
            {"seed", seed},
            {"options", options}};
  if (!config.is_null()) m["config"] = config;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

void save_model(const fs::path& dir, const GaussianScene& scene, const DeformationField& field) {
  fs::create_directories(dir);
  save_scene_ply(dir / "scene.ply", scene);
  save_deformation(dir / "deformation.bin", field);
}

struct Model {
  GaussianScene scene;
  DeformationField field;
  RenderConfig render;
};

Model load_model(const fs::path& dir, int workers) {
  if (!fs::is_directory(dir)) throw DatasetError(dir.string(), "model directory not found");
  Model m;
  m.scene = load_scene_ply(dir / "scene.ply");
  m.field = load_deformation(dir / "deformation.bin");
  if (m.field.size() != m.scene.size()) {
    throw DatasetError((dir / "deformation.bin").string(), "primitive count differs from scene.ply");
  }
  TrainConfig cfg;
  cfg.anchors = m.scene.anchor_count;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DatasetError(manifest.string(), e.what());
    }
    if (j.contains("config")) cfg = train_config_from_json(j.at("config").dump());
  }
  m.render = render_config(cfg);
  m.render.color.k = m.scene.anchor_count;
  m.render.workers = workers;
  return m;
}

std::vector<int> split_indices(const Dataset& ds, const std::string& split) {
  if (split == "test") return ds.test;
  if (split == "train") return ds.train;
  std::vector<int> all;
  for (const auto& f : ds.frames) all.push_back(f.index);
  return all;
}

// --- synth -------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string motion = "static";
  SyntheticSpec spec;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticSpec spec = a.spec;
  spec.motion = parse_motion(a.motion);
  const SyntheticScene syn = generate_synthetic(spec);
  save_synthetic(a.out, syn);
  write_manifest(a.out, "synth", spec.seed,
                 {{"out", a.out},
                  {"motion", a.motion},
                  {"frames", spec.frames},
                  {"gaussians", spec.gaussians},
                  {"width", spec.width},
                  {"height", spec.height},
                  {"shift", spec.shift},
                  {"anchors", spec.anchors}});
  out << "wrote " << syn.dataset.frames.size() << " frames (" << syn.dataset.train.size() << " train, "
      << syn.dataset.test.size() << " test) to " << a.out << "\n";
  return kExitOk;
}

// --- train -------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::optional<int> iterations;
  std::optional<std::string> backend;
  std::optional<int> anchors;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> loss;
  bool no_densify = false;
};

int run_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.backend) cfg.deformation.backend = parse_backend(*a.backend);
  if (a.anchors) cfg.anchors = *a.anchors;
  if (a.workers) cfg.workers = *a.workers;
  if (a.seed) cfg.seed = *a.seed;
  if (a.loss) cfg.loss_norm = parse_loss_norm(*a.loss);
  if (a.no_densify) cfg.densify = false;
  cfg.validate();

  const Dataset ds = load_dataset(a.data);
  const fs::path out_dir = a.out;
  write_manifest(out_dir, "train", cfg.seed,
                 {{"data", a.data}, {"out", a.out}, {"config", a.config}},
                 json::parse(to_json(cfg)));

  TrainHooks hooks;
  hooks.on_checkpoint = [&](int it, const GaussianScene& scene, const DeformationField& field) {
    char name[32];
    std::snprintf(name, sizeof(name), "iter_%06d", it);
    save_model(out_dir / "checkpoints" / name, scene, field);
  };
  const TrainResult result = train(ds, cfg, hooks);
  save_model(out_dir, result.scene, result.field);

  std::ostringstream csv;
  csv << "iteration,loss,psnr_test\n";
  for (const IterationLog& row : result.log) {
    csv << row.iteration << ',' << fmt_double(row.loss) << ',' << fmt_double(row.psnr_test) << '\n';
  }
  write_text(out_dir / "metrics.csv", csv.str());

  out << "trained " << cfg.iterations << " iterations, " << result.scene.size() << " primitives";
  if (!result.log.empty() && !std::isnan(result.log.back().psnr_test)) {
    out << ", test psnr " << std::fixed << std::setprecision(3) << result.log.back().psnr_test << " dB";
  }
  out << "\n";
  return kExitOk;
}

// --- render ------------------------------------------------------------

struct RenderArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string split = "all";
  int workers = 1;
};

int run_render(const RenderArgs& a, std::ostream& out) {
  const Model m = load_model(a.model, a.workers);
  const Dataset ds = load_dataset(a.data);
  const fs::path dir = a.out;
  write_manifest(dir, "render", 0,
                 {{"model", a.model}, {"data", a.data}, {"out", a.out}, {"split", a.split}, {"workers", a.workers}});
  const std::vector<int> frames = split_indices(ds, a.split);
  for (int idx : frames) {
    const FrameSample& f = ds.frames[static_cast<std::size_t>(idx)];
    const RenderOutput r = render(deform_scene(m.scene, m.field, f.time), ds.camera_of(f), m.render);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "%06d", f.index);
    write_color(dir / (std::string(stem) + "_color.png"), r.color);
    write_pfm(dir / (std::string(stem) + "_depth.pfm"), r.depth);
  }
  out << "rendered " << frames.size() << " frames to " << a.out << "\n";
  return kExitOk;
}

// --- eval --------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string split = "test";
  int workers = 1;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const Model m = load_model(a.model, a.workers);
  const Dataset ds = load_dataset(a.data);
  const std::vector<int> frames = split_indices(ds, a.split);
  if (frames.empty()) throw DatasetError(a.data, "split '" + a.split + "' has no frames");
  const MetricReport report = evaluate_frames(ds, frames, m.scene, m.field, m.render, true);

  std::ostringstream csv;
  csv << std::fixed << std::setprecision(6) << "frame,psnr,ssim\n";
  for (const FrameMetric& f : report.frames) csv << f.frame << ',' << f.psnr << ',' << f.ssim << '\n';
  csv << "mean," << report.psnr << ',' << report.ssim << '\n';
  out << csv.str();

  const fs::path dir = a.out.empty() ? fs::path(a.model) / "eval" : fs::path(a.out);
  write_manifest(dir, "eval", 0,
                 {{"model", a.model}, {"data", a.data}, {"split", a.split}, {"workers", a.workers}});
  write_text(dir / "eval.csv", csv.str());
  return kExitOk;
}

// --- gradcheck ---------------------------------------------------------

struct GradArgs {
  GradCheckOptions options;
  std::string backend = "edm";
};

int run_gradcheck(const GradArgs& a, std::ostream& out, std::ostream& err) {
  GradCheckOptions opt = a.options;
  opt.backend = parse_backend(a.backend);
  const GradCheckReport report = run_gradient_check(opt);
  out << "class,checked,skipped,max_rel_error,status\n";
  for (const GradCheckRow& row : report.rows) {
    out << to_string(row.cls) << ',' << row.checked << ',' << row.skipped << ',' << std::scientific
        << std::setprecision(3) << row.max_rel_error << std::defaultfloat << ','
        << (row.passed ? "ok" : "FAIL") << '\n';
  }
  if (!report.passed) {
    err << json{{"error", "gradcheck"}, {"message", "analytic and numeric gradients disagree"}, {"seed", opt.seed}}.dump()
        << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message,
                const std::string& path = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (!path.empty()) j["path"] = path;
  err << j.dump() << '\n';
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Colored Gaussian splatting for deformable scenes", kEngine};
  app.require_subcommand(1);
  app.set_version_flag("--version", COLORGS_VERSION_STRING);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
  s->add_option("--out", synth.out, "Output dataset directory")->required();
  s->add_option("--motion", synth.motion, "static | global_shift | periodic | composite")
      ->check(CLI::IsMember({"static", "global_shift", "periodic", "composite"}));
  s->add_option("--frames", synth.spec.frames)->check(CLI::PositiveNumber);
  s->add_option("--gaussians", synth.spec.gaussians)->check(CLI::PositiveNumber);
  s->add_option("--width", synth.spec.width)->check(CLI::PositiveNumber);
  s->add_option("--height", synth.spec.height)->check(CLI::PositiveNumber);
  s->add_option("--shift", synth.spec.shift, "World-x offset for global_shift");
  s->add_option("--anchors", synth.spec.anchors)->check(CLI::NonNegativeNumber);
  s->add_option("--seed", synth.spec.seed);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit a model to a dataset");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--config", tr.config, "JSON training config");
  t->add_option("--iterations", tr.iterations)->check(CLI::NonNegativeNumber);
  t->add_option("--deform-backend", tr.backend, "edm | gs | fps")->check(CLI::IsMember({"edm", "gs", "fps"}));
  t->add_option("--anchors", tr.anchors, "Anchors per primitive, 0 disables")->check(CLI::NonNegativeNumber);
  t->add_option("--workers", tr.workers)->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.seed);
  t->add_option("--loss", tr.loss, "l1 | l2")->check(CLI::IsMember({"l1", "l2"}));
  t->add_flag("--no-densify", tr.no_densify, "Keep the primitive count fixed");

  RenderArgs rd;
  auto* r = app.add_subcommand("render", "Render every frame time of a dataset with a trained model");
  r->add_option("--model", rd.model, "Run directory")->required();
  r->add_option("--data", rd.data, "Dataset directory")->required();
  r->add_option("--out", rd.out, "Output directory")->required();
  r->add_option("--split", rd.split)->check(CLI::IsMember({"all", "train", "test"}));
  r->add_option("--workers", rd.workers)->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Masked PSNR / SSIM of a trained model");
  e->add_option("--model", ev.model, "Run directory")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--out", ev.out, "Output directory (default <model>/eval)");
  e->add_option("--split", ev.split)->check(CLI::IsMember({"all", "train", "test"}));
  e->add_option("--workers", ev.workers)->check(CLI::PositiveNumber);

  GradArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  g->add_option("--seed", gc.options.seed);
  g->add_option("--backend", gc.backend)->check(CLI::IsMember({"edm", "gs", "fps"}));
  g->add_option("--gaussians", gc.options.num_gaussians)->check(CLI::PositiveNumber);
  g->add_option("--size", gc.options.image_size)->check(CLI::PositiveNumber);
  g->add_option("--anchors", gc.options.anchors)->check(CLI::NonNegativeNumber);
  g->add_option("--bases", gc.options.bases)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << COLORGS_VERSION_STRING << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    emit_error(err, "usage", ex.what());
    return kExitValidation;
  }

  try {
    if (s->parsed()) return run_synth(synth, out);
    if (t->parsed()) return run_train(tr, out);
    if (r->parsed()) return run_render(rd, out);
    if (e->parsed()) return run_eval(ev, out);
    if (g->parsed()) return run_gradcheck(gc, out, err);
  } catch (const DatasetError& ex) {
    emit_error(err, "dataset", ex.what(), ex.path());
    return kExitValidation;
  } catch (const ConfigurationError& ex) {
    emit_error(err, "configuration", ex.what());
    return kExitValidation;
  } catch (const DivergenceError& ex) {
    emit_error(err, "divergence", ex.what());
    return kExitRuntime;
  } catch (const std::exception& ex) {
    emit_error(err, "runtime", ex.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

int dispatch(const std::vector<std::string>& args) { return dispatch(args, std::cout, std::cerr); }

}  // namespace colorgs::cli

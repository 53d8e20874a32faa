#include "colorgs/errors.hpp"
#include "colorgs/trainer.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

using nlohmann::json;

namespace colorgs {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigurationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (known.count(key) == 0) throw ConfigurationError("unknown config key '" + where + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json lr_json(const LearningRates& lr) {
  return {{"center", lr.center},       {"center_final", lr.center_final}, {"rotation", lr.rotation},
          {"scale", lr.scale},         {"opacity", lr.opacity},           {"sh", lr.sh},
          {"anchor", lr.anchor},       {"deformation", lr.deformation},
          {"deformation_final", lr.deformation_final}};
}

}  // namespace

std::string to_json(const TrainConfig& c) {
  const json j = {
      {"iterations", c.iterations},
      {"lr", lr_json(c.lr)},
      {"densify", c.densify},
      {"densify_freeze_iters", c.densify_freeze_iters},
      {"densify_until", c.densify_until},
      {"densify_interval", c.densify_interval},
      {"grad_threshold", c.grad_threshold},
      {"opacity_prune_threshold", c.opacity_prune_threshold},
      {"scale_split_threshold", c.scale_split_threshold},
      {"max_primitives", c.max_primitives},
      {"loss_norm", std::string(to_string(c.loss_norm))},
      {"omega_l2", c.omega_l2},
      {"train_canonical", c.train_canonical},
      {"deformation",
       {{"backend", std::string(to_string(c.deformation.backend))},
        {"num_bases", c.deformation.num_bases},
        {"fourier_terms", c.deformation.fourier_terms},
        {"poly_degree", c.deformation.poly_degree}}},
      {"anchors", c.anchors},
      {"lambda_e", c.lambda_e},
      {"sh_degree", c.sh_degree},
      {"init",
       {{"stride", c.init.stride}, {"scale_multiplier", c.init.scale_multiplier}, {"opacity", c.init.opacity}}},
      {"eval_interval", c.eval_interval},
      {"checkpoint_interval", c.checkpoint_interval},
      {"workers", c.workers},
      {"seed", c.seed},
  };
  return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"iterations", "lr", "densify", "densify_freeze_iters", "densify_until",
                    "densify_interval", "grad_threshold", "opacity_prune_threshold",
                    "scale_split_threshold", "max_primitives", "loss_norm", "omega_l2",
                    "train_canonical", "deformation", "anchors", "lambda_e", "sh_degree", "init",
                    "eval_interval", "checkpoint_interval", "workers", "seed"},
                   "");
    read(j, "iterations", c.iterations);
    if (j.contains("lr")) {
      const json& l = j.at("lr");
      reject_unknown(l, {"center", "center_final", "rotation", "scale", "opacity", "sh", "anchor",
                         "deformation", "deformation_final"},
                     "lr.");
      read(l, "center", c.lr.center);
      read(l, "center_final", c.lr.center_final);
      read(l, "rotation", c.lr.rotation);
      read(l, "scale", c.lr.scale);
      read(l, "opacity", c.lr.opacity);
      read(l, "sh", c.lr.sh);
      read(l, "anchor", c.lr.anchor);
      read(l, "deformation", c.lr.deformation);
      read(l, "deformation_final", c.lr.deformation_final);
    }
    read(j, "densify", c.densify);
    read(j, "densify_freeze_iters", c.densify_freeze_iters);
    read(j, "densify_until", c.densify_until);
    read(j, "densify_interval", c.densify_interval);
    read(j, "grad_threshold", c.grad_threshold);
    read(j, "opacity_prune_threshold", c.opacity_prune_threshold);
    read(j, "scale_split_threshold", c.scale_split_threshold);
    read(j, "max_primitives", c.max_primitives);
    if (j.contains("loss_norm")) c.loss_norm = parse_loss_norm(j.at("loss_norm").get<std::string>());
    read(j, "omega_l2", c.omega_l2);
    read(j, "train_canonical", c.train_canonical);
    if (j.contains("deformation")) {
      const json& d = j.at("deformation");
      reject_unknown(d, {"backend", "num_bases", "fourier_terms", "poly_degree"}, "deformation.");
      if (d.contains("backend")) c.deformation.backend = parse_backend(d.at("backend").get<std::string>());
      read(d, "num_bases", c.deformation.num_bases);
      read(d, "fourier_terms", c.deformation.fourier_terms);
      read(d, "poly_degree", c.deformation.poly_degree);
    }
    read(j, "anchors", c.anchors);
    read(j, "lambda_e", c.lambda_e);
    read(j, "sh_degree", c.sh_degree);
    if (j.contains("init")) {
      const json& i = j.at("init");
      reject_unknown(i, {"stride", "scale_multiplier", "opacity"}, "init.");
      read(i, "stride", c.init.stride);
      read(i, "scale_multiplier", c.init.scale_multiplier);
      read(i, "opacity", c.init.opacity);
    }
    read(j, "eval_interval", c.eval_interval);
    read(j, "checkpoint_interval", c.checkpoint_interval);
    read(j, "workers", c.workers);
    read(j, "seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path.string(), "missing config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return train_config_from_json(ss.str());
}

}  // namespace colorgs

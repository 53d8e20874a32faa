#include "colorgs/scene_io.hpp"

#include "colorgs/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace colorgs {

namespace {

static_assert(std::endian::native == std::endian::little,
              "scene files are written in native order, which must be little-endian");

std::vector<std::string> property_names(int sh_degree, int anchor_count) {
  std::vector<std::string> names = {"x", "y", "z", "rot_0", "rot_1", "rot_2", "rot_3",
                                    "log_scale_0", "log_scale_1", "log_scale_2", "opacity_logit",
                                    "f_dc_0", "f_dc_1", "f_dc_2"};
  const int rest = sh_coeff_count(sh_degree) - 1;
  for (int i = 0; i < 3 * rest; ++i) names.push_back("f_rest_" + std::to_string(i));
  for (int a = 0; a < anchor_count; ++a) {
    for (const char* s : {"dx", "dy", "r", "g", "b"}) {
      names.push_back("anchor_" + std::to_string(a) + "_" + s);
    }
  }
  return names;
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, std::size_t count, const fs::path& path) {
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
    throw DatasetError(path.string(), "truncated payload");
  }
  return values;
}

template <class Motion, class Fn>
void visit_motion(Motion& motion, DeformBackend backend, Fn&& fn) {
  for (auto& ch : motion) {
    if (backend == DeformBackend::fps) {
      for (auto& v : ch.series.cos_coeffs) fn(v);
      for (auto& v : ch.series.sin_coeffs) fn(v);
      for (auto& v : ch.series.poly_coeffs) fn(v);
    } else {
      for (auto& v : ch.basis.weights) fn(v);
      for (auto& v : ch.basis.centers) fn(v);
      for (auto& v : ch.basis.log_widths) fn(v);
      fn(ch.delta);
    }
  }
}

}  // namespace

void save_scene_ply(const fs::path& path, const GaussianScene& scene) {
  scene.validate_shape();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(path.string(), "cannot open for writing");
  const auto names = property_names(scene.sh_degree, scene.anchor_count);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "comment sh_degree " << scene.sh_degree << "\n"
      << "comment anchor_count " << scene.anchor_count << "\n"
      << "element vertex " << scene.size() << "\n";
  for (const auto& n : names) out << "property double " << n << "\n";
  out << "end_header\n";

  std::vector<double> row;
  row.reserve(names.size());
  const std::size_t nsh = static_cast<std::size_t>(sh_coeff_count(scene.sh_degree));
  for (const GaussianPrimitive& p : scene.primitives) {
    row.clear();
    for (int i = 0; i < 3; ++i) row.push_back(p.center[i]);
    for (int i = 0; i < 4; ++i) row.push_back(p.rotation[i]);
    for (int i = 0; i < 3; ++i) row.push_back(p.log_scale[i]);
    row.push_back(p.opacity_logit);
    for (int c = 0; c < 3; ++c) row.push_back(p.sh[0][c]);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 1; k < nsh; ++k) row.push_back(p.sh[k][c]);
    }
    for (const AnchorSpec& a : p.anchors) {
      row.push_back(a.offset.x());
      row.push_back(a.offset.y());
      for (int c = 0; c < 3; ++c) row.push_back(a.color[c]);
    }
    write_doubles(out, row);
  }
}

GaussianScene load_scene_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(path.string(), "missing file");
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw DatasetError(path.string(), "not a PLY file");

  GaussianScene scene;
  std::size_t count = 0;
  std::vector<std::string> props;
  bool little_endian = false;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      little_endian = fmt == "binary_little_endian";
    } else if (word == "comment") {
      std::string key;
      ls >> key;
      if (key == "sh_degree") ls >> scene.sh_degree;
      if (key == "anchor_count") ls >> scene.anchor_count;
    } else if (word == "element") {
      std::string kind;
      ls >> kind >> count;
      if (kind != "vertex") throw DatasetError(path.string(), "unexpected element '" + kind + "'");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      if (type != "double") throw DatasetError(path.string(), "property '" + name + "' is not double");
      props.push_back(name);
    }
  }
  if (line != "end_header") throw DatasetError(path.string(), "missing end_header");
  if (!little_endian) throw DatasetError(path.string(), "expected binary_little_endian PLY");
  if (scene.sh_degree < 0 || scene.sh_degree > kMaxShDegree || scene.anchor_count < 0) {
    throw DatasetError(path.string(), "bad sh_degree or anchor_count comment");
  }
  if (props != property_names(scene.sh_degree, scene.anchor_count)) {
    throw DatasetError(path.string(), "property layout does not match sh_degree/anchor_count");
  }

  const std::vector<double> data = read_doubles(in, count * props.size(), path);
  const std::size_t nsh = static_cast<std::size_t>(sh_coeff_count(scene.sh_degree));
  std::size_t k = 0;
  scene.primitives.resize(count);
  for (GaussianPrimitive& p : scene.primitives) {
    for (int i = 0; i < 3; ++i) p.center[i] = data[k++];
    for (int i = 0; i < 4; ++i) p.rotation[i] = data[k++];
    for (int i = 0; i < 3; ++i) p.log_scale[i] = data[k++];
    p.opacity_logit = data[k++];
    p.sh.assign(nsh, Vec3::Zero());
    for (int c = 0; c < 3; ++c) p.sh[0][c] = data[k++];
    for (int c = 0; c < 3; ++c) {
      for (std::size_t s = 1; s < nsh; ++s) p.sh[s][c] = data[k++];
    }
    p.anchors.resize(static_cast<std::size_t>(scene.anchor_count));
    for (AnchorSpec& a : p.anchors) {
      a.offset.x() = data[k++];
      a.offset.y() = data[k++];
      for (int c = 0; c < 3; ++c) a.color[c] = data[k++];
    }
  }
  return scene;
}

void save_deformation(const fs::path& path, const DeformationField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(path.string(), "cannot open for writing");
  const json header = {{"backend", std::string(to_string(field.config.backend))},
                       {"num_bases", field.config.num_bases},
                       {"fourier_terms", field.config.fourier_terms},
                       {"poly_degree", field.config.poly_degree},
                       {"channels", kDeformChannels},
                       {"count", field.size()}};
  out << header.dump() << '\n';
  std::vector<double> values;
  for (const PrimitiveMotion& m : field.motions) {
    visit_motion(m, field.config.backend, [&](const double& v) { values.push_back(v); });
  }
  write_doubles(out, values);
}

DeformationField load_deformation(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(path.string(), "missing file");
  std::string line;
  std::getline(in, line);
  DeformationConfig config;
  std::size_t count = 0;
  try {
    const json header = json::parse(line);
    config.backend = parse_backend(header.at("backend").get<std::string>());
    config.num_bases = header.at("num_bases").get<int>();
    config.fourier_terms = header.at("fourier_terms").get<int>();
    config.poly_degree = header.at("poly_degree").get<int>();
    if (header.at("channels").get<int>() != kDeformChannels) {
      throw DatasetError(path.string(), "unexpected channel count");
    }
    count = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DatasetError(path.string(), std::string("bad header: ") + e.what());
  } catch (const ConfigurationError& e) {
    throw DatasetError(path.string(), e.what());
  }
  config.validate();
  DeformationField field = make_deformation_field(config, count);
  std::size_t per = 0;
  if (count > 0) visit_motion(field.motions[0], config.backend, [&](double&) { ++per; });
  const std::vector<double> data = read_doubles(in, per * count, path);
  std::size_t k = 0;
  for (PrimitiveMotion& m : field.motions) {
    visit_motion(m, config.backend, [&](double& v) { v = data[k++]; });
  }
  return field;
}

}  // namespace colorgs

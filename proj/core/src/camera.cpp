#include "colorgs/camera.hpp"

#include "colorgs/errors.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <fstream>

namespace colorgs {

using nlohmann::json;

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigurationError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ConfigurationError("camera dimensions must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw ConfigurationError("camera principal point must lie inside the image");
  }
  const double err = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-6) || !(rotation.determinant() > 0.0)) {
    throw ConfigurationError("camera world_to_camera rotation is not orthonormal");
  }
  if (!translation.allFinite()) throw ConfigurationError("camera translation is not finite");
}

Mat4 CameraModel::world_to_camera() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

CameraModel CameraModel::from_world_to_camera(const Mat4& w2c, double fx, double fy, double cx,
                                              double cy, int width, int height) {
  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.rotation = w2c.topLeftCorner<3, 3>();
  cam.translation = w2c.topRightCorner<3, 1>();
  return cam;
}

PointProjection project_point(const CameraModel& camera, const Vec3& x_world, double near) {
  const Vec3 p = camera.to_camera(x_world);
  PointProjection out;
  out.depth = p.z();
  if (!(p.z() > near)) {
    out.culled = true;
    return out;
  }
  out.pixel = Vec2(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
  return out;
}

Vec3 back_project(const CameraModel& camera, const Vec2& pixel, double depth) {
  const Vec3 p((pixel.x() - camera.cx) / camera.fx * depth, (pixel.y() - camera.cy) / camera.fy * depth,
               depth);
  return camera.rotation.transpose() * (p - camera.translation);
}

Mat23 projection_jacobian(const CameraModel& camera, const Vec3& p) {
  const double iz = 1.0 / p.z();
  Mat23 j;
  j << camera.fx * iz, 0.0, -camera.fx * p.x() * iz * iz,
      0.0, camera.fy * iz, -camera.fy * p.y() * iz * iz;
  return j;
}

Mat2 project_covariance(const CameraModel& camera, const Vec3& mean_world, const Mat3& cov_world,
                        double dilation) {
  const Mat23 t = projection_jacobian(camera, camera.to_camera(mean_world)) * camera.rotation;
  return t * cov_world * t.transpose() + dilation * Mat2::Identity();
}

namespace {

CameraModel camera_from_json(const json& j, const std::filesystem::path& path) {
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height", "w2c"}) {
    if (!j.contains(key)) throw DatasetError(path.string(), std::string("camera is missing key '") + key + "'");
  }
  const auto& rows = j.at("w2c");
  Mat4 w2c;
  if (rows.size() == 16) {
    for (int i = 0; i < 16; ++i) w2c(i / 4, i % 4) = rows.at(static_cast<std::size_t>(i)).get<double>();
  } else if (rows.size() == 4) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        w2c(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
      }
    }
  } else {
    throw DatasetError(path.string(), "w2c must be a row-major 4x4 matrix");
  }
  CameraModel cam = CameraModel::from_world_to_camera(
      w2c, j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
      j.at("cy").get<double>(), j.at("width").get<int>(), j.at("height").get<int>());
  try {
    cam.validate();
  } catch (const ConfigurationError& e) {
    throw DatasetError(path.string(), e.what());
  }
  return cam;
}

json camera_to_json(const CameraModel& cam) {
  json rows = json::array();
  const Mat4 w2c = cam.world_to_camera();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(w2c(r, c));
    rows.push_back(row);
  }
  return json{{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},         {"cy", cam.cy},
              {"width", cam.width}, {"height", cam.height}, {"w2c", rows}};
}

}  // namespace

std::vector<CameraModel> load_cameras(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path.string(), "cannot open cameras file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DatasetError(path.string(), std::string("malformed cameras JSON (") + e.what() + ")");
  }
  std::vector<CameraModel> cams;
  try {
    if (j.is_array()) {
      for (const auto& item : j) cams.push_back(camera_from_json(item, path));
    } else {
      cams.push_back(camera_from_json(j, path));
    }
  } catch (const json::exception& e) {
    throw DatasetError(path.string(), std::string("bad camera entry (") + e.what() + ")");
  }
  if (cams.empty()) throw DatasetError(path.string(), "no cameras defined");
  return cams;
}

void save_cameras(const std::filesystem::path& path, const std::vector<CameraModel>& cameras) {
  json j;
  if (cameras.size() == 1) {
    j = camera_to_json(cameras.front());
  } else {
    j = json::array();
    for (const auto& c : cameras) j.push_back(camera_to_json(c));
  }
  std::ofstream out(path);
  if (!out) throw DatasetError(path.string(), "cannot write cameras file");
  out << j.dump(2) << '\n';
}

}  // namespace colorgs

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace colorgs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Dense row-major image of doubles with interleaved channels.
///
/// Used for color (3 channels), depth (1), masks (1) and transmittance (1).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  [[nodiscard]] std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
  double& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  [[nodiscard]] double at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  [[nodiscard]] std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] bool empty() const { return data.empty(); }
  [[nodiscard]] bool same_shape(const Image& other) const {
    return width == other.width && height == other.height;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Returns a copy with every value clamped to [lo, hi].
Image clamped(const Image& image, double lo, double hi);

}  // namespace colorgs

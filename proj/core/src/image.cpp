#include "colorgs/common.hpp"

#include <algorithm>

namespace colorgs {

Image::Image(int width_, int height_, int channels_, double fill)
    : width(width_), height(height_), channels(channels_),
      data(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) *
               static_cast<std::size_t>(channels_),
           fill) {}

Image clamped(const Image& image, double lo, double hi) {
  Image out = image;
  for (double& v : out.data) v = std::clamp(v, lo, hi);
  return out;
}

}  // namespace colorgs

#pragma once

#include "colorgs/common.hpp"

namespace colorgs {

/// One timestamped observation. Mask is 1 on tissue, 0 on tools.
struct FrameSample {
  Image color;  ///< H x W x 3, values in [0, 1]
  Image depth;  ///< H x W, world units
  Image mask;   ///< H x W, values in {0, 1}
  double time = 0.0;
  int camera_index = 0;
  int index = 0;

  /// Number of pixels with mask = 1.
  [[nodiscard]] std::size_t masked_count() const;

  friend bool operator==(const FrameSample&, const FrameSample&) = default;
};

}  // namespace colorgs

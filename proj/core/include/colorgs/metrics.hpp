#pragma once

#include "colorgs/common.hpp"

#include <vector>

namespace colorgs {

inline constexpr double kPsnrCap = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// 10 log10(1 / MSE) over masked pixels and all channels, capped at 99 dB.
/// Throws DatasetError on an empty mask.
double psnr(const Image& a, const Image& b, const Image& mask);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03 and unit dynamic range, averaged over channels and over every
/// window that lies fully inside the image and fully inside the mask.
/// Throws DatasetError when no such window exists.
double ssim(const Image& a, const Image& b, const Image& mask);

struct FrameMetric {
  int frame = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  double psnr = 0.0;  ///< mean over frames
  double ssim = 0.0;
  std::vector<FrameMetric> frames;
};

/// Means of the per-frame values.
MetricReport summarize(std::vector<FrameMetric> frames);

}  // namespace colorgs

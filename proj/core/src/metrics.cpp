#include "colorgs/metrics.hpp"

#include "colorgs/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace colorgs {

namespace {

void check_inputs(const Image& a, const Image& b, const Image& mask) {
  if (!a.same_shape(b) || a.channels != b.channels || !a.same_shape(mask)) {
    throw ConfigurationError("metric inputs have different dimensions");
  }
}

using Window = std::array<double, kSsimWindow * kSsimWindow>;

Window gaussian_window() {
  std::array<double, kSsimWindow> g{};
  double sum = 0.0;
  constexpr int half = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  Window w{};
  for (int y = 0; y < kSsimWindow; ++y) {
    for (int x = 0; x < kSsimWindow; ++x) {
      w[static_cast<std::size_t>(y * kSsimWindow + x)] =
          g[static_cast<std::size_t>(y)] * g[static_cast<std::size_t>(x)] / (sum * sum);
    }
  }
  return w;
}

}  // namespace

double psnr(const Image& a, const Image& b, const Image& mask) {
  check_inputs(a, b, mask);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (mask.at(x, y) == 0.0) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        sum += d * d;
        ++count;
      }
    }
  }
  if (count == 0) throw DatasetError("mask", "empty mask");
  const double mse = sum / static_cast<double>(count);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const Image& mask) {
  check_inputs(a, b, mask);
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    throw DatasetError("image", "image smaller than the 11x11 SSIM window");
  }
  static const Window w = gaussian_window();
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;

  // Running count of masked-out pixels for O(1) window validity.
  const int W = a.width;
  const int H = a.height;
  std::vector<int> holes(static_cast<std::size_t>((W + 1) * (H + 1)), 0);
  auto at = [&](int x, int y) -> int& { return holes[static_cast<std::size_t>(y * (W + 1) + x)]; };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      at(x + 1, y + 1) = (mask.at(x, y) == 0.0 ? 1 : 0) + at(x, y + 1) + at(x + 1, y) - at(x, y);
    }
  }

  double total = 0.0;
  std::size_t windows = 0;
  for (int y0 = 0; y0 + kSsimWindow <= H; ++y0) {
    for (int x0 = 0; x0 + kSsimWindow <= W; ++x0) {
      const int x1 = x0 + kSsimWindow;
      const int y1 = y0 + kSsimWindow;
      if (at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0) != 0) continue;
      double per_window = 0.0;
      for (int c = 0; c < a.channels; ++c) {
        double ma = 0.0, mb = 0.0;
        for (int dy = 0; dy < kSsimWindow; ++dy) {
          for (int dx = 0; dx < kSsimWindow; ++dx) {
            const double wt = w[static_cast<std::size_t>(dy * kSsimWindow + dx)];
            ma += wt * a.at(x0 + dx, y0 + dy, c);
            mb += wt * b.at(x0 + dx, y0 + dy, c);
          }
        }
        // Variances and covariance all go through the same centered product,
        // so identical inputs give sab == saa == sbb bit for bit.
        double saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int dy = 0; dy < kSsimWindow; ++dy) {
          for (int dx = 0; dx < kSsimWindow; ++dx) {
            const double wt = w[static_cast<std::size_t>(dy * kSsimWindow + dx)];
            const double da = a.at(x0 + dx, y0 + dy, c) - ma;
            const double db = b.at(x0 + dx, y0 + dy, c) - mb;
            saa += wt * (da * da);
            sbb += wt * (db * db);
            sab += wt * (da * db);
          }
        }
        per_window += ((2.0 * ma * mb + c1) * (2.0 * sab + c2)) /
                      ((ma * ma + mb * mb + c1) * (saa + sbb + c2));
      }
      total += per_window / static_cast<double>(a.channels);
      ++windows;
    }
  }
  if (windows == 0) throw DatasetError("mask", "no SSIM window lies fully inside the mask");
  return total / static_cast<double>(windows);
}

MetricReport summarize(std::vector<FrameMetric> frames) {
  MetricReport report;
  for (const auto& f : frames) {
    report.psnr += f.psnr;
    report.ssim += f.ssim;
  }
  if (!frames.empty()) {
    report.psnr /= static_cast<double>(frames.size());
    report.ssim /= static_cast<double>(frames.size());
  }
  report.frames = std::move(frames);
  return report;
}

}  // namespace colorgs

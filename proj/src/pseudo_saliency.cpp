#include <algorithm>
#include <cmath>

#include "mammosynth/error.hpp"
#include "mammosynth/region_selection.hpp"

namespace mammosynth {
namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int half = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * half + 1);
  double total = 0.0;
  for (int t = -half; t <= half; ++t) {
    k[t + half] = std::exp(-(t * t) / (2.0 * sigma * sigma));
    total += k[t + half];
  }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace

SaliencyMap pseudo_saliency(const GrayImage& img, double blur_radius) {
  if (!(blur_radius >= 0.0) || !std::isfinite(blur_radius)) {
    throw Error(ErrorKind::invalid_argument, "blur radius must be a finite value >= 0");
  }
  const int h = img.height();
  const int w = img.width();
  std::vector<double> field(img.pixels().begin(), img.pixels().end());

  if (blur_radius > 0.0) {
    const auto kernel = gaussian_kernel(blur_radius);
    const int half = static_cast<int>(kernel.size() / 2);
    std::vector<double> tmp(field.size());
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t) {
          acc += kernel[t + half] * field[static_cast<std::size_t>(r) * w + std::clamp(c + t, 0, w - 1)];
        }
        tmp[static_cast<std::size_t>(r) * w + c] = acc;
      }
    }
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t) {
          acc += kernel[t + half] * tmp[static_cast<std::size_t>(std::clamp(r + t, 0, h - 1)) * w + c];
        }
        field[static_cast<std::size_t>(r) * w + c] = acc;
      }
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<float> out(field.size(), 0.0f);
  if (range > 0.0) {
    for (std::size_t k = 0; k < field.size(); ++k) {
      out[k] = static_cast<float>(std::clamp((field[k] - lo) / range, 0.0, 1.0));
    }
  }
  return SaliencyMap(h, w, std::move(out));
}

}  // namespace mammosynth

#include "mammosynth/soft_mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mammosynth/error.hpp"

namespace mammosynth {
namespace {

// Profiles are floored here so far tails stay strictly positive after the
// outer product instead of underflowing to zero.
constexpr double kProfileFloor = 1e-150;

}  // namespace

double uniform(Rng& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

SoftMaskParams sample_mask_params(int height, int width, Rng& rng, const MaskSampling& s) {
  if (height < 3 || width < 3) {
    throw Error(ErrorKind::invalid_argument, "soft mask needs a patch of at least 3x3, got " +
                                                 std::to_string(height) + "x" +
                                                 std::to_string(width));
  }
  if (!(0.0 <= s.center_lo && s.center_lo <= s.center_hi && s.center_hi < 1.0 &&
        0.0 < s.sigma_lo && s.sigma_lo <= s.sigma_hi)) {
    throw Error(ErrorKind::invalid_argument, "invalid soft mask sampling ranges");
  }
  SoftMaskParams p;
  p.height = height;
  p.width = width;
  p.mu_h = uniform(rng, s.center_lo * height, s.center_hi * height);
  p.mu_w = uniform(rng, s.center_lo * width, s.center_hi * width);
  const double extent = std::min(height, width);
  p.sigma = uniform(rng, s.sigma_lo * extent, s.sigma_hi * extent);
  return p;
}

SoftMaskParams centered_mask_params(int height, int width) {
  if (height < 3 || width < 3) {
    throw Error(ErrorKind::invalid_argument, "soft mask needs a patch of at least 3x3, got " +
                                                 std::to_string(height) + "x" +
                                                 std::to_string(width));
  }
  return {(height - 1) / 2.0, (width - 1) / 2.0, 0.25 * std::min(height, width), height, width};
}

SoftMask::SoftMask(int height, int width, std::vector<double> weights)
    : height_(height), width_(width), weights_(std::move(weights)) {
  if (height_ < 1 || width_ < 1 ||
      weights_.size() != static_cast<std::size_t>(height_) * width_) {
    throw Error(ErrorKind::invalid_argument, "soft mask weights do not match its dimensions");
  }
  for (double v : weights_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::invalid_argument, "soft mask weight outside [0,1]");
    }
  }
}

SoftMask SoftMask::constant(int height, int width, double value) {
  return SoftMask(height, width,
                  std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                          std::max(width, 0),
                                      value));
}

std::vector<double> gaussian_profile(int length, double mu, double sigma) {
  std::vector<double> out(length);
  for (int x = 0; x < length; ++x) {
    const double d = x - mu;
    out[x] = std::max(kProfileFloor, std::exp(-(d * d) / (2.0 * sigma * sigma)));
  }
  return out;
}

SoftMask gaussian_soft_mask(const SoftMaskParams& p) {
  if (p.height < 1 || p.width < 1 || !(p.sigma > 0.0) || !std::isfinite(p.sigma) ||
      !(p.mu_h >= 0.0 && p.mu_h < p.height) || !(p.mu_w >= 0.0 && p.mu_w < p.width)) {
    throw Error(ErrorKind::invalid_argument, "invalid soft mask parameters");
  }
  const auto rows = gaussian_profile(p.height, p.mu_h, p.sigma);
  const auto cols = gaussian_profile(p.width, p.mu_w, p.sigma);
  std::vector<double> weights(static_cast<std::size_t>(p.height) * p.width);
  for (int m = 0; m < p.height; ++m) {
    for (int n = 0; n < p.width; ++n) {
      weights[static_cast<std::size_t>(m) * p.width + n] = rows[m] * cols[n];
    }
  }
  return SoftMask(p.height, p.width, std::move(weights));
}

GrayImage blend(const GrayImage& source, const GrayImage& target, const SoftMask& mask) {
  if (source.height() != target.height() || source.width() != target.width() ||
      mask.height() != source.height() || mask.width() != source.width()) {
    throw Error(ErrorKind::invalid_argument, "blend inputs must share dimensions");
  }
  const auto s = source.pixels();
  const auto t = target.pixels();
  const auto& w = mask.weights();
  std::vector<float> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double mixed = w[k] * t[k] + (1.0 - w[k]) * s[k];
    out[k] = static_cast<float>(std::clamp<double>(mixed, std::min(s[k], t[k]), std::max(s[k], t[k])));
  }
  return GrayImage(source.height(), source.width(), std::move(out));
}

}  // namespace mammosynth

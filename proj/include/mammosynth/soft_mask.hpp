#pragma once

#include <random>
#include <vector>

#include "mammosynth/image.hpp"

namespace mammosynth {

/// The generator type threaded through every sampled decision. Its output
/// sequence is fixed by the standard, so seeded runs agree across platforms.
using Rng = std::mt19937_64;

/// Uniform draw in [lo, hi) built from the top 53 bits of one generator output.
double uniform(Rng& rng, double lo, double hi);

struct SoftMaskParams {
  double mu_h = 0.0;   // row of the peak, pixels
  double mu_w = 0.0;   // column of the peak, pixels
  double sigma = 1.0;  // shared spread, pixels
  int height = 1;
  int width = 1;

  bool operator==(const SoftMaskParams&) const = default;
};

/// Central-band sampling ranges, as fractions of the patch extent.
struct MaskSampling {
  double center_lo = 0.4;
  double center_hi = 0.6;
  double sigma_lo = 0.15;  // times min(height, width)
  double sigma_hi = 0.35;
};

/// Draws mu_h, mu_w, then sigma, in that order, from rng. Requires a patch of
/// at least 3x3.
SoftMaskParams sample_mask_params(int height, int width, Rng& rng,
                                  const MaskSampling& sampling = {});

/// Peak at the pixel-grid center, sigma = 0.25 * min(height, width).
SoftMaskParams centered_mask_params(int height, int width);

/// Per-pixel blend weights in [0, 1], row-major. Gaussian masks built by
/// gaussian_soft_mask are the outer product of a row and a column profile.
class SoftMask {
 public:
  SoftMask(int height, int width, std::vector<double> weights);

  int height() const { return height_; }
  int width() const { return width_; }

  double operator()(int m, int n) const {
    return weights_[static_cast<std::size_t>(m) * width_ + n];
  }
  const std::vector<double>& weights() const { return weights_; }

  static SoftMask constant(int height, int width, double value);

 private:
  int height_;
  int width_;
  std::vector<double> weights_;
};

/// One-dimensional profile exp(-(x - mu)^2 / (2 sigma^2)) at x = 0..length-1.
std::vector<double> gaussian_profile(int length, double mu, double sigma);

SoftMask gaussian_soft_mask(const SoftMaskParams& params);

/// Convex per-pixel mix: mask * target + (1 - mask) * source.
GrayImage blend(const GrayImage& source, const GrayImage& target, const SoftMask& mask);

}  // namespace mammosynth

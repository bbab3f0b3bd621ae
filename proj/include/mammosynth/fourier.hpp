#pragma once

#include <vector>

#include "mammosynth/image.hpp"

namespace mammosynth {

/// Polar form of a 2-D DFT in storage layout (DC at index (0, 0)).
/// Forward transform is unnormalized; phase lies in (-pi, pi] and is 0
/// wherever the amplitude is 0.
struct Spectrum {
  int height = 0;
  int width = 0;
  std::vector<double> amplitude;
  std::vector<double> phase;

  std::size_t index(int m, int n) const { return static_cast<std::size_t>(m) * width + n; }
};

/// Low-frequency selection window for amplitude transfer, in storage layout.
///
/// In the centered view the window spans rows within floor(beta * H) of DC and
/// columns within floor(beta * W) of DC, DC included. A disabled mask selects
/// nothing.
class BetaMask {
 public:
  static BetaMask disabled(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  double beta() const { return beta_; }
  bool enabled() const { return enabled_; }
  int half_height() const { return half_h_; }
  int half_width() const { return half_w_; }

  bool operator()(int m, int n) const {
    return cells_[static_cast<std::size_t>(m) * width_ + n] != 0;
  }
  std::size_t count() const;

 private:
  friend BetaMask make_beta_mask(int height, int width, double beta);
  BetaMask(int height, int width, double beta, bool enabled, int half_h, int half_w);

  int height_;
  int width_;
  double beta_;
  bool enabled_;
  int half_h_;
  int half_w_;
  std::vector<unsigned char> cells_;
};

/// beta must lie in [0, 0.5).
BetaMask make_beta_mask(int height, int width, double beta);

Spectrum forward_spectrum(const GrayImage& patch);

/// Inverse DFT with 1/(H*W) normalization, before clamping. Throws
/// ErrorKind::numeric when the imaginary residue exceeds
/// 1e-4 * max(1, max |real|), which means the spectrum was not Hermitian.
RealImage inverse_spectrum_unclamped(const Spectrum& spectrum);

/// inverse_spectrum_unclamped clamped into [0, 1].
GrayImage inverse_spectrum(const Spectrum& spectrum);

/// Keeps the source phase and replaces the source amplitude with the target
/// amplitude on the mask window. Result before clamping.
RealImage spectral_transfer_unclamped(const GrayImage& source, const GrayImage& target,
                                      const BetaMask& mask);

/// Source content rendered in the target's low-frequency style, clamped to [0, 1].
GrayImage spectral_transfer(const GrayImage& source, const GrayImage& target,
                            const BetaMask& mask);
GrayImage spectral_transfer(const GrayImage& source, const GrayImage& target, double beta);

}  // namespace mammosynth

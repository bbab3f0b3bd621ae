#include "mammosynth/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "mammosynth/error.hpp"

namespace mammosynth {
namespace {

using Complex = std::complex<double>;

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Transforms in place. Buffers come from fftw_malloc so every call sees the
// same alignment, which keeps the chosen codelets (and the rounding) stable.
void dft2d(std::vector<Complex>& data, int height, int width, int sign) {
  const std::size_t count = data.size();
  fftw_complex* buf = fftw_alloc_complex(count);
  if (buf == nullptr) throw Error(ErrorKind::numeric, "FFT buffer allocation failed");
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(height, width, buf, buf, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) {
    fftw_free(buf);
    throw Error(ErrorKind::numeric, "FFT planning failed");
  }
  std::copy(data.begin(), data.end(), reinterpret_cast<Complex*>(buf));
  fftw_execute(plan);
  std::copy_n(reinterpret_cast<const Complex*>(buf), count, data.begin());
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 0.5)) {
    throw Error(ErrorKind::invalid_argument,
                "beta must lie in [0, 0.5), got " + std::to_string(beta));
  }
}

// Distance of a storage index from DC along one axis of length n.
int wrap_distance(int k, int n) { return std::min(k, n - k); }

}  // namespace

BetaMask::BetaMask(int height, int width, double beta, bool enabled, int half_h, int half_w)
    : height_(height),
      width_(width),
      beta_(beta),
      enabled_(enabled),
      half_h_(half_h),
      half_w_(half_w),
      cells_(static_cast<std::size_t>(height) * width, 0) {
  if (!enabled_) return;
  for (int m = 0; m < height_; ++m) {
    if (wrap_distance(m, height_) > half_h_) continue;
    for (int n = 0; n < width_; ++n) {
      if (wrap_distance(n, width_) <= half_w_) {
        cells_[static_cast<std::size_t>(m) * width_ + n] = 1;
      }
    }
  }
}

BetaMask BetaMask::disabled(int height, int width) {
  if (height < 1 || width < 1) {
    throw Error(ErrorKind::invalid_argument, "mask dimensions must be positive");
  }
  return BetaMask(height, width, 0.0, false, 0, 0);
}

std::size_t BetaMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

BetaMask make_beta_mask(int height, int width, double beta) {
  check_beta(beta);
  if (height < 1 || width < 1) {
    throw Error(ErrorKind::invalid_argument, "mask dimensions must be positive");
  }
  const int half_h = static_cast<int>(std::floor(beta * height));
  const int half_w = static_cast<int>(std::floor(beta * width));
  return BetaMask(height, width, beta, true, half_h, half_w);
}

Spectrum forward_spectrum(const GrayImage& patch) {
  const int h = patch.height();
  const int w = patch.width();
  std::vector<Complex> data(patch.pixels().begin(), patch.pixels().end());
  dft2d(data, h, w, FFTW_FORWARD);

  // The input is real, so project onto exact conjugate symmetry. Rounding
  // noise would otherwise give near-zero bins unrelated phases on the two
  // sides, and an amplitude swap onto such bins would not invert to a real image.
  for (int m = 0; m < h; ++m) {
    for (int n = 0; n < w; ++n) {
      const std::size_t p = static_cast<std::size_t>(m) * w + n;
      const std::size_t q = static_cast<std::size_t>((h - m) % h) * w + (w - n) % w;
      if (p < q) {
        const Complex avg = 0.5 * (data[p] + std::conj(data[q]));
        data[p] = avg;
        data[q] = std::conj(avg);
      } else if (p == q) {
        data[p] = Complex(data[p].real(), 0.0);
      }
    }
  }

  Spectrum out{h, w, std::vector<double>(data.size()), std::vector<double>(data.size())};
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double amp = std::abs(data[k]);
    double ph = amp == 0.0 ? 0.0 : std::arg(data[k]);
    if (ph <= -std::numbers::pi) ph = std::numbers::pi;
    out.amplitude[k] = amp;
    out.phase[k] = ph;
  }
  return out;
}

RealImage inverse_spectrum_unclamped(const Spectrum& spectrum) {
  if (spectrum.height < 1 || spectrum.width < 1) {
    throw Error(ErrorKind::invalid_argument, "spectrum dimensions must be positive");
  }
  const std::size_t count = static_cast<std::size_t>(spectrum.height) * spectrum.width;
  if (spectrum.amplitude.size() != count || spectrum.phase.size() != count) {
    throw Error(ErrorKind::invalid_argument, "spectrum arrays do not match its dimensions");
  }
  std::vector<Complex> data(count);
  for (std::size_t k = 0; k < count; ++k) {
    data[k] = std::polar(spectrum.amplitude[k], spectrum.phase[k]);
  }
  dft2d(data, spectrum.height, spectrum.width, FFTW_BACKWARD);

  const double norm = 1.0 / static_cast<double>(count);
  RealImage out{spectrum.height, spectrum.width, std::vector<double>(count)};
  double max_real = 0.0;
  double max_imag = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    out.values[k] = data[k].real() * norm;
    max_real = std::max(max_real, std::abs(out.values[k]));
    max_imag = std::max(max_imag, std::abs(data[k].imag() * norm));
  }
  if (!(max_imag <= 1e-4 * std::max(1.0, max_real))) {
    throw Error(ErrorKind::numeric, "inverse DFT is not real (imaginary residue " +
                                        std::to_string(max_imag) +
                                        "); spectrum lacks Hermitian symmetry");
  }
  return out;
}

GrayImage inverse_spectrum(const Spectrum& spectrum) {
  const RealImage raw = inverse_spectrum_unclamped(spectrum);
  return GrayImage::from_clamped(raw.height, raw.width, raw.values);
}

RealImage spectral_transfer_unclamped(const GrayImage& source, const GrayImage& target,
                                      const BetaMask& mask) {
  if (source.height() != target.height() || source.width() != target.width()) {
    throw Error(ErrorKind::invalid_argument,
                "spectral transfer needs equal-sized patches, got " +
                    std::to_string(source.height()) + "x" + std::to_string(source.width()) +
                    " and " + std::to_string(target.height()) + "x" +
                    std::to_string(target.width()));
  }
  if (mask.height() != source.height() || mask.width() != source.width()) {
    throw Error(ErrorKind::invalid_argument, "beta mask size differs from patch size");
  }
  Spectrum mixed = forward_spectrum(source);
  if (mask.enabled()) {
    const Spectrum style = forward_spectrum(target);
    for (int m = 0; m < mixed.height; ++m) {
      for (int n = 0; n < mixed.width; ++n) {
        if (mask(m, n)) mixed.amplitude[mixed.index(m, n)] = style.amplitude[style.index(m, n)];
      }
    }
  }
  return inverse_spectrum_unclamped(mixed);
}

GrayImage spectral_transfer(const GrayImage& source, const GrayImage& target,
                            const BetaMask& mask) {
  const RealImage raw = spectral_transfer_unclamped(source, target, mask);
  return GrayImage::from_clamped(raw.height, raw.width, raw.values);
}

GrayImage spectral_transfer(const GrayImage& source, const GrayImage& target, double beta) {
  check_beta(beta);
  return spectral_transfer(source, target,
                           make_beta_mask(source.height(), source.width(), beta));
}

}  // namespace mammosynth

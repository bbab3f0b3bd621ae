#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mammosynth/image.hpp"

namespace mammosynth::testing {

/// Committed fixture bundle (set by the build).
inline std::filesystem::path fixture_dir() { return MAMMOSYNTH_FIXTURE_DIR; }

inline std::mt19937_64& test_rng() {
  static std::mt19937_64 rng(20240611);
  return rng;
}

inline GrayImage random_image(int h, int w, std::mt19937_64& rng, float lo = 0.0f,
                              float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> px(static_cast<std::size_t>(h) * w);
  for (auto& p : px) p = dist(rng);
  return GrayImage(h, w, std::move(px));
}

inline SaliencyMap random_saliency(int h, int w, std::mt19937_64& rng, float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(0.0f, hi);
  std::vector<float> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = dist(rng);
  return SaliencyMap(h, w, std::move(v));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mammosynth_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Direct O(N^2) double-sum DFT, independent of the FFT backend.
inline std::vector<std::complex<double>> naive_dft(const GrayImage& img) {
  const int h = img.height();
  const int w = img.width();
  const double two_pi = 6.283185307179586476925286766559;
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
  for (int m = 0; m < h; ++m) {
    for (int n = 0; n < w; ++n) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double angle = -two_pi * (static_cast<double>(y) * m / h +
                                          static_cast<double>(x) * n / w);
          acc += static_cast<double>(img(y, x)) * std::polar(1.0, angle);
        }
      }
      out[static_cast<std::size_t>(m) * w + n] = acc;
    }
  }
  return out;
}

/// Independent double loop over the window.
inline double naive_region_sum(const SaliencyMap& map, int top, int left, int h, int w) {
  long double acc = 0.0L;
  for (int m = top; m < top + h; ++m) {
    for (int n = left; n < left + w; ++n) acc += map(m, n);
  }
  return static_cast<double>(acc);
}

}  // namespace mammosynth::testing

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mammosynth {

/// Axis-aligned window addressed by its top-left pixel and its extent.
struct RegionSpec {
  int top = 0;
  int left = 0;
  int height = 1;
  int width = 1;

  long long area() const { return static_cast<long long>(height) * width; }

  /// True when the window is non-empty and lies fully inside a height x width raster.
  bool fits(int raster_height, int raster_width) const {
    return top >= 0 && left >= 0 && height >= 1 && width >= 1 &&
           static_cast<long long>(top) + height <= raster_height &&
           static_cast<long long>(left) + width <= raster_width;
  }

  bool operator==(const RegionSpec&) const = default;
};

/// Grayscale raster with unit-interval intensities, stored row-major.
///
/// Construction validates that every pixel is finite and in [0, 1]; the
/// object is immutable afterwards.
class GrayImage {
 public:
  GrayImage(int height, int width, float fill = 0.0f);
  GrayImage(int height, int width, std::vector<float> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }

  float operator()(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * width_ + col];
  }
  std::span<const float> pixels() const { return pixels_; }

  /// Clamps each value into [0, 1]. NaN is rejected.
  static GrayImage from_clamped(int height, int width, std::span<const double> values);

  bool operator==(const GrayImage&) const = default;

 private:
  int height_;
  int width_;
  std::vector<float> pixels_;
};

/// Nonnegative per-pixel importance map (a class-activation map or a surrogate).
class SaliencyMap {
 public:
  SaliencyMap(int height, int width, float fill = 0.0f);
  SaliencyMap(int height, int width, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  float operator()(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  std::span<const float> values() const { return values_; }

  float max_value() const;
  float min_value() const;

  /// Scales so the maximum becomes 1; an all-zero map is returned unchanged.
  SaliencyMap normalized() const;

  bool operator==(const SaliencyMap&) const = default;

 private:
  int height_;
  int width_;
  std::vector<float> values_;
};

/// Unconstrained real raster for intermediate results (e.g. before clamping).
struct RealImage {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double operator()(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

GrayImage extract_patch(const GrayImage& img, const RegionSpec& region);

/// Returns a copy of img with the patch written at (top, left).
GrayImage paste_patch(const GrayImage& img, const GrayImage& patch, int top, int left);

}  // namespace mammosynth

#include "mammosynth/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mammosynth/error.hpp"

namespace mammosynth {
namespace {

void check_dims(int height, int width, std::size_t count) {
  if (height < 1 || width < 1) {
    throw Error(ErrorKind::invalid_argument,
                "raster dimensions must be positive, got " + std::to_string(height) + "x" +
                    std::to_string(width));
  }
  if (count != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorKind::invalid_argument, "pixel count does not match " +
                                                 std::to_string(height) + "x" +
                                                 std::to_string(width));
  }
}

std::string region_str(const RegionSpec& r) {
  return "(" + std::to_string(r.top) + "," + std::to_string(r.left) + "," +
         std::to_string(r.height) + "," + std::to_string(r.width) + ")";
}

}  // namespace

GrayImage::GrayImage(int height, int width, float fill)
    : GrayImage(height, width,
                std::vector<float>(height > 0 && width > 0
                                       ? static_cast<std::size_t>(height) * width
                                       : 0,
                                   fill)) {}

GrayImage::GrayImage(int height, int width, std::vector<float> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  check_dims(height_, width_, pixels_.size());
  for (float p : pixels_) {
    if (!(p >= 0.0f && p <= 1.0f)) {
      throw Error(ErrorKind::invalid_argument,
                  "pixel value outside [0,1]: " + std::to_string(p));
    }
  }
}

GrayImage GrayImage::from_clamped(int height, int width, std::span<const double> values) {
  std::vector<float> pixels(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::isnan(values[k])) {
      throw Error(ErrorKind::numeric, "NaN in raster being clamped");
    }
    pixels[k] = static_cast<float>(std::clamp(values[k], 0.0, 1.0));
  }
  return GrayImage(height, width, std::move(pixels));
}

SaliencyMap::SaliencyMap(int height, int width, float fill)
    : SaliencyMap(height, width,
                  std::vector<float>(height > 0 && width > 0
                                         ? static_cast<std::size_t>(height) * width
                                         : 0,
                                     fill)) {}

SaliencyMap::SaliencyMap(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims(height_, width_, values_.size());
  for (float v : values_) {
    // Activation maps pass through a ReLU, so negatives indicate corrupt input.
    if (!(std::isfinite(v) && v >= 0.0f)) {
      throw Error(ErrorKind::invalid_argument,
                  "saliency values must be finite and nonnegative, got " + std::to_string(v));
    }
  }
}

float SaliencyMap::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

float SaliencyMap::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

SaliencyMap SaliencyMap::normalized() const {
  const float peak = max_value();
  if (peak == 0.0f) return *this;
  std::vector<float> out(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) {
    out[k] = values_[k] == peak ? 1.0f : std::min(1.0f, values_[k] / peak);
  }
  return SaliencyMap(height_, width_, std::move(out));
}

GrayImage extract_patch(const GrayImage& img, const RegionSpec& region) {
  if (!region.fits(img.height(), img.width())) {
    throw Error(ErrorKind::out_of_bounds, "region " + region_str(region) +
                                              " outside image " + std::to_string(img.height()) +
                                              "x" + std::to_string(img.width()));
  }
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(region.area()));
  const auto src = img.pixels();
  for (int r = 0; r < region.height; ++r) {
    const auto row = src.subspan(
        static_cast<std::size_t>(region.top + r) * img.width() + region.left, region.width);
    out.insert(out.end(), row.begin(), row.end());
  }
  return GrayImage(region.height, region.width, std::move(out));
}

GrayImage paste_patch(const GrayImage& img, const GrayImage& patch, int top, int left) {
  const RegionSpec region{top, left, patch.height(), patch.width()};
  if (!region.fits(img.height(), img.width())) {
    throw Error(ErrorKind::out_of_bounds, "paste window " + region_str(region) +
                                              " outside image " + std::to_string(img.height()) +
                                              "x" + std::to_string(img.width()));
  }
  std::vector<float> out(img.pixels().begin(), img.pixels().end());
  const auto src = patch.pixels();
  for (int r = 0; r < patch.height(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r) * patch.width(), patch.width(),
                out.begin() + static_cast<std::ptrdiff_t>(top + r) * img.width() + left);
  }
  return GrayImage(img.height(), img.width(), std::move(out));
}

}  // namespace mammosynth

#pragma once

#include <vector>

#include "mammosynth/image.hpp"

namespace mammosynth {

/// Summed-area table with a zero border: entry(h, w) is the sum of all
/// saliency values in rows < h and columns < w. Sums are kept in double.
class IntegralImage {
 public:
  explicit IntegralImage(const SaliencyMap& map);

  int height() const { return height_; }  // source map height
  int width() const { return width_; }    // source map width

  double entry(int h, int w) const {
    return sums_[static_cast<std::size_t>(h) * (width_ + 1) + w];
  }

 private:
  int height_;
  int width_;
  std::vector<double> sums_;
};

struct SelectionResult {
  RegionSpec region;
  double score = 0.0;
};

/// Extra placement constraints. The defaults impose none.
struct SelectionOptions {
  /// Minimum distance in pixels between a candidate region and every image edge.
  int border_margin = 0;
  /// Optional tissue mask the size of the saliency map; zero marks background.
  const GrayImage* breast_mask = nullptr;
  /// Candidates whose background share exceeds this fraction are skipped.
  double max_background_fraction = 0.1;
};

IntegralImage build_integral(const SaliencyMap& map);

/// Accumulated saliency over the region, by direct double summation.
double region_intensity(const SaliencyMap& map, const RegionSpec& region);

/// Accumulated saliency over the region from four integral-image lookups.
double region_intensity(const IntegralImage& integral, const RegionSpec& region);

/// Highest-saliency placement of a height x width window.
///
/// Candidates are scanned in row-major order and only a strictly larger score
/// replaces the incumbent, so ties resolve to the smallest (top, left). Scores
/// are compared exactly: when the map's dynamic range allows, the prefix sums
/// are held in 128-bit fixed point; otherwise near-ties of the double-precision
/// table are re-summed directly.
SelectionResult select_region(const SaliencyMap& map, int height, int width,
                              const SelectionOptions& options = {});

/// Reference search: direct summation for every candidate, strict `<` update.
SelectionResult select_region_bruteforce(const SaliencyMap& map, int height, int width);

/// Surrogate saliency: Gaussian blur (sigma = blur_radius pixels, edge-clamped)
/// of the intensities, min-max normalized to [0, 1]. Flat input yields all zeros.
SaliencyMap pseudo_saliency(const GrayImage& img, double blur_radius);

}  // namespace mammosynth

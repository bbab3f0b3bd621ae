#include "mammosynth/region_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mammosynth/error.hpp"

namespace mammosynth {
namespace {

__extension__ typedef __int128 Int128;

void check_window(const SaliencyMap& map, int height, int width) {
  if (height < 1 || width < 1 || height > map.height() || width > map.width()) {
    throw Error(ErrorKind::invalid_argument,
                "region " + std::to_string(height) + "x" + std::to_string(width) +
                    " does not fit saliency map " + std::to_string(map.height()) + "x" +
                    std::to_string(map.width()));
  }
}

void check_region(int map_height, int map_width, const RegionSpec& r) {
  if (!r.fits(map_height, map_width)) {
    throw Error(ErrorKind::out_of_bounds,
                "region (" + std::to_string(r.top) + "," + std::to_string(r.left) + "," +
                    std::to_string(r.height) + "," + std::to_string(r.width) +
                    ") outside map " + std::to_string(map_height) + "x" +
                    std::to_string(map_width));
  }
}

// Prefix table in 128-bit fixed point: value * 2^shift is an integer for every
// map value, so rectangle sums are exact and ties compare equal.
class ExactIntegral {
 public:
  static std::optional<ExactIntegral> build(const SaliencyMap& map) {
    int min_lsb = std::numeric_limits<int>::max();
    int max_exp = std::numeric_limits<int>::min();
    for (float v : map.values()) {
      if (v == 0.0f) continue;
      int e = 0;
      std::frexp(v, &e);
      min_lsb = std::min(min_lsb, e - std::numeric_limits<float>::digits);
      max_exp = std::max(max_exp, e);
    }
    ExactIntegral out;
    out.width_ = map.width();
    out.sums_.assign(static_cast<std::size_t>(map.height() + 1) * (map.width() + 1), 0);
    if (max_exp == std::numeric_limits<int>::min()) return out;  // all zero

    const int shift = -min_lsb;
    const int count_bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(map.size())))) + 1;
    if (max_exp + shift + count_bits > 125) return std::nullopt;
    out.shift_ = shift;

    const int stride = map.width() + 1;
    for (int h = 0; h < map.height(); ++h) {
      Int128 row_sum = 0;
      for (int w = 0; w < map.width(); ++w) {
        row_sum += static_cast<Int128>(std::ldexp(static_cast<double>(map(h, w)), shift));
        out.sums_[static_cast<std::size_t>(h + 1) * stride + w + 1] =
            out.sums_[static_cast<std::size_t>(h) * stride + w + 1] + row_sum;
      }
    }
    return out;
  }

  Int128 sum(int top, int left, int height, int width) const {
    const int stride = width_ + 1;
    auto at = [&](int h, int w) { return sums_[static_cast<std::size_t>(h) * stride + w]; };
    return at(top + height, left + width) - at(top, left + width) - at(top + height, left) +
           at(top, left);
  }

  double to_double(Int128 v) const { return std::ldexp(static_cast<double>(v), -shift_); }

 private:
  int width_ = 0;
  int shift_ = 0;
  std::vector<Int128> sums_;
};

// Placement filter for margins and tissue masks.
class PlacementFilter {
 public:
  PlacementFilter(const SaliencyMap& map, int height, int width, const SelectionOptions& opt)
      : height_(height), width_(width), margin_(opt.border_margin) {
    if (opt.border_margin < 0) {
      throw Error(ErrorKind::invalid_argument, "border margin must be nonnegative");
    }
    row_lo_ = margin_;
    row_hi_ = map.height() - height - margin_;
    col_lo_ = margin_;
    col_hi_ = map.width() - width - margin_;
    if (row_hi_ < row_lo_ || col_hi_ < col_lo_) {
      throw Error(ErrorKind::invalid_argument,
                  "region " + std::to_string(height) + "x" + std::to_string(width) +
                      " does not fit inside a border margin of " + std::to_string(margin_));
    }
    if (opt.breast_mask != nullptr) {
      const GrayImage& mask = *opt.breast_mask;
      if (mask.height() != map.height() || mask.width() != map.width()) {
        throw Error(ErrorKind::invalid_argument, "breast mask size differs from saliency map");
      }
      if (!(opt.max_background_fraction >= 0.0 && opt.max_background_fraction <= 1.0)) {
        throw Error(ErrorKind::invalid_argument, "background fraction must be in [0,1]");
      }
      const int stride = map.width() + 1;
      background_.assign(static_cast<std::size_t>(map.height() + 1) * stride, 0);
      for (int h = 0; h < map.height(); ++h) {
        long long row = 0;
        for (int w = 0; w < map.width(); ++w) {
          row += mask(h, w) == 0.0f ? 1 : 0;
          background_[static_cast<std::size_t>(h + 1) * stride + w + 1] =
              background_[static_cast<std::size_t>(h) * stride + w + 1] + row;
        }
      }
      stride_ = stride;
      max_background_ =
          static_cast<long long>(std::floor(opt.max_background_fraction * height * width));
    }
  }

  int row_lo() const { return row_lo_; }
  int row_hi() const { return row_hi_; }
  int col_lo() const { return col_lo_; }
  int col_hi() const { return col_hi_; }

  bool allowed(int top, int left) const {
    if (background_.empty()) return true;
    auto at = [&](int h, int w) { return background_[static_cast<std::size_t>(h) * stride_ + w]; };
    const long long zeros = at(top + height_, left + width_) - at(top, left + width_) -
                            at(top + height_, left) + at(top, left);
    return zeros <= max_background_;
  }

 private:
  int height_;
  int width_;
  int margin_;
  int row_lo_ = 0;
  int row_hi_ = 0;
  int col_lo_ = 0;
  int col_hi_ = 0;
  int stride_ = 0;
  long long max_background_ = 0;
  std::vector<long long> background_;
};

SelectionResult no_candidate() {
  throw Error(ErrorKind::invalid_argument,
              "no candidate region satisfies the breast-mask constraint");
}

}  // namespace

IntegralImage::IntegralImage(const SaliencyMap& map)
    : height_(map.height()),
      width_(map.width()),
      sums_(static_cast<std::size_t>(map.height() + 1) * (map.width() + 1), 0.0) {
  const int stride = width_ + 1;
  for (int h = 0; h < height_; ++h) {
    double row_sum = 0.0;
    for (int w = 0; w < width_; ++w) {
      row_sum += map(h, w);
      sums_[static_cast<std::size_t>(h + 1) * stride + w + 1] =
          sums_[static_cast<std::size_t>(h) * stride + w + 1] + row_sum;
    }
  }
}

IntegralImage build_integral(const SaliencyMap& map) { return IntegralImage(map); }

double region_intensity(const SaliencyMap& map, const RegionSpec& region) {
  check_region(map.height(), map.width(), region);
  double sum = 0.0;
  for (int m = region.top; m < region.top + region.height; ++m) {
    for (int n = region.left; n < region.left + region.width; ++n) sum += map(m, n);
  }
  return sum;
}

double region_intensity(const IntegralImage& integral, const RegionSpec& region) {
  check_region(integral.height(), integral.width(), region);
  const int bottom = region.top + region.height;
  const int right = region.left + region.width;
  return integral.entry(bottom, right) - integral.entry(region.top, right) -
         integral.entry(bottom, region.left) + integral.entry(region.top, region.left);
}

SelectionResult select_region(const SaliencyMap& map, int height, int width,
                              const SelectionOptions& options) {
  check_window(map, height, width);
  const PlacementFilter filter(map, height, width, options);

  if (const auto exact = ExactIntegral::build(map)) {
    bool found = false;
    Int128 best = 0;
    RegionSpec best_region{0, 0, height, width};
    for (int i = filter.row_lo(); i <= filter.row_hi(); ++i) {
      for (int j = filter.col_lo(); j <= filter.col_hi(); ++j) {
        if (!filter.allowed(i, j)) continue;
        const Int128 score = exact->sum(i, j, height, width);
        if (!found || best < score) {
          found = true;
          best = score;
          best_region = {i, j, height, width};
        }
      }
    }
    if (!found) return no_candidate();
    return {best_region, exact->to_double(best)};
  }

  // Extreme dynamic range: rank with the double table, then settle every
  // candidate within its rounding bound by direct summation.
  const IntegralImage integral(map);
  double total = integral.entry(map.height(), map.width());
  const double tolerance =
      8.0 * (map.height() + map.width() + 2) * std::numeric_limits<double>::epsilon() * total;
  double approx_best = -std::numeric_limits<double>::infinity();
  for (int i = filter.row_lo(); i <= filter.row_hi(); ++i) {
    for (int j = filter.col_lo(); j <= filter.col_hi(); ++j) {
      if (!filter.allowed(i, j)) continue;
      approx_best = std::max(approx_best, region_intensity(integral, {i, j, height, width}));
    }
  }
  if (approx_best == -std::numeric_limits<double>::infinity()) return no_candidate();

  SelectionResult result{{0, 0, height, width}, -std::numeric_limits<double>::infinity()};
  for (int i = filter.row_lo(); i <= filter.row_hi(); ++i) {
    for (int j = filter.col_lo(); j <= filter.col_hi(); ++j) {
      if (!filter.allowed(i, j)) continue;
      const RegionSpec candidate{i, j, height, width};
      if (region_intensity(integral, candidate) < approx_best - 2.0 * tolerance) continue;
      const double score = region_intensity(map, candidate);
      if (result.score < score) result = {candidate, score};
    }
  }
  return result;
}

SelectionResult select_region_bruteforce(const SaliencyMap& map, int height, int width) {
  check_window(map, height, width);
  SelectionResult best{{0, 0, height, width}, -std::numeric_limits<double>::infinity()};
  for (int i = 0; i <= map.height() - height; ++i) {
    for (int j = 0; j <= map.width() - width; ++j) {
      const RegionSpec candidate{i, j, height, width};
      const double score = region_intensity(map, candidate);
      if (best.score < score) best = {candidate, score};
    }
  }
  return best;
}

}  // namespace mammosynth

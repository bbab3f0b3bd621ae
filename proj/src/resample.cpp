#include "mammosynth/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mammosynth/error.hpp"

namespace mammosynth {
namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> taps(int src, int dst) {
  std::vector<Tap> out(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int k = 0; k < dst; ++k) {
    const double pos = std::clamp((k + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, src - 1);
    out[k] = {lo, hi, pos - lo};
  }
  return out;
}

}  // namespace

SaliencyMap resample_bilinear(const SaliencyMap& map, int new_height, int new_width) {
  if (new_height < 1 || new_width < 1) {
    throw Error(ErrorKind::invalid_argument, "resample target must be at least 1x1, got " +
                                                 std::to_string(new_height) + "x" +
                                                 std::to_string(new_width));
  }
  if (new_height == map.height() && new_width == map.width()) return map;

  const auto rows = taps(map.height(), new_height);
  const auto cols = taps(map.width(), new_width);
  std::vector<float> out(static_cast<std::size_t>(new_height) * new_width);
  for (int r = 0; r < new_height; ++r) {
    const Tap& tr = rows[r];
    for (int c = 0; c < new_width; ++c) {
      const Tap& tc = cols[c];
      const double top = (1.0 - tc.frac) * map(tr.lo, tc.lo) + tc.frac * map(tr.lo, tc.hi);
      const double bottom = (1.0 - tc.frac) * map(tr.hi, tc.lo) + tc.frac * map(tr.hi, tc.hi);
      out[static_cast<std::size_t>(r) * new_width + c] =
          static_cast<float>((1.0 - tr.frac) * top + tr.frac * bottom);
    }
  }
  return SaliencyMap(new_height, new_width, std::move(out));
}

}  // namespace mammosynth

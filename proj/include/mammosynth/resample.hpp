#pragma once

#include "mammosynth/image.hpp"

namespace mammosynth {

/// Bilinear resampling with pixel-center alignment and edge clamping.
/// Equal sizes return an identical copy; outputs never leave [min, max] of the input.
SaliencyMap resample_bilinear(const SaliencyMap& map, int new_height, int new_width);

}  // namespace mammosynth

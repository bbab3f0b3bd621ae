#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mammosynth/image.hpp"
#include "mammosynth/region_selection.hpp"
#include "mammosynth/soft_mask.hpp"

namespace mammosynth {

enum class SynthesisMode {
  hard_cutmix,   // paste the donor lesion patch as is
  fda_cutmix,    // paste the spectrally adapted patch
  soft_adapted,  // adapt, then blend under a Gaussian soft mask before pasting
};

enum class AdaptationDirection {
  /// Benign patch content rendered in the donor's style (the literal transfer).
  benign_to_malignant_style,
  /// Donor lesion content rendered in the benign patch's style.
  malignant_to_benign_style,
};

enum class MaskMode { sampled, deterministic };

std::string_view to_string(SynthesisMode mode);
std::string_view to_string(AdaptationDirection direction);
std::string_view to_string(MaskMode mode);
SynthesisMode parse_mode(std::string_view text);
AdaptationDirection parse_direction(std::string_view text);
MaskMode parse_mask_mode(std::string_view text);

struct SynthesisConfig {
  SynthesisMode mode = SynthesisMode::soft_adapted;
  /// Low-frequency window fraction in [0, 0.5); nullopt disables amplitude transfer.
  std::optional<double> beta = 0.05;
  AdaptationDirection direction = AdaptationDirection::benign_to_malignant_style;
  MaskMode mask_mode = MaskMode::sampled;
  std::uint64_t seed = 0;
  int border_margin = 0;

  void validate() const;
};

struct DonorAnnotation {
  std::string donor_id;
  RegionSpec bbox;     // radiologist-marked finding in donor coordinates
  std::string lesion;  // metadata only
};

struct Provenance {
  std::string benign_id;
  std::string donor_id;
  std::string lesion;
  RegionSpec donor_bbox;
  RegionSpec region;
  double region_score = 0.0;
  SynthesisMode mode = SynthesisMode::soft_adapted;
  std::optional<double> beta;
  AdaptationDirection direction = AdaptationDirection::benign_to_malignant_style;
  MaskMode mask_mode = MaskMode::sampled;
  std::optional<SoftMaskParams> mask;  // soft_adapted only
  std::uint64_t seed = 0;
  int border_margin = 0;
  std::optional<double> seam_metric;  // absent when the region touches the image edge
};

struct SynthesizedSample {
  GrayImage image;
  Provenance provenance;

  static constexpr std::string_view label = "malignant";
};

/// Inputs that travel together through synthesis.
struct SynthesisInputs {
  std::string benign_id;
  const GrayImage& benign;
  const SaliencyMap& saliency;  // resampled to the benign size when it differs
  const GrayImage* breast_mask = nullptr;
  const GrayImage& donor;
  DonorAnnotation annotation;
};

/// Region selection, spectral adaptation and soft-contour blending.
///
/// The donor bbox fixes the window shape. The benign window is chosen by
/// select_region on the saliency map, the patch is produced according to
/// cfg.mode and pasted back; all pixels outside the window are untouched.
/// Blending always weights the malignant patch by the mask and the benign
/// patch by its complement; the adaptation direction decides which of the two
/// is the spectrally adapted one.
SynthesizedSample synthesize(const SynthesisInputs& inputs, const SynthesisConfig& cfg);

/// Mean absolute difference between each boundary pixel of the region and its
/// outward neighbour; the region needs a one-pixel collar inside the image.
double seam_gradient_metric(const GrayImage& img, const RegionSpec& region);

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the sample at `index` of a run seeded with `run_seed`.
std::uint64_t derive_sample_seed(std::uint64_t run_seed, std::uint64_t index);

}  // namespace mammosynth

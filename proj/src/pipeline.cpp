#include "mammosynth/pipeline.hpp"

#include <cmath>
#include <string>

#include "mammosynth/error.hpp"
#include "mammosynth/fourier.hpp"
#include "mammosynth/resample.hpp"

namespace mammosynth {

std::string_view to_string(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::hard_cutmix: return "hard_cutmix";
    case SynthesisMode::fda_cutmix: return "fda_cutmix";
    case SynthesisMode::soft_adapted: return "soft_adapted";
  }
  return "unknown";
}

std::string_view to_string(AdaptationDirection direction) {
  switch (direction) {
    case AdaptationDirection::benign_to_malignant_style: return "benign_to_malignant_style";
    case AdaptationDirection::malignant_to_benign_style: return "malignant_to_benign_style";
  }
  return "unknown";
}

std::string_view to_string(MaskMode mode) {
  return mode == MaskMode::sampled ? "sampled" : "deterministic";
}

SynthesisMode parse_mode(std::string_view text) {
  for (auto m : {SynthesisMode::hard_cutmix, SynthesisMode::fda_cutmix,
                 SynthesisMode::soft_adapted}) {
    if (text == to_string(m)) return m;
  }
  throw Error(ErrorKind::invalid_argument, "unknown synthesis mode: " + std::string(text));
}

AdaptationDirection parse_direction(std::string_view text) {
  for (auto d : {AdaptationDirection::benign_to_malignant_style,
                 AdaptationDirection::malignant_to_benign_style}) {
    if (text == to_string(d)) return d;
  }
  throw Error(ErrorKind::invalid_argument, "unknown adaptation direction: " + std::string(text));
}

MaskMode parse_mask_mode(std::string_view text) {
  if (text == "sampled") return MaskMode::sampled;
  if (text == "deterministic") return MaskMode::deterministic;
  throw Error(ErrorKind::invalid_argument, "unknown mask mode: " + std::string(text));
}

void SynthesisConfig::validate() const {
  if (beta && !(*beta >= 0.0 && *beta < 0.5)) {
    throw Error(ErrorKind::invalid_argument,
                "beta must lie in [0, 0.5), got " + std::to_string(*beta));
  }
  if (border_margin < 0) {
    throw Error(ErrorKind::invalid_argument, "border margin must be nonnegative");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_sample_seed(std::uint64_t run_seed, std::uint64_t index) {
  return splitmix64(run_seed ^ splitmix64(index));
}

double seam_gradient_metric(const GrayImage& img, const RegionSpec& r) {
  if (!r.fits(img.height(), img.width())) {
    throw Error(ErrorKind::out_of_bounds, "seam region outside image");
  }
  if (r.top < 1 || r.left < 1 || r.top + r.height >= img.height() ||
      r.left + r.width >= img.width()) {
    throw Error(ErrorKind::out_of_bounds, "seam region touches the image edge");
  }
  const int bottom = r.top + r.height - 1;
  const int right = r.left + r.width - 1;
  double total = 0.0;
  for (int n = r.left; n <= right; ++n) {
    total += std::abs(static_cast<double>(img(r.top, n)) - img(r.top - 1, n));
    total += std::abs(static_cast<double>(img(bottom, n)) - img(bottom + 1, n));
  }
  for (int m = r.top; m <= bottom; ++m) {
    total += std::abs(static_cast<double>(img(m, r.left)) - img(m, r.left - 1));
    total += std::abs(static_cast<double>(img(m, right)) - img(m, right + 1));
  }
  return total / (2.0 * (r.height + r.width));
}

namespace {

GrayImage adapt(const GrayImage& content, const GrayImage& style, const std::optional<double>& beta) {
  const BetaMask mask = beta ? make_beta_mask(content.height(), content.width(), *beta)
                             : BetaMask::disabled(content.height(), content.width());
  return spectral_transfer(content, style, mask);
}

}  // namespace

SynthesizedSample synthesize(const SynthesisInputs& in, const SynthesisConfig& cfg) {
  cfg.validate();
  const RegionSpec& bbox = in.annotation.bbox;
  if (bbox.height < 3 || bbox.width < 3) {
    throw Error(ErrorKind::invalid_argument, "donor bbox must be at least 3x3");
  }
  if (!bbox.fits(in.donor.height(), in.donor.width())) {
    throw Error(ErrorKind::out_of_bounds, "donor bbox lies outside the donor image");
  }
  if (bbox.height + 2 * cfg.border_margin > in.benign.height() ||
      bbox.width + 2 * cfg.border_margin > in.benign.width()) {
    throw Error(ErrorKind::invalid_argument, "donor bbox does not fit the benign image");
  }
  if (in.breast_mask != nullptr && (in.breast_mask->height() != in.benign.height() ||
                                    in.breast_mask->width() != in.benign.width())) {
    throw Error(ErrorKind::invalid_argument, "breast mask size differs from the benign image");
  }

  const SaliencyMap saliency =
      resample_bilinear(in.saliency, in.benign.height(), in.benign.width());
  SelectionOptions options;
  options.border_margin = cfg.border_margin;
  options.breast_mask = in.breast_mask;
  const SelectionResult selected = select_region(saliency, bbox.height, bbox.width, options);
  const RegionSpec& region = selected.region;

  const GrayImage benign_patch = extract_patch(in.benign, region);
  const GrayImage donor_patch = extract_patch(in.donor, bbox);
  const bool benign_adapted = cfg.direction == AdaptationDirection::benign_to_malignant_style;

  Provenance prov;
  prov.benign_id = in.benign_id;
  prov.donor_id = in.annotation.donor_id;
  prov.lesion = in.annotation.lesion;
  prov.donor_bbox = bbox;
  prov.region = region;
  prov.region_score = selected.score;
  prov.mode = cfg.mode;
  prov.beta = cfg.beta;
  prov.direction = cfg.direction;
  prov.mask_mode = cfg.mask_mode;
  prov.seed = cfg.seed;
  prov.border_margin = cfg.border_margin;

  auto patch = [&]() -> GrayImage {
    switch (cfg.mode) {
      case SynthesisMode::hard_cutmix:
        return donor_patch;
      case SynthesisMode::fda_cutmix:
        return benign_adapted ? adapt(benign_patch, donor_patch, cfg.beta)
                              : adapt(donor_patch, benign_patch, cfg.beta);
      case SynthesisMode::soft_adapted: {
        Rng rng(cfg.seed);
        const SoftMaskParams params = cfg.mask_mode == MaskMode::sampled
                                          ? sample_mask_params(bbox.height, bbox.width, rng)
                                          : centered_mask_params(bbox.height, bbox.width);
        prov.mask = params;
        const SoftMask mask = gaussian_soft_mask(params);
        if (benign_adapted) {
          return blend(adapt(benign_patch, donor_patch, cfg.beta), donor_patch, mask);
        }
        return blend(benign_patch, adapt(donor_patch, benign_patch, cfg.beta), mask);
      }
    }
    throw Error(ErrorKind::invalid_argument, "unknown synthesis mode");
  }();

  GrayImage out = paste_patch(in.benign, patch, region.top, region.left);
  if (region.top >= 1 && region.left >= 1 && region.top + region.height < out.height() &&
      region.left + region.width < out.width()) {
    prov.seam_metric = seam_gradient_metric(out, region);
  }
  return {std::move(out), std::move(prov)};
}

}  // namespace mammosynth

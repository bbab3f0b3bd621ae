#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mammosynth/pipeline.hpp"

namespace mammosynth {

struct BenignEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path saliency;
  std::optional<std::filesystem::path> breast_mask;
};

struct DonorEntry {
  std::string id;
  std::filesystem::path image;
  RegionSpec bbox;
  std::string lesion;
};

/// Dataset manifest: JSON Lines where entries carrying "bbox" are donors and
/// all others are benign images. Relative paths resolve against the manifest's
/// directory.
struct Manifest {
  std::vector<BenignEntry> benign;
  std::vector<DonorEntry> donors;
};

Manifest parse_manifest(std::string_view jsonl, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

/// Benign entry k is paired with donor k mod donors.size().
struct Pairing {
  std::size_t index;
  const BenignEntry* benign;
  const DonorEntry* donor;
};
std::vector<Pairing> round_robin_pairs(const Manifest& manifest);

/// Loads the pair's files and synthesizes one sample with cfg as given.
SynthesizedSample synthesize_pair(const BenignEntry& benign, const DonorEntry& donor,
                                  const SynthesisConfig& cfg);

struct BatchOptions {
  SynthesisConfig config;  // config.seed is the run seed
  unsigned jobs = 0;       // 0 = hardware concurrency
  bool log_samples = false;
};

struct EntryFailure {
  std::size_t index;
  std::string benign_id;
  std::string donor_id;
  std::string reason;
};

struct BatchReport {
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  std::vector<EntryFailure> failures;
  std::optional<double> mean_seam_metric;
  std::filesystem::path manifest_path;
  std::filesystem::path summary_path;
};

inline constexpr std::string_view kOutputManifest = "manifest.jsonl";
inline constexpr std::string_view kSummaryFile = "summary.json";

std::string output_sample_id(std::size_t index);

/// Synthesizes one sample per benign entry into out_dir as 16-bit PNG, then
/// writes manifest.jsonl (in manifest order) and summary.json. Per-entry
/// failures are recorded and skipped; if every entry fails, throws.
BatchReport run_batch(const Manifest& manifest, const BatchOptions& options,
                      const std::filesystem::path& out_dir);

struct VerifyReport {
  std::size_t checked = 0;
  std::vector<std::string> mismatches;  // one line per failing sample

  bool ok() const { return checked > 0 && mismatches.empty(); }
};

/// Re-derives every sample listed in out_dir/manifest.jsonl from its
/// provenance record and compares the encoded bytes with the stored file.
VerifyReport verify_batch(const std::filesystem::path& out_dir, unsigned jobs = 0);

struct ModeSummary {
  SynthesisMode mode;
  std::size_t samples = 0;     // samples with a measurable seam
  double mean_seam = 0.0;
  std::vector<double> per_sample;  // seam per pairing; NaN where unavailable
};

/// Runs every pairing under each synthesis mode (other settings from base).
std::vector<ModeSummary> compare_modes(const Manifest& manifest, const SynthesisConfig& base,
                                       unsigned jobs = 0);

/// Runs fn(0..count-1) on up to `jobs` threads (0 = hardware concurrency).
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mammosynth

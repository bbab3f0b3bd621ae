#include "mammosynth/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mammosynth/error.hpp"
#include "mammosynth/image_io.hpp"

namespace mammosynth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return fs::weakly_canonical(fs::absolute(path));
}

std::string required_string(const json& entry, const char* key, std::size_t line) {
  if (!entry.contains(key) || !entry[key].is_string() || entry[key].get<std::string>().empty()) {
    throw Error(ErrorKind::format, "manifest line " + std::to_string(line) + ": missing \"" +
                                       key + "\"");
  }
  return entry[key].get<std::string>();
}

json region_json(const RegionSpec& r) { return json::array({r.top, r.left, r.height, r.width}); }

RegionSpec region_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorKind::format, what + " must be [top, left, height, width]");
  }
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      throw Error(ErrorKind::format, what + " must hold integer pixel indices");
    }
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct SampleJob {
  std::size_t index;
  const BenignEntry* benign;
  const DonorEntry* donor;
  SynthesisConfig config;
};

json provenance_json(const SampleJob& job, const Provenance& p, std::uint64_t run_seed) {
  json prov;
  prov["benign_id"] = p.benign_id;
  prov["benign_image"] = job.benign->image.string();
  prov["saliency"] = job.benign->saliency.string();
  prov["breast_mask"] =
      job.benign->breast_mask ? json(job.benign->breast_mask->string()) : json(nullptr);
  prov["donor_id"] = p.donor_id;
  prov["donor_image"] = job.donor->image.string();
  prov["bbox"] = region_json(p.donor_bbox);
  prov["lesion"] = p.lesion;
  prov["region"] = region_json(p.region);
  prov["region_score"] = p.region_score;
  prov["mode"] = std::string(to_string(p.mode));
  prov["beta"] = optional_double(p.beta);
  prov["direction"] = std::string(to_string(p.direction));
  prov["mask_mode"] = std::string(to_string(p.mask_mode));
  if (p.mask) {
    prov["mask"] = {{"mu_h", p.mask->mu_h}, {"mu_w", p.mask->mu_w}, {"sigma", p.mask->sigma}};
  } else {
    prov["mask"] = nullptr;
  }
  prov["run_seed"] = run_seed;
  prov["sample_index"] = job.index;
  prov["sample_seed"] = p.seed;
  prov["border_margin"] = p.border_margin;
  prov["seam_metric"] = optional_double(p.seam_metric);
  return prov;
}

// Owns the entries a provenance record refers to, so verification can reuse
// synthesize_pair unchanged.
struct RecordedSample {
  BenignEntry benign;
  DonorEntry donor;
  SynthesisConfig config;
  json provenance;
};

RecordedSample recorded_from_json(const json& prov) {
  RecordedSample r;
  r.benign.id = prov.at("benign_id").get<std::string>();
  r.benign.image = prov.at("benign_image").get<std::string>();
  r.benign.saliency = prov.at("saliency").get<std::string>();
  if (!prov.at("breast_mask").is_null()) {
    r.benign.breast_mask = fs::path(prov.at("breast_mask").get<std::string>());
  }
  r.donor.id = prov.at("donor_id").get<std::string>();
  r.donor.image = prov.at("donor_image").get<std::string>();
  r.donor.bbox = region_from_json(prov.at("bbox"), "bbox");
  r.donor.lesion = prov.at("lesion").get<std::string>();
  r.config.mode = parse_mode(prov.at("mode").get<std::string>());
  r.config.beta = prov.at("beta").is_null() ? std::nullopt
                                            : std::optional<double>(prov.at("beta").get<double>());
  r.config.direction = parse_direction(prov.at("direction").get<std::string>());
  r.config.mask_mode = parse_mask_mode(prov.at("mask_mode").get<std::string>());
  r.config.seed = prov.at("sample_seed").get<std::uint64_t>();
  r.config.border_margin = prov.at("border_margin").get<int>();
  r.provenance = prov;
  return r;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

}  // namespace

Manifest parse_manifest(std::string_view jsonl, const fs::path& base_dir) {
  Manifest manifest;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::format,
                  "manifest line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    if (!entry.is_object()) {
      throw Error(ErrorKind::format,
                  "manifest line " + std::to_string(line_no) + ": entry is not an object");
    }
    const std::string id = required_string(entry, "id", line_no);
    const std::string image = required_string(entry, "image", line_no);
    if (entry.contains("bbox")) {
      DonorEntry donor{id, resolve(base_dir, image),
                       region_from_json(entry["bbox"],
                                        "manifest line " + std::to_string(line_no) + ": bbox"),
                       entry.contains("lesion") && entry["lesion"].is_string()
                           ? entry["lesion"].get<std::string>()
                           : std::string("unspecified")};
      manifest.donors.push_back(std::move(donor));
    } else {
      BenignEntry benign{id, resolve(base_dir, image),
                         resolve(base_dir, required_string(entry, "saliency", line_no)),
                         std::nullopt};
      if (entry.contains("breast_mask") && !entry["breast_mask"].is_null()) {
        benign.breast_mask = resolve(base_dir, required_string(entry, "breast_mask", line_no));
      }
      manifest.benign.push_back(std::move(benign));
    }
  }
  return manifest;
}

Manifest load_manifest(const fs::path& path) {
  const auto bytes = read_file(path);
  const std::string text(bytes.begin(), bytes.end());
  return parse_manifest(text, fs::absolute(path).parent_path());
}

std::vector<Pairing> round_robin_pairs(const Manifest& manifest) {
  if (manifest.benign.empty()) throw Error(ErrorKind::invalid_argument, "manifest has no benign entries");
  if (manifest.donors.empty()) throw Error(ErrorKind::invalid_argument, "manifest has no donor entries");
  std::vector<Pairing> out;
  out.reserve(manifest.benign.size());
  for (std::size_t k = 0; k < manifest.benign.size(); ++k) {
    out.push_back({k, &manifest.benign[k], &manifest.donors[k % manifest.donors.size()]});
  }
  return out;
}

SynthesizedSample synthesize_pair(const BenignEntry& benign, const DonorEntry& donor,
                                  const SynthesisConfig& cfg) {
  const GrayImage benign_img = load_image(benign.image);
  const SaliencyMap saliency = load_saliency(benign.saliency);
  const GrayImage donor_img = load_image(donor.image);
  std::optional<GrayImage> breast_mask;
  if (benign.breast_mask) breast_mask = load_image(*benign.breast_mask);
  const SynthesisInputs inputs{benign.id,
                               benign_img,
                               saliency,
                               breast_mask ? &*breast_mask : nullptr,
                               donor_img,
                               {donor.id, donor.bbox, donor.lesion}};
  return synthesize(inputs, cfg);
}

std::string output_sample_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn_%05zu", index);
  return buf;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (first_error) std::rethrow_exception(first_error);
}

BatchReport run_batch(const Manifest& manifest, const BatchOptions& options,
                      const fs::path& out_dir) {
  options.config.validate();
  const auto pairs = round_robin_pairs(manifest);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + out_dir.string());

  struct Outcome {
    std::optional<json> record;
    std::optional<double> seam;
    std::string error;
  };
  std::vector<Outcome> outcomes(pairs.size());
  std::mutex log_mutex;

  parallel_for(pairs.size(), options.jobs, [&](std::size_t k) {
    const Pairing& pair = pairs[k];
    SampleJob job{pair.index, pair.benign, pair.donor, options.config};
    job.config.seed = derive_sample_seed(options.config.seed, pair.index);
    Outcome& outcome = outcomes[k];
    try {
      const SynthesizedSample sample = synthesize_pair(*pair.benign, *pair.donor, job.config);
      const std::string id = output_sample_id(pair.index);
      const std::string file = id + ".png";
      write_file_atomic(out_dir / file, encode_image(sample.image, RasterFormat::png));
      json record;
      record["id"] = id;
      record["image"] = file;
      record["label"] = std::string(SynthesizedSample::label);
      record["provenance"] = provenance_json(job, sample.provenance, options.config.seed);
      outcome.record = std::move(record);
      outcome.seam = sample.provenance.seam_metric;
      if (options.log_samples) {
        std::lock_guard lock(log_mutex);
        std::clog << "sample " << id << " benign=" << pair.benign->id
                  << " donor=" << pair.donor->id << " region=(" << sample.provenance.region.top
                  << "," << sample.provenance.region.left << ") ok\n";
      }
    } catch (const std::exception& e) {
      outcome.error = e.what();
      if (options.log_samples) {
        std::lock_guard lock(log_mutex);
        std::clog << "sample " << output_sample_id(pair.index) << " failed: " << e.what() << "\n";
      }
    }
  });

  BatchReport report;
  report.attempted = pairs.size();
  std::string manifest_text;
  json failures = json::array();
  double seam_total = 0.0;
  std::size_t seam_count = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (outcomes[k].record) {
      ++report.succeeded;
      manifest_text += outcomes[k].record->dump() + "\n";
      if (outcomes[k].seam) {
        seam_total += *outcomes[k].seam;
        ++seam_count;
      }
    } else {
      report.failures.push_back(
          {pairs[k].index, pairs[k].benign->id, pairs[k].donor->id, outcomes[k].error});
      failures.push_back({{"index", pairs[k].index},
                          {"benign_id", pairs[k].benign->id},
                          {"donor_id", pairs[k].donor->id},
                          {"reason", outcomes[k].error}});
    }
  }
  if (seam_count > 0) report.mean_seam_metric = seam_total / static_cast<double>(seam_count);

  json summary;
  summary["attempted"] = report.attempted;
  summary["count"] = report.succeeded;
  summary["failures"] = failures;
  summary["mode"] = std::string(to_string(options.config.mode));
  summary["beta"] = optional_double(options.config.beta);
  summary["direction"] = std::string(to_string(options.config.direction));
  summary["seed"] = options.config.seed;
  summary["mean_seam_metric"] = json::object();
  summary["mean_seam_metric"][std::string(to_string(options.config.mode))] =
      optional_double(report.mean_seam_metric);

  report.manifest_path = out_dir / kOutputManifest;
  report.summary_path = out_dir / kSummaryFile;
  write_text_atomic(report.manifest_path, manifest_text);
  write_text_atomic(report.summary_path, summary.dump(2) + "\n");

  if (report.succeeded == 0) {
    throw Error(ErrorKind::invalid_argument,
                "every batch entry failed; first error: " + report.failures.front().reason);
  }
  return report;
}

VerifyReport verify_batch(const fs::path& out_dir, unsigned jobs) {
  const auto bytes = read_file(out_dir / kOutputManifest);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::format,
                  "output manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  VerifyReport report;
  report.checked = records.size();
  std::vector<std::string> problems(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t k) {
    const json& record = records[k];
    const std::string id = record.value("id", std::string("<unknown>"));
    try {
      if (record.at("label") != "malignant") {
        problems[k] = id + ": label is not malignant";
        return;
      }
      const RecordedSample recorded = recorded_from_json(record.at("provenance"));
      const SynthesizedSample sample =
          synthesize_pair(recorded.benign, recorded.donor, recorded.config);
      const json regenerated =
          provenance_json({recorded.provenance.at("sample_index").get<std::size_t>(),
                           &recorded.benign, &recorded.donor, recorded.config},
                          sample.provenance, recorded.provenance.at("run_seed").get<std::uint64_t>());
      if (regenerated != recorded.provenance) {
        problems[k] = id + ": provenance differs on regeneration";
        return;
      }
      const auto expected = encode_image(sample.image, RasterFormat::png);
      const auto stored = read_file(out_dir / record.at("image").get<std::string>());
      if (expected != stored) problems[k] = id + ": image bytes differ on regeneration";
    } catch (const std::exception& e) {
      problems[k] = id + ": " + e.what();
    }
  });
  for (auto& p : problems) {
    if (!p.empty()) report.mismatches.push_back(std::move(p));
  }
  return report;
}

std::vector<ModeSummary> compare_modes(const Manifest& manifest, const SynthesisConfig& base,
                                       unsigned jobs) {
  base.validate();
  const auto pairs = round_robin_pairs(manifest);
  std::vector<ModeSummary> out;
  for (auto mode : {SynthesisMode::hard_cutmix, SynthesisMode::fda_cutmix,
                    SynthesisMode::soft_adapted}) {
    ModeSummary summary{mode, 0, 0.0,
                        std::vector<double>(pairs.size(), std::numeric_limits<double>::quiet_NaN())};
    parallel_for(pairs.size(), jobs, [&](std::size_t k) {
      SynthesisConfig cfg = base;
      cfg.mode = mode;
      cfg.seed = derive_sample_seed(base.seed, pairs[k].index);
      try {
        const auto sample = synthesize_pair(*pairs[k].benign, *pairs[k].donor, cfg);
        if (sample.provenance.seam_metric) summary.per_sample[k] = *sample.provenance.seam_metric;
      } catch (const Error&) {
        // Leave NaN; the entry is reported as unmeasured.
      }
    });
    double total = 0.0;
    for (double v : summary.per_sample) {
      if (std::isnan(v)) continue;
      total += v;
      ++summary.samples;
    }
    summary.mean_seam = summary.samples ? total / static_cast<double>(summary.samples) : 0.0;
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace mammosynth

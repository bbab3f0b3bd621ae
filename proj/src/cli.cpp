#include "mammosynth/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mammosynth/batch.hpp"
#include "mammosynth/error.hpp"
#include "mammosynth/fourier.hpp"
#include "mammosynth/image_io.hpp"
#include "mammosynth/pipeline.hpp"
#include "mammosynth/region_selection.hpp"
#include "mammosynth/soft_mask.hpp"

namespace mammosynth {
namespace {

namespace fs = std::filesystem;

constexpr const char* kOutDirEnv = "MAMMOSYNTH_OUT_DIR";

// Flags shared by synthesize, batch and report.
struct SynthesisFlags {
  std::string mode = "soft_adapted";
  std::string beta = "0.05";
  std::string direction = "benign_to_malignant_style";
  std::string mask_mode = "sampled";
  std::optional<std::uint64_t> seed;
  int margin = 0;

  void add_to(CLI::App* cmd, bool with_mode) {
    if (with_mode) {
      cmd->add_option("--mode", mode, "hard_cutmix | fda_cutmix | soft_adapted")
          ->capture_default_str();
    }
    cmd->add_option("--beta", beta, "low-frequency fraction in [0,0.5), or 'off'")
        ->capture_default_str();
    cmd->add_option("--direction", direction,
                    "benign_to_malignant_style | malignant_to_benign_style")
        ->capture_default_str();
    cmd->add_option("--mask-mode", mask_mode, "sampled | deterministic")->capture_default_str();
    cmd->add_option("--seed", seed, "run seed (required for sampled masks)");
    cmd->add_option("--margin", margin, "border margin in pixels")->capture_default_str();
  }

  SynthesisConfig config() const {
    SynthesisConfig cfg;
    cfg.mode = parse_mode(mode);
    cfg.direction = parse_direction(direction);
    cfg.mask_mode = parse_mask_mode(mask_mode);
    if (beta == "off" || beta == "none") {
      cfg.beta = std::nullopt;
    } else {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(beta, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != beta.size()) {
        throw Error(ErrorKind::invalid_argument, "--beta expects a number or 'off', got " + beta);
      }
      cfg.beta = value;
    }
    cfg.border_margin = margin;
    cfg.validate();
    const bool needs_seed =
        cfg.mask_mode == MaskMode::sampled && cfg.mode == SynthesisMode::soft_adapted;
    if (needs_seed && !seed) {
      throw Error(ErrorKind::invalid_argument, "--seed is required for sampled soft masks");
    }
    cfg.seed = seed.value_or(0);
    return cfg;
  }
};

RegionSpec parse_bbox(const std::string& text) {
  RegionSpec r;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d%c", &r.top, &r.left, &r.height, &r.width, &tail) !=
      4) {
    throw Error(ErrorKind::invalid_argument, "--bbox expects top,left,height,width; got " + text);
  }
  return r;
}

void require_extension(const fs::path& path, std::initializer_list<RasterFormat> allowed) {
  const RasterFormat f = format_for_path(path);
  for (RasterFormat a : allowed) {
    if (a == f) return;
  }
  throw Error(ErrorKind::invalid_argument, "unsupported output file type: " + path.string());
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  throw Error(ErrorKind::invalid_argument,
              std::string("--out is required (or set ") + kOutDirEnv + ")");
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Saliency-guided, spectrally adapted, soft-blended lesion synthesis for mammograms",
               "mammosynth"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log one line per sample to stderr");

  // select-region
  auto* select_cmd = app.add_subcommand("select-region", "find the highest-saliency window");
  std::string select_saliency;
  int select_h = 0;
  int select_w = 0;
  bool bruteforce = false;
  select_cmd->add_option("--saliency", select_saliency, "saliency map (.pfm)")->required();
  select_cmd->add_option("--height", select_h, "window height")->required();
  select_cmd->add_option("--width", select_w, "window width")->required();
  select_cmd->add_flag("--bruteforce", bruteforce, "use the direct-summation reference search");

  // fda
  auto* fda_cmd = app.add_subcommand("fda", "low-frequency amplitude transfer between patches");
  std::string fda_source, fda_target, fda_out;
  double fda_beta = 0.05;
  fda_cmd->add_option("--source", fda_source, "content patch")->required();
  fda_cmd->add_option("--target", fda_target, "style patch")->required();
  fda_cmd->add_option("--beta", fda_beta, "window fraction in [0,0.5)")->capture_default_str();
  fda_cmd->add_option("--out", fda_out, "output image (.png/.pgm/.pfm)")->required();

  // mask
  auto* mask_cmd = app.add_subcommand("mask", "emit a Gaussian soft mask as a float map");
  int mask_h = 0;
  int mask_w = 0;
  std::optional<std::uint64_t> mask_seed;
  bool mask_deterministic = false;
  std::string mask_out;
  mask_cmd->add_option("--height", mask_h, "mask height")->required();
  mask_cmd->add_option("--width", mask_w, "mask width")->required();
  mask_cmd->add_option("--seed", mask_seed, "sampling seed");
  mask_cmd->add_flag("--deterministic", mask_deterministic, "centered peak, fixed spread");
  mask_cmd->add_option("--out", mask_out, "output float map (.pfm)")->required();

  // synthesize
  auto* synth_cmd = app.add_subcommand("synthesize", "synthesize one malignant sample");
  std::string s_benign, s_saliency, s_donor, s_bbox, s_breast, s_out, s_prov;
  std::string s_benign_id = "benign", s_donor_id = "donor", s_lesion = "unspecified";
  SynthesisFlags s_flags;
  synth_cmd->add_option("--benign", s_benign, "benign image")->required();
  synth_cmd->add_option("--saliency", s_saliency, "saliency map (.pfm)")->required();
  synth_cmd->add_option("--donor", s_donor, "malignant donor image")->required();
  synth_cmd->add_option("--bbox", s_bbox, "donor lesion box top,left,height,width")->required();
  synth_cmd->add_option("--breast-mask", s_breast, "optional tissue mask image");
  synth_cmd->add_option("--benign-id", s_benign_id)->capture_default_str();
  synth_cmd->add_option("--donor-id", s_donor_id)->capture_default_str();
  synth_cmd->add_option("--lesion", s_lesion)->capture_default_str();
  synth_cmd->add_option("--out", s_out, "output image (.png/.pgm/.pfm)")->required();
  synth_cmd->add_option("--provenance", s_prov, "write the provenance record as JSON");
  s_flags.add_to(synth_cmd, true);

  // batch
  auto* batch_cmd = app.add_subcommand("batch", "synthesize one sample per benign manifest entry");
  std::string b_manifest, b_out;
  unsigned b_jobs = 0;
  SynthesisFlags b_flags;
  batch_cmd->add_option("--manifest", b_manifest, "dataset manifest (JSON Lines)")->required();
  batch_cmd->add_option("--out", b_out, "output directory");
  batch_cmd->add_option("--jobs", b_jobs, "worker threads (0 = all cores)")->capture_default_str();
  b_flags.add_to(batch_cmd, true);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "regenerate a batch from provenance and compare");
  std::string v_out;
  unsigned v_jobs = 0;
  verify_cmd->add_option("--out", v_out, "batch output directory");
  verify_cmd->add_option("--jobs", v_jobs, "worker threads (0 = all cores)")->capture_default_str();

  // report
  auto* report_cmd = app.add_subcommand("report", "seam metric comparison across modes");
  std::string r_manifest;
  unsigned r_jobs = 0;
  SynthesisFlags r_flags;
  report_cmd->add_option("--manifest", r_manifest, "dataset manifest (JSON Lines)")->required();
  report_cmd->add_option("--jobs", r_jobs, "worker threads (0 = all cores)")->capture_default_str();
  r_flags.add_to(report_cmd, false);

  // pseudo-saliency
  auto* pseudo_cmd = app.add_subcommand("pseudo-saliency", "blurred-intensity surrogate saliency");
  std::string p_image, p_out;
  double p_radius = 8.0;
  pseudo_cmd->add_option("--image", p_image, "input image")->required();
  pseudo_cmd->add_option("--radius", p_radius, "Gaussian sigma in pixels")->capture_default_str();
  pseudo_cmd->add_option("--out", p_out, "output float map (.pfm)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << one_line(e.what()) << "\n";
    return kExitConfigError;
  }

  try {
    if (select_cmd->parsed()) {
      const SaliencyMap map = load_saliency(select_saliency);
      const SelectionResult r = bruteforce ? select_region_bruteforce(map, select_h, select_w)
                                           : select_region(map, select_h, select_w);
      char line[96];
      std::snprintf(line, sizeof(line), "%d %d %.17g\n", r.region.top, r.region.left, r.score);
      out << line;
      return kExitOk;
    }

    if (fda_cmd->parsed()) {
      require_extension(fda_out, {RasterFormat::png, RasterFormat::pgm, RasterFormat::pfm});
      const GrayImage source = load_image(fda_source);
      const GrayImage target = load_image(fda_target);
      save_image(spectral_transfer(source, target, fda_beta), fda_out);
      return kExitOk;
    }

    if (mask_cmd->parsed()) {
      require_extension(mask_out, {RasterFormat::pfm});
      SoftMaskParams params;
      if (mask_deterministic) {
        params = centered_mask_params(mask_h, mask_w);
      } else {
        if (!mask_seed) {
          throw Error(ErrorKind::invalid_argument, "--seed is required unless --deterministic");
        }
        Rng rng(*mask_seed);
        params = sample_mask_params(mask_h, mask_w, rng);
      }
      const SoftMask mask = gaussian_soft_mask(params);
      std::vector<float> values(mask.weights().begin(), mask.weights().end());
      save_saliency(SaliencyMap(mask.height(), mask.width(), std::move(values)), mask_out);
      if (verbose) {
        err << "mask mu_h=" << params.mu_h << " mu_w=" << params.mu_w
            << " sigma=" << params.sigma << "\n";
      }
      return kExitOk;
    }

    if (synth_cmd->parsed()) {
      const SynthesisConfig cfg = s_flags.config();
      require_extension(s_out, {RasterFormat::png, RasterFormat::pgm, RasterFormat::pfm});
      const BenignEntry benign{s_benign_id, s_benign, s_saliency,
                               s_breast.empty() ? std::nullopt
                                                : std::optional<fs::path>(s_breast)};
      const DonorEntry donor{s_donor_id, s_donor, parse_bbox(s_bbox), s_lesion};
      const SynthesizedSample sample = synthesize_pair(benign, donor, cfg);
      save_image(sample.image, s_out);
      if (!s_prov.empty()) {
        const Provenance& p = sample.provenance;
        nlohmann::json j;
        j["label"] = std::string(SynthesizedSample::label);
        j["region"] = {p.region.top, p.region.left, p.region.height, p.region.width};
        j["region_score"] = p.region_score;
        j["mode"] = std::string(to_string(p.mode));
        j["beta"] = p.beta ? nlohmann::json(*p.beta) : nlohmann::json(nullptr);
        j["direction"] = std::string(to_string(p.direction));
        j["seed"] = p.seed;
        j["mask"] = p.mask ? nlohmann::json{{"mu_h", p.mask->mu_h},
                                            {"mu_w", p.mask->mu_w},
                                            {"sigma", p.mask->sigma}}
                           : nlohmann::json(nullptr);
        j["seam_metric"] = p.seam_metric ? nlohmann::json(*p.seam_metric) : nlohmann::json(nullptr);
        const std::string text = j.dump(2) + "\n";
        write_file_atomic(s_prov, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                            text.size()));
      }
      if (verbose) {
        err << "synthesized region=(" << sample.provenance.region.top << ","
            << sample.provenance.region.left << ") label=malignant\n";
      }
      return kExitOk;
    }

    if (batch_cmd->parsed()) {
      BatchOptions options;
      options.config = b_flags.config();
      options.jobs = b_jobs;
      options.log_samples = verbose;
      const fs::path dir = output_dir(b_out);
      const Manifest manifest = load_manifest(b_manifest);
      round_robin_pairs(manifest);  // rejects empty manifests before anything is written
      const BatchReport report = run_batch(manifest, options, dir);
      out << "samples " << report.succeeded << "/" << report.attempted << " written to "
          << dir.string() << "\n";
      for (const auto& f : report.failures) {
        err << "entry " << f.index << " (" << f.benign_id << " + " << f.donor_id
            << ") failed: " << one_line(f.reason) << "\n";
      }
      return report.failures.empty() ? kExitOk : kExitPartialFailure;
    }

    if (verify_cmd->parsed()) {
      const VerifyReport report = verify_batch(output_dir(v_out), v_jobs);
      for (const auto& m : report.mismatches) err << "mismatch " << one_line(m) << "\n";
      out << "verified " << (report.checked - report.mismatches.size()) << "/" << report.checked
          << "\n";
      return report.ok() ? kExitOk : kExitPartialFailure;
    }

    if (report_cmd->parsed()) {
      SynthesisConfig cfg = r_flags.config();
      const Manifest manifest = load_manifest(r_manifest);
      const auto rows = compare_modes(manifest, cfg, r_jobs);
      out << std::left << std::setw(14) << "mode" << std::right << std::setw(9) << "samples"
          << std::setw(14) << "mean_seam" << "\n";
      for (const auto& row : rows) {
        out << std::left << std::setw(14) << to_string(row.mode) << std::right << std::setw(9)
            << row.samples << std::setw(14) << std::fixed << std::setprecision(6)
            << row.mean_seam << "\n";
      }
      return kExitOk;
    }

    if (pseudo_cmd->parsed()) {
      require_extension(p_out, {RasterFormat::pfm});
      save_saliency(pseudo_saliency(load_image(p_image), p_radius), p_out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << one_line(e.what()) << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error[internal]: " << one_line(e.what()) << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace mammosynth

#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mammosynth/batch.hpp"
#include "mammosynth/cli.hpp"
#include "mammosynth/image_io.hpp"
#include "test_support.hpp"

using namespace mammosynth;
using mammosynth::testing::TempDir;
using mammosynth::testing::fixture_dir;

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mammosynth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t file_count(const fs::path& dir) {
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  return n;
}

}  // namespace

TEST_CASE("help and usage errors") {
  const Run help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("batch") != std::string::npos);
  CHECK(cli({"batch", "--help"}).code == kExitOk);

  TempDir out;
  const Run bad = cli({"batch", "--manifest", (fixture_dir() / "manifest.jsonl").string(), "--out",
                       out.path().string(), "--seed", "1", "--bogus"});
  CHECK(bad.code == kExitConfigError);
  CHECK(bad.err.rfind("error[usage]: ", 0) == 0);
  CHECK(bad.err.find('\n') == bad.err.size() - 1);
  CHECK(file_count(out.path()) == 0);
  CHECK(cli({}).code == kExitConfigError);
}

TEST_CASE("batch via the command line") {
  TempDir out;
  const fs::path manifest = fixture_dir() / "manifest.jsonl";
  const Run missing_seed = cli({"batch", "--manifest", manifest.string(), "--out", out.path().string()});
  CHECK(missing_seed.code == kExitConfigError);
  CHECK(missing_seed.err.find("--seed") != std::string::npos);
  CHECK(file_count(out.path()) == 0);

  const Run ok = cli({"batch", "--manifest", manifest.string(), "--out", out.path().string(), "--seed",
                      "9", "--jobs", "2"});
  CHECK(ok.code == kExitOk);
  CHECK(file_count(out.path()) == 8);
  CHECK(fs::exists(out / "syn_00005.png"));

  const Run verify = cli({"verify", "--out", out.path().string()});
  CHECK(verify.code == kExitOk);
  CHECK(verify.out == "verified 6/6\n");

  const Run bad_beta = cli({"batch", "--manifest", manifest.string(), "--out", out.path().string(),
                            "--seed", "9", "--beta", "0.7"});
  CHECK(bad_beta.code == kExitConfigError);
  CHECK(bad_beta.err.rfind("error[invalid_argument]: ", 0) == 0);

  const Run no_manifest = cli({"batch", "--manifest", (out / "nope.jsonl").string(), "--out",
                               out.path().string(), "--seed", "1"});
  CHECK(no_manifest.code == kExitConfigError);
  CHECK(no_manifest.err.rfind("error[io]: ", 0) == 0);
}

TEST_CASE("partial batch failure exits with 1") {
  TempDir work;
  const Manifest m = load_manifest(fixture_dir() / "manifest.jsonl");
  std::string text;
  for (std::size_t k = 0; k < m.benign.size(); ++k) {
    const std::string image = k == 1 ? (work / "missing.png").string() : m.benign[k].image.string();
    text += "{\"id\": \"" + m.benign[k].id + "\", \"image\": \"" + image + "\", \"saliency\": \"" +
            m.benign[k].saliency.string() + "\"}\n";
  }
  const auto& d = m.donors[0];
  text += "{\"id\": \"d\", \"image\": \"" + d.image.string() + "\", \"bbox\": [" +
          std::to_string(d.bbox.top) + "," + std::to_string(d.bbox.left) + "," +
          std::to_string(d.bbox.height) + "," + std::to_string(d.bbox.width) + "]}\n";
  write_file_atomic(work / "m.jsonl",
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  const Run r = cli({"batch", "--manifest", (work / "m.jsonl").string(), "--out",
                     (work / "out").string(), "--seed", "3", "--mode", "hard_cutmix"});
  CHECK(r.code == kExitPartialFailure);
  CHECK(r.out.find("samples 5/6") != std::string::npos);
  CHECK(r.err.find("benign_1") != std::string::npos);
}

TEST_CASE("select-region prints position and score") {
  TempDir tmp;
  std::vector<float> v(6 * 6, 0.0f);
  v[4 * 6 + 5] = 0.5f;
  save_saliency(SaliencyMap(6, 6, v), tmp / "s.pfm");
  const Run fast = cli({"select-region", "--saliency", (tmp / "s.pfm").string(), "--height", "2",
                        "--width", "3"});
  CHECK(fast.code == kExitOk);
  CHECK(fast.out == "3 3 0.5\n");
  const Run slow = cli({"select-region", "--saliency", (tmp / "s.pfm").string(), "--height", "2",
                        "--width", "3", "--bruteforce"});
  CHECK(slow.out == fast.out);
  const Run big = cli({"select-region", "--saliency", (tmp / "s.pfm").string(), "--height", "7",
                       "--width", "3"});
  CHECK(big.code == kExitConfigError);
}

TEST_CASE("mask, fda, pseudo-saliency and synthesize commands") {
  TempDir tmp;
  CHECK(cli({"mask", "--height", "9", "--width", "11", "--deterministic", "--out",
             (tmp / "m.pfm").string()})
            .code == kExitOk);
  const SaliencyMap m = load_saliency(tmp / "m.pfm");
  CHECK(m.height() == 9);
  CHECK(m(4, 5) == doctest::Approx(1.0));
  CHECK(cli({"mask", "--height", "9", "--width", "11", "--out", (tmp / "m2.pfm").string()}).code ==
        kExitConfigError);
  CHECK(cli({"mask", "--height", "9", "--width", "11", "--seed", "1", "--out",
             (tmp / "m.png").string()})
            .code == kExitConfigError);

  const fs::path benign = fixture_dir() / "benign_0.png";
  const fs::path donor = fixture_dir() / "donor_0.png";
  CHECK(cli({"fda", "--source", benign.string(), "--target", donor.string(), "--out",
             (tmp / "f.png").string()})
            .code == kExitOk);
  CHECK(load_image(tmp / "f.png").height() == 128);

  CHECK(cli({"pseudo-saliency", "--image", benign.string(), "--radius", "4", "--out",
             (tmp / "p.pfm").string()})
            .code == kExitOk);
  CHECK(load_saliency(tmp / "p.pfm").max_value() == 1.0f);

  const Run s = cli({"synthesize", "--benign", benign.string(), "--saliency",
                     (fixture_dir() / "benign_0_saliency.pfm").string(), "--donor", donor.string(),
                     "--bbox", "40,36,24,24", "--seed", "5", "--out", (tmp / "s.png").string(),
                     "--provenance", (tmp / "s.json").string()});
  CHECK(s.code == kExitOk);
  CHECK(fs::exists(tmp / "s.png"));
  CHECK(fs::exists(tmp / "s.json"));
  const Run bad_box = cli({"synthesize", "--benign", benign.string(), "--saliency",
                           (fixture_dir() / "benign_0_saliency.pfm").string(), "--donor",
                           donor.string(), "--bbox", "40,36,24", "--seed", "5", "--out",
                           (tmp / "t.png").string()});
  CHECK(bad_box.code == kExitConfigError);
  CHECK_FALSE(fs::exists(tmp / "t.png"));
}

TEST_CASE("output directory falls back to the environment") {
  TempDir tmp;
  ::setenv("MAMMOSYNTH_OUT_DIR", tmp.path().string().c_str(), 1);
  const Run r = cli({"batch", "--manifest", (fixture_dir() / "manifest.jsonl").string(), "--seed",
                     "2", "--mode", "hard_cutmix"});
  ::unsetenv("MAMMOSYNTH_OUT_DIR");
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(tmp / std::string(kOutputManifest)));
  CHECK(cli({"verify"}).code == kExitConfigError);
}

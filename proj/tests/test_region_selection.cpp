#include <algorithm>
#include <chrono>

#include "doctest.h"
#include "mammosynth/error.hpp"
#include "mammosynth/region_selection.hpp"
#include "test_support.hpp"

using namespace mammosynth;
using mammosynth::testing::naive_region_sum;
using mammosynth::testing::random_saliency;

namespace {

SaliencyMap hot_pixel(int h, int w, int p, int q, float value) {
  std::vector<float> v(static_cast<std::size_t>(h) * w, 0.0f);
  v[static_cast<std::size_t>(p) * w + q] = value;
  return SaliencyMap(h, w, std::move(v));
}

}  // namespace

TEST_CASE("integral image basics") {
  const IntegralImage zero = build_integral(SaliencyMap(5, 3));
  for (int h = 0; h <= 5; ++h) {
    for (int w = 0; w <= 3; ++w) CHECK(zero.entry(h, w) == 0.0);
  }
  const IntegralImage ones = build_integral(SaliencyMap(4, 4, 1.0f));
  CHECK(ones.entry(4, 4) == 16.0);
  CHECK(ones.entry(0, 4) == 0.0);
  CHECK(ones.entry(2, 3) == 6.0);
}

TEST_CASE("integral image is nondecreasing along rows and columns") {
  auto& rng = mammosynth::testing::test_rng();
  const SaliencyMap map = random_saliency(9, 13, rng);
  const IntegralImage ii(map);
  for (int h = 0; h <= 9; ++h) {
    for (int w = 0; w <= 13; ++w) {
      if (h > 0) CHECK(ii.entry(h, w) >= ii.entry(h - 1, w));
      if (w > 0) CHECK(ii.entry(h, w) >= ii.entry(h, w - 1));
    }
  }
}

TEST_CASE("region_intensity matches the direct double sum") {
  auto& rng = mammosynth::testing::test_rng();
  SUBCASE("random 8x8, 20 rectangles") {
    const SaliencyMap map = random_saliency(8, 8, rng);
    const IntegralImage ii(map);
    std::uniform_int_distribution<int> pick(0, 7);
    for (int t = 0; t < 20; ++t) {
      const int top = pick(rng);
      const int left = pick(rng);
      const int h = 1 + std::uniform_int_distribution<int>(0, 7 - top)(rng);
      const int w = 1 + std::uniform_int_distribution<int>(0, 7 - left)(rng);
      const RegionSpec r{top, left, h, w};
      const double oracle = naive_region_sum(map, top, left, h, w);
      CHECK(std::abs(region_intensity(ii, r) - oracle) <= 1e-6 * r.area());
      CHECK(std::abs(region_intensity(map, r) - oracle) <= 1e-6 * r.area());
    }
  }
  SUBCASE("random 16x16, region (3,5,4,6)") {
    const SaliencyMap map = random_saliency(16, 16, rng);
    const double oracle = naive_region_sum(map, 3, 5, 4, 6);
    CHECK(region_intensity(build_integral(map), {3, 5, 4, 6}) == doctest::Approx(oracle).epsilon(1e-12));
  }
  SUBCASE("uniform map and single pixel") {
    const SaliencyMap c(10, 12, 0.25f);
    CHECK(region_intensity(build_integral(c), {2, 3, 5, 7}) == doctest::Approx(0.25 * 35));
    const SaliencyMap m = random_saliency(6, 6, rng);
    CHECK(region_intensity(m, {4, 2, 1, 1}) == m(4, 2));
    CHECK(region_intensity(build_integral(m), {4, 2, 1, 1}) == doctest::Approx(m(4, 2)));
  }
  CHECK_THROWS_AS(region_intensity(SaliencyMap(4, 4), {2, 2, 3, 1}), Error);
  CHECK_THROWS_AS(region_intensity(build_integral(SaliencyMap(4, 4)), {0, -1, 1, 1}), Error);
}

TEST_CASE("select_region tie-breaking and small cases") {
  const SaliencyMap uniform(12, 9, 0.3f);
  for (auto fn : {+[](const SaliencyMap& m, int h, int w) { return select_region(m, h, w); },
                  +[](const SaliencyMap& m, int h, int w) { return select_region_bruteforce(m, h, w); }}) {
    const SelectionResult r = fn(uniform, 4, 3);
    CHECK(r.region == RegionSpec{0, 0, 4, 3});

    const SelectionResult a = fn(SaliencyMap(2, 2, std::vector<float>{1, 2, 3, 4}), 1, 1);
    CHECK(a.region == RegionSpec{1, 1, 1, 1});
    CHECK(a.score == 4.0);
    const SelectionResult b = fn(SaliencyMap(2, 2, std::vector<float>{4, 2, 3, 4}), 1, 1);
    CHECK(b.region == RegionSpec{0, 0, 1, 1});
    CHECK(b.score == 4.0);

    const SelectionResult z = fn(SaliencyMap(5, 5), 2, 2);
    CHECK(z.region == RegionSpec{0, 0, 2, 2});
    CHECK(z.score == 0.0);
  }
}

TEST_CASE("single hot pixel selects the minimal covering corner") {
  const int h = 10;
  const int w = 11;
  const int points[][2] = {{5, 6}, {0, 0}, {1, 9}, {9, 10}, {2, 2}, {9, 0}};
  for (const auto& pq : points) {
    const int p = pq[0];
    const int q = pq[1];
    const SaliencyMap map = hot_pixel(h, w, p, q, 0.7f);
    const int ei = std::min(std::max(0, p - 2), h - 3);
    const int ej = std::min(std::max(0, q - 2), w - 3);
    for (const SelectionResult& r : {select_region(map, 3, 3), select_region_bruteforce(map, 3, 3)}) {
      CHECK(r.region == RegionSpec{ei, ej, 3, 3});
      CHECK(r.score == doctest::Approx(0.7f));
    }
  }
}

TEST_CASE("select_region agrees with the brute-force search on random maps") {
  auto& rng = mammosynth::testing::test_rng();
  for (int trial = 0; trial < 50; ++trial) {
    const SaliencyMap map = random_saliency(32, 32, rng);
    const SelectionResult fast = select_region(map, 5, 7);
    const SelectionResult slow = select_region_bruteforce(map, 5, 7);
    CHECK(fast.region == slow.region);
    CHECK(std::abs(fast.score - slow.score) <= 1e-6);
    CHECK(fast.score == doctest::Approx(region_intensity(map, fast.region)).epsilon(1e-12));
  }
}

TEST_CASE("select_region is exact on quantized maps with many ties") {
  auto& rng = mammosynth::testing::test_rng();
  std::uniform_int_distribution<int> level(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 6 + trial % 9;
    const int w = 5 + trial % 11;
    std::vector<float> v(static_cast<std::size_t>(h) * w);
    for (auto& x : v) x = 0.25f * level(rng);  // dyadic, so equal level sums are exact ties
    const SaliencyMap map(h, w, std::move(v));
    const int rh = 1 + trial % 4;
    const int rw = 1 + trial % 3;
    // Independent oracle: exact argmax over integer level sums, row-major first.
    long best = -1;
    RegionSpec expected;
    for (int i = 0; i + rh <= h; ++i) {
      for (int j = 0; j + rw <= w; ++j) {
        long s = 0;
        for (int m = i; m < i + rh; ++m) {
          for (int n = j; n < j + rw; ++n) s += std::lround(map(m, n) * 4.0f);
        }
        if (best < s) {
          best = s;
          expected = {i, j, rh, rw};
        }
      }
    }
    CHECK(select_region(map, rh, rw).region == expected);
  }
}

TEST_CASE("select_region handles extreme dynamic range") {
  std::vector<float> v(8 * 8, 1e-40f);  // subnormal floor forces the double-table path
  v[3 * 8 + 4] = 1e30f;
  v[6 * 8 + 1] = 1e30f;
  const SaliencyMap map(8, 8, v);
  const SelectionResult fast = select_region(map, 2, 2);
  const SelectionResult slow = select_region_bruteforce(map, 2, 2);
  CHECK(fast.region == slow.region);
  CHECK(fast.score == slow.score);
}

TEST_CASE("adding saliency inside the selected region keeps the selection") {
  auto& rng = mammosynth::testing::test_rng();
  std::uniform_real_distribution<float> delta(0.0f, 0.5f);
  for (int trial = 0; trial < 25; ++trial) {
    const SaliencyMap map = random_saliency(20, 24, rng);
    const SelectionResult before = select_region(map, 4, 5);
    std::vector<float> v(map.values().begin(), map.values().end());
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 5; ++n) {
        v[static_cast<std::size_t>(before.region.top + m) * 24 + before.region.left + n] += delta(rng);
      }
    }
    CHECK(select_region(SaliencyMap(20, 24, std::move(v)), 4, 5).region == before.region);
  }
}

TEST_CASE("shifting the map shifts a strictly dominant optimum") {
  auto& rng = mammosynth::testing::test_rng();
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int h = 18;
    const int w = 18;
    // Sparse map: zero border so shifts stay in bounds.
    std::vector<float> v(h * w, 0.0f);
    std::uniform_real_distribution<float> val(0.0f, 1.0f);
    for (int m = 4; m < 12; ++m) {
      for (int n = 4; n < 12; ++n) v[m * w + n] = val(rng);
    }
    const SaliencyMap map(h, w, v);
    const SelectionResult base = select_region_bruteforce(map, 3, 3);
    // Require strict dominance so ties cannot move the answer.
    int ties = 0;
    for (int i = 0; i + 3 <= h; ++i) {
      for (int j = 0; j + 3 <= w; ++j) {
        ties += region_intensity(map, {i, j, 3, 3}) >= base.score - 1e-9;
      }
    }
    if (ties != 1) continue;
    const int di = 1 + trial % 3;
    const int dj = 2 - trial % 3;
    std::vector<float> shifted(h * w, 0.0f);
    for (int m = 0; m + di < h; ++m) {
      for (int n = 0; n + dj < w; ++n) shifted[(m + di) * w + n + dj] = v[m * w + n];
    }
    const SelectionResult moved = select_region(SaliencyMap(h, w, shifted), 3, 3);
    CHECK(moved.region.top == base.region.top + di);
    CHECK(moved.region.left == base.region.left + dj);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("selection options: margin and breast mask") {
  auto& rng = mammosynth::testing::test_rng();
  const SaliencyMap hot = hot_pixel(12, 12, 0, 0, 1.0f);
  SelectionOptions margin;
  margin.border_margin = 2;
  const SelectionResult r = select_region(hot, 3, 3, margin);
  CHECK(r.region.top >= 2);
  CHECK(r.region.left >= 2);
  CHECK(r.region.top + 3 <= 10);
  margin.border_margin = 5;
  CHECK_THROWS_AS(select_region(hot, 3, 3, margin), Error);

  // Background on the left half: selection must avoid it even though saliency is there.
  const SaliencyMap map = random_saliency(10, 20, rng);
  std::vector<float> mask(10 * 20, 1.0f);
  std::vector<float> sal(map.values().begin(), map.values().end());
  for (int m = 0; m < 10; ++m) {
    for (int n = 0; n < 10; ++n) {
      mask[m * 20 + n] = 0.0f;
      sal[m * 20 + n] += 5.0f;
    }
  }
  const GrayImage breast(10, 20, mask);
  SelectionOptions masked;
  masked.breast_mask = &breast;
  const SelectionResult chosen = select_region(SaliencyMap(10, 20, sal), 4, 4, masked);
  // 10% of 16 pixels allows one background pixel at most: the window cannot start left of column 10.
  CHECK(chosen.region.left >= 10);

  const GrayImage all_background(10, 20, 0.0f);
  masked.breast_mask = &all_background;
  CHECK_THROWS_AS(select_region(map, 4, 4, masked), Error);
}

TEST_CASE("select_region rejects oversized windows") {
  CHECK_THROWS_AS(select_region(SaliencyMap(4, 4), 5, 1), Error);
  CHECK_THROWS_AS(select_region_bruteforce(SaliencyMap(4, 4), 1, 5), Error);
  CHECK_THROWS_AS(select_region(SaliencyMap(4, 4), 0, 1), Error);
}

TEST_CASE("pseudo_saliency") {
  SUBCASE("constant image gives an all-zero map") {
    const SaliencyMap s = pseudo_saliency(GrayImage(9, 7, 0.4f), 2.0);
    for (float v : s.values()) CHECK(v == 0.0f);
  }
  SUBCASE("radius 0 keeps a single bright pixel") {
    std::vector<float> px(6 * 6, 0.0f);
    px[2 * 6 + 3] = 0.9f;
    const SaliencyMap s = pseudo_saliency(GrayImage(6, 6, px), 0.0);
    for (int m = 0; m < 6; ++m) {
      for (int n = 0; n < 6; ++n) CHECK(s(m, n) == (m == 2 && n == 3 ? 1.0f : 0.0f));
    }
  }
  SUBCASE("bright disk attracts the maximum") {
    const int h = 64;
    const int w = 80;
    std::vector<float> px(h * w, 0.1f);
    for (int m = 0; m < h; ++m) {
      for (int n = 0; n < w; ++n) {
        if ((m - 40) * (m - 40) + (n - 22) * (n - 22) <= 64) px[m * w + n] = 0.9f;
      }
    }
    const SaliencyMap s = pseudo_saliency(GrayImage(h, w, px), 3.0);
    const auto it = std::max_element(s.values().begin(), s.values().end());
    const auto k = static_cast<int>(it - s.values().begin());
    const int m = k / w;
    const int n = k % w;
    CHECK((m - 40) * (m - 40) + (n - 22) * (n - 22) <= 64);
    CHECK(*it == 1.0f);
    CHECK(s.min_value() == 0.0f);
  }
  CHECK_THROWS_AS(pseudo_saliency(GrayImage(3, 3), -1.0), Error);
}

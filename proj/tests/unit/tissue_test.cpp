// Copyright 2026 The mitocount Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "mitocount/morphology.hpp"
#include "mitocount/synthetic.hpp"
#include "mitocount/tissue.hpp"
#include "oracles.hpp"

namespace mitocount {
namespace {

std::vector<std::uint64_t> empty_hist() { return std::vector<std::uint64_t>(256, 0); }

TEST(LabLightness, Examples) {
  const RgbImage img(3, 1, std::vector<Rgb>{{255, 255, 255}, {0, 0, 0}, {119, 119, 119}});
  const auto l = rgb_to_lab_l(img);
  EXPECT_EQ(l(0, 0), 255);
  EXPECT_EQ(l(1, 0), 0);
  // L* of sRGB 119 gray is 50.04, i.e. 127.6 on the 0..255 scale.
  EXPECT_EQ(l(2, 0), 128);
  EXPECT_NEAR(lab_lightness({119, 119, 119}), 50.04, 0.01);
}

TEST(Otsu, TwoSpikes) {
  auto h = empty_hist();
  h[50] = 100;
  h[200] = 100;
  const auto r = otsu_threshold(h);
  EXPECT_EQ(r.threshold, 50);
  EXPECT_FALSE(r.degenerate);
}

TEST(Otsu, SingleBinIsDegenerate) {
  auto h = empty_hist();
  h[7] = 1234;
  const auto r = otsu_threshold(h);
  EXPECT_EQ(r.threshold, 7);
  EXPECT_TRUE(r.degenerate);
}

TEST(Otsu, RejectsEmptyOrMisSized) {
  EXPECT_THROW((void)otsu_threshold(empty_hist()), std::invalid_argument);
  std::vector<std::uint64_t> short_hist(255, 1);
  EXPECT_THROW((void)otsu_threshold(short_hist), std::invalid_argument);
}

TEST(Otsu, MatchesExhaustiveSearchOnRandomBimodalHistograms) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> mean(0, 255);
  std::uniform_real_distribution<double> sd(2.0, 40.0);
  for (int i = 0; i < 200; ++i) {
    auto h = empty_hist();
    for (int mode = 0; mode < 2; ++mode) {
      std::normal_distribution<double> d(mean(rng), sd(rng));
      for (int k = 0; k < 2000; ++k) h[static_cast<std::size_t>(std::clamp(std::lround(d(rng)), 0L, 255L))]++;
    }
    ASSERT_EQ(otsu_threshold(h).threshold, testing::exhaustive_otsu(h)) << "histogram " << i;
  }
}

TEST(Otsu, HugeCountsStayExact) {
  auto h = empty_hist();
  h[10] = 1ULL << 50;
  h[90] = (1ULL << 50) + 3;
  h[250] = 1ULL << 49;
  EXPECT_EQ(otsu_threshold(h).threshold, testing::exhaustive_otsu(h));

  // Cross products here pass 2^128.
  auto g = empty_hist();
  g[3] = ~0ULL;
  g[120] = (1ULL << 63) + 12345;
  g[121] = ~0ULL - 7;
  g[254] = 1ULL << 62;
  EXPECT_EQ(otsu_threshold(g).threshold, testing::exhaustive_otsu(g));
}

TEST(Refine, Examples) {
  EXPECT_EQ(refine_mask(BinaryMask(7, 7, 0)), BinaryMask(7, 7, 0));
  EXPECT_EQ(refine_mask(BinaryMask(7, 7, 1)), BinaryMask(7, 7, 1));
  BinaryMask single(7, 7, 0);
  single(3, 3) = 1;
  EXPECT_EQ(refine_mask(single), BinaryMask(7, 7, 0));
}

TEST(Morphology, MatchesNaiveOperators) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> dim(1, 30), iters(0, 4);
  for (int i = 0; i < 200; ++i) {
    const auto m = testing::random_mask(dim(rng), dim(rng), 0.3, rng);
    const int k = iters(rng);
    ASSERT_EQ(morph::dilate(m, k), testing::naive_dilate(m, k));
    ASSERT_EQ(morph::erode(m, k), testing::naive_erode(m, k));
    ASSERT_EQ(morph::blur_rethreshold(m), testing::naive_blur(m));
  }
}

TEST(Morphology, ClosingIsIdempotent) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    const auto m = testing::random_mask(25, 19, 0.25, rng);
    const auto once = morph::close(m, 2);
    EXPECT_EQ(morph::close(once, 2), once);
    const auto refined = refine_mask(m, {2, false});
    EXPECT_EQ(refine_mask(refined, {2, false}), refined);
  }
}

TEST(TissueTiles, Examples) {
  const SlideDims slide{1200, 600};
  EXPECT_TRUE(tissue_tiles(BinaryMask(4, 2, 0), slide).tiles.empty());

  const auto all = tissue_tiles(BinaryMask(4, 2, 1), slide);
  EXPECT_EQ(all.tiles, (std::vector<TileOffset>{{0, 0}, {600, 0}}));
  EXPECT_EQ(all.columns, 2);
  EXPECT_EQ(all.rows, 1);

  BinaryMask half(4, 2, 0);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) half(x, y) = 1;
  EXPECT_EQ(tissue_tiles(half, slide).tiles, (std::vector<TileOffset>{{0, 0}}));
}

TEST(TissueTiles, SmallSlideIsOnePaddedTile) {
  const auto grid = tissue_tiles(BinaryMask(3, 2, 1), SlideDims{300, 200});
  EXPECT_EQ(grid.tiles, (std::vector<TileOffset>{{0, 0}}));
  EXPECT_EQ(grid.padded_width, 600);
  EXPECT_EQ(grid.padded_height, 600);
}

TEST(TissueTiles, PadsRaggedEdges) {
  const auto grid = tissue_tiles(BinaryMask(13, 7, 1), SlideDims{1300, 700});
  EXPECT_EQ(grid.columns, 3);
  EXPECT_EQ(grid.rows, 2);
  EXPECT_EQ(grid.padded_width, 1800);
  EXPECT_EQ(grid.padded_height, 1200);
  EXPECT_EQ(grid.tiles.size(), 6u);
}

TEST(TissueTiles, MonotoneAndAligned) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> px(0, 79);
  const SlideDims slide{4000, 3000};
  for (int i = 0; i < 50; ++i) {
    auto m = testing::random_mask(80, 60, 0.02, rng);
    auto before = tissue_tiles(m, slide);
    for (const auto& t : before.tiles) {
      EXPECT_EQ(t.x % before.window_px, 0);
      EXPECT_EQ(t.y % before.window_px, 0);
      EXPECT_LT(t.x, slide.width_px);
      EXPECT_LT(t.y, slide.height_px);
    }
    for (int k = 0; k < 40; ++k) m(px(rng), px(rng) % 60) = 1;
    const auto after = tissue_tiles(m, slide);
    // Tiles are emitted row-major.
    const auto row_major = [](const auto& a, const auto& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); };
    EXPECT_TRUE(std::includes(after.tiles.begin(), after.tiles.end(), before.tiles.begin(), before.tiles.end(), row_major));
  }
}

TEST(DetectTissue, FindsSyntheticTissueAndNothingOnBlank) {
  SyntheticSpec spec;
  spec.width_px = 3200;
  spec.height_px = 2400;
  spec.n_figures = 0;
  const auto manifest = plan_synthetic_slide(spec);
  const auto overview = render_overview(manifest, 16);
  const auto mask = detect_tissue(overview);
  const double fraction = static_cast<double>(count_true(mask)) / static_cast<double>(mask.size());
  EXPECT_NEAR(fraction, spec.tissue_fraction, 0.1);

  spec.tissue_fraction = 0.0;
  const auto blank = render_overview(plan_synthetic_slide(spec), 16);
  EXPECT_EQ(count_true(detect_tissue(blank)), 0u);
}

}  // namespace
}  // namespace mitocount

/* Copyright (c) 2026 The resfu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "doctest.h"
#include "field64.hpp"
#include "ops.hpp"
#include "oracle.hpp"
#include "support.hpp"
#include "upsampler.hpp"

using namespace resfu;
using resfu::testing::random_map;

TEST_CASE("bilinear sampling agrees with the production resize") {
  SplitMix64 rng(51);
  const FeatureMap x = random_map(rng, 4, 7, 2);
  for (auto [H, W] : {std::pair<std::size_t, std::size_t>{8, 14}, {12, 7}, {4, 7}, {3, 5}})
    CHECK(max_rel_error(ops::bilinear_resize(x, H, W), oracle::bilinear_upsample(x, H, W)) <= 1e-6);
  CHECK(oracle::bilinear_sample(x, 4, 7, 2, 3, 1) == doctest::Approx(x.at(2, 3, 1)));
}

TEST_CASE("grid-wise application at ratio 1 is the same operator") {
  SplitMix64 rng(52);
  const FeatureMap x = random_map(rng, 6, 6, 3);
  const SimilarityScores w = ops::softmax_rows(random_map(rng, 6, 6, 9, -2.0, 2.0));
  CHECK(max_rel_error(kernel_apply_fns(w, x, 1, 3), oracle::kernel_apply_gridwise(w, x, 1, 3)) <= 1e-6);
  CHECK(max_rel_error(kernel_apply_fns(w, x, 1, 3), oracle::kernel_apply_direct(w, x, 1, 3)) <= 1e-6);
}

TEST_CASE("grid-wise one-hot center replicates blocks") {
  SplitMix64 rng(53);
  const FeatureMap x = random_map(rng, 3, 4, 2);
  SimilarityScores w(12, 16, 9);
  for (std::size_t p = 0; p < w.pixels(); ++p) w.pixel(p)[4] = 1.0f;
  CHECK(max_rel_error(ops::nearest_resize(x, 12, 16), oracle::kernel_apply_gridwise(w, x, 4, 3)) == 0.0);
}

TEST_CASE("ramp: grid-wise plateaus, FNS stays linear") {
  const std::size_t h = 8, w = 8, ratio = 4, H = h * ratio, W = w * ratio;
  FeatureMap ramp(h, w, 1);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) ramp.at(i, j, 0) = static_cast<float>(j);
  const SimilarityScores uniform = ops::softmax_rows(SimilarityScores(H, W, 9));

  const Field64 grid = oracle::kernel_apply_gridwise(uniform, ramp, ratio, 3);
  std::size_t jumps = 0;
  for (std::size_t c = 1; c < W; ++c) {
    const double d = grid.at(H / 2, c, 0) - grid.at(H / 2, c - 1, 0);
    if (c % ratio == 0) {
      if (d >= 0.5) ++jumps;
    } else {
      CHECK(d == doctest::Approx(0.0));
    }
  }
  CHECK(jumps >= h - 2);

  const FeatureMap fns = kernel_apply_fns(uniform, ramp, ratio, 3);
  for (std::size_t c = 2 * ratio + 1; c + 2 * ratio < W; ++c) {
    const double d2 = fns.at(H / 2, c + 1, 0) - 2.0 * fns.at(H / 2, c, 0) + fns.at(H / 2, c - 1, 0);
    CHECK(std::abs(d2) <= 1e-5);
  }
}

TEST_CASE("dilated box mean of a constant field") {
  const Field64 c(5, 6, 2, 3.25);
  const Field64 out = oracle::dilated_box_mean(c, 3, 2);
  for (double v : out.data) CHECK(v == doctest::Approx(3.25));
}

TEST_CASE("oracle argument checks") {
  SplitMix64 rng(54);
  const PcdcParams p = testing::random_pcdc(rng, 4, 4, 1, 1);
  CHECK_THROWS_AS(oracle::pcdc_direct(FeatureMap(3, 3, 4), FeatureMap(3, 4, 4), p), Error);
  CHECK_THROWS_AS(oracle::guided_filter_window(FeatureMap(3, 3, 4), FeatureMap(3, 3, 3), 1, 0.001), Error);
  CHECK_THROWS_AS(oracle::kernel_apply_gridwise(SimilarityScores(4, 4, 9), FeatureMap(3, 2, 1), 2, 3), Error);
}

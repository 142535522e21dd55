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
#include "guided_filter.hpp"
#include "ops.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "support.hpp"
#include "upsampler.hpp"

using namespace resfu;
using resfu::testing::error_of;
using resfu::testing::random_map;

namespace {

SimilarityScores one_hot(std::size_t H, std::size_t W, std::size_t K, std::size_t slot) {
  SimilarityScores s(H, W, K * K);
  for (std::size_t p = 0; p < s.pixels(); ++p) s.pixel(p)[slot] = 1.0f;
  return s;
}

SimilarityScores random_kernels(SplitMix64& rng, std::size_t H, std::size_t W, std::size_t K) {
  return ops::softmax_rows(random_map(rng, H, W, K * K, -3.0, 3.0));
}

ResfuParams zeroed_params(std::size_t c, std::size_t C, std::uint64_t seed) {
  ResfuParams p = generate_params(c, C, {2, 3, seed});
  testing::zero_block(p.block_s);
  testing::zero_block(p.block_d);
  return p;
}

}  // namespace

TEST_CASE("projection") {
  SplitMix64 rng(41);
  ProjectionParams proj;
  proj.dim = 4;
  proj.guide_channels = 3;
  proj.value_channels = 2;
  proj.weight_q.resize(12);
  proj.bias_q.resize(4);
  proj.weight_k.resize(8);
  proj.bias_k.resize(4);
  for (auto* v : {&proj.weight_q, &proj.bias_q, &proj.weight_k, &proj.bias_k}) testing::fill_random(*v, rng);
  const FeatureMap x = random_map(rng, 3, 2, 2), y = random_map(rng, 6, 4, 3);
  const QueryKey qk = project_qk(x, y, proj);
  REQUIRE(qk.q.height() == 6);
  REQUIRE(qk.k.height() == 3);
  for (std::size_t p = 0; p < y.pixels(); ++p)
    for (std::size_t d = 0; d < 4; ++d) {
      double acc = proj.bias_q[d];
      for (std::size_t i = 0; i < 3; ++i) acc += proj.weight_q[d * 3 + i] * static_cast<double>(y.pixel(p)[i]);
      CHECK(qk.q.pixel(p)[d] == doctest::Approx(acc).epsilon(1e-6));
    }
  for (std::size_t p = 0; p < x.pixels(); ++p)
    for (std::size_t d = 0; d < 4; ++d) {
      double acc = proj.bias_k[d];
      for (std::size_t i = 0; i < 2; ++i) acc += proj.weight_k[d * 2 + i] * static_cast<double>(x.pixel(p)[i]);
      CHECK(qk.k.pixel(p)[d] == doctest::Approx(acc).epsilon(1e-6));
    }
  CHECK(error_of([&] { project_qk(x, random_map(rng, 6, 4, 2), proj); }) == Errc::ShapeMismatch);
  CHECK(error_of([&] { project_qk(random_map(rng, 3, 2, 5), y, proj); }) == Errc::ShapeMismatch);
}

TEST_CASE("similarity composition") {
  SplitMix64 rng(42);
  ResfuParams p = generate_params(3, 8, {2, 3, 7});
  testing::randomize_block(rng, p.block_s);
  testing::randomize_block(rng, p.block_d);
  const FeatureMap q = random_map(rng, 12, 10, 32), k_up = random_map(rng, 12, 10, 32);
  const FeatureMap q_gs = ops::gaussian_smooth3(q);
  const SimilarityParts parts = compute_similarity_parts(q, k_up, q_gs, p, 2);

  CHECK(parts.q_gf == guided_filter(q, k_up, p.gf));
  PcdcBlockParams bs = p.block_s, bd = p.block_d;
  bs.pcdc.dilation = bd.pcdc.dilation = 2;
  CHECK(parts.semantic == pcdc_block(parts.q_gf, k_up, bs));
  CHECK(parts.detail == pcdc_block(q, q_gs, bd));
  for (std::size_t i = 0; i < parts.total.size(); ++i)
    CHECK(parts.total.data()[i] == parts.semantic.data()[i] + parts.detail.data()[i]);

  SUBCASE("zeroed detail branch leaves only the semantic scores") {
    testing::zero_block(p.block_d);
    const SimilarityParts only_s = compute_similarity_parts(q, k_up, q_gs, p, 2);
    for (float v : only_s.detail.data()) CHECK(v == 0.0f);
    CHECK(only_s.total == parts.semantic);
  }
  SUBCASE("mismatched inputs") {
    CHECK(error_of([&] { compute_similarity(q, random_map(rng, 12, 9, 32), q_gs, p, 2); }) == Errc::ShapeMismatch);
  }
}

TEST_CASE("kernel application") {
  SplitMix64 rng(43);
  const FeatureMap x = random_map(rng, 5, 6, 3);
  for (std::size_t ratio : {1, 2, 3, 4}) {
    const std::size_t H = 5 * ratio, W = 6 * ratio;
    CAPTURE(ratio);
    for (bool fused : {true, false}) {
      CHECK(kernel_apply_fns(one_hot(H, W, 3, 4), x, ratio, 3, fused) == ops::bilinear_resize(x, H, W));
      const SimilarityScores uniform = ops::softmax_rows(SimilarityScores(H, W, 9));
      CHECK(max_rel_error(kernel_apply_fns(uniform, x, ratio, 3, fused),
                          oracle::dilated_box_mean(oracle::bilinear_upsample(x, H, W), 3, ratio)) <= 1e-5);
      const SimilarityScores w = random_kernels(rng, H, W, 3);
      CHECK(max_rel_error(kernel_apply_fns(w, x, ratio, 3, fused), oracle::kernel_apply_direct(w, x, ratio, 3)) <=
            1e-5);
    }
  }
  CHECK(kernel_apply_fns(one_hot(5, 6, 3, 4), x, 1, 3) == x);
  const SimilarityScores w5 = random_kernels(rng, 10, 12, 5);
  CHECK(max_rel_error(kernel_apply_fns(w5, x, 2, 5), oracle::kernel_apply_direct(w5, x, 2, 5)) <= 1e-5);

  SimilarityScores unnormalized(10, 12, 9, 0.5f);
  CHECK(error_of([&] { kernel_apply_fns(unnormalized, x, 2, 3); }) == Errc::RowNotNormalized);
  CHECK(error_of([&] { kernel_apply_fns(one_hot(10, 11, 3, 4), x, 2, 3); }) == Errc::ShapeMismatch);
}

TEST_CASE("inner product scores") {
  SplitMix64 rng(44);
  const FeatureMap q = random_map(rng, 7, 8, 5), k = random_map(rng, 7, 8, 5);
  const SimilarityScores s = inner_product_scores(q, k, 3, 2);
  for (long i = 0; i < 7; ++i)
    for (long j = 0; j < 8; ++j)
      for (long n = 0; n < 9; ++n) {
        const long r = std::clamp(i + 2 * (n / 3 - 1), 0L, 6L), c = std::clamp(j + 2 * (n % 3 - 1), 0L, 7L);
        double dot = 0;
        for (std::size_t d = 0; d < 5; ++d) dot += static_cast<double>(q.at(i, j, d)) * k.at(r, c, d);
        CHECK(s.at(i, j, n) == doctest::Approx(dot).epsilon(1e-6));
      }
  const SimilarityScores self = inner_product_scores(q, q, 3, 1);
  for (std::size_t p = 0; p < q.pixels(); ++p) {
    double norm2 = 0;
    for (float v : q.pixel(p)) norm2 += static_cast<double>(v) * v;
    CHECK(self.pixel(p)[4] == doctest::Approx(norm2).epsilon(1e-6));
  }
}

TEST_CASE("end-to-end upsampling") {
  SplitMix64 rng(45);
  const FeatureMap x = random_map(rng, 16, 16, 8), y = random_map(rng, 64, 64, 3);
  const ResfuParams p = generate_params(3, 8, {4, 3, 11});

  SUBCASE("shape and trace") {
    UpsampleTrace trace;
    const FeatureMap out = resfu_upsample(x, y, p, {4, 3, 11}, &trace);
    CHECK(out.height() == 64);
    CHECK(out.width() == 64);
    CHECK(out.channels() == 8);
    CHECK(out.all_finite());
    std::vector<std::string> names;
    for (const auto& [name, map] : trace) names.push_back(name);
    CHECK(names == std::vector<std::string>{"q", "k_up", "q_gf", "q_gs", "s_s", "s_d", "kernels"});
    CHECK(trace.back().second.channels() == 9);
  }
  SUBCASE("degenerate scores give a dilated box mean") {
    for (std::size_t ratio : {2, 4}) {
      const FeatureMap g = random_map(rng, 16 * ratio, 16 * ratio, 3);
      const FeatureMap out = resfu_upsample(x, g, zeroed_params(3, 8, 3), {ratio, 3, 3});
      const Field64 ref = oracle::dilated_box_mean(oracle::bilinear_upsample(x, 16 * ratio, 16 * ratio), 3, ratio);
      CHECK(max_rel_error(out, ref) <= 1e-5);
    }
  }
  SUBCASE("fused and materialized paths agree") {
    UpsampleOptions opts{4, 3, Baseline::None, true};
    const FeatureMap a = upsample(x, &y, &p, opts);
    opts.fused = false;
    CHECK(max_rel_error(a, upsample(x, &y, &p, opts)) <= 1e-5);
  }
  SUBCASE("thread count and reruns do not change the output") {
    set_num_threads(1);
    const FeatureMap ref = resfu_upsample(x, y, p, {4, 3, 11});
    for (std::size_t t : {1, 4, 8}) {
      set_num_threads(t);
      CHECK(testing::bitwise_equal(resfu_upsample(x, y, p, {4, 3, 11}), ref));
    }
    set_num_threads(0);
  }
  SUBCASE("errors") {
    CHECK(error_of([&] { resfu_upsample(x, y, p, {2, 3, 11}); }) == Errc::RatioMismatch);
    CHECK(error_of([&] { resfu_upsample(x, y, p, {0, 3, 11}); }) == Errc::RatioMismatch);
    UpsampleOptions opts{4, 5, Baseline::None, true};
    CHECK(error_of([&] { upsample(x, &y, &p, opts); }) == Errc::ShapeMismatch);
    opts.baseline = Baseline::None;
    opts.kernel = 3;
    CHECK(error_of([&] { upsample(x, nullptr, &p, opts); }) == Errc::InvalidArgument);
  }
}

TEST_CASE("baselines") {
  SplitMix64 rng(46);
  const FeatureMap x = random_map(rng, 6, 5, 4), y = random_map(rng, 12, 10, 3);
  UpsampleOptions opts{2, 3, Baseline::Bilinear, true};
  CHECK(upsample(x, nullptr, nullptr, opts) == ops::bilinear_resize(x, 12, 10));
  opts.baseline = Baseline::Nearest;
  CHECK(upsample(x, nullptr, nullptr, opts) == ops::nearest_resize(x, 12, 10));

  opts.baseline = Baseline::InnerProduct;
  ResfuParams p = generate_params(3, 4, {2, 3, 1});
  UpsampleTrace trace;
  const FeatureMap out = upsample(x, &y, &p, opts, &trace);
  const QueryKey qk = project_qk(x, y, p.proj);
  const SimilarityScores kernels = ops::softmax_rows(inner_product_scores(qk.q, ops::bilinear_resize(qk.k, 12, 10), 3, 2));
  CHECK(out == kernel_apply_fns(kernels, x, 2, 3));
  CHECK(trace.size() == 4);

  std::fill(p.proj.weight_q.begin(), p.proj.weight_q.end(), 0.0f);
  const Field64 box = oracle::dilated_box_mean(oracle::bilinear_upsample(x, 12, 10), 3, 2);
  CHECK(max_rel_error(upsample(x, &y, &p, opts), box) <= 1e-5);
}

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

#include "bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "field64.hpp"
#include "memory_stats.hpp"
#include "ops.hpp"
#include "oracle.hpp"
#include "pcdc.hpp"
#include "rng.hpp"
#include "upsampler.hpp"

namespace resfu::bench {

namespace {

FeatureMap random_map(SplitMix64& rng, std::size_t h, std::size_t w, std::size_t c) {
  FeatureMap m(h, w, c);
  for (float& v : m.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

BenchRow time_variant(std::string name, std::size_t iters, const std::function<void()>& fn) {
  for (int i = 0; i < 2; ++i) fn();
  const std::size_t base = memory_stats().live_bytes;
  reset_memory_peak();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < iters; ++i) fn();
  const double total = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(name), total / static_cast<double>(iters), memory_stats().peak_bytes - base};
}

}  // namespace

BenchReport run(const BenchConfig& cfg) {
  require(cfg.iters >= 1, Errc::InvalidArgument, "iters must be >= 1");
  require(cfg.height >= 1 && cfg.width >= 1 && cfg.channels >= 1 && cfg.ratio >= 1, Errc::InvalidArgument,
          "bench sizes must be >= 1");
  SplitMix64 rng(cfg.seed);
  const std::size_t H = cfg.ratio * cfg.height, W = cfg.ratio * cfg.width;
  const FeatureMap x = random_map(rng, cfg.height, cfg.width, cfg.channels);
  const SimilarityScores kernels = ops::softmax_rows(random_map(rng, H, W, 9));

  BenchReport report;
  report.fused_vs_naive_error =
      max_rel_error(kernel_apply_fns(kernels, x, cfg.ratio, 3, true), kernel_apply_fns(kernels, x, cfg.ratio, 3, false));
  report.equivalent = report.fused_vs_naive_error <= 1e-5;
  if (!report.equivalent) return report;

  report.rows.push_back(time_variant("kernel_apply_naive", cfg.iters, [&] {
    (void)kernel_apply_fns(kernels, x, cfg.ratio, 3, false);
  }));
  report.rows.push_back(time_variant("kernel_apply_fused", cfg.iters, [&] {
    (void)kernel_apply_fns(kernels, x, cfg.ratio, 3, true);
  }));

  PcdcParams p;
  p.dilation = cfg.ratio;
  p.weight.resize(p.slots() * p.in_per_group() * p.out_channels);
  for (float& v : p.weight) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  p.bias.assign(p.out_channels, 0.0f);
  const FeatureMap q = random_map(rng, H, W, p.in_channels);
  const FeatureMap k = random_map(rng, H, W, p.in_channels);
  report.rows.push_back(time_variant("pcdc_decomposed", cfg.iters, [&] { (void)pcdc_layer(q, k, p); }));
  report.rows.push_back(time_variant("pcdc_direct", cfg.iters, [&] { (void)oracle::pcdc_direct(q, k, p); }));
  return report;
}

}  // namespace resfu::bench

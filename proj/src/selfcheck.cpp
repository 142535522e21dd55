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

#include "selfcheck.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "field64.hpp"
#include "grad.hpp"
#include "ops.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "upsampler.hpp"

namespace resfu::check {

namespace {

using Clock = std::chrono::steady_clock;

FeatureMap random_map(SplitMix64& rng, std::size_t h, std::size_t w, std::size_t c, double lo = -1.0, double hi = 1.0) {
  FeatureMap m(h, w, c);
  for (float& v : m.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return m;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::size_t pick(SplitMix64& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

template <class Fn>
CheckResult timed(std::string name, double tolerance, double budget, Fn&& body) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  r.time_budget = budget;
  const auto t0 = Clock::now();
  try {
    body(r);
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.passed = r.passed && r.max_error <= tolerance && (budget <= 0.0 || r.seconds <= budget);
  } catch (const std::exception& e) {
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.passed = false;
    r.max_error = INFINITY;
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

void randomize_block(SplitMix64& rng, PcdcBlockParams& b) {
  for (float& v : b.shared_norm.gamma) v = static_cast<float>(rng.uniform(0.5, 1.5));
  for (float& v : b.shared_norm.beta) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  for (float& v : b.pcdc.bias) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  for (float& v : b.compressor.conv1_bias) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  for (float& v : b.compressor.norm.gamma) v = static_cast<float>(rng.uniform(0.5, 1.5));
  for (float& v : b.compressor.norm.beta) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  for (float& v : b.compressor.conv2_bias) v = static_cast<float>(rng.uniform(-0.5, 0.5));
}

void zero_block(PcdcBlockParams& b) {
  std::fill(b.pcdc.weight.begin(), b.pcdc.weight.end(), 0.0f);
  std::fill(b.pcdc.bias.begin(), b.pcdc.bias.end(), 0.0f);
  std::fill(b.compressor.conv1_weight.begin(), b.compressor.conv1_weight.end(), 0.0f);
  std::fill(b.compressor.conv1_bias.begin(), b.compressor.conv1_bias.end(), 0.0f);
  std::fill(b.compressor.conv2_weight.begin(), b.compressor.conv2_weight.end(), 0.0f);
  std::fill(b.compressor.conv2_bias.begin(), b.compressor.conv2_bias.end(), 0.0f);
}

CheckResult from_grad(const grad::GradCheckReport& g, double budget, double seconds) {
  CheckResult r;
  r.name = g.op_name;
  r.max_error = g.max_rel_error;
  r.tolerance = g.tolerance;
  r.time_budget = budget;
  r.seconds = seconds;
  r.passed = g.passed && seconds <= budget;
  r.detail = std::to_string(g.probes) + " probes";
  return r;
}

bool bitwise_equal(const FeatureMap& a, const FeatureMap& b) {
  return a.same_shape(b) && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

CheckResult pcdc_equivalence(std::uint64_t seed, std::size_t cases) {
  return timed("pcdc_decomposition_equivalence", 1e-5, 30.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x1001);
    constexpr std::array<std::size_t, 3> groups{1, 2, 4};
    constexpr std::array<std::size_t, 3> dilations{1, 2, 4};
    for (std::size_t i = 0; i < cases; ++i) {
      PcdcParams p;
      p.kernel = 3;
      p.in_channels = 32;
      p.out_channels = 32;
      p.groups = groups[rng.below(3)];
      p.dilation = dilations[rng.below(3)];
      const std::size_t h = pick(rng, 1, 16), w = pick(rng, 1, 16);
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.slots() * p.in_per_group()));
      p.weight.resize(p.slots() * p.in_per_group() * p.out_channels);
      for (float& v : p.weight) v = static_cast<float>(rng.uniform(-bound, bound));
      p.bias.resize(p.out_channels);
      for (float& v : p.bias) v = static_cast<float>(rng.uniform(-0.5, 0.5));
      const FeatureMap q = random_map(rng, h, w, 32), k = random_map(rng, h, w, 32);
      r.max_error = std::max(r.max_error, max_rel_error(pcdc_layer(q, k, p), oracle::pcdc_direct(q, k, p)));
    }
    r.passed = true;
    r.detail = std::to_string(cases) + " cases";
  });
}

CheckResult guided_filter_equivalence(std::uint64_t seed, std::size_t cases) {
  return timed("guided_filter_vs_window_regression", 1e-4, 10.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x2002);
    const GuidedFilterConfig cfg{2, 0.001};
    const std::size_t n = 12;
    for (std::size_t i = 0; i < cases; ++i) {
      const FeatureMap q = random_map(rng, n, n, 4), k = random_map(rng, n, n, 4);
      const FeatureMap got = guided_filter(q, k, cfg);
      const Field64 ref = oracle::guided_filter_window(q, k, cfg.radius, cfg.eps);
      std::vector<double> a, b;
      for (std::size_t row = cfg.radius; row < n - cfg.radius; ++row)
        for (std::size_t col = cfg.radius; col < n - cfg.radius; ++col)
          for (std::size_t ch = 0; ch < 4; ++ch) {
            a.push_back(got.at(row, col, ch));
            b.push_back(ref.at(row, col, ch));
          }
      r.max_error = std::max(r.max_error, max_rel_error(std::span<const double>(a), std::span<const double>(b)));
    }
    r.passed = true;
    r.detail = std::to_string(cases) + " cases, interior pixels";
  });
}

CheckResult fused_vs_naive(std::uint64_t seed, std::size_t cases) {
  return timed("fns_fused_vs_naive", 1e-5, 10.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x3003);
    constexpr std::array<std::size_t, 4> ratios{1, 2, 4, 8};
    double oracle_err = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
      const std::size_t ratio = ratios[i % 4];
      const std::size_t h = pick(rng, 1, 8), w = pick(rng, 1, 8), c = pick(rng, 1, 6);
      const FeatureMap x = random_map(rng, h, w, c);
      const SimilarityScores weights = ops::softmax_rows(random_map(rng, ratio * h, ratio * w, 9, -3.0, 3.0));
      const FeatureMap naive = kernel_apply_fns(weights, x, ratio, 3, false);
      const FeatureMap fused = kernel_apply_fns(weights, x, ratio, 3, true);
      r.max_error = std::max(r.max_error, max_rel_error(fused, naive));
      oracle_err = std::max(oracle_err, max_rel_error(naive, oracle::kernel_apply_direct(weights, x, ratio, 3)));
    }
    r.passed = oracle_err <= 1e-5;
    r.detail = std::to_string(cases) + " cases; naive vs oracle " + sci(oracle_err);
  });
}

CheckResult constant_preservation(std::uint64_t seed, std::size_t bundles) {
  return timed("constant_preservation", 1e-5, 0.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x4004);
    constexpr std::array<std::size_t, 3> ratios{1, 2, 4};
    double row_err = 0.0;
    for (std::size_t b = 0; b < bundles; ++b) {
      const std::size_t ratio = ratios[rng.below(3)];
      const std::size_t c = pick(rng, 1, 8), C = pick(rng, 1, 8);
      const std::size_t h = pick(rng, 2, 8), w = pick(rng, 2, 8);
      ResfuParams params = generate_params(c, C, {ratio, 3, rng.next()});
      for (float& v : params.proj.bias_q) v = static_cast<float>(rng.uniform(-0.5, 0.5));
      for (float& v : params.proj.bias_k) v = static_cast<float>(rng.uniform(-0.5, 0.5));
      randomize_block(rng, params.block_s);
      randomize_block(rng, params.block_d);
      const float value = static_cast<float>(rng.uniform(-2.0, 2.0));
      const FeatureMap x(h, w, C, value);
      const FeatureMap y = random_map(rng, ratio * h, ratio * w, c, -2.0, 2.0);
      UpsampleTrace trace;
      const FeatureMap out = resfu_upsample(x, y, params, {ratio, 3, 0}, &trace);
      for (float v : out.data()) r.max_error = std::max(r.max_error, std::abs(static_cast<double>(v) - value));
      const auto kernels = std::find_if(trace.begin(), trace.end(), [](const auto& e) { return e.first == "kernels"; });
      for (std::size_t p = 0; p < kernels->second.pixels(); ++p) {
        double total = 0.0;
        for (float v : kernels->second.pixel(p)) total += v;
        row_err = std::max(row_err, std::abs(total - 1.0));
      }
    }
    r.passed = row_err <= 1e-6;
    r.detail = std::to_string(bundles) + " bundles; max |row sum - 1| = " + sci(row_err);
  });
}

CheckResult degenerate_scores(std::uint64_t seed) {
  return timed("degenerate_score_box_mean", 1e-5, 0.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x5005);
    for (std::size_t ratio : {2u, 4u, 8u}) {
      const std::size_t h = pick(rng, 3, 6), w = pick(rng, 3, 6), C = pick(rng, 1, 4), c = pick(rng, 1, 4);
      ResfuParams params = generate_params(c, C, {ratio, 3, rng.next()});
      zero_block(params.block_s);
      zero_block(params.block_d);
      const FeatureMap x = random_map(rng, h, w, C);
      const FeatureMap y = random_map(rng, ratio * h, ratio * w, c);
      const FeatureMap out = resfu_upsample(x, y, params, {ratio, 3, 0});
      const Field64 ref = oracle::dilated_box_mean(oracle::bilinear_upsample(x, ratio * h, ratio * w), 3, ratio);
      r.max_error = std::max(r.max_error, max_rel_error(out, ref));
    }
    r.passed = true;
    r.detail = "ratios 2, 4, 8";
  });
}

CheckResult anti_mosaic(std::uint64_t seed) {
  return timed("fns_anti_mosaic", 1e-5, 0.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x6006);
    const std::size_t ratio = 4, h = 8, w = 8, H = ratio * h, W = ratio * w;
    const double step = 0.05 + 0.1 * rng.uniform();
    FeatureMap x(h, w, 1);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) x.at(i, j, 0) = static_cast<float>(step * static_cast<double>(j));
    const SimilarityScores uniform(H, W, 9, 1.0f / 9.0f);

    const FeatureMap fns = kernel_apply_fns(uniform, x, ratio, 3, true);
    // Bilinear is exactly linear for columns [ratio/2, W-1-ratio/2]; one more
    // dilated neighbor on each side, one more column for the stencil.
    const std::size_t lo = ratio / 2 + ratio + 1, hi = W - 1 - ratio / 2 - ratio - 1;
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = lo; j <= hi; ++j) {
        const double d2 = static_cast<double>(fns.at(i, j - 1, 0)) - 2.0 * fns.at(i, j, 0) + fns.at(i, j + 1, 0);
        r.max_error = std::max(r.max_error, std::abs(d2));
      }

    const Field64 grid = oracle::kernel_apply_gridwise(uniform, x, ratio, 3);
    std::size_t min_jumps = W;
    for (std::size_t i = 0; i < H; ++i) {
      std::size_t jumps = 0;
      for (std::size_t j = 0; j + 1 < W; ++j)
        if (std::abs(grid.at(i, j + 1, 0) - grid.at(i, j, 0)) >= 0.5 * step) ++jumps;
      min_jumps = std::min(min_jumps, jumps);
    }
    r.passed = min_jumps >= h - 2;
    r.detail = "grid-wise plateau boundaries per row >= " + std::to_string(min_jumps) + " (need " +
               std::to_string(h - 2) + ")";
  });
}

CheckResult pcdc_gradients(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto g = grad::check_pcdc_gradients(seed);
  return from_grad(g, 20.0, std::chrono::duration<double>(Clock::now() - t0).count());
}

CheckResult kernel_apply_gradients(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto g = grad::check_kernel_apply_gradients(seed);
  return from_grad(g, 20.0, std::chrono::duration<double>(Clock::now() - t0).count());
}

CheckResult softmax_shift_invariance(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto g = grad::check_softmax_shift_invariance(seed);
  return from_grad(g, 20.0, std::chrono::duration<double>(Clock::now() - t0).count());
}

CheckResult determinism(std::uint64_t seed) {
  return timed("determinism_threads", 0.0, 0.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x8008);
    const std::size_t ratio = 4;
    const FeatureMap x = random_map(rng, 8, 8, 8);
    const FeatureMap y = random_map(rng, 32, 32, 4);
    const ResfuParams params = generate_params(4, 8, {ratio, 3, seed});
    const std::size_t saved = num_threads();
    std::optional<FeatureMap> first;
    std::size_t mismatches = 0, runs = 0;
    for (std::size_t threads : {1u, 4u, 8u})
      for (int rep = 0; rep < 3; ++rep) {
        set_num_threads(threads);
        const FeatureMap out = resfu_upsample(x, y, params, {ratio, 3, seed});
        if (!first) first = out;
        else if (!bitwise_equal(*first, out)) ++mismatches;
        ++runs;
      }
    set_num_threads(saved);
    r.max_error = static_cast<double>(mismatches);
    r.passed = true;
    r.detail = std::to_string(runs) + " runs at 1/4/8 threads";
  });
}

CheckResult format_round_trips(std::uint64_t seed, std::size_t bundles) {
  return timed("format_round_trips", 0.0, 0.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0x9009);
    std::size_t failures = 0;
    for (std::size_t b = 0; b < bundles; ++b) {
      WeightBundle bundle;
      const std::size_t entries = pick(rng, 0, 6);
      for (std::size_t e = 0; e < entries; ++e) {
        std::string name(pick(rng, 1, 12), 'a');
        for (char& ch : name) ch = static_cast<char>('a' + rng.below(26));
        name += "." + std::to_string(e);
        FeatureMap m(pick(rng, 1, 5), pick(rng, 1, 5), pick(rng, 1, 5));
        // Arbitrary bit patterns, NaN payloads included.
        for (float& v : m.data()) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next()));
        const auto blob = serialize_feature_map(m);
        if (serialize_feature_map(deserialize_feature_map(blob)) != blob) ++failures;
        bundle.push_back({std::move(name), std::move(m)});
      }
      const auto bytes = serialize_bundle(bundle);
      const WeightBundle back = deserialize_bundle(bytes);
      if (back.size() != bundle.size() || serialize_bundle(back) != bytes) ++failures;
      for (std::size_t e = 0; e < back.size() && e < bundle.size(); ++e)
        if (back[e].name != bundle[e].name || !bitwise_equal(back[e].map, bundle[e].map)) ++failures;
    }

    const ResfuParams params = generate_params(3, 5, {2, 3, seed});
    const auto pbytes = serialize_bundle(params_to_bundle(params));
    if (serialize_bundle(params_to_bundle(params_from_bundle(deserialize_bundle(pbytes)))) != pbytes) ++failures;

    auto expect_bad_magic = [&](auto&& parse, std::vector<std::uint8_t> bytes) {
      bytes[0] = 'X';
      try {
        parse(bytes);
        ++failures;
      } catch (const Error& e) {
        if (e.code() != Errc::BadMagic || exit_code_for(e.code()) != 2) ++failures;
      }
    };
    expect_bad_magic([](const auto& b) { deserialize_feature_map(b); }, serialize_feature_map(FeatureMap(2, 2, 2)));
    expect_bad_magic([](const auto& b) { deserialize_bundle(b); }, pbytes);

    r.max_error = static_cast<double>(failures);
    r.passed = true;
    r.detail = std::to_string(bundles) + " random bundles + params bundle + corrupted magic";
  });
}

std::vector<CheckResult> external_weights(const std::string& path, std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::optional<ResfuParams> params;
  out.push_back(timed("weights_load", 0.0, 0.0, [&](CheckResult& r) {
    params = load_params(path);
    r.passed = true;
    r.detail = path;
  }));
  if (!params) return out;

  out.push_back(timed("weights_finite", 0.0, 0.0, [&](CheckResult& r) {
    std::size_t bad = 0;
    for (const auto& e : params_to_bundle(*params))
      if (!e.map.all_finite()) {
        ++bad;
        r.detail += (r.detail.empty() ? "non-finite: " : ", ") + e.name;
      }
    r.max_error = static_cast<double>(bad);
    r.passed = true;
  }));

  out.push_back(timed("weights_constant_preservation", 1e-5, 0.0, [&](CheckResult& r) {
    SplitMix64 rng(seed ^ 0xA00A);
    const std::size_t ratio = 2, h = 6, w = 6;
    const float value = 0.75f;
    const FeatureMap x(h, w, params->proj.value_channels, value);
    const FeatureMap y = random_map(rng, ratio * h, ratio * w, params->proj.guide_channels);
    const FeatureMap result = resfu_upsample(x, y, *params, {ratio, params->kernel(), seed});
    if (!result.all_finite()) {
      r.max_error = INFINITY;
      r.detail = "non-finite output";
      return;
    }
    for (float v : result.data()) r.max_error = std::max(r.max_error, std::abs(static_cast<double>(v) - value));
    r.passed = true;
  }));
  return out;
}

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opts,
                                       const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> results;
  auto add = [&](CheckResult r) {
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  };
  const std::uint64_t s = opts.seed;
  if (opts.weights_path)
    for (auto& r : external_weights(*opts.weights_path, s)) add(std::move(r));
  add(pcdc_equivalence(s));
  add(guided_filter_equivalence(s));
  add(fused_vs_naive(s));
  add(constant_preservation(s));
  add(degenerate_scores(s));
  add(anti_mosaic(s));
  add(pcdc_gradients(s));
  add(kernel_apply_gradients(s));
  add(softmax_shift_invariance(s));
  add(determinism(s));
  add(format_round_trips(s));
  return results;
}

}  // namespace resfu::check

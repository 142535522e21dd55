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

#include "upsampler.hpp"

#include <cmath>

#include "guided_filter.hpp"
#include "ops.hpp"
#include "parallel.hpp"

namespace resfu {

namespace {

void check_row_sums(const SimilarityScores& weights) {
  for (std::size_t p = 0; p < weights.pixels(); ++p) {
    double total = 0.0;
    for (float v : weights.pixel(p)) total += v;
    if (!(std::abs(total - 1.0) <= 1e-3))
      fail(Errc::RowNotNormalized, "kernel row " + std::to_string(p) + " sums to " + std::to_string(total));
  }
}

PcdcBlockParams with_dilation(const PcdcBlockParams& b, std::size_t dilation) {
  PcdcBlockParams out = b;
  out.pcdc.dilation = dilation;
  return out;
}

void check_ratio(const FeatureMap& x, const FeatureMap& y, std::size_t ratio) {
  if (ratio < 1) fail(Errc::RatioMismatch, "ratio must be >= 1");
  if (y.height() != ratio * x.height() || y.width() != ratio * x.width())
    fail(Errc::RatioMismatch, "guide is " + std::to_string(y.height()) + "x" + std::to_string(y.width()) +
                                  " but ratio " + std::to_string(ratio) + " needs " +
                                  std::to_string(ratio * x.height()) + "x" + std::to_string(ratio * x.width()));
}

}  // namespace

QueryKey project_qk(const FeatureMap& x, const FeatureMap& y, const ProjectionParams& proj) {
  if (y.channels() != proj.guide_channels)
    fail(Errc::ShapeMismatch, "guide has " + std::to_string(y.channels()) + " channels, projection expects " +
                                  std::to_string(proj.guide_channels));
  if (x.channels() != proj.value_channels)
    fail(Errc::ShapeMismatch, "input has " + std::to_string(x.channels()) + " channels, projection expects " +
                                  std::to_string(proj.value_channels));
  return {ops::grouped_pointwise_conv(y, proj.weight_q, proj.bias_q, proj.dim, 1),
          ops::grouped_pointwise_conv(x, proj.weight_k, proj.bias_k, proj.dim, 1)};
}

SimilarityParts compute_similarity_parts(const FeatureMap& q, const FeatureMap& k_up, const FeatureMap& q_gs,
                                         const ResfuParams& params, std::size_t ratio) {
  if (!q.same_shape(k_up) || !q.same_shape(q_gs)) fail(Errc::ShapeMismatch, "similarity inputs differ in shape");
  SimilarityParts parts;
  parts.q_gf = guided_filter(q, k_up, params.gf);
  parts.semantic = pcdc_block(parts.q_gf, k_up, with_dilation(params.block_s, ratio));
  parts.detail = pcdc_block(q, q_gs, with_dilation(params.block_d, ratio));
  parts.total = parts.semantic;
  auto dst = parts.total.data();
  const auto add = parts.detail.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += add[i];
  return parts;
}

SimilarityScores compute_similarity(const FeatureMap& q, const FeatureMap& k_up, const FeatureMap& q_gs,
                                    const ResfuParams& params, std::size_t ratio) {
  return compute_similarity_parts(q, k_up, q_gs, params, ratio).total;
}

FeatureMap kernel_apply_fns(const SimilarityScores& weights, const FeatureMap& x, std::size_t ratio,
                            std::size_t kernel, bool fused) {
  require(ratio >= 1, Errc::InvalidArgument, "ratio must be >= 1");
  require(kernel % 2 == 1, Errc::InvalidArgument, "kernel size must be odd");
  const std::size_t H = ratio * x.height(), W = ratio * x.width(), C = x.channels();
  const std::size_t slots = kernel * kernel;
  if (weights.height() != H || weights.width() != W || weights.channels() != slots)
    fail(Errc::ShapeMismatch, "kernel weights must be (ratio*h) x (ratio*w) x K^2");
  check_row_sums(weights);

  FeatureMap out(H, W, C);
  if (!fused) {
    const FeatureMap x_up = ops::bilinear_resize(x, H, W);
    parallel_for(H, [&](std::size_t r0, std::size_t r1) {
      for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          const auto wrow = weights.pixel(i * W + j);
          auto dst = out.pixel(i * W + j);
          for (std::size_t n = 0; n < slots; ++n) {
            const auto src = x_up.pixel(ops::neighbor_index(i, j, H, W, kernel, ratio, n));
            for (std::size_t ch = 0; ch < C; ++ch) dst[ch] += wrow[n] * src[ch];
          }
        }
    });
    return out;
  }

  const ops::AxisTaps rows = ops::bilinear_taps(x.height(), H);
  const ops::AxisTaps cols = ops::bilinear_taps(x.width(), W);
  const auto xd = x.data();
  parallel_for(H, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        const auto wrow = weights.pixel(i * W + j);
        auto dst = out.pixel(i * W + j);
        for (std::size_t n = 0; n < slots; ++n) {
          const std::size_t idx = ops::neighbor_index(i, j, H, W, kernel, ratio, n);
          const std::size_t pr = idx / W, pc = idx % W;
          const float fy = rows.frac[pr], fx = cols.frac[pc];
          const float* a = &xd[x.offset(rows.lo[pr], cols.lo[pc], 0)];
          const float* b = &xd[x.offset(rows.lo[pr], cols.hi[pc], 0)];
          const float* d = &xd[x.offset(rows.hi[pr], cols.lo[pc], 0)];
          const float* e = &xd[x.offset(rows.hi[pr], cols.hi[pc], 0)];
          for (std::size_t ch = 0; ch < C; ++ch) {
            const float top = ops::lerp_exact(a[ch], b[ch], fx);
            const float bottom = ops::lerp_exact(d[ch], e[ch], fx);
            dst[ch] += wrow[n] * ops::lerp_exact(top, bottom, fy);
          }
        }
      }
  });
  return out;
}

SimilarityScores inner_product_scores(const FeatureMap& q, const FeatureMap& k_up, std::size_t kernel,
                                      std::size_t ratio) {
  if (!q.same_shape(k_up)) fail(Errc::ShapeMismatch, "inner product: query and key dims differ");
  require(kernel % 2 == 1, Errc::InvalidArgument, "kernel size must be odd");
  require(ratio >= 1, Errc::InvalidArgument, "ratio must be >= 1");
  const std::size_t h = q.height(), w = q.width(), D = q.channels(), slots = kernel * kernel;
  SimilarityScores out(h, w, slots);
  parallel_for(h, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const auto qi = q.pixel(i * w + j);
        auto dst = out.pixel(i * w + j);
        for (std::size_t n = 0; n < slots; ++n) {
          const auto kn = k_up.pixel(ops::neighbor_index(i, j, h, w, kernel, ratio, n));
          double acc = 0.0;
          for (std::size_t d = 0; d < D; ++d) acc += static_cast<double>(qi[d]) * kn[d];
          dst[n] = static_cast<float>(acc);
        }
      }
  });
  return out;
}

FeatureMap resfu_upsample(const FeatureMap& x, const FeatureMap& y, const ResfuParams& params,
                          const UpsampleConfig& cfg, UpsampleTrace* trace) {
  UpsampleOptions opts;
  opts.ratio = cfg.ratio;
  opts.kernel = cfg.kernel;
  return upsample(x, &y, &params, opts, trace);
}

FeatureMap upsample(const FeatureMap& x, const FeatureMap* y, const ResfuParams* params, const UpsampleOptions& opts,
                    UpsampleTrace* trace) {
  const std::size_t ratio = opts.ratio;
  if (ratio < 1) fail(Errc::RatioMismatch, "ratio must be >= 1");
  const std::size_t H = ratio * x.height(), W = ratio * x.width();
  if (opts.baseline == Baseline::Bilinear) return ops::bilinear_resize(x, H, W);
  if (opts.baseline == Baseline::Nearest) return ops::nearest_resize(x, H, W);

  require(y != nullptr && params != nullptr, Errc::InvalidArgument, "guide and params are required");
  check_ratio(x, *y, ratio);
  if (opts.kernel % 2 == 0) fail(Errc::InvalidArgument, "kernel size must be odd");

  auto record = [&](const char* name, const FeatureMap& m) {
    if (trace) trace->emplace_back(name, m);
  };

  QueryKey qk = project_qk(x, *y, params->proj);
  const FeatureMap k_up = ops::bilinear_resize(qk.k, H, W);
  record("q", qk.q);
  record("k_up", k_up);

  SimilarityScores scores;
  if (opts.baseline == Baseline::InnerProduct) {
    scores = inner_product_scores(qk.q, k_up, opts.kernel, ratio);
    record("scores", scores);
  } else {
    if (params->kernel() != opts.kernel)
      fail(Errc::ShapeMismatch, "weights were built for K=" + std::to_string(params->kernel()) + ", requested K=" +
                                    std::to_string(opts.kernel));
    const FeatureMap q_gs = ops::gaussian_smooth3(qk.q);
    SimilarityParts parts = compute_similarity_parts(qk.q, k_up, q_gs, *params, ratio);
    record("q_gf", parts.q_gf);
    record("q_gs", q_gs);
    record("s_s", parts.semantic);
    record("s_d", parts.detail);
    scores = std::move(parts.total);
  }

  const SimilarityScores kernels = ops::softmax_rows(scores);
  record("kernels", kernels);
  return kernel_apply_fns(kernels, x, ratio, opts.kernel, opts.fused);
}

}  // namespace resfu

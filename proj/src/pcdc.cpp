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

#include "pcdc.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#include "parallel.hpp"

namespace resfu {

void PcdcParams::validate() const {
  if (kernel % 2 == 0) fail(Errc::InvalidArgument, "pcdc: kernel size must be odd");
  if (dilation < 1) fail(Errc::InvalidArgument, "pcdc: dilation must be >= 1");
  if (groups == 0 || in_channels % groups != 0 || out_channels % groups != 0)
    fail(Errc::ShapeMismatch, "pcdc: D and L must be divisible by G");
  if (weight.size() != slots() * in_per_group() * out_channels || bias.size() != out_channels)
    fail(Errc::ShapeMismatch, "pcdc: weight/bias size mismatch");
}

namespace {

// One group of outputs at one pixel. nb is [d~][n], wg is [d~][n][l~], ws is
// [d~][l~].
using Lane2 = double __attribute__((vector_size(16)));

inline Lane2 load2(const double* p) {
  Lane2 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

template <std::size_t N>
void pcdc_group(const double* __restrict nb, const double* __restrict wg, const double* __restrict ws,
                const float* __restrict q, std::size_t dg, std::size_t slots, std::size_t /*width*/,
                double* __restrict out) {
  static_assert(N % 2 == 0);
  constexpr std::size_t V = N / 2;
  Lane2 acc[V] = {};
  for (std::size_t d = 0; d < dg; ++d) {
    Lane2 keyed[V] = {};
    for (std::size_t n = 0; n < slots; ++n) {
      const double xv = nb[d * slots + n];
      const Lane2 x2 = {xv, xv};
      const double* wr = wg + (d * slots + n) * N;
      for (std::size_t v = 0; v < V; ++v) keyed[v] += load2(wr + 2 * v) * x2;
    }
    const double qv = q[d];
    const Lane2 q2 = {qv, qv};
    for (std::size_t v = 0; v < V; ++v) acc[v] += keyed[v] - load2(ws + d * N + 2 * v) * q2;
  }
  std::memcpy(out, acc, sizeof acc);
}

// Same arithmetic for any group width.
void pcdc_group_any(const double* nb, const double* wg, const double* ws, const float* q, std::size_t dg,
                    std::size_t slots, std::size_t width, double* out) {
  std::vector<double> keyed(width);
  std::fill_n(out, width, 0.0);
  for (std::size_t d = 0; d < dg; ++d) {
    std::fill(keyed.begin(), keyed.end(), 0.0);
    for (std::size_t n = 0; n < slots; ++n) {
      const double xv = nb[d * slots + n];
      const double* wr = wg + (d * slots + n) * width;
      for (std::size_t l = 0; l < width; ++l) keyed[l] += wr[l] * xv;
    }
    const double qv = q[d];
    for (std::size_t l = 0; l < width; ++l) out[l] += keyed[l] - ws[d * width + l] * qv;
  }
}

using PcdcGroupFn = void (*)(const double*, const double*, const double*, const float*, std::size_t, std::size_t,
                             std::size_t, double*);

PcdcGroupFn pick_pcdc_group(std::size_t width) {
  switch (width) {
    case 8: return pcdc_group<8>;
    case 16: return pcdc_group<16>;
    case 32: return pcdc_group<32>;
    default: return pcdc_group_any;
  }
}

}  // namespace

FeatureMap pcdc_layer(const FeatureMap& q_bar, const FeatureMap& k_bar, const PcdcParams& p) {
  p.validate();
  if (!q_bar.same_shape(k_bar)) fail(Errc::ShapeMismatch, "pcdc: query and key dims differ");
  if (q_bar.channels() != p.in_channels) fail(Errc::ShapeMismatch, "pcdc: input channels differ from D");

  const std::size_t h = q_bar.height(), w = q_bar.width();
  const std::size_t D = p.in_channels, L = p.out_channels, slots = p.slots(), dg = p.in_per_group();
  const std::size_t out_per_group = L / p.groups;

  // Weight reordered to [g][d~][n][l~] so the innermost loop runs over the
  // outputs of one group, plus the neighbor-summed weight [g][d~][l~] for the
  // centre term. Each output still accumulates in (d~, n) order.
  std::vector<double> wt(L * dg * slots);
  std::vector<double> wsum(L * dg, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t g = l / out_per_group, lo = l % out_per_group;
    for (std::size_t d = 0; d < dg; ++d)
      for (std::size_t n = 0; n < slots; ++n) {
        wt[((g * dg + d) * slots + n) * out_per_group + lo] = p.w(n, d, l);
        wsum[(g * dg + d) * out_per_group + lo] += p.w(n, d, l);
      }
  }

  const PcdcGroupFn group_fn = pick_pcdc_group(out_per_group);
  FeatureMap out(h, w, L);
  parallel_for(h, [&](std::size_t r0, std::size_t r1) {
    std::vector<double> nb(D * slots);  // [d][n]
    std::vector<double> acc(out_per_group);
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        for (std::size_t n = 0; n < slots; ++n) {
          const auto px = k_bar.pixel(ops::neighbor_index(i, j, h, w, p.kernel, p.dilation, n));
          for (std::size_t d = 0; d < D; ++d) nb[d * slots + n] = px[d];
        }
        const float* q = q_bar.pixel(i * w + j).data();
        auto dst = out.pixel(i * w + j);
        for (std::size_t g = 0; g < p.groups; ++g) {
          group_fn(nb.data() + g * dg * slots, wt.data() + g * dg * slots * out_per_group,
                   wsum.data() + g * dg * out_per_group, q + g * dg, dg, slots, out_per_group, acc.data());
          for (std::size_t l = 0; l < out_per_group; ++l) {
            const std::size_t ch = g * out_per_group + l;
            dst[ch] = static_cast<float>(acc[l] + p.bias[ch]);
          }
        }
      }
  });
  return out;
}

SimilarityScores channel_compressor(const FeatureMap& v, const CompressorParams& c) {
  if (c.conv1_bias.size() != kCompressorHidden || c.norm.gamma.size() != kCompressorHidden)
    fail(Errc::ShapeMismatch, "compressor: hidden width must be 128");
  FeatureMap hidden = ops::grouped_pointwise_conv(v, c.conv1_weight, c.conv1_bias, kCompressorHidden, c.conv1_groups);
  for (float& x : hidden.data()) x = std::max(x, 0.0f);
  ops::group_normalize_inplace(hidden, c.norm);
  return ops::grouped_pointwise_conv(hidden, c.conv2_weight, c.conv2_bias, c.out_channels, 1);
}

SimilarityScores pcdc_block(const FeatureMap& q_in, const FeatureMap& k_in, const PcdcBlockParams& p) {
  if (!q_in.same_shape(k_in)) fail(Errc::ShapeMismatch, "pcdc_block: query and key dims differ");
  FeatureMap v;
  {
    const FeatureMap q_bar = ops::group_normalize(q_in, p.shared_norm);
    const FeatureMap k_bar = ops::group_normalize(k_in, p.shared_norm);
    v = pcdc_layer(q_bar, k_bar, p.pcdc);
  }
  return channel_compressor(v, p.compressor);
}

}  // namespace resfu

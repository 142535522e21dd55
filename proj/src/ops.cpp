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

#include "ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "parallel.hpp"

namespace resfu::ops {

AxisTaps bilinear_taps(std::size_t src_len, std::size_t dst_len) {
  AxisTaps t;
  t.lo.resize(dst_len);
  t.hi.resize(dst_len);
  t.frac.resize(dst_len);
  const double scale = static_cast<double>(src_len) / static_cast<double>(dst_len);
  const double max_coord = static_cast<double>(src_len - 1);
  for (std::size_t i = 0; i < dst_len; ++i) {
    const double coord = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, max_coord);
    const auto lo = static_cast<std::size_t>(coord);
    t.lo[i] = lo;
    t.hi[i] = std::min(lo + 1, src_len - 1);
    t.frac[i] = static_cast<float>(coord - static_cast<double>(lo));
  }
  return t;
}

FeatureMap bilinear_resize(const FeatureMap& src, std::size_t out_h, std::size_t out_w) {
  require(out_h >= 1 && out_w >= 1, Errc::InvalidArgument, "resize target must be >= 1");
  const std::size_t c = src.channels();
  const AxisTaps rows = bilinear_taps(src.height(), out_h);
  const AxisTaps cols = bilinear_taps(src.width(), out_w);
  FeatureMap out(out_h, out_w, c);
  parallel_for(out_h, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      const float fy = rows.frac[i];
      for (std::size_t j = 0; j < out_w; ++j) {
        const float fx = cols.frac[j];
        const float* a = &src.data()[src.offset(rows.lo[i], cols.lo[j], 0)];
        const float* b = &src.data()[src.offset(rows.lo[i], cols.hi[j], 0)];
        const float* d = &src.data()[src.offset(rows.hi[i], cols.lo[j], 0)];
        const float* e = &src.data()[src.offset(rows.hi[i], cols.hi[j], 0)];
        float* dst = &out.at(i, j, 0);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const float top = lerp_exact(a[ch], b[ch], fx);
          const float bottom = lerp_exact(d[ch], e[ch], fx);
          dst[ch] = lerp_exact(top, bottom, fy);
        }
      }
    }
  });
  return out;
}

FeatureMap nearest_resize(const FeatureMap& src, std::size_t out_h, std::size_t out_w) {
  require(out_h >= 1 && out_w >= 1, Errc::InvalidArgument, "resize target must be >= 1");
  auto index = [](std::size_t i, std::size_t src_len, std::size_t dst_len) {
    const double s = (static_cast<double>(i) + 0.5) * static_cast<double>(src_len) / static_cast<double>(dst_len);
    return std::min(static_cast<std::size_t>(std::floor(s)), src_len - 1);
  };
  const std::size_t c = src.channels();
  FeatureMap out(out_h, out_w, c);
  for (std::size_t i = 0; i < out_h; ++i) {
    const std::size_t si = index(i, src.height(), out_h);
    for (std::size_t j = 0; j < out_w; ++j) {
      const std::size_t sj = index(j, src.width(), out_w);
      std::copy_n(&src.data()[src.offset(si, sj, 0)], c, &out.at(i, j, 0));
    }
  }
  return out;
}

std::vector<double> box_mean_f64(std::span<const double> src, std::size_t h, std::size_t w, std::size_t c,
                                 std::size_t radius) {
  require(radius >= 1, Errc::InvalidArgument, "box radius must be >= 1");
  require(src.size() == h * w * c, Errc::ShapeMismatch, "box_mean plane size mismatch");
  const std::size_t row_len = w * c;

  // Horizontal window sums, one row per task.
  std::vector<double> horiz(h * row_len);
  parallel_for(h, [&](std::size_t r0, std::size_t r1) {
    std::vector<double> prefix((w + 1) * c);
    for (std::size_t i = r0; i < r1; ++i) {
      const double* row = src.data() + i * row_len;
      std::fill_n(prefix.begin(), c, 0.0);
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t ch = 0; ch < c; ++ch) prefix[(j + 1) * c + ch] = prefix[j * c + ch] + row[j * c + ch];
      double* dst = horiz.data() + i * row_len;
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t lo = j >= radius ? j - radius : 0;
        const std::size_t hi = std::min(w - 1, j + radius) + 1;
        for (std::size_t ch = 0; ch < c; ++ch) dst[j * c + ch] = prefix[hi * c + ch] - prefix[lo * c + ch];
      }
    }
  });

  // Vertical sliding sums, one column band per task so each element sees the
  // same add/subtract sequence whatever the split.
  std::vector<double> out(h * row_len);
  std::vector<double> col_counts(w);
  for (std::size_t j = 0; j < w; ++j) {
    const std::size_t clo = j >= radius ? j - radius : 0;
    const std::size_t chi = std::min(w - 1, j + radius) + 1;
    col_counts[j] = static_cast<double>(chi - clo);
  }
  const std::size_t band = 256;
  parallel_for((row_len + band - 1) / band, [&](std::size_t b0, std::size_t b1) {
    const std::size_t k0 = b0 * band, k1 = std::min(row_len, b1 * band);
    const std::size_t len = k1 - k0;
    std::vector<double> acc(len, 0.0);
    for (std::size_t i = 0; i < std::min(h, radius); ++i) {
      const double* add = horiz.data() + i * row_len + k0;
      for (std::size_t k = 0; k < len; ++k) acc[k] += add[k];
    }
    for (std::size_t i = 0; i < h; ++i) {
      if (i + radius < h) {
        const double* add = horiz.data() + (i + radius) * row_len + k0;
        for (std::size_t k = 0; k < len; ++k) acc[k] += add[k];
      }
      if (i > radius) {
        const double* sub = horiz.data() + (i - radius - 1) * row_len + k0;
        for (std::size_t k = 0; k < len; ++k) acc[k] -= sub[k];
      }
      const std::size_t lo = i >= radius ? i - radius : 0;
      const std::size_t hi = std::min(h - 1, i + radius) + 1;
      const double rows = static_cast<double>(hi - lo);
      double* dst = out.data() + i * row_len;
      for (std::size_t k = k0; k < k1; ++k) dst[k] = acc[k - k0] / (rows * col_counts[k / c]);
    }
  });
  return out;
}

FeatureMap box_mean(const FeatureMap& src, std::size_t radius) {
  std::vector<double> plane(src.data().begin(), src.data().end());
  const auto mean = box_mean_f64(plane, src.height(), src.width(), src.channels(), radius);
  FeatureMap out(src.height(), src.width(), src.channels());
  std::transform(mean.begin(), mean.end(), out.data().begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

std::array<double, 9> gaussian3_kernel() {
  std::array<double, 9> k{};
  double total = 0.0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      const double v = std::exp(-0.5 * static_cast<double>(di * di + dj * dj));
      k[static_cast<std::size_t>((di + 1) * 3 + (dj + 1))] = v;
      total += v;
    }
  for (double& v : k) v /= total;
  return k;
}

FeatureMap gaussian_smooth3(const FeatureMap& src) {
  const auto kernel = gaussian3_kernel();
  const std::size_t h = src.height(), w = src.width(), c = src.channels();
  FeatureMap out(h, w, c);
  parallel_for(h, [&](std::size_t r0, std::size_t r1) {
    std::vector<double> acc(c);
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t slot = 0; slot < 9; ++slot) {
          const auto px = src.pixel(neighbor_index(i, j, h, w, 3, 1, slot));
          for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += kernel[slot] * px[ch];
        }
        auto dst = out.pixel(i * w + j);
        for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = static_cast<float>(acc[ch]);
      }
  });
  return out;
}

void group_normalize_inplace(FeatureMap& src, const GroupNormAffine& affine) {
  const std::size_t c = src.channels();
  if (affine.groups == 0 || c % affine.groups != 0)
    fail(Errc::ChannelGroupMismatch, "channels (" + std::to_string(c) + ") not divisible by groups (" +
                                         std::to_string(affine.groups) + ")");
  require(affine.gamma.size() == c && affine.beta.size() == c, Errc::ShapeMismatch,
          "group norm affine length must equal channel count");
  require(affine.eps > 0.0f, Errc::InvalidArgument, "group norm eps must be positive");

  const std::size_t per_group = c / affine.groups;
  const std::size_t n = src.pixels();
  const double count = static_cast<double>(n * per_group);
  const std::size_t groups = affine.groups;
  // Per-channel partial sums over pixels, then folded per group.
  std::vector<double> ch_sum(c, 0.0), ch_sq(c, 0.0), mean(groups), var(groups);
  for (std::size_t p = 0; p < n; ++p) {
    const float* px = src.pixel(p).data();
    for (std::size_t ch = 0; ch < c; ++ch) ch_sum[ch] += px[ch];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    double total = 0.0;
    for (std::size_t k = 0; k < per_group; ++k) total += ch_sum[g * per_group + k];
    mean[g] = total / count;
  }
  std::vector<double> ch_mean(c);
  for (std::size_t ch = 0; ch < c; ++ch) ch_mean[ch] = mean[ch / per_group];
  for (std::size_t p = 0; p < n; ++p) {
    const float* px = src.pixel(p).data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double d = px[ch] - ch_mean[ch];
      ch_sq[ch] += d * d;
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    double total = 0.0;
    for (std::size_t k = 0; k < per_group; ++k) total += ch_sq[g * per_group + k];
    var[g] = total / count;
  }
  std::vector<double> scale(c), shift(c);
  for (std::size_t g = 0; g < groups; ++g) {
    const double inv = 1.0 / std::sqrt(var[g] + static_cast<double>(affine.eps));
    for (std::size_t k = 0; k < per_group; ++k) {
      const std::size_t ch = g * per_group + k;
      scale[ch] = inv * affine.gamma[ch];
      shift[ch] = affine.beta[ch] - mean[g] * scale[ch];
    }
  }

  parallel_for(n, [&](std::size_t p0, std::size_t p1) {
    for (std::size_t p = p0; p < p1; ++p) {
      auto px = src.pixel(p);
      for (std::size_t ch = 0; ch < c; ++ch) px[ch] = static_cast<float>(px[ch] * scale[ch] + shift[ch]);
    }
  });
}

FeatureMap group_normalize(const FeatureMap& src, const GroupNormAffine& affine) {
  FeatureMap out = src;
  group_normalize_inplace(out, affine);
  return out;
}

namespace {

// out[l] = sum_d w[d][l] * x[d] over one group, accumulated in d order.
template <std::size_t N>
void conv_group(const float* __restrict x, const float* __restrict w, std::size_t in, std::size_t /*width*/,
                float* __restrict out) {
  float acc[N] = {};
  for (std::size_t d = 0; d < in; ++d) {
    const float xv = x[d];
    const float* wr = w + d * N;
    for (std::size_t l = 0; l < N; ++l) acc[l] += wr[l] * xv;
  }
  for (std::size_t l = 0; l < N; ++l) out[l] = acc[l];
}

void conv_group_any(const float* x, const float* w, std::size_t in, std::size_t width, float* out) {
  std::fill_n(out, width, 0.0f);
  for (std::size_t d = 0; d < in; ++d) {
    const float xv = x[d];
    const float* wr = w + d * width;
    for (std::size_t l = 0; l < width; ++l) out[l] += wr[l] * xv;
  }
}

using ConvGroupFn = void (*)(const float*, const float*, std::size_t, std::size_t, float*);

ConvGroupFn pick_conv_group(std::size_t width) {
  switch (width) {
    case 8: return conv_group<8>;
    case 9: return conv_group<9>;
    case 16: return conv_group<16>;
    case 32: return conv_group<32>;
    default: return conv_group_any;
  }
}

}  // namespace

FeatureMap grouped_pointwise_conv(const FeatureMap& src, std::span<const float> weight, std::span<const float> bias,
                                  std::size_t out_channels, std::size_t groups) {
  const std::size_t cin = src.channels();
  if (groups == 0 || cin % groups != 0 || out_channels == 0 || out_channels % groups != 0)
    fail(Errc::ShapeMismatch, "grouped conv: channels not divisible by groups");
  const std::size_t in_per_group = cin / groups;
  const std::size_t out_per_group = out_channels / groups;
  if (weight.size() != out_channels * in_per_group || bias.size() != out_channels)
    fail(Errc::ShapeMismatch, "grouped conv: weight/bias size mismatch");

  // Weights transposed to [input][output] so the inner loop runs over outputs;
  // each output still accumulates its inputs in order.
  std::vector<float> wt(in_per_group * out_channels);
  for (std::size_t l = 0; l < out_channels; ++l) {
    const std::size_t g = l / out_per_group, lo = l % out_per_group;
    for (std::size_t d = 0; d < in_per_group; ++d)
      wt[(g * in_per_group + d) * out_per_group + lo] = weight[l * in_per_group + d];
  }

  const ConvGroupFn group_fn = pick_conv_group(out_per_group);
  FeatureMap out(src.height(), src.width(), out_channels);
  parallel_for(src.pixels(), [&](std::size_t p0, std::size_t p1) {
    std::vector<float> acc(out_channels);
    for (std::size_t p = p0; p < p1; ++p) {
      const float* x = src.pixel(p).data();
      for (std::size_t g = 0; g < groups; ++g)
        group_fn(x + g * in_per_group, wt.data() + g * in_per_group * out_per_group, in_per_group, out_per_group,
                 acc.data() + g * out_per_group);
      float* dst = out.pixel(p).data();
      for (std::size_t l = 0; l < out_channels; ++l) dst[l] = acc[l] + bias[l];
    }
  });
  return out;
}

FeatureMap relu(const FeatureMap& src) {
  FeatureMap out(src.height(), src.width(), src.channels());
  std::transform(src.data().begin(), src.data().end(), out.data().begin(), [](float v) { return std::max(v, 0.0f); });
  return out;
}

NeighborhoodTensor gather_neighbors(const FeatureMap& src, std::size_t kernel, std::size_t dilation) {
  require(kernel % 2 == 1, Errc::InvalidArgument, "kernel size must be odd");
  require(dilation >= 1, Errc::InvalidArgument, "dilation must be >= 1");
  const std::size_t h = src.height(), w = src.width(), c = src.channels();
  const std::size_t slots = kernel * kernel;
  NeighborhoodTensor t{h * w, slots, c, FloatBuffer(h * w * slots * c)};
  parallel_for(h, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t n = 0; n < slots; ++n) {
          const auto px = src.pixel(neighbor_index(i, j, h, w, kernel, dilation, n));
          std::copy(px.begin(), px.end(), t.data.begin() + static_cast<std::ptrdiff_t>(((i * w + j) * slots + n) * c));
        }
  });
  return t;
}

SimilarityScores softmax_rows(const SimilarityScores& scores) {
  const std::size_t slots = scores.channels();
  SimilarityScores out(scores.height(), scores.width(), slots);
  parallel_for(scores.pixels(), [&](std::size_t p0, std::size_t p1) {
    std::vector<double> e(slots);
    for (std::size_t p = p0; p < p1; ++p) {
      const auto row = scores.pixel(p);
      const float top = *std::max_element(row.begin(), row.end());
      double total = 0.0;
      for (std::size_t n = 0; n < slots; ++n) {
        e[n] = std::exp(static_cast<double>(row[n]) - static_cast<double>(top));
        total += e[n];
      }
      auto dst = out.pixel(p);
      for (std::size_t n = 0; n < slots; ++n) dst[n] = static_cast<float>(e[n] / total);
    }
  });
  return out;
}

}  // namespace resfu::ops

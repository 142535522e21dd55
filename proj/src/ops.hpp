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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace resfu::ops {

// HW x K^2 x D gathered neighbor values. Neighbor slots enumerate the K x K
// offset grid row-major starting at the top-left; channel is fastest.
struct NeighborhoodTensor {
  std::size_t pixels = 0;
  std::size_t neighbors = 0;
  std::size_t channels = 0;
  FloatBuffer data;

  float at(std::size_t pixel, std::size_t slot, std::size_t ch) const noexcept {
    return data[(pixel * neighbors + slot) * channels + ch];
  }
};

struct GroupNormAffine {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::size_t groups = 1;
  float eps = 1e-5f;

  static GroupNormAffine identity(std::size_t channels, std::size_t groups, float eps = 1e-5f) {
    return {std::vector<float>(channels, 1.0f), std::vector<float>(channels, 0.0f), groups, eps};
  }
};

// Half-pixel-center sampling table along one axis: output index i reads
// source taps lo[i], hi[i] with weight frac[i] on hi.
struct AxisTaps {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<float> frac;
};

AxisTaps bilinear_taps(std::size_t src_len, std::size_t dst_len);

inline float lerp_exact(float a, float b, float t) noexcept { return a + t * (b - a); }

FeatureMap bilinear_resize(const FeatureMap& src, std::size_t out_h, std::size_t out_w);
FeatureMap nearest_resize(const FeatureMap& src, std::size_t out_h, std::size_t out_w);

// Mean over the in-bounds part of the (2r+1)^2 window, divided by the
// valid-pixel count.
FeatureMap box_mean(const FeatureMap& src, std::size_t radius);

// Same filter on a float64 H x W x C plane; used where statistics must stay
// in double precision.
std::vector<double> box_mean_f64(std::span<const double> src, std::size_t h, std::size_t w, std::size_t c,
                                 std::size_t radius);

// Normalized 3x3 Gaussian (sigma = 1), clamp-to-edge padding.
FeatureMap gaussian_smooth3(const FeatureMap& src);
std::array<double, 9> gaussian3_kernel();

FeatureMap group_normalize(const FeatureMap& src, const GroupNormAffine& affine);
void group_normalize_inplace(FeatureMap& map, const GroupNormAffine& affine);

// 1x1 grouped convolution. `weight` is out_channels x (Cin / groups),
// row-major; `bias` has out_channels entries.
FeatureMap grouped_pointwise_conv(const FeatureMap& src, std::span<const float> weight, std::span<const float> bias,
                                  std::size_t out_channels, std::size_t groups);

FeatureMap relu(const FeatureMap& src);

NeighborhoodTensor gather_neighbors(const FeatureMap& src, std::size_t kernel, std::size_t dilation);

// Clamped source pixel index for neighbor `slot` of (row, col).
inline std::size_t neighbor_index(std::size_t row, std::size_t col, std::size_t h, std::size_t w, std::size_t kernel,
                                  std::size_t dilation, std::size_t slot) noexcept {
  const long half = static_cast<long>(kernel / 2);
  const long di = static_cast<long>(slot / kernel) - half;
  const long dj = static_cast<long>(slot % kernel) - half;
  long r = static_cast<long>(row) + di * static_cast<long>(dilation);
  long c = static_cast<long>(col) + dj * static_cast<long>(dilation);
  r = r < 0 ? 0 : (r >= static_cast<long>(h) ? static_cast<long>(h) - 1 : r);
  c = c < 0 ? 0 : (c >= static_cast<long>(w) ? static_cast<long>(w) - 1 : c);
  return static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c);
}

SimilarityScores softmax_rows(const SimilarityScores& scores);

}  // namespace resfu::ops

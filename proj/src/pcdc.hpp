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

#include <cstddef>
#include <vector>

#include "ops.hpp"
#include "tensor.hpp"

namespace resfu {

// Paired central difference convolution weights.
// weight is K^2 x (D/G) x L, flat index (n * (D/G) + d~) * L + l.
struct PcdcParams {
  std::vector<float> weight;
  std::vector<float> bias;
  std::size_t kernel = 3;
  std::size_t in_channels = 32;   // D
  std::size_t out_channels = 32;  // L
  std::size_t groups = 4;         // G
  std::size_t dilation = 1;

  std::size_t slots() const noexcept { return kernel * kernel; }
  std::size_t in_per_group() const noexcept { return in_channels / groups; }
  float w(std::size_t slot, std::size_t d_local, std::size_t l) const noexcept {
    return weight[(slot * in_per_group() + d_local) * out_channels + l];
  }
  void validate() const;
};

inline constexpr std::size_t kCompressorHidden = 128;
inline constexpr std::size_t kCompressorGroups = 4;
inline constexpr std::size_t kNormGroups = 4;
inline constexpr float kNormEps = 1e-5f;

// L -> 128 (grouped 1x1) -> ReLU -> GroupNorm -> K^2 (dense 1x1).
struct CompressorParams {
  std::vector<float> conv1_weight;  // 128 x (L / conv1_groups)
  std::vector<float> conv1_bias;    // 128
  std::size_t conv1_groups = kCompressorGroups;
  ops::GroupNormAffine norm;        // over 128 channels
  std::vector<float> conv2_weight;  // K^2 x 128
  std::vector<float> conv2_bias;    // K^2
  std::size_t out_channels = 9;     // K^2
};

struct PcdcBlockParams {
  ops::GroupNormAffine shared_norm;  // over D channels, applied to both inputs
  PcdcParams pcdc;
  CompressorParams compressor;
};

// Decomposed form: grouped K x K dilated convolution of k_bar, minus a 1x1
// convolution of q_bar with the spatially summed weights, plus bias.
FeatureMap pcdc_layer(const FeatureMap& q_bar, const FeatureMap& k_bar, const PcdcParams& p);

SimilarityScores channel_compressor(const FeatureMap& v, const CompressorParams& c);

SimilarityScores pcdc_block(const FeatureMap& q_in, const FeatureMap& k_in, const PcdcBlockParams& p);

}  // namespace resfu

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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "guided_filter.hpp"
#include "pcdc.hpp"
#include "tensor.hpp"

namespace resfu {

inline constexpr std::size_t kProjectionDim = 32;  // D
inline constexpr std::size_t kPcdcChannels = 32;   // L
inline constexpr std::size_t kPcdcGroups = 4;      // G

// Linear projections: q = weight_q * y + bias_q, k = weight_k * x + bias_k.
// Weights are row-major D x c and D x C.
struct ProjectionParams {
  std::vector<float> weight_q;
  std::vector<float> bias_q;
  std::vector<float> weight_k;
  std::vector<float> bias_k;
  std::size_t dim = kProjectionDim;
  std::size_t guide_channels = 0;  // c
  std::size_t value_channels = 0;  // C
};

struct ResfuParams {
  ProjectionParams proj;
  PcdcBlockParams block_s;  // semantic branch: (q_gf, k_up)
  PcdcBlockParams block_d;  // detail branch: (q, q_gs)
  GuidedFilterConfig gf;

  std::size_t kernel() const noexcept { return block_s.pcdc.kernel; }
};

struct UpsampleConfig {
  std::size_t ratio = 2;
  std::size_t kernel = 3;
  std::uint64_t seed = 0;
};

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights from SplitMix64(seed);
// zero biases, unit gamma, zero beta.
ResfuParams generate_params(std::size_t guide_channels, std::size_t value_channels, const UpsampleConfig& cfg);

struct NamedMap {
  std::string name;
  FeatureMap map;

  friend bool operator==(const NamedMap&, const NamedMap&) = default;
};
using WeightBundle = std::vector<NamedMap>;

// .rsfw: "RSFW", version 1, 3 pad bytes, u32 LE count, then per entry
// u32 LE name length, UTF-8 name, embedded .rsft blob.
std::vector<std::uint8_t> serialize_bundle(const WeightBundle& bundle);
WeightBundle deserialize_bundle(std::span<const std::uint8_t> bytes);

// Packing: matrices rows x cols as H=1, W=rows, C=cols; vectors as 1 x 1 x n;
// PCDC weight K^2 x (D/G) x L as H=K^2, W=D/G, C=L.
WeightBundle params_to_bundle(const ResfuParams& params);
ResfuParams params_from_bundle(const WeightBundle& bundle);

ResfuParams load_params(const std::string& path);
void save_params(const ResfuParams& params, const std::string& path);

}  // namespace resfu

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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "params.hpp"
#include "tensor.hpp"

namespace resfu {

struct QueryKey {
  FeatureMap q;  // HW x D, from the guide
  FeatureMap k;  // hw x D, from the value feature
};

QueryKey project_qk(const FeatureMap& x, const FeatureMap& y, const ProjectionParams& proj);

struct SimilarityParts {
  FeatureMap q_gf;
  SimilarityScores semantic;  // s_s
  SimilarityScores detail;    // s_d
  SimilarityScores total;     // s_s + s_d
};

// Both branches run their PCDC with dilation = ratio.
SimilarityParts compute_similarity_parts(const FeatureMap& q, const FeatureMap& k_up, const FeatureMap& q_gs,
                                         const ResfuParams& params, std::size_t ratio);

SimilarityScores compute_similarity(const FeatureMap& q, const FeatureMap& k_up, const FeatureMap& q_gs,
                                    const ResfuParams& params, std::size_t ratio);

// x~_i = sum_n weights[i, n] * x_up[N(i)_n] with x_up the bilinear upsampling
// of x and N(i) a K x K neighborhood dilated by `ratio`. The fused path
// samples x_up on demand instead of materializing it.
FeatureMap kernel_apply_fns(const SimilarityScores& weights, const FeatureMap& x, std::size_t ratio,
                            std::size_t kernel, bool fused = true);

// Dot product of each query with its K x K dilated key neighbors.
SimilarityScores inner_product_scores(const FeatureMap& q, const FeatureMap& k_up, std::size_t kernel,
                                      std::size_t ratio);

enum class Baseline { None, Bilinear, Nearest, InnerProduct };

struct UpsampleOptions {
  std::size_t ratio = 2;
  std::size_t kernel = 3;
  Baseline baseline = Baseline::None;
  bool fused = true;
};

// Named intermediates in pipeline order (q, k_up, q_gf, q_gs, s_s, s_d, kernels).
using UpsampleTrace = std::vector<std::pair<std::string, FeatureMap>>;

FeatureMap resfu_upsample(const FeatureMap& x, const FeatureMap& y, const ResfuParams& params,
                          const UpsampleConfig& cfg, UpsampleTrace* trace = nullptr);

// resfu_upsample plus the baseline variants. `params` may be null for the
// bilinear and nearest baselines, which also ignore `y`.
FeatureMap upsample(const FeatureMap& x, const FeatureMap* y, const ResfuParams* params, const UpsampleOptions& opts,
                    UpsampleTrace* trace = nullptr);

}  // namespace resfu

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

#include "field64.hpp"
#include "pcdc.hpp"
#include "tensor.hpp"

// Definition-literal reference implementations. Slow, single-threaded, float64.
// Rule: nothing here calls into the production kernels; only the FeatureMap
// accessor and plain parameter structs are shared.
namespace resfu::oracle {

// Central-difference convolution evaluated straight from its definition:
// sum over group channels and neighbors of w * (k[j_n] - q[i]) + b.
Field64 pcdc_direct(const FeatureMap& q_bar, const FeatureMap& k_bar, const PcdcParams& p);

// Guided filter by solving the regularized least-squares fit separately for
// every window, then averaging the coefficients of all windows covering each
// pixel.
Field64 guided_filter_window(const FeatureMap& q, const FeatureMap& k_up, std::size_t radius, double eps);

// Bilinear upsampling with half-pixel centers, one sample at a time.
double bilinear_sample(const FeatureMap& x, std::size_t out_h, std::size_t out_w, std::size_t row, std::size_t col,
                       std::size_t ch);
Field64 bilinear_upsample(const FeatureMap& x, std::size_t out_h, std::size_t out_w);

// Weighted sum over dilated HR neighbors of the bilinearly upsampled value.
Field64 kernel_apply_direct(const FeatureMap& weights, const FeatureMap& x, std::size_t ratio, std::size_t kernel);

// Pre-FNS behavior: every HR pixel in a ratio x ratio block reuses the K x K
// LR neighbors of its parent LR pixel.
Field64 kernel_apply_gridwise(const FeatureMap& weights, const FeatureMap& x, std::size_t ratio, std::size_t kernel);

// Dilated K x K box mean with clamp padding.
Field64 dilated_box_mean(const Field64& src, std::size_t kernel, std::size_t dilation);

}  // namespace resfu::oracle

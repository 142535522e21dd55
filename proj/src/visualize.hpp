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
#include <vector>

#include "tensor.hpp"

namespace resfu::viz {

struct Eigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // column k is the k-th eigenvector, n x n row-major
};

// Cyclic Jacobi eigendecomposition of a symmetric n x n row-major matrix.
// Each eigenvector is sign-normalized so its largest-magnitude entry is positive.
Eigen jacobi_eigen(std::vector<double> matrix, std::size_t n, std::size_t max_sweeps = 100);

// Binary PPM (P6, maxval 255) of the top-3 principal components of the
// per-pixel channel vectors, each min-max scaled to [0, 255]. Components that
// do not exist (C < 3) or have zero range are filled with 128.
std::vector<std::uint8_t> render_pca(const FeatureMap& map);

// Grayscale PPM of a single channel, min-max scaled; constant channel -> 128.
std::vector<std::uint8_t> render_channel(const FeatureMap& map, std::size_t channel);

}  // namespace resfu::viz

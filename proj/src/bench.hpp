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
#include <string>
#include <vector>

namespace resfu::bench {

struct BenchRow {
  std::string variant;
  double mean_ms = 0.0;
  std::size_t peak_tensor_bytes = 0;  // tensor storage allocated beyond the inputs
};

struct BenchReport {
  double fused_vs_naive_error = 0.0;
  bool equivalent = false;
  std::vector<BenchRow> rows;
};

struct BenchConfig {
  std::size_t height = 64;  // LR
  std::size_t width = 64;
  std::size_t channels = 32;
  std::size_t ratio = 4;
  std::size_t iters = 10;
  std::uint64_t seed = 0;
};

// Times fused vs naive kernel application and the decomposed vs direct PCDC.
// Rows are only filled in when the fused and naive outputs agree to 1e-5.
BenchReport run(const BenchConfig& cfg);

}  // namespace resfu::bench

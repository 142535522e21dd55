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
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace resfu::check {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  double time_budget = 0.0;  // 0 = unbounded
  bool passed = false;
  std::string detail;
};

// Production vs literal-definition PCDC over random (h, w <= 16, D = L = 32,
// G in {1,2,4}, dilation in {1,2,4}) cases.
CheckResult pcdc_equivalence(std::uint64_t seed, std::size_t cases = 200);
// Closed-form guided filter vs per-window regression on 12x12x4, r = 2.
CheckResult guided_filter_equivalence(std::uint64_t seed, std::size_t cases = 20);
// Fused vs materializing FNS kernel application, ratios {1,2,4,8}.
CheckResult fused_vs_naive(std::uint64_t seed, std::size_t cases = 50);
// Constant input stays constant; softmax rows sum to one.
CheckResult constant_preservation(std::uint64_t seed, std::size_t bundles = 20);
// Zeroed score branches give the dilated 3x3 box mean of bilinear(x).
CheckResult degenerate_scores(std::uint64_t seed);
// FNS output is linear on a ramp; the grid-wise variant shows plateaus.
CheckResult anti_mosaic(std::uint64_t seed);
CheckResult pcdc_gradients(std::uint64_t seed);
CheckResult kernel_apply_gradients(std::uint64_t seed);
CheckResult softmax_shift_invariance(std::uint64_t seed);
// Byte-identical outputs across repeated runs and 1/4/8 workers.
CheckResult determinism(std::uint64_t seed);
// .rsft/.rsfw round trips on random bundles, plus corrupted-magic handling.
CheckResult format_round_trips(std::uint64_t seed, std::size_t bundles = 100);
// Loads an external .rsfw bundle and runs it through the pipeline.
std::vector<CheckResult> external_weights(const std::string& path, std::uint64_t seed);

struct SelfcheckOptions {
  std::uint64_t seed = 0;
  std::optional<std::string> weights_path;
};

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opts,
                                       const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace resfu::check

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

#include "tensor.hpp"

namespace resfu {

struct GuidedFilterConfig {
  std::size_t radius = 8;
  double eps = 0.001;
};

// Per-channel guided filter that fits q onto the upsampled key: local linear
// coefficients over each (2r+1)^2 window, then window-averaged coefficients
// applied back to q. All statistics are accumulated in double.
FeatureMap guided_filter(const FeatureMap& q, const FeatureMap& k_up, const GuidedFilterConfig& cfg = {});

}  // namespace resfu

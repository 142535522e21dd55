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
#include <initializer_list>
#include <vector>

#include "doctest.h"
#include "params.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace resfu::testing {

inline FeatureMap random_map(SplitMix64& rng, std::size_t h, std::size_t w, std::size_t c, double lo = -1.0,
                             double hi = 1.0) {
  FeatureMap m(h, w, c);
  for (float& v : m.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return m;
}

inline FeatureMap make_map(std::size_t h, std::size_t w, std::size_t c, std::initializer_list<float> values) {
  return FeatureMap(h, w, c, std::vector<float>(values));
}

inline void fill_random(std::vector<float>& v, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
}

inline PcdcParams random_pcdc(SplitMix64& rng, std::size_t D, std::size_t L, std::size_t G, std::size_t dilation,
                              std::size_t K = 3) {
  PcdcParams p;
  p.kernel = K;
  p.in_channels = D;
  p.out_channels = L;
  p.groups = G;
  p.dilation = dilation;
  p.weight.resize(K * K * (D / G) * L);
  p.bias.resize(L);
  fill_random(p.weight, rng, -0.5, 0.5);
  fill_random(p.bias, rng, -0.5, 0.5);
  return p;
}

// Moves every parameter of a block away from its initial value.
inline void randomize_block(SplitMix64& rng, PcdcBlockParams& b) {
  fill_random(b.shared_norm.gamma, rng, 0.5, 1.5);
  fill_random(b.shared_norm.beta, rng, -0.5, 0.5);
  fill_random(b.pcdc.weight, rng, -0.3, 0.3);
  fill_random(b.pcdc.bias, rng, -0.3, 0.3);
  fill_random(b.compressor.conv1_weight, rng, -0.3, 0.3);
  fill_random(b.compressor.conv1_bias, rng, -0.3, 0.3);
  fill_random(b.compressor.norm.gamma, rng, 0.5, 1.5);
  fill_random(b.compressor.norm.beta, rng, -0.5, 0.5);
  fill_random(b.compressor.conv2_weight, rng, -0.3, 0.3);
  fill_random(b.compressor.conv2_bias, rng, -0.3, 0.3);
}

inline void zero_block(PcdcBlockParams& b) {
  for (auto* v : {&b.pcdc.weight, &b.pcdc.bias, &b.compressor.conv1_weight, &b.compressor.conv1_bias,
                  &b.compressor.conv2_weight, &b.compressor.conv2_bias})
    std::fill(v->begin(), v->end(), 0.0f);
}

inline bool bitwise_equal(const FeatureMap& a, const FeatureMap& b) {
  return a.same_shape(b) && serialize_feature_map(a) == serialize_feature_map(b);
}

// Code of the resfu::Error thrown by `f`.
inline Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace resfu::testing

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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace resfu {

// Float64 H x W x C field with the FeatureMap layout. Reference and gradient
// code runs on this type.
struct Field64 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double, CountingAllocator<double>> data;

  Field64() = default;
  Field64(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  static Field64 from(const FeatureMap& m) {
    Field64 f(m.height(), m.width(), m.channels());
    std::copy(m.data().begin(), m.data().end(), f.data.begin());
    return f;
  }

  FeatureMap to_float() const {
    FeatureMap m(height, width, channels);
    std::transform(data.begin(), data.end(), m.data().begin(), [](double v) { return static_cast<float>(v); });
    return m;
  }

  std::size_t pixels() const noexcept { return height * width; }
  std::size_t size() const noexcept { return data.size(); }
  double at(std::size_t r, std::size_t c, std::size_t ch) const noexcept { return data[ch + channels * (c + width * r)]; }
  double& at(std::size_t r, std::size_t c, std::size_t ch) noexcept { return data[ch + channels * (c + width * r)]; }
  bool same_shape(const Field64& o) const noexcept {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// max |got - ref| / max |ref|, the max-norm relative error used throughout the
// tests and selfcheck. Returns the absolute error when ref is all zero.
template <class A, class B>
double max_rel_error(std::span<const A> got, std::span<const B> ref) {
  if (got.size() != ref.size()) return INFINITY;
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double g = static_cast<double>(got[i]);
    const double r = static_cast<double>(ref[i]);
    if (!std::isfinite(g) || !std::isfinite(r)) return INFINITY;
    diff = std::max(diff, std::abs(g - r));
    scale = std::max(scale, std::abs(r));
  }
  return scale > 0.0 ? diff / scale : diff;
}

inline double max_rel_error(const FeatureMap& got, const Field64& ref) {
  if (got.height() != ref.height || got.width() != ref.width || got.channels() != ref.channels) return INFINITY;
  return max_rel_error(got.data(), std::span<const double>(ref.data.data(), ref.data.size()));
}

inline double max_rel_error(const FeatureMap& got, const FeatureMap& ref) {
  if (!got.same_shape(ref)) return INFINITY;
  return max_rel_error(got.data(), ref.data());
}

}  // namespace resfu

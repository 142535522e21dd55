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
#include <vector>

#include "error.hpp"
#include "memory_stats.hpp"

namespace resfu {

using FloatBuffer = std::vector<float, CountingAllocator<float>>;

// Dense H x W x C field of 32-bit floats, row-major with channel fastest.
// Element (row, col, ch) lives at ch + channels * (col + width * row).
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f);
  FeatureMap(std::size_t height, std::size_t width, std::size_t channels, std::span<const float> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t offset(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
    return ch + channels_ * (col + width_ * row);
  }
  float at(std::size_t row, std::size_t col, std::size_t ch) const noexcept { return data_[offset(row, col, ch)]; }
  float& at(std::size_t row, std::size_t col, std::size_t ch) noexcept { return data_[offset(row, col, ch)]; }

  // Per-pixel channel vector at flat pixel index.
  std::span<const float> pixel(std::size_t index) const noexcept {
    return {data_.data() + index * channels_, channels_};
  }
  std::span<float> pixel(std::size_t index) noexcept { return {data_.data() + index * channels_, channels_}; }

  std::span<const float> data() const noexcept { return {data_.data(), data_.size()}; }
  std::span<float> data() noexcept { return {data_.data(), data_.size()}; }

  bool same_shape(const FeatureMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const FeatureMap& a, const FeatureMap& b) noexcept {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  FloatBuffer data_;
};

// HW x K^2 score field; one row of K^2 slots per output pixel.
using SimilarityScores = FeatureMap;

inline constexpr std::size_t kTensorHeaderBytes = 24;

std::vector<std::uint8_t> serialize_feature_map(const FeatureMap& map);

// Parses a single .rsft blob that must span `bytes` exactly.
FeatureMap deserialize_feature_map(std::span<const std::uint8_t> bytes);

// Parses one .rsft blob at the front of `bytes`; `consumed` receives its length.
FeatureMap deserialize_feature_map_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed);

FeatureMap load_feature_map(const std::string& path);
void save_feature_map(const FeatureMap& map, const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace resfu

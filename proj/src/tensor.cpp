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

#include "tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace resfu {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'F', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  require(height >= 1 && width >= 1 && channels >= 1, Errc::InvalidArgument, "feature map dims must be >= 1");
  data_.assign(height * width * channels, fill);
}

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t channels, std::span<const float> values)
    : FeatureMap(height, width, channels) {
  require(values.size() == data_.size(), Errc::ShapeMismatch, "value count does not match H*W*C");
  std::copy(values.begin(), values.end(), data_.begin());
}

bool FeatureMap::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::vector<std::uint8_t> serialize_feature_map(const FeatureMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderBytes + 4 * map.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(kDtypeF32);
  out.push_back(0);
  out.push_back(0);
  put_u32(out, 3);
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.channels()));
  for (float v : map.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureMap deserialize_feature_map_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) fail(Errc::BadMagic, "bad magic (expected RSFT)");
  if (bytes.size() < kTensorHeaderBytes) fail(Errc::TruncatedPayload, "truncated tensor header");
  const std::uint8_t* p = bytes.data();
  if (p[4] != kVersion) fail(Errc::UnsupportedVersion, "unsupported tensor version " + std::to_string(p[4]));
  if (p[5] != kDtypeF32) fail(Errc::MalformedHeader, "unsupported tensor dtype " + std::to_string(p[5]));
  if (p[6] != 0 || p[7] != 0) fail(Errc::MalformedHeader, "reserved header bytes must be zero");
  if (get_u32(p + 8) != 3) fail(Errc::MalformedHeader, "tensor rank must be 3");
  const std::uint64_t h = get_u32(p + 12);
  const std::uint64_t w = get_u32(p + 16);
  const std::uint64_t c = get_u32(p + 20);
  if (h == 0 || w == 0 || c == 0) fail(Errc::MalformedHeader, "tensor dims must be >= 1");
  const std::uint64_t count = h * w * c;
  const std::uint64_t available = (bytes.size() - kTensorHeaderBytes) / 4;
  if (count > available) fail(Errc::TruncatedPayload, "truncated tensor payload");

  FeatureMap map(h, w, c);
  auto dst = map.data();
  const std::uint8_t* src = p + kTensorHeaderBytes;
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::bit_cast<float>(get_u32(src + 4 * i));
  consumed = kTensorHeaderBytes + 4 * count;
  return map;
}

FeatureMap deserialize_feature_map(std::span<const std::uint8_t> bytes) {
  std::size_t consumed = 0;
  FeatureMap map = deserialize_feature_map_prefix(bytes, consumed);
  if (consumed != bytes.size()) fail(Errc::MalformedHeader, "trailing bytes after tensor payload");
  return map;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::Io, "read error on " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::Io, "write error on " + path);
}

FeatureMap load_feature_map(const std::string& path) {
  auto bytes = read_file(path);
  try {
    return deserialize_feature_map(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void save_feature_map(const FeatureMap& map, const std::string& path) { write_file(path, serialize_feature_map(map)); }

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::Io: return "Io";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::RatioMismatch: return "RatioMismatch";
    case Errc::ChannelGroupMismatch: return "ChannelGroupMismatch";
    case Errc::RowNotNormalized: return "RowNotNormalized";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::MissingEntry: return "MissingEntry";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ShapeMismatch:
    case Errc::RatioMismatch:
    case Errc::ChannelGroupMismatch:
    case Errc::RowNotNormalized:
      return 3;
    default:
      return 2;
  }
}

}  // namespace resfu

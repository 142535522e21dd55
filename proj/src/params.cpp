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

#include "params.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "rng.hpp"

namespace resfu {

namespace {

constexpr char kBundleMagic[4] = {'R', 'S', 'F', 'W'};
constexpr std::uint8_t kBundleVersion = 1;

std::vector<float> uniform_weights(SplitMix64& rng, std::size_t count, std::size_t fan_in) {
  const float bound = static_cast<float>(1.0 / std::sqrt(static_cast<double>(fan_in)));
  std::vector<float> w(count);
  for (float& v : w) v = bound * rng.symmetric();
  return w;
}

PcdcBlockParams generate_block(SplitMix64& rng, std::size_t kernel) {
  PcdcBlockParams b;
  b.shared_norm = ops::GroupNormAffine::identity(kProjectionDim, kNormGroups, kNormEps);

  PcdcParams& p = b.pcdc;
  p.kernel = kernel;
  p.in_channels = kProjectionDim;
  p.out_channels = kPcdcChannels;
  p.groups = kPcdcGroups;
  p.weight = uniform_weights(rng, p.slots() * p.in_per_group() * p.out_channels, p.slots() * p.in_per_group());
  p.bias.assign(p.out_channels, 0.0f);

  CompressorParams& c = b.compressor;
  const std::size_t in_per_group = kPcdcChannels / kCompressorGroups;
  c.conv1_groups = kCompressorGroups;
  c.conv1_weight = uniform_weights(rng, kCompressorHidden * in_per_group, in_per_group);
  c.conv1_bias.assign(kCompressorHidden, 0.0f);
  c.norm = ops::GroupNormAffine::identity(kCompressorHidden, kNormGroups, kNormEps);
  c.out_channels = kernel * kernel;
  c.conv2_weight = uniform_weights(rng, c.out_channels * kCompressorHidden, kCompressorHidden);
  c.conv2_bias.assign(c.out_channels, 0.0f);
  return b;
}

FeatureMap pack(std::size_t h, std::size_t w, std::size_t c, const std::vector<float>& v) {
  return FeatureMap(h, w, c, std::span<const float>(v));
}

FeatureMap pack_vector(const std::vector<float>& v) { return pack(1, 1, v.size(), v); }

std::vector<float> unpack(const FeatureMap& m) { return {m.data().begin(), m.data().end()}; }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

class BundleView {
 public:
  explicit BundleView(const WeightBundle& bundle) {
    for (const auto& e : bundle)
      if (!entries_.emplace(e.name, &e.map).second) fail(Errc::MalformedHeader, "duplicate bundle entry " + e.name);
  }

  const FeatureMap& get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) fail(Errc::MissingEntry, "missing weight entry " + name);
    return *it->second;
  }

  const FeatureMap& vector(const std::string& name, std::size_t len) const {
    const FeatureMap& m = get(name);
    if (m.height() != 1 || m.width() != 1 || m.channels() != len)
      fail(Errc::ShapeMismatch, name + ": expected 1x1x" + std::to_string(len));
    return m;
  }

  const FeatureMap& matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
    const FeatureMap& m = get(name);
    if (m.height() != 1 || m.width() != rows || m.channels() != cols)
      fail(Errc::ShapeMismatch, name + ": expected 1x" + std::to_string(rows) + "x" + std::to_string(cols));
    return m;
  }

 private:
  std::map<std::string, const FeatureMap*> entries_;
};

void append_block(WeightBundle& out, const std::string& t, const PcdcBlockParams& b) {
  const PcdcParams& p = b.pcdc;
  const CompressorParams& c = b.compressor;
  out.push_back({"norm_" + t + ".gamma", pack_vector(b.shared_norm.gamma)});
  out.push_back({"norm_" + t + ".beta", pack_vector(b.shared_norm.beta)});
  out.push_back({"pcdc_" + t + ".weight", pack(p.slots(), p.in_per_group(), p.out_channels, p.weight)});
  out.push_back({"pcdc_" + t + ".bias", pack_vector(p.bias)});
  out.push_back({"comp_" + t + ".conv1.weight",
                 pack(1, kCompressorHidden, p.out_channels / c.conv1_groups, c.conv1_weight)});
  out.push_back({"comp_" + t + ".conv1.bias", pack_vector(c.conv1_bias)});
  out.push_back({"comp_" + t + ".norm.gamma", pack_vector(c.norm.gamma)});
  out.push_back({"comp_" + t + ".norm.beta", pack_vector(c.norm.beta)});
  out.push_back({"comp_" + t + ".conv2.weight", pack(1, c.out_channels, kCompressorHidden, c.conv2_weight)});
  out.push_back({"comp_" + t + ".conv2.bias", pack_vector(c.conv2_bias)});
}

PcdcBlockParams read_block(const BundleView& v, const std::string& t, std::size_t dim) {
  PcdcBlockParams b;
  b.shared_norm = {unpack(v.vector("norm_" + t + ".gamma", dim)), unpack(v.vector("norm_" + t + ".beta", dim)),
                   kNormGroups, kNormEps};

  const FeatureMap& w = v.get("pcdc_" + t + ".weight");
  const auto kernel = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(w.height()))));
  if (kernel * kernel != w.height() || kernel % 2 == 0)
    fail(Errc::ShapeMismatch, "pcdc_" + t + ".weight: height must be K^2 for odd K");
  if (dim % w.width() != 0) fail(Errc::ShapeMismatch, "pcdc_" + t + ".weight: D/G does not divide D");
  PcdcParams& p = b.pcdc;
  p.kernel = kernel;
  p.in_channels = dim;
  p.groups = dim / w.width();
  p.out_channels = w.channels();
  p.weight = unpack(w);
  p.bias = unpack(v.vector("pcdc_" + t + ".bias", p.out_channels));
  p.validate();

  CompressorParams& c = b.compressor;
  const FeatureMap& c1 = v.get("comp_" + t + ".conv1.weight");
  if (c1.height() != 1 || c1.width() != kCompressorHidden || p.out_channels % c1.channels() != 0)
    fail(Errc::ShapeMismatch, "comp_" + t + ".conv1.weight: expected 1x128x(L/groups)");
  c.conv1_groups = p.out_channels / c1.channels();
  c.conv1_weight = unpack(c1);
  c.conv1_bias = unpack(v.vector("comp_" + t + ".conv1.bias", kCompressorHidden));
  c.norm = {unpack(v.vector("comp_" + t + ".norm.gamma", kCompressorHidden)),
            unpack(v.vector("comp_" + t + ".norm.beta", kCompressorHidden)), kNormGroups, kNormEps};
  c.out_channels = kernel * kernel;
  c.conv2_weight = unpack(v.matrix("comp_" + t + ".conv2.weight", c.out_channels, kCompressorHidden));
  c.conv2_bias = unpack(v.vector("comp_" + t + ".conv2.bias", c.out_channels));
  return b;
}

}  // namespace

ResfuParams generate_params(std::size_t guide_channels, std::size_t value_channels, const UpsampleConfig& cfg) {
  require(guide_channels >= 1 && value_channels >= 1, Errc::InvalidArgument, "channel counts must be >= 1");
  require(cfg.kernel % 2 == 1, Errc::InvalidArgument, "kernel size must be odd");
  SplitMix64 rng(cfg.seed);
  ResfuParams p;
  p.proj.dim = kProjectionDim;
  p.proj.guide_channels = guide_channels;
  p.proj.value_channels = value_channels;
  p.proj.weight_q = uniform_weights(rng, kProjectionDim * guide_channels, guide_channels);
  p.proj.bias_q.assign(kProjectionDim, 0.0f);
  p.proj.weight_k = uniform_weights(rng, kProjectionDim * value_channels, value_channels);
  p.proj.bias_k.assign(kProjectionDim, 0.0f);
  p.block_s = generate_block(rng, cfg.kernel);
  p.block_d = generate_block(rng, cfg.kernel);
  return p;
}

std::vector<std::uint8_t> serialize_bundle(const WeightBundle& bundle) {
  std::vector<std::uint8_t> out(std::begin(kBundleMagic), std::end(kBundleMagic));
  out.push_back(kBundleVersion);
  out.insert(out.end(), 3, 0);
  put_u32(out, static_cast<std::uint32_t>(bundle.size()));
  for (const auto& e : bundle) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    const auto blob = serialize_feature_map(e.map);
    out.insert(out.end(), blob.begin(), blob.end());
  }
  return out;
}

WeightBundle deserialize_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBundleMagic, 4) != 0)
    fail(Errc::BadMagic, "bad magic (expected RSFW)");
  if (bytes.size() < 12) fail(Errc::TruncatedPayload, "truncated bundle header");
  if (bytes[4] != kBundleVersion) fail(Errc::UnsupportedVersion, "unsupported bundle version " + std::to_string(bytes[4]));
  const std::uint32_t count = get_u32(bytes.data() + 8);
  std::size_t pos = 12;
  WeightBundle bundle;
  for (std::uint32_t e = 0; e < count; ++e) {
    if (bytes.size() - pos < 4) fail(Errc::TruncatedPayload, "truncated bundle entry");
    const std::uint32_t len = get_u32(bytes.data() + pos);
    pos += 4;
    if (bytes.size() - pos < len) fail(Errc::TruncatedPayload, "truncated bundle entry name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    std::size_t consumed = 0;
    FeatureMap map = deserialize_feature_map_prefix(bytes.subspan(pos), consumed);
    pos += consumed;
    bundle.push_back({std::move(name), std::move(map)});
  }
  if (pos != bytes.size()) fail(Errc::MalformedHeader, "trailing bytes after bundle");
  return bundle;
}

WeightBundle params_to_bundle(const ResfuParams& params) {
  const ProjectionParams& pr = params.proj;
  WeightBundle out;
  out.push_back({"proj_q.weight", pack(1, pr.dim, pr.guide_channels, pr.weight_q)});
  out.push_back({"proj_q.bias", pack_vector(pr.bias_q)});
  out.push_back({"proj_k.weight", pack(1, pr.dim, pr.value_channels, pr.weight_k)});
  out.push_back({"proj_k.bias", pack_vector(pr.bias_k)});
  append_block(out, "s", params.block_s);
  append_block(out, "d", params.block_d);
  return out;
}

ResfuParams params_from_bundle(const WeightBundle& bundle) {
  const BundleView v(bundle);
  ResfuParams p;
  const FeatureMap& wq = v.get("proj_q.weight");
  const FeatureMap& wk = v.get("proj_k.weight");
  if (wq.height() != 1 || wk.height() != 1 || wq.width() != wk.width())
    fail(Errc::ShapeMismatch, "projection weights must be 1 x D x channels with matching D");
  p.proj.dim = wq.width();
  p.proj.guide_channels = wq.channels();
  p.proj.value_channels = wk.channels();
  p.proj.weight_q = unpack(wq);
  p.proj.bias_q = unpack(v.vector("proj_q.bias", p.proj.dim));
  p.proj.weight_k = unpack(wk);
  p.proj.bias_k = unpack(v.vector("proj_k.bias", p.proj.dim));
  p.block_s = read_block(v, "s", p.proj.dim);
  p.block_d = read_block(v, "d", p.proj.dim);
  if (p.block_s.pcdc.kernel != p.block_d.pcdc.kernel) fail(Errc::ShapeMismatch, "branch kernel sizes differ");
  return p;
}

ResfuParams load_params(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return params_from_bundle(deserialize_bundle(bytes));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void save_params(const ResfuParams& params, const std::string& path) {
  write_file(path, serialize_bundle(params_to_bundle(params)));
}

}  // namespace resfu

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

#include "resfu/resfu.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "bench.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "selfcheck.hpp"
#include "tensor.hpp"
#include "upsampler.hpp"
#include "visualize.hpp"

struct resfu_tensor {
  resfu::FeatureMap map;
};

struct resfu_params {
  resfu::ResfuParams params;
};

struct resfu_trace {
  std::vector<std::string> names;
  std::vector<resfu_tensor> tensors;
};

struct resfu_buffer {
  std::vector<std::uint8_t> bytes;
};

namespace {

thread_local std::string g_last_error;

resfu_status to_status(resfu::Errc code) {
  using resfu::Errc;
  switch (code) {
    case Errc::BadMagic: return RESFU_ERR_BAD_MAGIC;
    case Errc::UnsupportedVersion: return RESFU_ERR_UNSUPPORTED_VERSION;
    case Errc::TruncatedPayload: return RESFU_ERR_TRUNCATED;
    case Errc::MalformedHeader: return RESFU_ERR_MALFORMED;
    case Errc::Io: return RESFU_ERR_IO;
    case Errc::ShapeMismatch: return RESFU_ERR_SHAPE;
    case Errc::RatioMismatch: return RESFU_ERR_RATIO;
    case Errc::ChannelGroupMismatch: return RESFU_ERR_CHANNEL_GROUP;
    case Errc::RowNotNormalized: return RESFU_ERR_ROW_NOT_NORMALIZED;
    case Errc::NonFiniteValue: return RESFU_ERR_NON_FINITE;
    case Errc::MissingEntry: return RESFU_ERR_MISSING_ENTRY;
    case Errc::InvalidArgument: return RESFU_ERR_INVALID_ARGUMENT;
  }
  return RESFU_ERR_INTERNAL;
}

resfu_status set_error(resfu_status status, std::string msg) {
  g_last_error = std::move(msg);
  return status;
}

template <class Fn>
resfu_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const resfu::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RESFU_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RESFU_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(RESFU_ERR_INTERNAL, "unknown error");
  }
}

resfu_status null_arg(const char* what) {
  return set_error(RESFU_ERR_INVALID_ARGUMENT, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* resfu_status_name(resfu_status status) {
  switch (status) {
    case RESFU_OK: return "ok";
    case RESFU_ERR_BAD_MAGIC: return "bad_magic";
    case RESFU_ERR_UNSUPPORTED_VERSION: return "unsupported_version";
    case RESFU_ERR_TRUNCATED: return "truncated_payload";
    case RESFU_ERR_MALFORMED: return "malformed_header";
    case RESFU_ERR_IO: return "io_error";
    case RESFU_ERR_SHAPE: return "shape_mismatch";
    case RESFU_ERR_RATIO: return "ratio_mismatch";
    case RESFU_ERR_CHANNEL_GROUP: return "channel_group_mismatch";
    case RESFU_ERR_ROW_NOT_NORMALIZED: return "row_not_normalized";
    case RESFU_ERR_NON_FINITE: return "non_finite_value";
    case RESFU_ERR_MISSING_ENTRY: return "missing_entry";
    case RESFU_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case RESFU_ERR_CHECK_FAILED: return "check_failed";
    case RESFU_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

int resfu_status_exit_code(resfu_status status) {
  switch (status) {
    case RESFU_OK: return 0;
    case RESFU_ERR_CHECK_FAILED: return 1;
    case RESFU_ERR_SHAPE:
    case RESFU_ERR_RATIO:
    case RESFU_ERR_CHANNEL_GROUP:
    case RESFU_ERR_ROW_NOT_NORMALIZED: return 3;
    default: return 2;
  }
}

const char* resfu_last_error(void) { return g_last_error.c_str(); }

void resfu_set_num_threads(size_t n) { resfu::set_num_threads(n); }

size_t resfu_get_num_threads(void) { return resfu::num_threads(); }

resfu_status resfu_tensor_create(uint32_t height, uint32_t width, uint32_t channels, const float* values,
                                 resfu_tensor** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    resfu::require(height > 0 && width > 0 && channels > 0, resfu::Errc::InvalidArgument,
                   "tensor dimensions must be positive");
    auto t = std::make_unique<resfu_tensor>();
    t->map = resfu::FeatureMap(height, width, channels);
    if (values) std::copy(values, values + t->map.size(), t->map.data().begin());
    *out = t.release();
    return RESFU_OK;
  });
}

resfu_status resfu_tensor_load(const char* path, resfu_tensor** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new resfu_tensor{resfu::load_feature_map(path)};
    return RESFU_OK;
  });
}

resfu_status resfu_tensor_save(const resfu_tensor* tensor, const char* path) {
  if (!tensor) return null_arg("tensor");
  if (!path) return null_arg("path");
  return guarded([&] {
    resfu::save_feature_map(tensor->map, path);
    return RESFU_OK;
  });
}

resfu_status resfu_tensor_from_bytes(const uint8_t* bytes, size_t size, resfu_tensor** out) {
  if (!bytes && size) return null_arg("bytes");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new resfu_tensor{resfu::deserialize_feature_map({bytes, size})};
    return RESFU_OK;
  });
}

resfu_status resfu_tensor_to_bytes(const resfu_tensor* tensor, resfu_buffer** out) {
  if (!tensor) return null_arg("tensor");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new resfu_buffer{resfu::serialize_feature_map(tensor->map)};
    return RESFU_OK;
  });
}

void resfu_tensor_dims(const resfu_tensor* tensor, uint32_t* height, uint32_t* width, uint32_t* channels) {
  const bool ok = tensor != nullptr;
  if (height) *height = ok ? static_cast<uint32_t>(tensor->map.height()) : 0;
  if (width) *width = ok ? static_cast<uint32_t>(tensor->map.width()) : 0;
  if (channels) *channels = ok ? static_cast<uint32_t>(tensor->map.channels()) : 0;
}

const float* resfu_tensor_data(const resfu_tensor* tensor) { return tensor ? tensor->map.data().data() : nullptr; }

void resfu_tensor_free(resfu_tensor* tensor) { delete tensor; }

resfu_status resfu_params_generate(uint32_t value_channels, uint32_t guide_channels, uint32_t kernel, uint64_t seed,
                                   resfu_params** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    resfu::UpsampleConfig cfg;
    cfg.kernel = kernel;
    cfg.seed = seed;
    *out = new resfu_params{resfu::generate_params(guide_channels, value_channels, cfg)};
    return RESFU_OK;
  });
}

resfu_status resfu_params_load(const char* path, resfu_params** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new resfu_params{resfu::load_params(path)};
    return RESFU_OK;
  });
}

resfu_status resfu_params_save(const resfu_params* params, const char* path) {
  if (!params) return null_arg("params");
  if (!path) return null_arg("path");
  return guarded([&] {
    resfu::save_params(params->params, path);
    return RESFU_OK;
  });
}

resfu_status resfu_params_to_bytes(const resfu_params* params, resfu_buffer** out) {
  if (!params) return null_arg("params");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new resfu_buffer{resfu::serialize_bundle(resfu::params_to_bundle(params->params))};
    return RESFU_OK;
  });
}

void resfu_params_free(resfu_params* params) { delete params; }

resfu_upsample_options resfu_upsample_default_options(void) {
  return resfu_upsample_options{2, 3, RESFU_BASELINE_NONE, 1};
}

resfu_status resfu_upsample(const resfu_tensor* x, const resfu_tensor* guide, const resfu_params* params,
                            const resfu_upsample_options* options, resfu_tensor** out, resfu_trace** trace) {
  if (!x) return null_arg("x");
  if (!out) return null_arg("out");
  return guarded([&] {
    const resfu_upsample_options o = options ? *options : resfu_upsample_default_options();
    resfu::UpsampleOptions opts;
    opts.ratio = o.ratio;
    opts.kernel = o.kernel;
    opts.fused = o.fused != 0;
    switch (o.baseline) {
      case RESFU_BASELINE_NONE: opts.baseline = resfu::Baseline::None; break;
      case RESFU_BASELINE_BILINEAR: opts.baseline = resfu::Baseline::Bilinear; break;
      case RESFU_BASELINE_NEAREST: opts.baseline = resfu::Baseline::Nearest; break;
      case RESFU_BASELINE_INNERPROD: opts.baseline = resfu::Baseline::InnerProduct; break;
      default: resfu::fail(resfu::Errc::InvalidArgument, "unknown baseline");
    }
    resfu::UpsampleTrace steps;
    resfu::FeatureMap result = resfu::upsample(x->map, guide ? &guide->map : nullptr,
                                               params ? &params->params : nullptr, opts, trace ? &steps : nullptr);
    if (trace) {
      auto t = std::make_unique<resfu_trace>();
      for (auto& [name, map] : steps) {
        t->names.push_back(name);
        t->tensors.push_back(resfu_tensor{std::move(map)});
      }
      *trace = t.release();
    }
    *out = new resfu_tensor{std::move(result)};
    return RESFU_OK;
  });
}

size_t resfu_trace_count(const resfu_trace* trace) { return trace ? trace->names.size() : 0; }

const char* resfu_trace_name(const resfu_trace* trace, size_t index) {
  return trace && index < trace->names.size() ? trace->names[index].c_str() : nullptr;
}

const resfu_tensor* resfu_trace_tensor(const resfu_trace* trace, size_t index) {
  return trace && index < trace->tensors.size() ? &trace->tensors[index] : nullptr;
}

void resfu_trace_free(resfu_trace* trace) { delete trace; }

resfu_status resfu_render_ppm(const resfu_tensor* tensor, int channel, resfu_buffer** out) {
  if (!tensor) return null_arg("tensor");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new resfu_buffer{channel < 0 ? resfu::viz::render_pca(tensor->map)
                                        : resfu::viz::render_channel(tensor->map, static_cast<std::size_t>(channel))};
    return RESFU_OK;
  });
}

const uint8_t* resfu_buffer_data(const resfu_buffer* buffer) { return buffer ? buffer->bytes.data() : nullptr; }

size_t resfu_buffer_size(const resfu_buffer* buffer) { return buffer ? buffer->bytes.size() : 0; }

resfu_status resfu_buffer_write(const resfu_buffer* buffer, const char* path) {
  if (!buffer) return null_arg("buffer");
  if (!path) return null_arg("path");
  return guarded([&] {
    resfu::write_file(path, buffer->bytes);
    return RESFU_OK;
  });
}

void resfu_buffer_free(resfu_buffer* buffer) { delete buffer; }

resfu_status resfu_selfcheck(uint64_t seed, const char* weights_path, resfu_check_callback callback, void* user) {
  return guarded([&] {
    resfu::check::SelfcheckOptions opts;
    opts.seed = seed;
    if (weights_path) opts.weights_path = weights_path;
    const auto results = resfu::check::run_selfcheck(opts, [&](const resfu::check::CheckResult& r) {
      if (!callback) return;
      const resfu_check_result c{r.name.c_str(), r.max_error, r.tolerance, r.seconds,
                                 r.time_budget,  r.passed ? 1 : 0, r.detail.c_str()};
      callback(&c, user);
    });
    for (const auto& r : results)
      if (!r.passed) return set_error(RESFU_ERR_CHECK_FAILED, "check failed: " + r.name);
    return RESFU_OK;
  });
}

resfu_status resfu_bench(uint32_t height, uint32_t width, uint32_t channels, uint32_t ratio, uint32_t iters,
                         resfu_bench_callback callback, void* user, double* fused_vs_naive_error) {
  return guarded([&] {
    resfu::bench::BenchConfig cfg;
    cfg.height = height;
    cfg.width = width;
    cfg.channels = channels;
    cfg.ratio = ratio;
    cfg.iters = iters;
    const auto report = resfu::bench::run(cfg);
    if (fused_vs_naive_error) *fused_vs_naive_error = report.fused_vs_naive_error;
    if (!report.equivalent)
      return set_error(RESFU_ERR_CHECK_FAILED, "fused and naive kernel application disagree");
    for (const auto& row : report.rows) {
      const resfu_bench_row r{row.variant.c_str(), row.mean_ms, row.peak_tensor_bytes};
      if (callback) callback(&r, user);
    }
    return RESFU_OK;
  });
}

}  // extern "C"

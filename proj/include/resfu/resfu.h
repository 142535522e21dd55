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

#ifndef RESFU_RESFU_H_
#define RESFU_RESFU_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RESFU_BUILDING_LIBRARY)
#    define RESFU_API __declspec(dllexport)
#  else
#    define RESFU_API __declspec(dllimport)
#  endif
#else
#  define RESFU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; RESFU_OK is zero. The last
 * failure message on the calling thread is available from
 * resfu_last_error(). */
typedef enum resfu_status {
  RESFU_OK = 0,
  RESFU_ERR_BAD_MAGIC = 1,
  RESFU_ERR_UNSUPPORTED_VERSION = 2,
  RESFU_ERR_TRUNCATED = 3,
  RESFU_ERR_MALFORMED = 4,
  RESFU_ERR_IO = 5,
  RESFU_ERR_SHAPE = 6,
  RESFU_ERR_RATIO = 7,
  RESFU_ERR_CHANNEL_GROUP = 8,
  RESFU_ERR_ROW_NOT_NORMALIZED = 9,
  RESFU_ERR_NON_FINITE = 10,
  RESFU_ERR_MISSING_ENTRY = 11,
  RESFU_ERR_INVALID_ARGUMENT = 12,
  RESFU_ERR_CHECK_FAILED = 13,
  RESFU_ERR_INTERNAL = 14
} resfu_status;

typedef enum resfu_baseline {
  RESFU_BASELINE_NONE = 0,
  RESFU_BASELINE_BILINEAR = 1,
  RESFU_BASELINE_NEAREST = 2,
  RESFU_BASELINE_INNERPROD = 3
} resfu_baseline;

typedef struct resfu_tensor resfu_tensor;
typedef struct resfu_params resfu_params;
typedef struct resfu_trace resfu_trace;
typedef struct resfu_buffer resfu_buffer;

RESFU_API const char* resfu_status_name(resfu_status status);
/* Process exit code for a status: 0 ok, 1 check failure, 2 IO/parse, 3 shape/ratio. */
RESFU_API int resfu_status_exit_code(resfu_status status);
RESFU_API const char* resfu_last_error(void);

/* 0 restores the default (RESFU_NUM_THREADS or hardware concurrency). */
RESFU_API void resfu_set_num_threads(size_t n);
RESFU_API size_t resfu_get_num_threads(void);

/* ---- tensors (.rsft) ---- */

RESFU_API resfu_status resfu_tensor_create(uint32_t height, uint32_t width, uint32_t channels, const float* values,
                                           resfu_tensor** out);
RESFU_API resfu_status resfu_tensor_load(const char* path, resfu_tensor** out);
RESFU_API resfu_status resfu_tensor_save(const resfu_tensor* tensor, const char* path);
RESFU_API resfu_status resfu_tensor_from_bytes(const uint8_t* bytes, size_t size, resfu_tensor** out);
RESFU_API resfu_status resfu_tensor_to_bytes(const resfu_tensor* tensor, resfu_buffer** out);
RESFU_API void resfu_tensor_dims(const resfu_tensor* tensor, uint32_t* height, uint32_t* width, uint32_t* channels);
/* Borrowed pointer to height*width*channels floats, channel fastest. */
RESFU_API const float* resfu_tensor_data(const resfu_tensor* tensor);
RESFU_API void resfu_tensor_free(resfu_tensor* tensor);

/* ---- parameter bundles (.rsfw) ---- */

RESFU_API resfu_status resfu_params_generate(uint32_t value_channels, uint32_t guide_channels, uint32_t kernel,
                                             uint64_t seed, resfu_params** out);
RESFU_API resfu_status resfu_params_load(const char* path, resfu_params** out);
RESFU_API resfu_status resfu_params_save(const resfu_params* params, const char* path);
RESFU_API resfu_status resfu_params_to_bytes(const resfu_params* params, resfu_buffer** out);
RESFU_API void resfu_params_free(resfu_params* params);

/* ---- upsampling ---- */

typedef struct resfu_upsample_options {
  uint32_t ratio;
  uint32_t kernel;   /* odd, default 3 */
  int baseline;      /* resfu_baseline */
  int fused;         /* nonzero: sample the bilinear value on the fly */
} resfu_upsample_options;

RESFU_API resfu_upsample_options resfu_upsample_default_options(void);

/* x: h x w x C value feature; guide: (ratio*h) x (ratio*w) x c. guide and
 * params may be NULL for the bilinear and nearest baselines. When trace is
 * non-NULL it receives the named intermediates (q, k_up, q_gf, q_gs, s_s,
 * s_d, kernels) and must be released with resfu_trace_free. */
RESFU_API resfu_status resfu_upsample(const resfu_tensor* x, const resfu_tensor* guide, const resfu_params* params,
                                      const resfu_upsample_options* options, resfu_tensor** out,
                                      resfu_trace** trace);

RESFU_API size_t resfu_trace_count(const resfu_trace* trace);
RESFU_API const char* resfu_trace_name(const resfu_trace* trace, size_t index);
/* Borrowed; valid until resfu_trace_free. */
RESFU_API const resfu_tensor* resfu_trace_tensor(const resfu_trace* trace, size_t index);
RESFU_API void resfu_trace_free(resfu_trace* trace);

/* ---- visualization ---- */

/* Binary PPM: PCA to RGB when channel < 0, else that channel as grayscale. */
RESFU_API resfu_status resfu_render_ppm(const resfu_tensor* tensor, int channel, resfu_buffer** out);

/* ---- byte buffers ---- */

RESFU_API const uint8_t* resfu_buffer_data(const resfu_buffer* buffer);
RESFU_API size_t resfu_buffer_size(const resfu_buffer* buffer);
RESFU_API resfu_status resfu_buffer_write(const resfu_buffer* buffer, const char* path);
RESFU_API void resfu_buffer_free(resfu_buffer* buffer);

/* ---- selfcheck and benchmarks ---- */

typedef struct resfu_check_result {
  const char* name;
  double max_error;
  double tolerance;
  double seconds;
  double time_budget; /* 0 = unbounded */
  int passed;
  const char* detail;
} resfu_check_result;

typedef void (*resfu_check_callback)(const resfu_check_result* result, void* user);

/* Runs every oracle equivalence, property and gradient check. weights_path
 * may be NULL. Returns RESFU_ERR_CHECK_FAILED if any check failed. */
RESFU_API resfu_status resfu_selfcheck(uint64_t seed, const char* weights_path, resfu_check_callback callback,
                                       void* user);

typedef struct resfu_bench_row {
  const char* variant;
  double mean_ms;
  size_t peak_tensor_bytes;
} resfu_bench_row;

typedef void (*resfu_bench_callback)(const resfu_bench_row* row, void* user);

/* Returns RESFU_ERR_CHECK_FAILED, without timing anything, if the fused and
 * naive kernel applications disagree by more than 1e-5. */
RESFU_API resfu_status resfu_bench(uint32_t height, uint32_t width, uint32_t channels, uint32_t ratio, uint32_t iters,
                                   resfu_bench_callback callback, void* user, double* fused_vs_naive_error);

#ifdef __cplusplus
}
#endif

#endif /* RESFU_RESFU_H_ */

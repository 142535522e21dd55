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

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "resfu/resfu.h"

namespace {

std::vector<float> ramp(std::size_t n) {
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(i % 17) * 0.125f - 1.0f;
  return v;
}

}  // namespace

TEST_CASE("status helpers") {
  CHECK(std::string(resfu_status_name(RESFU_OK)) == "ok");
  CHECK(resfu_status_exit_code(RESFU_OK) == 0);
  CHECK(resfu_status_exit_code(RESFU_ERR_BAD_MAGIC) == 2);
  CHECK(resfu_status_exit_code(RESFU_ERR_IO) == 2);
  CHECK(resfu_status_exit_code(RESFU_ERR_RATIO) == 3);
  CHECK(resfu_status_exit_code(RESFU_ERR_SHAPE) == 3);
  CHECK(resfu_status_exit_code(RESFU_ERR_CHECK_FAILED) == 1);
}

TEST_CASE("tensor handles") {
  const auto values = ramp(24);
  resfu_tensor* t = nullptr;
  REQUIRE(resfu_tensor_create(2, 3, 4, values.data(), &t) == RESFU_OK);
  std::uint32_t h, w, c;
  resfu_tensor_dims(t, &h, &w, &c);
  CHECK(h == 2);
  CHECK(w == 3);
  CHECK(c == 4);
  CHECK(std::memcmp(resfu_tensor_data(t), values.data(), 24 * sizeof(float)) == 0);

  resfu_buffer* buf = nullptr;
  REQUIRE(resfu_tensor_to_bytes(t, &buf) == RESFU_OK);
  CHECK(resfu_buffer_size(buf) == 24 + 96);
  resfu_tensor* back = nullptr;
  REQUIRE(resfu_tensor_from_bytes(resfu_buffer_data(buf), resfu_buffer_size(buf), &back) == RESFU_OK);
  CHECK(std::memcmp(resfu_tensor_data(back), values.data(), 24 * sizeof(float)) == 0);

  std::vector<std::uint8_t> bad(resfu_buffer_data(buf), resfu_buffer_data(buf) + resfu_buffer_size(buf));
  bad[0] = 'Q';
  resfu_tensor* none = nullptr;
  CHECK(resfu_tensor_from_bytes(bad.data(), bad.size(), &none) == RESFU_ERR_BAD_MAGIC);
  CHECK(none == nullptr);
  CHECK(std::string(resfu_last_error()).find("magic") != std::string::npos);

  CHECK(resfu_tensor_load("/nonexistent/dir/x.rsft", &none) == RESFU_ERR_IO);
  CHECK(std::string(resfu_last_error()).find("/nonexistent/dir/x.rsft") != std::string::npos);
  CHECK(resfu_tensor_create(0, 3, 4, nullptr, &none) != RESFU_OK);

  resfu_buffer_free(buf);
  resfu_tensor_free(back);
  resfu_tensor_free(t);
  resfu_tensor_free(nullptr);
}

TEST_CASE("upsample through the C API") {
  const auto xv = ramp(8 * 8 * 4), yv = ramp(16 * 16 * 3);
  resfu_tensor *x = nullptr, *y = nullptr, *out = nullptr;
  REQUIRE(resfu_tensor_create(8, 8, 4, xv.data(), &x) == RESFU_OK);
  REQUIRE(resfu_tensor_create(16, 16, 3, yv.data(), &y) == RESFU_OK);
  resfu_params* p = nullptr;
  REQUIRE(resfu_params_generate(4, 3, 3, 7, &p) == RESFU_OK);

  resfu_upsample_options opts = resfu_upsample_default_options();
  CHECK(opts.ratio == 2);
  CHECK(opts.kernel == 3);
  resfu_trace* trace = nullptr;
  REQUIRE(resfu_upsample(x, y, p, &opts, &out, &trace) == RESFU_OK);
  std::uint32_t h, w, c;
  resfu_tensor_dims(out, &h, &w, &c);
  CHECK(h == 16);
  CHECK(w == 16);
  CHECK(c == 4);
  REQUIRE(resfu_trace_count(trace) == 7);
  CHECK(std::string(resfu_trace_name(trace, 6)) == "kernels");
  resfu_tensor_dims(resfu_trace_tensor(trace, 6), &h, &w, &c);
  CHECK(c == 9);
  resfu_trace_free(trace);

  resfu_tensor* bil = nullptr;
  opts.baseline = RESFU_BASELINE_BILINEAR;
  CHECK(resfu_upsample(x, nullptr, nullptr, &opts, &bil, nullptr) == RESFU_OK);
  resfu_tensor_free(bil);

  resfu_tensor* fail = nullptr;
  opts.baseline = RESFU_BASELINE_NONE;
  opts.ratio = 4;
  CHECK(resfu_upsample(x, y, p, &opts, &fail, nullptr) == RESFU_ERR_RATIO);
  CHECK(fail == nullptr);

  resfu_buffer* ppm = nullptr;
  REQUIRE(resfu_render_ppm(out, -1, &ppm) == RESFU_OK);
  CHECK(std::memcmp(resfu_buffer_data(ppm), "P6\n16 16\n255\n", 13) == 0);
  resfu_buffer_free(ppm);

  const auto dir = std::filesystem::temp_directory_path() / "resfu_c_api_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "w.rsfw").string();
  REQUIRE(resfu_params_save(p, path.c_str()) == RESFU_OK);
  resfu_params* loaded = nullptr;
  REQUIRE(resfu_params_load(path.c_str(), &loaded) == RESFU_OK);
  resfu_buffer *a = nullptr, *b = nullptr;
  resfu_params_to_bytes(p, &a);
  resfu_params_to_bytes(loaded, &b);
  CHECK(resfu_buffer_size(a) == resfu_buffer_size(b));
  CHECK(std::memcmp(resfu_buffer_data(a), resfu_buffer_data(b), resfu_buffer_size(a)) == 0);
  resfu_buffer_free(a);
  resfu_buffer_free(b);
  resfu_params_free(loaded);
  std::filesystem::remove_all(dir);

  resfu_params_free(p);
  resfu_tensor_free(out);
  resfu_tensor_free(x);
  resfu_tensor_free(y);
}

TEST_CASE("thread setting") {
  resfu_set_num_threads(3);
  CHECK(resfu_get_num_threads() == 3);
  resfu_set_num_threads(0);
  CHECK(resfu_get_num_threads() >= 1);
}

TEST_CASE("bench callback") {
  std::vector<std::string> variants;
  double err = -1.0;
  const auto cb = [](const resfu_bench_row* row, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(row->variant);
  };
  REQUIRE(resfu_bench(8, 8, 4, 2, 1, cb, &variants, &err) == RESFU_OK);
  CHECK(variants.size() == 4);
  CHECK(err >= 0.0);
  CHECK(err <= 1e-5);
}

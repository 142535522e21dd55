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
#include <span>
#include <string>
#include <vector>

#include "field64.hpp"

// Float64 forward/backward passes for the PCDC layer and the FNS kernel
// application, plus central finite differences to check them.
namespace resfu::grad {

struct GradCheckReport {
  std::string op_name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::size_t probes = 0;
};

using ScalarFn = std::function<double(const Field64&)>;

// (f(x + step e) - f(x - step e)) / (2 step) at each probe index, or at every
// element when `probes` is empty. Non-probed entries are left at zero.
// Throws NonFiniteValue when f returns NaN or Inf.
Field64 finite_diff_grad(const ScalarFn& f, const Field64& x, double step, std::span<const std::size_t> probes = {});

struct Pcdc64 {
  std::vector<double> weight;  // K^2 x (D/G) x L
  std::vector<double> bias;    // L
  std::size_t kernel = 3;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t groups = 1;
  std::size_t dilation = 1;
};

Field64 pcdc_forward(const Field64& q_bar, const Field64& k_bar, const Pcdc64& p);

struct PcdcGrads {
  Field64 q_bar;
  Field64 k_bar;
  std::vector<double> weight;
  std::vector<double> bias;
};

PcdcGrads pcdc_backward(const Field64& upstream, const Field64& q_bar, const Field64& k_bar, const Pcdc64& p);

// Row-wise softmax of `scores`, then the FNS weighted sum over the dilated
// bilinear upsampling of x.
Field64 kernel_apply_forward(const Field64& scores, const Field64& x, std::size_t ratio, std::size_t kernel);

Field64 softmax_rows(const Field64& scores);

struct KernelApplyGrads {
  Field64 scores;
  Field64 x;
};

// `weights` are the saved post-softmax kernels; the score gradient is pushed
// through the softmax Jacobian w * (g - <w, g>).
KernelApplyGrads kernel_apply_backward(const Field64& upstream, const Field64& weights, const Field64& x,
                                       std::size_t ratio, std::size_t kernel);

// Seeded random instances checked against finite differences at 64 probes
// per gradient target.
GradCheckReport check_pcdc_gradients(std::uint64_t seed, double tolerance = 1e-6);
GradCheckReport check_kernel_apply_gradients(std::uint64_t seed, double tolerance = 1e-6);
// max over rows of |sum_n dL/ds[i, n]|.
GradCheckReport check_softmax_shift_invariance(std::uint64_t seed, double tolerance = 1e-10);

}  // namespace resfu::grad

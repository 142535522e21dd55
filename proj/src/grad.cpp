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

#include "grad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace resfu::grad {

namespace {

std::size_t clamp_index(long v, std::size_t len) {
  return static_cast<std::size_t>(std::clamp(v, 0L, static_cast<long>(len) - 1));
}

std::size_t neighbor(std::size_t r, std::size_t c, std::size_t h, std::size_t w, std::size_t kernel,
                     std::size_t dilation, std::size_t n) {
  const long half = static_cast<long>(kernel / 2), dil = static_cast<long>(dilation);
  const std::size_t rr = clamp_index(static_cast<long>(r) + (static_cast<long>(n / kernel) - half) * dil, h);
  const std::size_t cc = clamp_index(static_cast<long>(c) + (static_cast<long>(n % kernel) - half) * dil, w);
  return rr * w + cc;
}

struct Tap {
  std::size_t lo, hi;
  double frac;
};

std::vector<Tap> taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> t(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    const double s = std::clamp((i + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5, 0.0,
                                static_cast<double>(src - 1));
    const auto lo = static_cast<std::size_t>(s);
    t[i] = {lo, std::min(lo + 1, src - 1), s - static_cast<double>(lo)};
  }
  return t;
}

Field64 bilinear(const Field64& x, std::size_t H, std::size_t W) {
  const auto rt = taps(x.height, H), ct = taps(x.width, W);
  Field64 out(H, W, x.channels);
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c) {
      const Tap& a = rt[r];
      const Tap& b = ct[c];
      for (std::size_t ch = 0; ch < x.channels; ++ch)
        out.at(r, c, ch) = (1 - a.frac) * ((1 - b.frac) * x.at(a.lo, b.lo, ch) + b.frac * x.at(a.lo, b.hi, ch)) +
                           a.frac * ((1 - b.frac) * x.at(a.hi, b.lo, ch) + b.frac * x.at(a.hi, b.hi, ch));
    }
  return out;
}

Field64 bilinear_transpose(const Field64& g_up, std::size_t h, std::size_t w) {
  const auto rt = taps(h, g_up.height), ct = taps(w, g_up.width);
  Field64 g(h, w, g_up.channels);
  for (std::size_t r = 0; r < g_up.height; ++r)
    for (std::size_t c = 0; c < g_up.width; ++c) {
      const Tap& a = rt[r];
      const Tap& b = ct[c];
      for (std::size_t ch = 0; ch < g_up.channels; ++ch) {
        const double v = g_up.at(r, c, ch);
        g.at(a.lo, b.lo, ch) += (1 - a.frac) * (1 - b.frac) * v;
        g.at(a.lo, b.hi, ch) += (1 - a.frac) * b.frac * v;
        g.at(a.hi, b.lo, ch) += a.frac * (1 - b.frac) * v;
        g.at(a.hi, b.hi, ch) += a.frac * b.frac * v;
      }
    }
  return g;
}

void check_pcdc_shapes(const Field64& q, const Field64& k, const Pcdc64& p) {
  const std::size_t dg = p.groups ? p.in_channels / p.groups : 0;
  if (!q.same_shape(k) || q.channels != p.in_channels || p.groups == 0 || p.in_channels % p.groups ||
      p.out_channels % p.groups || p.weight.size() != p.kernel * p.kernel * dg * p.out_channels ||
      p.bias.size() != p.out_channels)
    fail(Errc::ShapeMismatch, "pcdc64: shape mismatch");
}

Field64 random_field(SplitMix64& rng, std::size_t h, std::size_t w, std::size_t c, double scale = 1.0) {
  Field64 f(h, w, c);
  for (double& v : f.data) v = rng.uniform(-scale, scale);
  return f;
}

std::vector<std::size_t> pick_probes(SplitMix64& rng, std::size_t size, std::size_t count) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), 0);
  if (size <= count) return all;
  for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + rng.below(size - i)]);
  all.resize(count);
  return all;
}

double dot(const Field64& a, const Field64& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

double probe_error(const Field64& analytic, const Field64& numeric, std::span<const std::size_t> probes) {
  std::vector<double> a, n;
  for (std::size_t i : probes) {
    a.push_back(analytic.data[i]);
    n.push_back(numeric.data[i]);
  }
  return max_rel_error(std::span<const double>(a), std::span<const double>(n));
}

Field64 as_field(const std::vector<double>& v) {
  Field64 f(1, 1, v.size());
  f.data.assign(v.begin(), v.end());
  return f;
}

constexpr std::size_t kProbes = 64;
constexpr double kStep = 1e-5;

}  // namespace

Field64 finite_diff_grad(const ScalarFn& f, const Field64& x, double step, std::span<const std::size_t> probes) {
  require(step > 0.0, Errc::InvalidArgument, "finite difference step must be positive");
  Field64 g(x.height, x.width, x.channels);
  Field64 work = x;
  auto one = [&](std::size_t i) {
    const double orig = work.data[i];
    work.data[i] = orig + step;
    const double up = f(work);
    work.data[i] = orig - step;
    const double down = f(work);
    work.data[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) fail(Errc::NonFiniteValue, "function returned a non-finite value");
    g.data[i] = (up - down) / (2.0 * step);
  };
  if (probes.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) one(i);
  } else {
    for (std::size_t i : probes) one(i);
  }
  return g;
}

Field64 pcdc_forward(const Field64& q_bar, const Field64& k_bar, const Pcdc64& p) {
  check_pcdc_shapes(q_bar, k_bar, p);
  const std::size_t h = q_bar.height, w = q_bar.width, L = p.out_channels, slots = p.kernel * p.kernel;
  const std::size_t dg = p.in_channels / p.groups, opg = L / p.groups;
  auto W = [&](std::size_t n, std::size_t d, std::size_t l) { return p.weight[(n * dg + d) * L + l]; };

  Field64 v(h, w, L);
  for (std::size_t i = 0; i < h * w; ++i)
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t base = (l / opg) * dg;
      double acc = p.bias[l];
      for (std::size_t d = 0; d < dg; ++d) {
        double wsum = 0.0;
        for (std::size_t n = 0; n < slots; ++n) {
          const std::size_t j = neighbor(i / w, i % w, h, w, p.kernel, p.dilation, n);
          acc += W(n, d, l) * k_bar.data[j * p.in_channels + base + d];
          wsum += W(n, d, l);
        }
        acc -= wsum * q_bar.data[i * p.in_channels + base + d];
      }
      v.data[i * L + l] = acc;
    }
  return v;
}

PcdcGrads pcdc_backward(const Field64& upstream, const Field64& q_bar, const Field64& k_bar, const Pcdc64& p) {
  check_pcdc_shapes(q_bar, k_bar, p);
  const std::size_t h = q_bar.height, w = q_bar.width, L = p.out_channels, D = p.in_channels;
  const std::size_t slots = p.kernel * p.kernel, dg = D / p.groups, opg = L / p.groups;
  if (upstream.height != h || upstream.width != w || upstream.channels != L)
    fail(Errc::ShapeMismatch, "pcdc_backward: upstream shape mismatch");

  PcdcGrads g{Field64(h, w, D), Field64(h, w, D), std::vector<double>(p.weight.size(), 0.0),
              std::vector<double>(L, 0.0)};
  for (std::size_t i = 0; i < h * w; ++i)
    for (std::size_t l = 0; l < L; ++l) {
      const double u = upstream.data[i * L + l];
      const std::size_t base = (l / opg) * dg;
      g.bias[l] += u;
      for (std::size_t n = 0; n < slots; ++n) {
        const std::size_t j = neighbor(i / w, i % w, h, w, p.kernel, p.dilation, n);
        for (std::size_t d = 0; d < dg; ++d) {
          const std::size_t wi = (n * dg + d) * L + l;
          const double wv = p.weight[wi];
          // Transposed convolution scatter onto the key.
          g.k_bar.data[j * D + base + d] += u * wv;
          // Centre term carries the negated neighbor-summed weight.
          g.q_bar.data[i * D + base + d] -= u * wv;
          g.weight[wi] += u * (k_bar.data[j * D + base + d] - q_bar.data[i * D + base + d]);
        }
      }
    }
  return g;
}

Field64 softmax_rows(const Field64& scores) {
  Field64 out = scores;
  const std::size_t K2 = scores.channels;
  for (std::size_t i = 0; i < scores.pixels(); ++i) {
    double* row = out.data.data() + i * K2;
    const double top = *std::max_element(row, row + K2);
    double total = 0.0;
    for (std::size_t n = 0; n < K2; ++n) total += (row[n] = std::exp(row[n] - top));
    for (std::size_t n = 0; n < K2; ++n) row[n] /= total;
  }
  return out;
}

Field64 kernel_apply_forward(const Field64& scores, const Field64& x, std::size_t ratio, std::size_t kernel) {
  const std::size_t H = ratio * x.height, W = ratio * x.width, C = x.channels, K2 = kernel * kernel;
  if (scores.height != H || scores.width != W || scores.channels != K2)
    fail(Errc::ShapeMismatch, "kernel_apply_forward: score shape mismatch");
  const Field64 wts = softmax_rows(scores);
  const Field64 up = bilinear(x, H, W);
  Field64 out(H, W, C);
  for (std::size_t i = 0; i < H * W; ++i)
    for (std::size_t n = 0; n < K2; ++n) {
      const std::size_t j = neighbor(i / W, i % W, H, W, kernel, ratio, n);
      for (std::size_t ch = 0; ch < C; ++ch) out.data[i * C + ch] += wts.data[i * K2 + n] * up.data[j * C + ch];
    }
  return out;
}

KernelApplyGrads kernel_apply_backward(const Field64& upstream, const Field64& weights, const Field64& x,
                                       std::size_t ratio, std::size_t kernel) {
  const std::size_t H = ratio * x.height, W = ratio * x.width, C = x.channels, K2 = kernel * kernel;
  if (weights.height != H || weights.width != W || weights.channels != K2 || upstream.height != H ||
      upstream.width != W || upstream.channels != C)
    fail(Errc::ShapeMismatch, "kernel_apply_backward: shape mismatch");
  const Field64 up = bilinear(x, H, W);
  Field64 g_scores(H, W, K2);
  Field64 g_up(H, W, C);
  std::vector<double> gw(K2);
  for (std::size_t i = 0; i < H * W; ++i) {
    const double* wrow = weights.data.data() + i * K2;
    const double* u = upstream.data.data() + i * C;
    double mean = 0.0;
    for (std::size_t n = 0; n < K2; ++n) {
      const std::size_t j = neighbor(i / W, i % W, H, W, kernel, ratio, n);
      double s = 0.0;
      for (std::size_t ch = 0; ch < C; ++ch) {
        s += u[ch] * up.data[j * C + ch];
        g_up.data[j * C + ch] += u[ch] * wrow[n];
      }
      gw[n] = s;
      mean += wrow[n] * s;
    }
    for (std::size_t n = 0; n < K2; ++n) g_scores.data[i * K2 + n] = wrow[n] * (gw[n] - mean);
  }
  return {std::move(g_scores), bilinear_transpose(g_up, x.height, x.width)};
}

GradCheckReport check_pcdc_gradients(std::uint64_t seed, double tolerance) {
  SplitMix64 rng(seed ^ 0x5043444347524144ULL);
  Pcdc64 p;
  p.kernel = 3;
  p.in_channels = 8;
  p.out_channels = 8;
  p.groups = 1 + rng.below(2) * 1;  // 1 or 2
  p.dilation = 1 + rng.below(2);
  const std::size_t h = 5 + rng.below(3), w = 5 + rng.below(3);
  const Field64 q = random_field(rng, h, w, p.in_channels);
  const Field64 k = random_field(rng, h, w, p.in_channels);
  p.weight.resize(9 * (p.in_channels / p.groups) * p.out_channels);
  for (double& v : p.weight) v = rng.uniform(-0.5, 0.5);
  p.bias.resize(p.out_channels);
  for (double& v : p.bias) v = rng.uniform(-0.5, 0.5);
  const Field64 r = random_field(rng, h, w, p.out_channels);

  const PcdcGrads g = pcdc_backward(r, q, k, p);
  double worst = 0.0;
  std::size_t probes = 0;
  auto check = [&](const Field64& analytic, const Field64& at, const ScalarFn& f) {
    const auto idx = pick_probes(rng, at.size(), kProbes);
    const Field64 numeric = finite_diff_grad(f, at, kStep, idx);
    worst = std::max(worst, probe_error(analytic, numeric, idx));
    probes += idx.size();
  };
  check(g.q_bar, q, [&](const Field64& v) { return dot(r, pcdc_forward(v, k, p)); });
  check(g.k_bar, k, [&](const Field64& v) { return dot(r, pcdc_forward(q, v, p)); });
  check(as_field(g.weight), as_field(p.weight), [&](const Field64& v) {
    Pcdc64 pp = p;
    pp.weight.assign(v.data.begin(), v.data.end());
    return dot(r, pcdc_forward(q, k, pp));
  });
  check(as_field(g.bias), as_field(p.bias), [&](const Field64& v) {
    Pcdc64 pp = p;
    pp.bias.assign(v.data.begin(), v.data.end());
    return dot(r, pcdc_forward(q, k, pp));
  });
  return {"pcdc_backward", worst, tolerance, worst <= tolerance, probes};
}

GradCheckReport check_kernel_apply_gradients(std::uint64_t seed, double tolerance) {
  SplitMix64 rng(seed ^ 0x4B45524E454C4150ULL);
  const std::size_t ratio = 1 + rng.below(3), kernel = 3;
  const std::size_t h = 3 + rng.below(3), w = 3 + rng.below(3), C = 3;
  const Field64 x = random_field(rng, h, w, C);
  const Field64 s = random_field(rng, ratio * h, ratio * w, kernel * kernel, 2.0);
  const Field64 r = random_field(rng, ratio * h, ratio * w, C);

  const KernelApplyGrads g = kernel_apply_backward(r, softmax_rows(s), x, ratio, kernel);
  double worst = 0.0;
  std::size_t probes = 0;
  auto check = [&](const Field64& analytic, const Field64& at, const ScalarFn& f) {
    const auto idx = pick_probes(rng, at.size(), kProbes);
    const Field64 numeric = finite_diff_grad(f, at, kStep, idx);
    worst = std::max(worst, probe_error(analytic, numeric, idx));
    probes += idx.size();
  };
  check(g.scores, s, [&](const Field64& v) { return dot(r, kernel_apply_forward(v, x, ratio, kernel)); });
  check(g.x, x, [&](const Field64& v) { return dot(r, kernel_apply_forward(s, v, ratio, kernel)); });
  return {"kernel_apply_backward", worst, tolerance, worst <= tolerance, probes};
}

GradCheckReport check_softmax_shift_invariance(std::uint64_t seed, double tolerance) {
  SplitMix64 rng(seed ^ 0x534849465453554DULL);
  const std::size_t ratio = 2, kernel = 3, h = 4, w = 4, C = 4;
  const Field64 x = random_field(rng, h, w, C);
  const Field64 s = random_field(rng, ratio * h, ratio * w, kernel * kernel, 3.0);
  const Field64 r = random_field(rng, ratio * h, ratio * w, C);
  const KernelApplyGrads g = kernel_apply_backward(r, softmax_rows(s), x, ratio, kernel);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.scores.pixels(); ++i) {
    double row = 0.0;
    for (std::size_t n = 0; n < kernel * kernel; ++n) row += g.scores.data[i * kernel * kernel + n];
    worst = std::max(worst, std::abs(row));
  }
  return {"softmax_shift_invariance", worst, tolerance, worst <= tolerance, g.scores.pixels()};
}

}  // namespace resfu::grad

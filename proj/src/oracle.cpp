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

#include "oracle.hpp"

#include <cmath>
#include <vector>

namespace resfu::oracle {

namespace {

long clampi(long v, long lo, long hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

Field64 pcdc_direct(const FeatureMap& q_bar, const FeatureMap& k_bar, const PcdcParams& p) {
  if (!q_bar.same_shape(k_bar) || q_bar.channels() != p.in_channels)
    fail(Errc::ShapeMismatch, "oracle pcdc: input shape mismatch");
  const long h = static_cast<long>(q_bar.height()), w = static_cast<long>(q_bar.width());
  const long K = static_cast<long>(p.kernel), half = K / 2, dil = static_cast<long>(p.dilation);
  const std::size_t D = p.in_channels, L = p.out_channels, G = p.groups, Dg = D / G;
  if (p.weight.size() != static_cast<std::size_t>(K * K) * Dg * L || p.bias.size() != L)
    fail(Errc::ShapeMismatch, "oracle pcdc: weight shape mismatch");

  Field64 v(q_bar.height(), q_bar.width(), L);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c)
      for (std::size_t l = 0; l < L; ++l) {
        const std::size_t g = l * G / L;
        double acc = 0.0;
        for (std::size_t d = g * D / G; d < (g + 1) * D / G; ++d) {
          const std::size_t dt = d % Dg;
          for (long n = 0; n < K * K; ++n) {
            const long jr = clampi(r + (n / K - half) * dil, 0, h - 1);
            const long jc = clampi(c + (n % K - half) * dil, 0, w - 1);
            const double wv = p.weight[(static_cast<std::size_t>(n) * Dg + dt) * L + l];
            acc += wv * (static_cast<double>(k_bar.at(jr, jc, d)) - static_cast<double>(q_bar.at(r, c, d)));
          }
        }
        v.at(r, c, l) = acc + p.bias[l];
      }
  return v;
}

Field64 guided_filter_window(const FeatureMap& q, const FeatureMap& k_up, std::size_t radius, double eps) {
  if (!q.same_shape(k_up)) fail(Errc::ShapeMismatch, "oracle guided filter: input shape mismatch");
  const long h = static_cast<long>(q.height()), w = static_cast<long>(q.width()), r = static_cast<long>(radius);
  const std::size_t C = q.channels();
  Field64 m(q.height(), q.width(), C), n(q.height(), q.width(), C);

  // Minimize sum_i (m q_i + n - k_i)^2 + eps m^2 over the window. Setting the
  // gradient to zero gives the 2x2 system
  //   [Sqq + N eps, Sq] [m]   [Sqk]
  //   [Sq,          N ] [n] = [Sk ]
  for (long jr = 0; jr < h; ++jr)
    for (long jc = 0; jc < w; ++jc)
      for (std::size_t ch = 0; ch < C; ++ch) {
        double N = 0, Sq = 0, Sk = 0, Sqq = 0, Sqk = 0;
        for (long ir = jr - r; ir <= jr + r; ++ir)
          for (long ic = jc - r; ic <= jc + r; ++ic) {
            if (ir < 0 || ir >= h || ic < 0 || ic >= w) continue;
            const double a = q.at(ir, ic, ch), b = k_up.at(ir, ic, ch);
            N += 1;
            Sq += a;
            Sk += b;
            Sqq += a * a;
            Sqk += a * b;
          }
        const double a11 = Sqq + N * eps, a12 = Sq, a22 = N;
        const double det = a11 * a22 - a12 * a12;
        m.at(jr, jc, ch) = (Sqk * a22 - a12 * Sk) / det;
        n.at(jr, jc, ch) = (a11 * Sk - a12 * Sqk) / det;
      }

  Field64 out(q.height(), q.width(), C);
  for (long ir = 0; ir < h; ++ir)
    for (long ic = 0; ic < w; ++ic)
      for (std::size_t ch = 0; ch < C; ++ch) {
        double cnt = 0, sm = 0, sn = 0;
        for (long jr = ir - r; jr <= ir + r; ++jr)
          for (long jc = ic - r; jc <= ic + r; ++jc) {
            if (jr < 0 || jr >= h || jc < 0 || jc >= w) continue;
            cnt += 1;
            sm += m.at(jr, jc, ch);
            sn += n.at(jr, jc, ch);
          }
        out.at(ir, ic, ch) = (sm / cnt) * q.at(ir, ic, ch) + sn / cnt;
      }
  return out;
}

double bilinear_sample(const FeatureMap& x, std::size_t out_h, std::size_t out_w, std::size_t row, std::size_t col,
                       std::size_t ch) {
  const double h = static_cast<double>(x.height()), w = static_cast<double>(x.width());
  double sy = (row + 0.5) * h / static_cast<double>(out_h) - 0.5;
  double sx = (col + 0.5) * w / static_cast<double>(out_w) - 0.5;
  sy = std::min(std::max(sy, 0.0), h - 1);
  sx = std::min(std::max(sx, 0.0), w - 1);
  const long y0 = static_cast<long>(std::floor(sy)), x0 = static_cast<long>(std::floor(sx));
  const long y1 = std::min(y0 + 1, static_cast<long>(x.height()) - 1);
  const long x1 = std::min(x0 + 1, static_cast<long>(x.width()) - 1);
  const double fy = sy - y0, fx = sx - x0;
  return (1 - fy) * (1 - fx) * x.at(y0, x0, ch) + (1 - fy) * fx * x.at(y0, x1, ch) +
         fy * (1 - fx) * x.at(y1, x0, ch) + fy * fx * x.at(y1, x1, ch);
}

Field64 bilinear_upsample(const FeatureMap& x, std::size_t out_h, std::size_t out_w) {
  Field64 out(out_h, out_w, x.channels());
  for (std::size_t r = 0; r < out_h; ++r)
    for (std::size_t c = 0; c < out_w; ++c)
      for (std::size_t ch = 0; ch < x.channels(); ++ch) out.at(r, c, ch) = bilinear_sample(x, out_h, out_w, r, c, ch);
  return out;
}

Field64 kernel_apply_direct(const FeatureMap& weights, const FeatureMap& x, std::size_t ratio, std::size_t kernel) {
  const long H = static_cast<long>(ratio * x.height()), W = static_cast<long>(ratio * x.width());
  const long K = static_cast<long>(kernel), half = K / 2, dil = static_cast<long>(ratio);
  if (static_cast<long>(weights.height()) != H || static_cast<long>(weights.width()) != W ||
      weights.channels() != kernel * kernel)
    fail(Errc::ShapeMismatch, "oracle kernel apply: weight shape mismatch");
  Field64 out(H, W, x.channels());
  for (long r = 0; r < H; ++r)
    for (long c = 0; c < W; ++c)
      for (long n = 0; n < K * K; ++n) {
        const long pr = clampi(r + (n / K - half) * dil, 0, H - 1);
        const long pc = clampi(c + (n % K - half) * dil, 0, W - 1);
        const double wt = weights.at(r, c, n);
        for (std::size_t ch = 0; ch < x.channels(); ++ch)
          out.at(r, c, ch) += wt * bilinear_sample(x, H, W, pr, pc, ch);
      }
  return out;
}

Field64 kernel_apply_gridwise(const FeatureMap& weights, const FeatureMap& x, std::size_t ratio, std::size_t kernel) {
  const long h = static_cast<long>(x.height()), w = static_cast<long>(x.width());
  const long H = static_cast<long>(ratio) * h, W = static_cast<long>(ratio) * w;
  const long K = static_cast<long>(kernel), half = K / 2;
  if (static_cast<long>(weights.height()) != H || static_cast<long>(weights.width()) != W ||
      weights.channels() != kernel * kernel)
    fail(Errc::ShapeMismatch, "oracle gridwise: weight shape mismatch");
  Field64 out(H, W, x.channels());
  for (long r = 0; r < H; ++r)
    for (long c = 0; c < W; ++c) {
      const long pr = r / static_cast<long>(ratio), pc = c / static_cast<long>(ratio);
      for (long n = 0; n < K * K; ++n) {
        const long sr = clampi(pr + n / K - half, 0, h - 1);
        const long sc = clampi(pc + n % K - half, 0, w - 1);
        for (std::size_t ch = 0; ch < x.channels(); ++ch)
          out.at(r, c, ch) += static_cast<double>(weights.at(r, c, n)) * x.at(sr, sc, ch);
      }
    }
  return out;
}

Field64 dilated_box_mean(const Field64& src, std::size_t kernel, std::size_t dilation) {
  const long h = static_cast<long>(src.height), w = static_cast<long>(src.width);
  const long K = static_cast<long>(kernel), half = K / 2, dil = static_cast<long>(dilation);
  Field64 out(src.height, src.width, src.channels);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c)
      for (long n = 0; n < K * K; ++n) {
        const long sr = clampi(r + (n / K - half) * dil, 0, h - 1);
        const long sc = clampi(c + (n % K - half) * dil, 0, w - 1);
        for (std::size_t ch = 0; ch < src.channels; ++ch) out.at(r, c, ch) += src.at(sr, sc, ch) / (K * K);
      }
  return out;
}

}  // namespace resfu::oracle

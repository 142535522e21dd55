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

#include "visualize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace resfu::viz {

namespace {

std::vector<std::uint8_t> ppm_header(std::size_t w, std::size_t h) {
  const std::string head = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  return {head.begin(), head.end()};
}

// Min-max scale to bytes; near-zero range maps to mid-gray.
std::vector<std::uint8_t> to_bytes(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  const double scale = std::max(std::abs(*hi), std::abs(*lo));
  std::vector<std::uint8_t> out(v.size(), 128);
  if (!(range > 1e-12 * std::max(scale, 1e-30)) || range <= 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * (v[i] - *lo) / range));
  return out;
}

}  // namespace

Eigen jacobi_eigen(std::vector<double> a, std::size_t n, std::size_t max_sweeps) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += a[p * n + p] * a[p * n + p];
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  Eigen e{std::vector<double>(n), std::vector<double>(n * n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    e.values[k] = a[src * n + src];
    std::size_t big = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v[r * n + src]) > std::abs(v[big * n + src])) big = r;
    const double sign = v[big * n + src] < 0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) e.vectors[r * n + k] = sign * v[r * n + src];
  }
  return e;
}

std::vector<std::uint8_t> render_pca(const FeatureMap& map) {
  const std::size_t n = map.pixels(), C = map.channels();
  std::vector<double> mean(C, 0.0);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < C; ++c) mean[c] += map.pixel(p)[c];
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(C * C, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto px = map.pixel(p);
    for (std::size_t a = 0; a < C; ++a)
      for (std::size_t b = a; b < C; ++b) cov[a * C + b] += (px[a] - mean[a]) * (px[b] - mean[b]);
  }
  for (std::size_t a = 0; a < C; ++a)
    for (std::size_t b = a; b < C; ++b) cov[b * C + a] = cov[a * C + b] /= static_cast<double>(n);

  const Eigen eig = jacobi_eigen(cov, C);
  std::vector<std::vector<std::uint8_t>> planes;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k >= C || !(eig.values[k] > 1e-12 * eig.values[0]) || eig.values[k] <= 0.0) {
      planes.emplace_back(n, 128);
      continue;
    }
    std::vector<double> proj(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const auto px = map.pixel(p);
      for (std::size_t c = 0; c < C; ++c) proj[p] += (px[c] - mean[c]) * eig.vectors[c * C + k];
    }
    planes.push_back(to_bytes(proj));
  }

  auto out = ppm_header(map.width(), map.height());
  for (std::size_t p = 0; p < n; ++p)
    for (const auto& plane : planes) out.push_back(plane[p]);
  return out;
}

std::vector<std::uint8_t> render_channel(const FeatureMap& map, std::size_t channel) {
  if (channel >= map.channels())
    fail(Errc::InvalidArgument, "channel " + std::to_string(channel) + " out of range (" +
                                    std::to_string(map.channels()) + " channels)");
  std::vector<double> v(map.pixels());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = map.pixel(p)[channel];
  const auto gray = to_bytes(v);
  auto out = ppm_header(map.width(), map.height());
  for (std::uint8_t g : gray) out.insert(out.end(), 3, g);
  return out;
}

}  // namespace resfu::viz

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

#include "guided_filter.hpp"

#include <vector>

#include "ops.hpp"
#include "parallel.hpp"

namespace resfu {

FeatureMap guided_filter(const FeatureMap& q, const FeatureMap& k_up, const GuidedFilterConfig& cfg) {
  if (!q.same_shape(k_up)) fail(Errc::ShapeMismatch, "guided_filter: query and key dims differ");
  require(cfg.radius >= 1, Errc::InvalidArgument, "guided_filter: radius must be >= 1");
  require(cfg.eps > 0.0, Errc::InvalidArgument, "guided_filter: eps must be positive");

  const std::size_t h = q.height(), w = q.width(), c = q.channels();
  const std::size_t n = q.pixels();
  const auto qd = q.data();
  const auto kd = k_up.data();
  FeatureMap out(h, w, c);
  auto od = out.data();

  // Channels are independent; each is filtered as its own plane.
  parallel_for(c, [&](std::size_t c0, std::size_t c1) {
    std::vector<double> stats(4 * n), coeff(2 * n);
    for (std::size_t ch = c0; ch < c1; ++ch) {
      // Window statistics: E[q], E[k], E[q*k], E[q*q] interleaved.
      for (std::size_t p = 0; p < n; ++p) {
        const double a = qd[p * c + ch], b = kd[p * c + ch];
        double* s = stats.data() + 4 * p;
        s[0] = a;
        s[1] = b;
        s[2] = a * b;
        s[3] = a * a;
      }
      const auto means = ops::box_mean_f64(stats, h, w, 4, cfg.radius);
      for (std::size_t p = 0; p < n; ++p) {
        const double* s = means.data() + 4 * p;
        const double var = s[3] - s[0] * s[0];
        const double m = (s[2] - s[0] * s[1]) / (var + cfg.eps);
        coeff[2 * p] = m;
        coeff[2 * p + 1] = s[1] - m * s[0];
      }
      const auto avg = ops::box_mean_f64(coeff, h, w, 2, cfg.radius);
      for (std::size_t p = 0; p < n; ++p)
        od[p * c + ch] = static_cast<float>(avg[2 * p] * qd[p * c + ch] + avg[2 * p + 1]);
    }
  });
  return out;
}

}  // namespace resfu

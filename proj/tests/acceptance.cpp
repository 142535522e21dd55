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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "params.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "selfcheck.hpp"
#include "tensor.hpp"

using namespace resfu;
using resfu::testing::run_cli;
using resfu::testing::ScratchDir;
using resfu::testing::slurp;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kUnbounded = 1e9;
int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Accepts a library check only when it also meets the pinned tolerance and budget.
bool within(const check::CheckResult& r, double tol, double budget) {
  return r.passed && r.max_error <= tol && r.seconds < budget;
}

void check_result(int id, const std::string& title, const check::CheckResult& r, double tol, double budget) {
  const std::string limit = budget < kUnbounded ? fmt("%.0fs", budget) : "none";
  report(id, title, within(r, tol, budget),
         fmt("max_err=%.3e tol=%.0e time=%.3fs", r.max_error, tol, r.seconds) + " budget=" + limit +
             (r.detail.empty() ? "" : " (" + r.detail + ")"));
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void random_rsft(const std::string& path, std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  FeatureMap m(h, w, c);
  for (float& v : m.data()) v = rng.symmetric();
  save_feature_map(m, path);
}

}  // namespace

int main() {
  constexpr std::uint64_t seed = 0;
  set_num_threads(1);

  check_result(1, "pcdc decomposition equivalence", check::pcdc_equivalence(seed), 1e-5, 30.0);
  check_result(2, "guided filter closed form", check::guided_filter_equivalence(seed), 1e-4, 10.0);
  check_result(3, "fused vs naive kernel application", check::fused_vs_naive(seed), 1e-5, 10.0);
  check_result(4, "kernel normalization and constant preservation", check::constant_preservation(seed), 1e-5, kUnbounded);
  check_result(5, "degenerate score oracle", check::degenerate_scores(seed), 1e-5, kUnbounded);
  check_result(6, "anti-mosaic", check::anti_mosaic(seed), 1e-5, kUnbounded);

  {
    const auto a = check::pcdc_gradients(seed);
    const auto b = check::kernel_apply_gradients(seed);
    const auto c = check::softmax_shift_invariance(seed);
    const double total = a.seconds + b.seconds + c.seconds;
    const bool ok = within(a, 1e-6, 20.0) && within(b, 1e-6, 20.0) && within(c, 1e-10, 20.0) && total < 20.0;
    report(7, "gradient checks", ok,
           fmt("pcdc=%.3e kernel_apply=%.3e softmax_shift=%.3e time=%.3fs", a.max_error, b.max_error, c.max_error,
               total) +
               " (" + a.detail + ", " + b.detail + ")");
  }
  set_num_threads(0);

  ScratchDir dir("acceptance");
  const std::string x = dir / "x.rsft", y = dir / "y.rsft", w = dir / "w.rsfw";
  random_rsft(x, 16, 16, 8, 1);
  random_rsft(y, 64, 64, 3, 2);
  const bool setup = run_cli("gen-weights --cin 8 --cguide 3 --seed 7 --out '" + w + "'") == 0;

  {
    const std::string base = "upsample --input '" + x + "' --guide '" + y + "' --weights '" + w + "' --ratio 4 --out ";
    bool ok = setup && run_cli(base + "'" + (dir / "ref.rsft") + "'") == 0;
    const auto ref = slurp(dir / "ref.rsft");
    int runs = 0, identical = 0;
    auto again = [&](const std::string& env) {
      const std::string out = dir / ("run" + std::to_string(runs++) + ".rsft");
      if (run_cli(base + "'" + out + "'", env) == 0 && slurp(out) == ref) ++identical;
    };
    again("");
    again("");
    for (const char* env : {"RESFU_NUM_THREADS=1", "RESFU_NUM_THREADS=4", "RESFU_NUM_THREADS=8"}) again(env);
    ok = ok && !ref.empty() && identical == runs;
    report(8, "determinism", ok,
           std::to_string(identical) + "/" + std::to_string(runs) + " reruns match the first (2 more at default threads, then 1/4/8 threads)");
  }

  {
    const auto r = check::format_round_trips(seed);
    auto bytes = slurp(x);
    bytes[0] = 'X';
    const std::string bad = dir / "bad_magic.rsft";
    write_file(bad, bytes);
    const int code = run_cli("upsample --input '" + bad + "' --ratio 2 --baseline bilinear --out '" + (dir / "o.rsft") + "'");
    auto wb = slurp(w);
    wb[0] = 'X';
    const std::string badw = dir / "bad_magic.rsfw";
    write_file(badw, wb);
    const int wcode = run_cli("upsample --input '" + x + "' --guide '" + y + "' --weights '" + badw +
                              "' --ratio 4 --out '" + (dir / "o.rsft") + "'");
    report(9, "format round trips", r.passed && code == 2 && wcode == 2,
           r.detail + "; corrupted magic exit codes rsft=" + std::to_string(code) + " rsfw=" + std::to_string(wcode));
  }

  {
    const auto t0 = Clock::now();
    const int code = run_cli("selfcheck --seed 0", "RESFU_NUM_THREADS=1");
    const double self_s = seconds_since(t0);

    const std::string bx = dir / "bx.rsft", by = dir / "by.rsft", bw = dir / "bw.rsfw";
    random_rsft(bx, 64, 64, 32, 3);
    random_rsft(by, 256, 256, 3, 4);
    bool ok = run_cli("gen-weights --cin 32 --cguide 3 --seed 1 --out '" + bw + "'") == 0;
    std::vector<double> times;
    for (int i = 0; i < 3; ++i) {
      const auto t1 = Clock::now();
      ok = ok && run_cli("upsample --input '" + bx + "' --guide '" + by + "' --weights '" + bw +
                         "' --ratio 4 --out '" + (dir / "big.rsft") + "'") == 0;
      times.push_back(seconds_since(t1));
    }
    std::sort(times.begin(), times.end());
    ok = ok && code == 0 && self_s < 120.0 && times[1] < 1.0;
    report(10, "end-to-end desk run", ok,
           fmt("selfcheck exit=%.0f time=%.2fs (single thread, budget 120s); upsample 64x64x32->256x256x32 median "
               "%.3fs of 3 (budget 1s)",
               code, self_s, times[1]));
  }

  std::printf("acceptance: %d failed\n", failures);
  return failures == 0 ? 0 : 1;
}

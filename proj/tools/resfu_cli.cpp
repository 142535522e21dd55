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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "resfu/resfu.h"

namespace {

struct TensorDeleter {
  void operator()(resfu_tensor* t) const { resfu_tensor_free(t); }
};
struct ParamsDeleter {
  void operator()(resfu_params* p) const { resfu_params_free(p); }
};
struct TraceDeleter {
  void operator()(resfu_trace* t) const { resfu_trace_free(t); }
};
struct BufferDeleter {
  void operator()(resfu_buffer* b) const { resfu_buffer_free(b); }
};
using TensorPtr = std::unique_ptr<resfu_tensor, TensorDeleter>;
using ParamsPtr = std::unique_ptr<resfu_params, ParamsDeleter>;
using TracePtr = std::unique_ptr<resfu_trace, TraceDeleter>;
using BufferPtr = std::unique_ptr<resfu_buffer, BufferDeleter>;

int report(resfu_status st, const std::string& context) {
  std::cerr << "error: " << context << ": " << resfu_status_name(st) << ": " << resfu_last_error() << "\n";
  return resfu_status_exit_code(st);
}

// Any failure to read or parse an input file is an IO/parse failure.
int report_input(resfu_status st, const std::string& path) {
  std::cerr << "error: " << path << ": " << resfu_status_name(st) << ": " << resfu_last_error() << "\n";
  return 2;
}

struct GenWeightsArgs {
  unsigned cin = 0;
  unsigned cguide = 0;
  unsigned kernel = 3;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen_weights(const GenWeightsArgs& a) {
  resfu_params* raw = nullptr;
  if (auto st = resfu_params_generate(a.cin, a.cguide, a.kernel, a.seed, &raw); st != RESFU_OK)
    return report(st, "gen-weights");
  ParamsPtr params(raw);
  if (auto st = resfu_params_save(params.get(), a.out.c_str()); st != RESFU_OK) return report(st, a.out);
  return 0;
}

struct UpsampleArgs {
  std::string input, guide, weights, out, dump_dir, baseline, fused = "true";
  unsigned ratio = 0;
  unsigned kernel = 3;
};

int run_upsample(const UpsampleArgs& a) {
  resfu_upsample_options opts = resfu_upsample_default_options();
  opts.ratio = a.ratio;
  opts.kernel = a.kernel;
  opts.fused = a.fused == "true";
  if (a.baseline.empty()) opts.baseline = RESFU_BASELINE_NONE;
  else if (a.baseline == "bilinear") opts.baseline = RESFU_BASELINE_BILINEAR;
  else if (a.baseline == "nearest") opts.baseline = RESFU_BASELINE_NEAREST;
  else opts.baseline = RESFU_BASELINE_INNERPROD;
  const bool needs_model = opts.baseline == RESFU_BASELINE_NONE || opts.baseline == RESFU_BASELINE_INNERPROD;
  if (needs_model && a.guide.empty()) {
    std::cerr << "error: --guide is required for this baseline\n";
    return 2;
  }
  if (needs_model && a.weights.empty()) {
    std::cerr << "error: --weights is required for this baseline\n";
    return 2;
  }

  resfu_tensor* raw = nullptr;
  if (auto st = resfu_tensor_load(a.input.c_str(), &raw); st != RESFU_OK) return report_input(st, a.input);
  TensorPtr x(raw);
  TensorPtr guide;
  if (needs_model) {
    if (auto st = resfu_tensor_load(a.guide.c_str(), &raw); st != RESFU_OK) return report_input(st, a.guide);
    guide.reset(raw);
  }
  ParamsPtr params;
  if (needs_model) {
    resfu_params* p = nullptr;
    if (auto st = resfu_params_load(a.weights.c_str(), &p); st != RESFU_OK) return report_input(st, a.weights);
    params.reset(p);
  }

  resfu_tensor* out_raw = nullptr;
  resfu_trace* trace_raw = nullptr;
  const bool dump = !a.dump_dir.empty();
  if (auto st = resfu_upsample(x.get(), guide.get(), params.get(), &opts, &out_raw, dump ? &trace_raw : nullptr);
      st != RESFU_OK)
    return report(st, "upsample");
  TensorPtr out(out_raw);
  TracePtr trace(trace_raw);

  if (auto st = resfu_tensor_save(out.get(), a.out.c_str()); st != RESFU_OK) return report(st, a.out);
  if (dump) {
    std::error_code ec;
    std::filesystem::create_directories(a.dump_dir, ec);
    if (ec) {
      std::cerr << "error: " << a.dump_dir << ": " << ec.message() << "\n";
      return 2;
    }
    for (std::size_t i = 0; i < resfu_trace_count(trace.get()); ++i) {
      const std::string path =
          (std::filesystem::path(a.dump_dir) / (std::string(resfu_trace_name(trace.get(), i)) + ".rsft")).string();
      if (auto st = resfu_tensor_save(resfu_trace_tensor(trace.get(), i), path.c_str()); st != RESFU_OK)
        return report(st, path);
    }
  }
  return 0;
}

struct VisualizeArgs {
  std::string input, out, mode = "pca";
  int channel = 0;
};

int run_visualize(const VisualizeArgs& a) {
  resfu_tensor* raw = nullptr;
  if (auto st = resfu_tensor_load(a.input.c_str(), &raw); st != RESFU_OK) return report_input(st, a.input);
  TensorPtr t(raw);
  resfu_buffer* buf = nullptr;
  if (auto st = resfu_render_ppm(t.get(), a.mode == "pca" ? -1 : a.channel, &buf); st != RESFU_OK)
    return report(st, "visualize");
  BufferPtr ppm(buf);
  if (auto st = resfu_buffer_write(ppm.get(), a.out.c_str()); st != RESFU_OK) return report(st, a.out);
  return 0;
}

struct SelfcheckArgs {
  std::uint64_t seed = 0;
  std::string weights;
};

struct SelfcheckTally {
  int passed = 0;
  int failed = 0;
};

void print_check(const resfu_check_result* r, void* user) {
  auto* tally = static_cast<SelfcheckTally*>(user);
  ++(r->passed ? tally->passed : tally->failed);
  std::printf("%s %-32s max_err=%.3e tol=%.1e time=%.2fs", r->passed ? "PASS" : "FAIL", r->name, r->max_error,
              r->tolerance, r->seconds);
  if (r->time_budget > 0) std::printf(" budget=%.0fs", r->time_budget);
  if (r->detail && *r->detail) std::printf(" (%s)", r->detail);
  std::printf("\n");
  std::fflush(stdout);
}

int run_selfcheck(const SelfcheckArgs& a) {
  SelfcheckTally tally;
  const resfu_status st =
      resfu_selfcheck(a.seed, a.weights.empty() ? nullptr : a.weights.c_str(), print_check, &tally);
  std::printf("summary: %d passed, %d failed\n", tally.passed, tally.failed);
  if (st == RESFU_OK) return 0;
  if (st == RESFU_ERR_CHECK_FAILED) return 1;
  return report(st, "selfcheck");
}

struct BenchArgs {
  unsigned h = 64, w = 64, c = 32, ratio = 4, iters = 10;
};

void print_bench_row(const resfu_bench_row* r, void* /*user*/) {
  std::printf("%-20s mean_ms=%10.3f peak_tensor_bytes=%zu\n", r->variant, r->mean_ms, r->peak_tensor_bytes);
}

int run_bench(const BenchArgs& a) {
  double err = 0.0;
  const resfu_status st = resfu_bench(a.h, a.w, a.c, a.ratio, a.iters, print_bench_row, nullptr, &err);
  std::printf("fused_vs_naive_max_rel_error=%.3e\n", err);
  if (st == RESFU_OK) return 0;
  if (st == RESFU_ERR_CHECK_FAILED) {
    std::cerr << "error: " << resfu_last_error() << "\n";
    return 1;
  }
  return report(st, "bench");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resfu: similarity-based feature upsampling"};
  app.require_subcommand(1, 1);

  GenWeightsArgs gw;
  auto* gen = app.add_subcommand("gen-weights", "Generate a seeded .rsfw parameter bundle");
  gen->add_option("--cin", gw.cin, "Value feature channels C")->required()->check(CLI::PositiveNumber);
  gen->add_option("--cguide", gw.cguide, "Guide feature channels c")->required()->check(CLI::PositiveNumber);
  gen->add_option("--kernel", gw.kernel, "Reassembly kernel size K (odd)")->capture_default_str();
  gen->add_option("--seed", gw.seed, "PRNG seed")->capture_default_str();
  gen->add_option("--out", gw.out, "Output .rsfw path")->required();

  UpsampleArgs up;
  auto* ups = app.add_subcommand("upsample", "Upsample a feature map");
  ups->add_option("--input", up.input, "Low-resolution value feature (.rsft)")->required();
  ups->add_option("--guide", up.guide, "High-resolution guide feature (.rsft)");
  ups->add_option("--weights", up.weights, "Parameter bundle (.rsfw)");
  ups->add_option("--ratio", up.ratio, "Upsampling ratio")->required()->check(CLI::PositiveNumber);
  ups->add_option("--kernel", up.kernel, "Reassembly kernel size K")->capture_default_str();
  ups->add_option("--baseline", up.baseline, "Baseline variant")
      ->check(CLI::IsMember({"bilinear", "nearest", "innerprod"}));
  ups->add_option("--fused", up.fused, "Sample the bilinear value on the fly")
      ->check(CLI::IsMember({"true", "false"}))
      ->capture_default_str();
  ups->add_option("--dump-dir", up.dump_dir, "Directory for intermediate tensors");
  ups->add_option("--out", up.out, "Output .rsft path")->required();

  VisualizeArgs vz;
  auto* vis = app.add_subcommand("visualize", "Render a feature map as a PPM image");
  vis->add_option("--input", vz.input, "Feature map (.rsft)")->required();
  vis->add_option("--out", vz.out, "Output .ppm path")->required();
  vis->add_option("--mode", vz.mode, "pca or channel")->check(CLI::IsMember({"pca", "channel"}))->capture_default_str();
  vis->add_option("--channel", vz.channel, "Channel index for --mode channel")->check(CLI::NonNegativeNumber);

  SelfcheckArgs sc;
  auto* self = app.add_subcommand("selfcheck", "Run oracle, property and gradient checks");
  self->add_option("--seed", sc.seed, "Fixture seed")->capture_default_str();
  self->add_option("--weights", sc.weights, "External .rsfw bundle to check");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time fused vs naive kernel application and PCDC forms");
  bench->set_help_flag("--help", "Print this help message and exit");
  bench->add_option("--h", bn.h, "LR height")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--w", bn.w, "LR width")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--c", bn.c, "Channels")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--ratio", bn.ratio, "Upsampling ratio")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--iters", bn.iters, "Timed iterations")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*gen) return run_gen_weights(gw);
  if (*ups) return run_upsample(up);
  if (*vis) return run_visualize(vz);
  if (*self) return run_selfcheck(sc);
  return run_bench(bn);
}

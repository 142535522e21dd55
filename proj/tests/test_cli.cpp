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

#include "cli_util.hpp"
#include "doctest.h"
#include "field64.hpp"
#include "ops.hpp"
#include "params.hpp"
#include "support.hpp"
#include "upsampler.hpp"

using namespace resfu;
using namespace resfu::testing;

namespace {

struct Fixture {
  ScratchDir dir{"cli"};
  std::string x = dir / "x.rsft", y = dir / "y.rsft", w = dir / "w.rsfw", out = dir / "out.rsft", log = dir / "log.txt";

  Fixture() {
    SplitMix64 rng(71);
    save_feature_map(random_map(rng, 8, 6, 4), x);
    save_feature_map(random_map(rng, 32, 24, 3), y);
    REQUIRE(run_cli("gen-weights --cin 4 --cguide 3 --seed 5 --out '" + w + "'") == 0);
  }

  std::string upsample_args(const std::string& extra = "") const {
    return "upsample --input '" + x + "' --guide '" + y + "' --weights '" + w + "' --ratio 4 --out '" + out + "' " +
           extra;
  }
};

}  // namespace

TEST_CASE("upsample output matches the library") {
  Fixture f;
  REQUIRE(run_cli(f.upsample_args()) == 0);
  const FeatureMap got = load_feature_map(f.out);
  CHECK(got.height() == 32);
  CHECK(got.width() == 24);
  CHECK(got.channels() == 4);
  const ResfuParams p = load_params(f.w);
  CHECK(got == resfu_upsample(load_feature_map(f.x), load_feature_map(f.y), p, {4, 3, 0}));
  CHECK(serialize_bundle(params_to_bundle(p)) ==
        serialize_bundle(params_to_bundle(generate_params(3, 4, {2, 3, 5}))));
}

TEST_CASE("baselines") {
  Fixture f;
  const FeatureMap x = load_feature_map(f.x);
  REQUIRE(run_cli("upsample --input '" + f.x + "' --ratio 4 --baseline bilinear --out '" + f.out + "'") == 0);
  CHECK(load_feature_map(f.out) == ops::bilinear_resize(x, 32, 24));
  REQUIRE(run_cli("upsample --input '" + f.x + "' --ratio 4 --baseline nearest --out '" + f.out + "'") == 0);
  CHECK(load_feature_map(f.out) == ops::nearest_resize(x, 32, 24));
  REQUIRE(run_cli(f.upsample_args("--baseline innerprod")) == 0);
  UpsampleOptions opts{4, 3, Baseline::InnerProduct, true};
  const FeatureMap y = load_feature_map(f.y);
  const ResfuParams p = load_params(f.w);
  CHECK(load_feature_map(f.out) == upsample(x, &y, &p, opts));
  REQUIRE(run_cli(f.upsample_args("--fused false")) == 0);
  opts.baseline = Baseline::None;
  CHECK(max_rel_error(load_feature_map(f.out), upsample(x, &y, &p, opts)) <= 1e-5);
}

TEST_CASE("intermediate dumps") {
  Fixture f;
  const std::string dump = f.dir / "dump";
  REQUIRE(run_cli(f.upsample_args("--dump-dir '" + dump + "'")) == 0);
  for (const char* name : {"q", "k_up", "q_gf", "q_gs", "s_s", "s_d", "kernels"})
    CHECK(std::filesystem::exists(dump + "/" + name + ".rsft"));
  CHECK(load_feature_map(dump + "/kernels.rsft").channels() == 9);
}

TEST_CASE("exit codes") {
  Fixture f;
  CHECK(run_cli("upsample --input '" + f.x + "' --guide '" + f.y + "' --weights '" + f.w + "' --ratio 2 --out '" +
                    f.out + "'",
                "", f.log) == 3);
  CHECK(slurp_text(f.log).find("ratio") != std::string::npos);

  const std::string missing = f.dir / "nope.rsft";
  CHECK(run_cli("upsample --input '" + missing + "' --ratio 2 --baseline bilinear --out '" + f.out + "'", "",
                f.log) == 2);
  CHECK(slurp_text(f.log).find(missing) != std::string::npos);

  auto bytes = slurp(f.x);
  bytes[1] = 'X';
  const std::string corrupt = f.dir / "corrupt.rsft";
  write_file(corrupt, bytes);
  CHECK(run_cli("upsample --input '" + corrupt + "' --ratio 2 --baseline bilinear --out '" + f.out + "'") == 2);

  CHECK(run_cli("upsample --input '" + f.x + "' --ratio 4 --out '" + f.out + "'") == 2);
  CHECK(run_cli("upsample --bogus") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("bench --help") == 0);
}

TEST_CASE("visualize") {
  Fixture f;
  const std::string ppm = f.dir / "x.ppm";
  REQUIRE(run_cli("visualize --input '" + f.x + "' --out '" + ppm + "'") == 0);
  CHECK(slurp_text(ppm).rfind("P6\n6 8\n255\n", 0) == 0);
  REQUIRE(run_cli("visualize --input '" + f.x + "' --out '" + ppm + "' --mode channel --channel 2") == 0);
  CHECK(slurp(ppm).size() == 11 + 3 * 48);
  CHECK(run_cli("visualize --input '" + f.x + "' --out '" + ppm + "' --mode channel --channel 9") != 0);
}

TEST_CASE("selfcheck seeds") {
  ScratchDir dir("selfcheck");
  for (int seed = 0; seed < 10; ++seed) {
    const std::string log = dir / ("log" + std::to_string(seed));
    CHECK_MESSAGE(run_cli("selfcheck --seed " + std::to_string(seed), "", log) == 0, slurp_text(log));
    CHECK(slurp_text(log).find("FAIL") == std::string::npos);
  }
}

TEST_CASE("selfcheck rejects a corrupted bundle") {
  Fixture f;
  auto bytes = slurp(f.w);
  bytes[0] = 'Z';
  const std::string bad = f.dir / "bad.rsfw";
  write_file(bad, bytes);
  CHECK(run_cli("selfcheck --weights '" + bad + "'", "", f.log) == 1);
  const std::string text = slurp_text(f.log);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("bad.rsfw") != std::string::npos);
  CHECK(run_cli("selfcheck --weights '" + f.w + "'") == 0);
}

TEST_CASE("bench") {
  ScratchDir dir("bench");
  const std::string log = dir / "log";
  REQUIRE(run_cli("bench --h 8 --w 8 --c 4 --ratio 2 --iters 1", "", log) == 0);
  CHECK(slurp_text(log).find("fused_vs_naive_max_rel_error=") != std::string::npos);
}

TEST_CASE("reruns are byte identical") {
  Fixture f;
  REQUIRE(run_cli(f.upsample_args()) == 0);
  const auto first = slurp(f.out);
  for (const char* env : {"RESFU_NUM_THREADS=1", "RESFU_NUM_THREADS=3", ""}) {
    REQUIRE(run_cli(f.upsample_args(), env) == 0);
    CHECK(slurp(f.out) == first);
  }
}

/*
 * Copyright 2026 The DenseLoRA Desk Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "denselora/adapters/checkpoint.hpp"
#include "denselora/cli/commands.hpp"
#include "denselora/cli/config.hpp"
#include "denselora/numeric/errors.hpp"

using namespace denselora;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("denselora_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Small and fast: 32 examples, batch 8, one epoch.
const std::vector<std::string> kTiny = {"--set", "model.d_model=8", "--set", "model.d_ff=16", "--set",
                                        "task.train_size=32", "--set", "task.eval_size=8", "--batch-size", "8",
                                        "--epochs", "1", "--warmup", "1", "--rank", "2"};

std::vector<std::string> with_tiny(std::vector<std::string> args) {
  args.insert(args.end(), kTiny.begin(), kTiny.end());
  return args;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("count-params preset") {
    const Run r = cli({"count-params", "--preset", "llama2-7b", "--rank", "16"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("lora 28049408") != std::string::npos);
    CHECK(r.out.find("denselora 917504") != std::string::npos);
    CHECK(r.out.find("ratio lora/denselora 30.57") != std::string::npos);
  }

  TEST_CASE("count-params single module and method filter") {
    const Run r = cli({"count-params", "--layers", "1", "--d", "1", "--k", "1", "--rank", "1"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("full_ft 1\n") != std::string::npos);
    CHECK(r.out.find("lora 2\n") != std::string::npos);
    CHECK(r.out.find("denselora 3\n") != std::string::npos);
    const Run m = cli({"count-params", "--layers", "2", "--modules", "Q:4:4,U:4:8", "--rank", "2", "--method", "lora"});
    CHECK(m.out.find("lora 80\n") != std::string::npos);
    CHECK(m.out.find("denselora ") == std::string::npos);
    const Run j = cli({"count-params", "--preset", "llama2-7b", "--rank", "16", "--json"});
    CHECK(nlohmann::json::parse(j.out)["lora"] == 28049408);
  }

  TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"count-params", "--rank", "0", "--layers", "1", "--d", "1", "--k", "1"}).code == kExitUsage);
    CHECK(cli({"count-params", "--rank", "4"}).code == kExitUsage);
    CHECK(cli({"count-params", "--preset", "nope", "--rank", "4"}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("config parsing, overrides and round-trips") {
    const RunConfig c = parse_run_config("[train]\nlearning_rate = 0.01\n[adapter]\nvariant = lora\ntargets = QKV\n",
                                         {{"adapter.rank", "4"}, {"adapter.hybrid_variant", "denselora"},
                                          {"adapter.hybrid_targets", "UD"}});
    CHECK(c.train.learning_rate == 0.01);
    CHECK(c.adapter.variant == AdapterVariant::LoRA);
    CHECK(c.adapter.options.rank == 4);
    CHECK(c.adapter.attachments().size() == 2);
    CHECK(parse_run_config(c.to_ini()) == c);
    CHECK(RunConfig::from_json(c.to_json()) == c);
    CHECK(parse_run_config("").train.learning_rate == 3e-4);

    CHECK_THROWS_AS(parse_run_config("[train]\nlearning_rte = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[train]\nepochs = two\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[adapter]\nvariant = magic\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("", {{"adapter.hybrid_variant", "lora"}, {"adapter.hybrid_targets", "Q"}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("[train\n"), ConfigError);
  }

  TEST_CASE("manifest carries config and seeds") {
    const RunConfig c = parse_run_config("", {{"train.seed", "7"}});
    const nlohmann::json m = run_manifest(c);
    CHECK(m["seeds"]["train"] == 7);
    CHECK(m["artifact_version"] == kArtifactVersion);
    CHECK(RunConfig::from_json(m["config"]) == c);
  }

  TEST_CASE("grad-check command") {
    const Run ok = cli({"grad-check", "--d-model", "4", "--d-ff", "6", "--rank", "2", "--vocab", "5", "--seq", "3"});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("PASS") != std::string::npos);
    const Run lin = cli({"grad-check", "--variant", "only-matrix", "--d-model", "4", "--d-ff", "6", "--rank", "2",
                         "--vocab", "5", "--seq", "3"});
    CHECK(lin.code == kExitOk);
    const Run bad = cli({"grad-check", "--d-model", "4", "--d-ff", "6", "--rank", "2", "--vocab", "5", "--seq", "3",
                         "--corrupt-derivative", "0.01"});
    CHECK(bad.code == kExitNumeric);
    CHECK(bad.out.find("FAIL") != std::string::npos);
    CHECK(cli({"grad-check", "--d-model", "256", "--d-ff", "512"}).code == kExitConfig);
    CHECK(cli({"grad-check", "--variant", "adalora"}).code == kExitUsage);
  }

  TEST_CASE("train writes artifacts and is reproducible") {
    const fs::path a = scratch("train_a"), b = scratch("train_b");
    const Run ra = cli(with_tiny({"train", "--out", a.string()}));
    REQUIRE(ra.code == kExitOk);
    for (const char* f : {"manifest.json", "metrics.jsonl", "adapters_before.dlck", "adapters_after.dlck", "model.dlmd",
                          "config.ini"}) {
      CHECK(fs::exists(a / f));
    }
    const Run rb = cli({"train", "--manifest", (a / "manifest.json").string(), "--out", b.string()});
    REQUIRE(rb.code == kExitOk);
    for (const char* f : {"metrics.jsonl", "adapters_before.dlck", "adapters_after.dlck", "model.dlmd"}) {
      CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(nlohmann::json::parse(slurp(a / "manifest.json"))["config"]["train"]["epochs"] == 1);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("train only-matrix runs the merge check, freeze keeps the codec") {
    const fs::path om = scratch("om"), fr = scratch("fr");
    const Run r = cli(with_tiny({"train", "--variant", "only-matrix", "--out", om.string()}));
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("merge_check max_abs_diff") != std::string::npos);

    REQUIRE(cli(with_tiny({"train", "--variant", "freeze", "--out", fr.string()})).code == kExitOk);
    const AdapterCheckpoint before = load_checkpoint(fr / "adapters_before.dlck");
    const AdapterCheckpoint after = load_checkpoint(fr / "adapters_after.dlck");
    bool m_changed = false;
    for (const auto& e : before.entries) {
      const auto* x = after.find(e.module_type, e.layer_index, e.role);
      REQUIRE(x != nullptr);
      if (e.role == AdapterRole::M) m_changed |= !bitwise_equal(e.tensor, x->tensor);
      if (e.role == AdapterRole::Encoder || e.role == AdapterRole::Decoder) CHECK(bitwise_equal(e.tensor, x->tensor));
    }
    CHECK(m_changed);

    const fs::path d = scratch("density");
    const Run dr = cli({"density", "--before", (fr / "adapters_before.dlck").string(), "--after",
                        (fr / "adapters_after.dlck").string(), "--out", d.string()});
    CHECK(dr.code == kExitOk);
    CHECK(fs::exists(d / "density_report.json"));
    CHECK(fs::exists(d / "density_matrices.csv"));
    CHECK(fs::exists(d / "heatmaps" / "run_Q.0.M.csv"));

    const Run self = cli({"density", "--before", (fr / "adapters_before.dlck").string(), "--after",
                          (fr / "adapters_before.dlck").string(), "--out", d.string()});
    CHECK(self.code == kExitNumeric);
    const Run mismatch = cli({"density", "--before", (fr / "adapters_before.dlck").string(), "--after",
                              (om / "adapters_after.dlck").string(), "--out", d.string()});
    CHECK(mismatch.code == kExitIo);
    fs::remove_all(om);
    fs::remove_all(fr);
    fs::remove_all(d);
  }

  TEST_CASE("train errors map to exit codes") {
    CHECK(cli({"train", "--set", "train.nope=1"}).code == kExitConfig);
    CHECK(cli({"train", "--set", "novalue"}).code == kExitUsage);
    CHECK(cli(with_tiny({"train", "--out", "/proc/denselora/forbidden"})).code == kExitIo);
    CHECK(cli({"train", "--config", "/nonexistent.ini"}).code == kExitUsage);
  }

  TEST_CASE("default output directory from the environment") {
    const fs::path env_dir = scratch("env");
    ::setenv(kOutDirEnv, env_dir.string().c_str(), 1);
    CHECK(default_out_dir() == env_dir);
    const Run r = cli(with_tiny({"train"}));
    ::unsetenv(kOutDirEnv);
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(env_dir / "manifest.json"));
    CHECK(default_out_dir() == fs::path("denselora-out"));
    fs::remove_all(env_dir);
  }

  TEST_CASE("sweep-rank skips oversized ranks and follows the formula") {
    const Run r = cli({"sweep-rank", "--ranks", "2,4,8", "--set", "model.d_model=8", "--set", "model.d_ff=16", "--set",
                       "task.train_size=32", "--set", "task.eval_size=8", "--batch-size", "8", "--epochs", "1",
                       "--warmup", "1"});
    REQUIRE(r.code == kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "rank,trainable,formula,accuracy");
    std::vector<long> counts;
    while (std::getline(lines, line)) {
      std::istringstream row(line);
      std::string rank, trainable, formula;
      std::getline(row, rank, ',');
      std::getline(row, trainable, ',');
      std::getline(row, formula, ',');
      CHECK(trainable == formula);
      counts.push_back(std::stol(trainable));
    }
    REQUIRE(counts.size() == 2);
    CHECK(counts[0] < counts[1]);
    CHECK(r.err.find("rank 8 skipped") != std::string::npos);
  }
}

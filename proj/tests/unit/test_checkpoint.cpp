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

#include <filesystem>
#include <sstream>

#include "denselora/adapters/checkpoint.hpp"
#include "denselora/model/model.hpp"
#include "denselora/model/model_checkpoint.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

using namespace denselora;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.d_model = 8;
  c.d_ff = 12;
  c.vocab_size = 7;
  c.max_seq_len = 6;
  return c;
}

void scramble(Model& m, std::uint64_t seed) {
  Rng rng(seed);
  for (const auto& p : m.adapter_parameters())
    for (auto& v : p->value.data()) v += rng.uniform(-0.5, 0.5);
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("role names") {
    CHECK(to_string(AdapterRole::Encoder) == "W_e");
    CHECK(parse_role("l_bias") == AdapterRole::Bias);
    CHECK_FALSE(parse_role("Z").has_value());
  }

  TEST_CASE("adapter container round-trips through a stream") {
    AdapterCheckpoint c;
    c.manifest = {{"hello", 1}};
    c.entries.push_back({"Q", kSharedLayer, AdapterRole::Encoder, Tensor::matrix({{1, 2}, {3, 4}})});
    c.entries.push_back({"Q", 1, AdapterRole::M, Tensor::matrix({{-0.0, 5e-300}})});
    std::stringstream s;
    write_checkpoint(s, c);
    const AdapterCheckpoint back = read_checkpoint(s);
    CHECK(back.manifest == c.manifest);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].key() == c.entries[1].key());
    CHECK(bitwise_equal(back.entries[1].tensor, c.entries[1].tensor));
    CHECK(back.find("Q", 1, AdapterRole::M) != nullptr);
    CHECK(back.find("K", 1, AdapterRole::M) == nullptr);
  }

  TEST_CASE("corrupt containers are rejected") {
    std::stringstream bad("DLAX0000");
    CHECK_THROWS_AS(read_checkpoint(bad), InputError);
    AdapterCheckpoint c;
    std::stringstream s;
    write_checkpoint(s, c);
    std::string bytes = s.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(read_checkpoint(truncated), InputError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.dlck"), InputError);
  }

  TEST_CASE("model adapters export and import") {
    Model a(tiny()), b(tiny());
    Rng r1(1), r2(2);
    AdapterOptions o;
    o.rank = 2;
    a.attach(AdapterVariant::DenseLoRA, TargetSet::parse("QV"), o, r1);
    a.attach(AdapterVariant::LoRA, TargetSet::parse("U"), o, r1);
    b.attach(AdapterVariant::DenseLoRA, TargetSet::parse("QV"), o, r2);
    b.attach(AdapterVariant::LoRA, TargetSet::parse("U"), o, r2);
    scramble(a, 3);
    b.import_adapters(a.export_adapters());
    const std::vector<int> toks{1, 2, 3, 4};
    CHECK(bitwise_equal(a.logits(toks), b.logits(toks)));

    Model c(tiny());
    Rng r3(3);
    c.attach(AdapterVariant::LoRA, TargetSet::parse("QV"), o, r3);
    CHECK_THROWS_AS(c.import_adapters(a.export_adapters()), InputError);
  }

  TEST_CASE("model checkpoint round-trips") {
    Model m(tiny());
    Rng rng(4);
    AdapterOptions o;
    o.rank = 2;
    m.attach(AdapterVariant::RED, TargetSet::parse("O"), o, rng);
    m.attach(AdapterVariant::Freeze, TargetSet::parse("GD"), o, rng);
    scramble(m, 5);
    const fs::path p = fs::temp_directory_path() / "denselora_unit_model.dlmd";
    save_model(p, m, {{AdapterVariant::RED, TargetSet::parse("O"), o}, {AdapterVariant::Freeze, TargetSet::parse("GD"), o}});
    const LoadedModel back = load_model(p);
    CHECK(back.model.config() == m.config());
    CHECK(back.attachments.size() == 2);
    const std::vector<int> toks{0, 6, 2};
    CHECK(bitwise_equal(back.model.logits(toks), m.logits(toks)));
    fs::remove(p);
  }
}

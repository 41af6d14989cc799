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

#include "denselora/model/model.hpp"
#include "denselora/model/targets.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

using namespace denselora;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.d_ff = 12;
  c.vocab_size = 9;
  c.max_seq_len = 8;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("target sets parse and print canonically") {
    CHECK(TargetSet::parse("DUQKV").to_string() == "QKVUD");
    CHECK(TargetSet::parse("q,k v").to_string() == "QKV");
    CHECK(TargetSet::parse("-").empty());
    CHECK(TargetSet::parse("").to_string() == "-");
    CHECK(TargetSet::parse("QKVOGUD").size() == 7);
    CHECK(TargetSet::parse("QK").intersects(TargetSet::parse("KV")));
    CHECK(TargetSet::parse("QK").united(TargetSet::parse("D")).to_string() == "QKD");
    CHECK_THROWS_AS(TargetSet::parse("QX"), ConfigError);
  }

  TEST_CASE("config validation") {
    ModelConfig c = tiny();
    c.n_heads = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny();
    c.n_layers = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(ModelConfig::from_json(tiny().to_json()) == tiny());
  }

  TEST_CASE("site shapes") {
    const Model m(tiny());
    CHECK(m.site_shape(Site::Q).k == 8);
    CHECK(m.site_shape(Site::U).d == 12);
    CHECK(m.site_shape(Site::G).k == 8);
    CHECK(m.site_shape(Site::D).k == 12);
    CHECK(m.site_shape(Site::D).d == 8);
    CHECK(m.projection(Site::U, 1).shape() == Shape{12, 8});
  }

  TEST_CASE("base construction is seeded and frozen") {
    const Model a(tiny()), b(tiny());
    const std::vector<int> toks{1, 2, 3};
    CHECK(bitwise_equal(a.logits(toks), b.logits(toks)));
    CHECK(a.trainable_parameters().empty());
    for (const auto& p : a.base_parameters()) CHECK_FALSE(p->trainable());
    ModelConfig other = tiny();
    other.seed = 4;
    CHECK_FALSE(bitwise_equal(Model(other).logits(toks), a.logits(toks)));
  }

  TEST_CASE("logits are causal and validated") {
    const Model m(tiny());
    const Tensor a = m.logits(std::vector<int>{1, 2, 3, 4});
    const Tensor b = m.logits(std::vector<int>{1, 2, 3, 8});
    CHECK(a.shape() == Shape{4, 9});
    for (std::size_t j = 0; j < 9; ++j) CHECK(a(2, j) == b(2, j));
    CHECK_THROWS_AS(m.logits(std::vector<int>{1, 9}), InputError);
    CHECK_THROWS_AS(m.logits(std::vector<int>(9, 0)), InputError);
  }

  TEST_CASE("attach validates targets") {
    Model m(tiny());
    Rng rng(1);
    AdapterOptions o;
    o.rank = 2;
    CHECK_THROWS_AS(m.attach(AdapterVariant::DenseLoRA, TargetSet{}, o, rng), ConfigError);
    m.attach(AdapterVariant::LoRA, TargetSet::parse("QKV"), o, rng);
    CHECK_THROWS_AS(m.attach(AdapterVariant::DenseLoRA, TargetSet::parse("VU"), o, rng), ConfigError);
    m.attach(AdapterVariant::DenseLoRA, TargetSet::parse("UD"), o, rng);
    CHECK(m.adapted_targets().to_string() == "QKVUD");
    CHECK(m.adapters().at(Site::Q).variant == AdapterVariant::LoRA);
    CHECK(m.adapters().at(Site::U).dense.size() == 2);
  }

  TEST_CASE("attaching does not change logits and only adapters train") {
    for (auto v : {AdapterVariant::DenseLoRA, AdapterVariant::Freeze, AdapterVariant::OnlyMatrix, AdapterVariant::LoRA,
                   AdapterVariant::RED}) {
      Model m(tiny());
      const std::vector<int> toks{0, 4, 8, 2, 5};
      const Tensor before = m.logits(toks);
      Rng rng(2);
      AdapterOptions o;
      o.rank = 2;
      m.attach(v, TargetSet::parse("QKVOGUD"), o, rng);
      CHECK(bitwise_equal(before, m.logits(toks)));
      for (const auto& p : m.trainable_parameters()) {
        bool is_adapter = false;
        for (const auto& q : m.adapter_parameters()) is_adapter |= (p == q);
        CHECK(is_adapter);
      }
    }
  }

  TEST_CASE("shared codec appears once among adapter parameters") {
    Model m(tiny());
    Rng rng(3);
    AdapterOptions o;
    o.rank = 2;
    m.attach(AdapterVariant::DenseLoRA, TargetSet::parse("Q"), o, rng);
    // W_e, W_d, and one M per layer.
    CHECK(m.adapter_parameters().size() == 4);
    CHECK(m.adapter_manifest()["groups"].size() == 1);
  }

  TEST_CASE("trace captures projection outputs") {
    const Model m(tiny());
    ForwardTrace trace;
    m.logits(std::vector<int>{1, 2}, &trace);
    CHECK(trace.site_outputs.count({1, Site::D}) == 1);
    CHECK(trace.site_outputs.at({0, Site::U}).shape() == Shape{2, 12});
  }
}

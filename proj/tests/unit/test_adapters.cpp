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

#include <cmath>

#include "denselora/adapters/adapters.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/init.hpp"
#include "denselora/numeric/ops.hpp"
#include "denselora/numeric/rng.hpp"

using namespace denselora;

namespace {

Tensor random_tensor(Shape s, Rng& rng) {
  Tensor t(std::move(s));
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

bool all_zero(const Tensor& t) {
  for (double v : t.data())
    if (v != 0.0) return false;
  return true;
}

}  // namespace

TEST_SUITE("adapters") {
  TEST_CASE("variant names") {
    for (auto v : {AdapterVariant::DenseLoRA, AdapterVariant::Freeze, AdapterVariant::OnlyMatrix, AdapterVariant::LoRA,
                   AdapterVariant::RED}) {
      CHECK(parse_variant(to_string(v)) == v);
    }
    CHECK(to_string(AdapterVariant::OnlyMatrix) == "only-matrix");
    CHECK_FALSE(parse_variant("adalora").has_value());
    CHECK(uses_codec(AdapterVariant::Freeze));
    CHECK_FALSE(uses_codec(AdapterVariant::LoRA));
  }

  TEST_CASE("options defaults and validation") {
    AdapterOptions o;
    CHECK(o.rank == 8);
    CHECK(o.alpha_value() == 16.0);
    CHECK(o.dropout == 0.05);
    o.alpha = 4.0;
    CHECK(o.alpha_value() == 4.0);
    AdapterOptions bad;
    bad.rank = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.dropout = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("lora init: B zero, A kaiming") {
    Rng rng(1);
    AdapterOptions o;
    o.rank = 4;
    const LoraAdapter a = LoraAdapter::create(6, 10, o, rng, "q");
    CHECK(a.a->shape() == Shape{4, 10});
    CHECK(a.b->shape() == Shape{6, 4});
    CHECK(all_zero(a.b->value));
    CHECK_FALSE(all_zero(a.a->value));
    for (double v : a.a->value.data()) CHECK(std::abs(v) <= kaiming_bound(10));
    CHECK(a.a->name() == "q.A");
    CHECK(a.scaling() == 2.0);
  }

  TEST_CASE("lora forward equals merged weight") {
    Rng rng(2);
    AdapterOptions o;
    o.rank = 3;
    LoraAdapter a = LoraAdapter::create(5, 7, o, rng, "x");
    a.b->value = random_tensor({5, 3}, rng);
    const auto w0 = make_parameter("w0", random_tensor({5, 7}, rng), false);
    const Tensor merged = lora_merge(w0->value, a);
    for (int i = 0; i < 20; ++i) {
      const Tensor h = random_tensor({7}, rng);
      CHECK(max_abs_diff(lora_forward(h, *w0, a), matmul(merged, h)) <= 1e-12);
    }
  }

  TEST_CASE("denselora group: shared codec, per-layer M, zero decoder") {
    Rng rng(3);
    AdapterOptions o;
    o.rank = 4;
    const AdapterGroup g = attach_group(3, 10, 6, AdapterVariant::DenseLoRA, o, rng, "Q");
    REQUIRE(g.layers.size() == 3);
    CHECK(g.codec->encoder->shape() == Shape{4, 10});
    CHECK(g.codec->decoder->shape() == Shape{6, 4});
    CHECK(all_zero(g.codec->decoder->value));
    CHECK(g.codec->encoder->trainable());
    for (const auto& l : g.layers) {
      CHECK(l.codec == g.codec);
      CHECK(l.matrix->shape() == Shape{4, 4});
      CHECK_FALSE(all_zero(l.matrix->value));
      CHECK(l.scaling() == 2.0);
    }
    CHECK(g.layers[0].matrix->name() == "layers.0.Q.M");
    CHECK(g.layers[0].matrix->value != g.layers[1].matrix->value);
    CHECK_FALSE(g.notice.has_value());
  }

  TEST_CASE("branch output vanishes at init for every codec variant") {
    for (auto v : {AdapterVariant::DenseLoRA, AdapterVariant::Freeze, AdapterVariant::OnlyMatrix}) {
      Rng rng(4);
      AdapterOptions o;
      o.rank = 3;
      const AdapterGroup g = attach_group(2, 8, 5, v, o, rng, "U");
      const auto w0 = make_parameter("w0", random_tensor({5, 8}, rng), false);
      const Tensor h = random_tensor({8}, rng);
      CHECK(bitwise_equal(denselora_forward(h, *w0, g.layers[1]), matmul(w0->value, h)));
    }
  }

  TEST_CASE("freeze: codec frozen, M trainable and zero") {
    Rng rng(5);
    AdapterOptions o;
    o.rank = 4;
    const AdapterGroup g = attach_group(2, 8, 6, AdapterVariant::Freeze, o, rng, "V");
    CHECK_FALSE(g.codec->encoder->trainable());
    CHECK_FALSE(g.codec->decoder->trainable());
    CHECK_FALSE(all_zero(g.codec->decoder->value));
    for (const auto& l : g.layers) {
      CHECK(l.matrix->trainable());
      CHECK(all_zero(l.matrix->value));
    }
  }

  TEST_CASE("only-matrix forces identity and collapses to a linear map") {
    Rng rng(6);
    AdapterOptions o;
    o.rank = 3;
    o.activation = ActivationKind::Tanh;
    const AdapterGroup g = attach_group(1, 9, 4, AdapterVariant::OnlyMatrix, o, rng, "D");
    CHECK(g.codec->activation == ActivationKind::Identity);
    g.codec->decoder->value = random_tensor({4, 3}, rng);
    const auto& ad = g.layers[0];
    const Tensor merged = only_matrix_merge(ad);
    for (int i = 0; i < 20; ++i) {
      const Tensor h = random_tensor({9}, rng);
      Tensor branch = decode(matmul(ad.matrix->value, encode(h, *ad.codec)), *ad.codec);
      for (auto& v : branch.data()) v *= ad.scaling();
      CHECK(max_abs_diff(branch, matmul(merged, h)) <= 1e-12);
    }
    const AdapterGroup t = attach_group(1, 9, 4, AdapterVariant::DenseLoRA, o, rng, "D");
    CHECK_THROWS_AS(only_matrix_merge(t.layers[0]), ConfigError);
  }

  TEST_CASE("codec shape mismatch is rejected") {
    Rng rng(7);
    AdapterOptions o;
    o.rank = 2;
    const AdapterGroup g = attach_group(1, 6, 6, AdapterVariant::DenseLoRA, o, rng, "Q");
    const auto w0 = make_parameter("w0", Tensor({6, 5}), false);
    CHECK_THROWS_AS(denselora_forward(Tensor({5}), *w0, g.layers[0]), ConfigError);
  }

  TEST_CASE("attach_group rejects non-codec variants and empty groups, notes oversized rank") {
    Rng rng(8);
    AdapterOptions o;
    o.rank = 4;
    CHECK_THROWS_AS(attach_group(2, 8, 8, AdapterVariant::LoRA, o, rng, "Q"), ConfigError);
    CHECK_THROWS_AS(attach_group(2, 8, 8, AdapterVariant::RED, o, rng, "Q"), ConfigError);
    CHECK_THROWS_AS(attach_group(0, 8, 8, AdapterVariant::DenseLoRA, o, rng, "Q"), ConfigError);
    o.rank = 8;
    CHECK(attach_group(1, 8, 16, AdapterVariant::DenseLoRA, o, rng, "Q").notice.has_value());
  }

  TEST_CASE("red starts as identity") {
    const RedAdapter r = RedAdapter::create(5, "O");
    Rng rng(9);
    const Tensor h = random_tensor({5}, rng);
    CHECK(bitwise_equal(red_forward(h, r), h));
    r.scaling->value[0] = 2.0;
    r.bias->value[0] = 1.0;
    CHECK(red_forward(h, r)[0] == 2.0 * h[0] + 1.0);
  }

  TEST_CASE("dropout applies only in train mode") {
    Rng rng(10);
    AdapterOptions o;
    o.rank = 2;
    o.dropout = 0.5;
    LoraAdapter a = LoraAdapter::create(3, 4, o, rng, "x");
    a.b->value = random_tensor({3, 2}, rng);
    const Tensor x = random_tensor({6, 4}, rng);
    Tape t;
    ForwardContext eval;
    const Tensor e1 = lora_branch(t.constant(x), a, eval).value();
    const Tensor e2 = lora_branch(t.constant(x), a, eval).value();
    CHECK(bitwise_equal(e1, e2));
    Rng drop(1);
    ForwardContext train{Mode::Train, &drop};
    CHECK_FALSE(bitwise_equal(lora_branch(t.constant(x), a, train).value(), e1));
  }
}

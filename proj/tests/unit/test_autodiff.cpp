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
#include <vector>

#include "denselora/numeric/autodiff.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/gradcheck.hpp"
#include "denselora/numeric/ops.hpp"
#include "denselora/numeric/rng.hpp"

using namespace denselora;

namespace {

ParameterPtr random_param(const std::string& name, Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return make_parameter(name, std::move(t));
}

// Weighted sum so every output coordinate gets a distinct upstream gradient.
Var weighted_sum(Var x, const Tensor& w) {
  Tape& tape = x.tape();
  return sum(mul(x, tape.constant(w)));
}

Tensor random_like(const Shape& s, Rng& rng) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

double check(const Objective& f, std::vector<ParameterPtr> ps) { return grad_check(f, ps).max_relative_error; }

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("matmul, linear and transpose gradients") {
    Rng rng(1);
    auto a = random_param("a", {3, 4}, rng), b = random_param("b", {4, 5}, rng), w = random_param("w", {2, 4}, rng);
    const Tensor g1 = random_like({3, 5}, rng), g2 = random_like({3, 2}, rng), g3 = random_like({4, 3}, rng);
    CHECK(check([&](Tape& t) { return weighted_sum(matmul(t.parameter(*a), t.parameter(*b)), g1); }, {a, b}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(linear(t.parameter(*a), t.parameter(*w)), g2); }, {a, w}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(transpose(t.parameter(*a)), g3); }, {a}) < 1e-8);
  }

  TEST_CASE("elementwise and rowwise gradients") {
    Rng rng(2);
    auto x = random_param("x", {3, 4}, rng), y = random_param("y", {3, 4}, rng), r = random_param("r", {4}, rng);
    const Tensor g = random_like({3, 4}, rng);
    CHECK(check([&](Tape& t) { return weighted_sum(add(t.parameter(*x), t.parameter(*y)), g); }, {x, y}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(sub(t.parameter(*x), t.parameter(*y)), g); }, {x, y}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(mul(t.parameter(*x), t.parameter(*y)), g); }, {x, y}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(scale(t.parameter(*x), -2.5), g); }, {x}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(add_rowwise(t.parameter(*x), t.parameter(*r)), g); }, {x, r}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(mul_rowwise(t.parameter(*x), t.parameter(*r)), g); }, {x, r}) < 1e-8);
    CHECK(check([&](Tape& t) { return mean(t.parameter(*x)); }, {x}) < 1e-8);
  }

  TEST_CASE("activation gradients") {
    Rng rng(3);
    auto x = random_param("x", {4, 5}, rng);
    const Tensor g = random_like({4, 5}, rng);
    for (auto kind : {ActivationKind::Identity, ActivationKind::Tanh, ActivationKind::Relu}) {
      CAPTURE(to_string(kind));
      CHECK(check([&](Tape& t) { return weighted_sum(activation(t.parameter(*x), kind), g); }, {x}) < 1e-8);
    }
    CHECK(check([&](Tape& t) { return weighted_sum(silu(t.parameter(*x)), g); }, {x}) < 1e-8);
    CHECK(check([&](Tape& t) { return weighted_sum(rms_norm(t.parameter(*x)), g); }, {x}) < 1e-7);
  }

  TEST_CASE("activations vanish at zero and relu derivative at zero is zero") {
    for (auto kind : {ActivationKind::Identity, ActivationKind::Tanh, ActivationKind::Relu}) {
      CHECK(activation(Tensor::scalar(0.0), kind).item() == 0.0);
    }
    CHECK(activation_derivative(0.0, ActivationKind::Relu) == 0.0);
    CHECK(activation_derivative(0.0, ActivationKind::Tanh) == 1.0);
    CHECK(parse_activation("tanh") == ActivationKind::Tanh);
    CHECK_FALSE(parse_activation("gelu").has_value());
  }

  TEST_CASE("attention, embedding and cross-entropy gradients") {
    Rng rng(4);
    const std::size_t seq = 3, batch = 2, dm = 4;
    auto q = random_param("q", {batch * seq, dm}, rng), k = random_param("k", {batch * seq, dm}, rng),
         v = random_param("v", {batch * seq, dm}, rng);
    const Tensor g = random_like({batch * seq, dm}, rng);
    CHECK(check([&](Tape& t) {
            return weighted_sum(causal_attention(t.parameter(*q), t.parameter(*k), t.parameter(*v), 2, seq), g);
          },
          {q, k, v}) < 1e-7);

    auto table = random_param("table", {5, 3}, rng);
    const std::vector<int> ids{4, 0, 4, 2};
    const Tensor ge = random_like({4, 3}, rng);
    CHECK(check([&](Tape& t) { return weighted_sum(embedding(t.parameter(*table), ids), ge); }, {table}) < 1e-8);

    auto logits = random_param("logits", {4, 5}, rng);
    const std::vector<int> targets{1, -1, 4, 0};
    CHECK(check([&](Tape& t) { return cross_entropy(t.parameter(*logits), targets); }, {logits}) < 1e-8);
  }

  TEST_CASE("attention is causal") {
    Rng rng(5);
    const Tensor q = random_like({3, 4}, rng), k = random_like({3, 4}, rng), v = random_like({3, 4}, rng);
    Tensor v2 = v;
    v2(2, 0) += 1.0;
    Tape t;
    const Tensor a = causal_attention(t.constant(q), t.constant(k), t.constant(v), 2, 3).value();
    const Tensor b = causal_attention(t.constant(q), t.constant(k), t.constant(v2), 2, 3).value();
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(a(0, j) == b(0, j));
      CHECK(a(1, j) == b(1, j));
    }
  }

  TEST_CASE("input validation") {
    Tape t;
    Var table = t.constant(Tensor({3, 2}));
    const std::vector<int> bad{3};
    CHECK_THROWS_AS(embedding(table, bad), InputError);
    const std::vector<int> ignored{-1, -1};
    CHECK_THROWS_AS(cross_entropy(t.constant(Tensor({2, 3})), ignored), InputError);
    CHECK_THROWS_AS(matmul(t.constant(Tensor({2, 3})), t.constant(Tensor({2, 3}))), DimensionError);
  }

  TEST_CASE("frozen parameters receive no gradient and shared leaves accumulate") {
    auto w = make_parameter("w", Tensor::vector({2.0, 3.0}));
    auto frozen = make_parameter("f", Tensor::vector({5.0, 7.0}), false);
    Tape t;
    Var x = t.parameter(*w);
    Var x_again = t.parameter(*w);
    CHECK(x.index() == x_again.index());
    Var loss = sum(add(mul(x, t.parameter(*frozen)), mul(x, x_again)));
    t.backward(loss);
    // d/dw (f*w + w^2) = f + 2w
    CHECK(w->grad[0] == 5.0 + 4.0);
    CHECK(w->grad[1] == 7.0 + 6.0);
    CHECK(frozen->grad[0] == 0.0);
    CHECK_THROWS_AS(t.backward(loss), Error);
  }

  TEST_CASE("backward needs a scalar loss") {
    auto w = make_parameter("w", Tensor::vector({1.0, 2.0}));
    Tape t;
    CHECK_THROWS_AS(t.backward(t.parameter(*w)), DimensionError);
  }

  TEST_CASE("dropout is identity at p=0 and rescales kept entries") {
    Rng rng(6);
    Tape t;
    Var x = t.constant(Tensor::full({50}, 1.0));
    CHECK(dropout(x, 0.0, rng).index() == x.index());
    const Tensor d = dropout(x, 0.5, rng).value();
    for (double v : d.data()) CHECK((v == 0.0 || v == 2.0));
    CHECK_THROWS_AS(dropout(x, 1.0, rng), ConfigError);
  }

  TEST_CASE("grad_check flags a corrupted derivative and restores values") {
    Rng rng(8);
    auto x = random_param("x", {3, 3}, rng);
    const Tensor before = x->value;
    const Tensor g = random_like({3, 3}, rng);
    auto f = [&](Tape& t) { return weighted_sum(activation(t.parameter(*x), ActivationKind::Tanh), g); };
    testing::set_derivative_fault(1e-3);
    const double err = check(f, {x});
    testing::set_derivative_fault(0.0);
    CHECK(err > 1e-5);
    CHECK(bitwise_equal(before, x->value));
    CHECK(x->grad[0] == 0.0);
    GradCheckOptions bad;
    bad.epsilon = 0.0;
    std::vector<ParameterPtr> ps{x};
    CHECK_THROWS_AS(grad_check(f, ps, bad), ConfigError);
  }
}

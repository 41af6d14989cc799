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
#include <set>
#include <sstream>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/init.hpp"
#include "denselora/numeric/rng.hpp"
#include "denselora/numeric/serialize.hpp"
#include "denselora/numeric/tensor.hpp"

using namespace denselora;

TEST_SUITE("tensor") {
  TEST_CASE("construction and shape checks") {
    Tensor z({2, 3});
    CHECK(z.size() == 6);
    CHECK(z.rows() == 2);
    CHECK(z.cols() == 3);
    CHECK(z[5] == 0.0);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
    CHECK(Tensor::scalar(4.5).item() == 4.5);
    CHECK_THROWS(Tensor::vector({1.0, 2.0}).item());
    CHECK(Tensor::identity(3)(1, 1) == 1.0);
    CHECK(Tensor::identity(3)(1, 2) == 0.0);
  }

  TEST_CASE("transpose and reshape") {
    const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    const Tensor t = m.transposed();
    CHECK(t.shape() == Shape{3, 2});
    CHECK(t(2, 1) == 6.0);
    CHECK(m.reshaped({3, 2})(2, 1) == 6.0);
    CHECK_THROWS_AS(m.reshaped({4, 2}), DimensionError);
  }

  TEST_CASE("diff helpers") {
    const Tensor a = Tensor::vector({1.0, 2.0});
    Tensor b = a;
    CHECK(bitwise_equal(a, b));
    b[1] = 2.5;
    CHECK(max_abs_diff(a, b) == doctest::Approx(0.5));
    CHECK_FALSE(bitwise_equal(a, b));
    CHECK_THROWS_AS(max_abs_diff(a, Tensor::vector({1.0})), DimensionError);
    Tensor n = a;
    n[0] = NAN;
    CHECK_FALSE(n.all_finite());
  }

  TEST_CASE("serialization round-trips bit-exactly") {
    Rng rng(1);
    Tensor t({3, 4});
    for (auto& v : t.data()) v = rng.uniform(-1e6, 1e6);
    t[0] = -0.0;
    const Tensor back = decode_tensor(encode_tensor(t));
    CHECK(bitwise_equal(t, back));
    CHECK(bitwise_equal(decode_tensor(encode_tensor(Tensor::scalar(3.0))), Tensor::scalar(3.0)));
  }

  TEST_CASE("serialization rejects malformed input") {
    const std::string good = encode_tensor(Tensor::vector({1.0, 2.0}));
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_tensor(bad_magic), InputError);
    CHECK_THROWS_AS(decode_tensor(good.substr(0, good.size() - 3)), InputError);
    CHECK_THROWS_AS(decode_tensor(good + "x"), InputError);
    CHECK_THROWS_AS(decode_tensor(""), InputError);
  }
}

TEST_SUITE("tensor") {
  TEST_CASE("rng is reproducible and forks are independent") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng f1 = Rng(42).fork("x"), f2 = Rng(42).fork("x"), f3 = Rng(42).fork("y");
    CHECK(f1.next_u64() == f2.next_u64());
    CHECK(Rng(42).fork("x").next_u64() != f3.next_u64());
    CHECK(mix_seed(1, "a") != mix_seed(1, "b"));
  }

  TEST_CASE("rng ranges") {
    Rng r(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      const double w = r.uniform(-3.0, -1.0);
      CHECK(w >= -3.0);
      CHECK(w < -1.0);
      const auto k = r.below(7);
      CHECK(k < 7);
      seen.insert(k);
    }
    CHECK(seen.size() == 7);
  }

  TEST_CASE("kaiming uniform bounds") {
    Rng r(9);
    const Tensor w = kaiming_uniform({16, 64}, 64, r);
    const double bound = kaiming_bound(64);
    CHECK(bound == doctest::Approx(std::sqrt(6.0 / 64.0)));
    double max_abs = 0.0;
    for (double v : w.data()) max_abs = std::max(max_abs, std::abs(v));
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.5 * bound);
    CHECK_THROWS_AS(kaiming_uniform({2, 2}, 0, r), ConfigError);
  }
}

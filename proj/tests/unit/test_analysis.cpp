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

#include "denselora/analysis/counts.hpp"
#include "denselora/analysis/density.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

using namespace denselora;

namespace {

// One module, one layer; before is all zeros.
struct DensityFixture {
  AdapterCheckpoint before, after;
  DensityFixture() {
    before.manifest = after.manifest = {{"groups", 1}};
    Tensor m({2, 2}, {1, 1, 1, 0});
    Tensor a({2, 4});
    a[0] = 1.0;
    Tensor b({4, 2});
    b[7] = -1.0;
    after.entries = {{"Q", 0, AdapterRole::M, m}, {"Q", 0, AdapterRole::A, a}, {"Q", 0, AdapterRole::B, b}};
    before.entries = {{"Q", 0, AdapterRole::M, Tensor({2, 2})},
                      {"Q", 0, AdapterRole::A, Tensor({2, 4})},
                      {"Q", 0, AdapterRole::B, Tensor({4, 2})}};
  }
};

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("closed-form counts") {
    CHECK(count_full_ft(1, 1, 1) == 1);
    CHECK(count_lora(1, 1, 1, 1) == 2);
    CHECK(count_denselora(1, 1, 1, 1) == 3);
    CHECK(count_lora(32, 4096, 4096, 16) == 32 * 8192 * 16);
    CHECK(count_denselora(32, 4096, 11008, 16) == (4096 + 11008 + 32 * 16) * 16);
    CHECK(count_freeze(32, 16) == 32 * 256);
    CHECK(count_red(2, 10) == 40);
    CHECK(count_variant(AdapterVariant::OnlyMatrix, 2, 5, 7, 3) == count_denselora(2, 5, 7, 3));
  }

  TEST_CASE("llama2-7b preset reproduces the published totals") {
    const auto preset = find_preset("llama2-7b");
    REQUIRE(preset.has_value());
    const ParamCountReport r = count_params(preset->layers, preset->modules, 16, preset->base_total);
    CHECK(r.lora == 28049408);
    CHECK(r.denselora == 917504);
    CHECK(r.lora_to_denselora_ratio() == doctest::Approx(30.57).epsilon(1e-3));
    std::int64_t sum = 0;
    for (const auto& row : r.rows) sum += row.denselora;
    CHECK(sum == r.denselora);
    CHECK(*r.percent(r.lora) > 0.0);
    CHECK(*r.percent(r.lora) < 100.0);
    CHECK_FALSE(find_preset("gpt-5").has_value());
  }

  TEST_CASE("toy model enumeration matches formulas") {
    ModelConfig mc;
    mc.n_layers = 3;
    mc.d_model = 8;
    mc.d_ff = 20;
    Model m(mc);
    Rng rng(1);
    AdapterOptions o;
    o.rank = 2;
    m.attach(AdapterVariant::DenseLoRA, TargetSet::parse("UD"), o, rng);
    m.attach(AdapterVariant::LoRA, TargetSet::parse("QK"), o, rng);
    m.attach(AdapterVariant::RED, TargetSet::parse("O"), o, rng);
    const ModelCountReport r = count_model(m);
    const std::int64_t expect = 2 * ((20 + 8) * 2 + 3 * 4) + 2 * 3 * (8 + 8) * 2 + 2 * 3 * 8;
    CHECK(r.enumerated_total == expect);
    CHECK(r.formula_total == expect);
    CHECK(r.groups.size() == 5);
    CHECK(r.base_total == static_cast<std::int64_t>(m.base_parameter_count()));
  }

  TEST_CASE("increment density fixture") {
    const DensityFixture f;
    const DensityReport r = density_report(f.before, f.after);
    // pool: 5 nonzero squares of 1 over 20 entries, rms 0.5, tau 0.05
    CHECK(r.pooled_rms == doctest::Approx(0.5));
    CHECK_FALSE(r.degenerate);
    REQUIRE(r.comparisons.size() == 1);
    CHECK(r.comparisons[0].m_fraction == 0.75);
    CHECK(r.comparisons[0].a_fraction == 0.125);
    CHECK(r.comparisons[0].b_fraction == 0.125);
    CHECK(*r.ratio == 6.0);
    for (const auto& e : r.entries) {
      CHECK(e.stats.tau == doctest::Approx(0.05));
      CHECK(e.slice.shape() == Shape{2, 2});
    }
  }

  TEST_CASE("density is invariant under common scaling") {
    DensityFixture f;
    Rng rng(2);
    for (auto& e : f.after.entries)
      for (auto& v : e.tensor.data()) v += rng.uniform(-0.3, 0.3);
    const DensityReport a = density_report(f.before, f.after);
    for (auto* c : {&f.before, &f.after})
      for (auto& e : c->entries)
        for (auto& v : e.tensor.data()) v *= 8.0;
    const DensityReport b = density_report(f.before, f.after);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      CHECK(a.entries[i].stats.active_fraction == b.entries[i].stats.active_fraction);
      CHECK(a.entries[i].stats.active_fraction >= 0.0);
      CHECK(a.entries[i].stats.active_fraction <= 1.0);
    }
  }

  TEST_CASE("per-matrix tau") {
    const DensityFixture f;
    DensityOptions o;
    o.tau_mode = TauMode::PerMatrix;
    const DensityReport r = density_report(f.before, f.after, o);
    CHECK(r.entries[0].stats.tau == doctest::Approx(0.1 * std::sqrt(0.75)));
    CHECK(r.entries[0].stats.active_fraction == 0.75);
    CHECK(r.entries[1].stats.active_fraction == 0.125);
    CHECK(parse_tau_mode("per-matrix") == TauMode::PerMatrix);
  }

  TEST_CASE("degenerate and mismatched comparisons") {
    const DensityFixture f;
    const DensityReport self = density_report(f.before, f.before);
    CHECK(self.degenerate);
    CHECK_FALSE(self.ratio.has_value());
    AdapterCheckpoint other = f.after;
    other.manifest = {{"groups", 2}};
    CHECK_THROWS_AS(density_report(f.before, other), InputError);
    CHECK_THROWS_AS(increment_density(Tensor({2}), Tensor({2}), 0.0), NumericError);
  }

  TEST_CASE("increment density single matrix") {
    const IncrementStats s = increment_density(Tensor({4}), Tensor({4}, {0.0, 0.2, -0.3, 0.05}), 1.0);
    CHECK(s.tau == doctest::Approx(0.1));
    CHECK(s.active == 2);
    CHECK(s.active_fraction == 0.5);
  }

  TEST_CASE("heatmap csv") { CHECK(to_csv(Tensor::matrix({{1, 2}, {3, 4}})) == "1,2\n3,4\n"); }
}

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

#include "denselora/cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "denselora/analysis/counts.hpp"
#include "denselora/model/model_checkpoint.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/ops.hpp"
#include "denselora/numeric/rng.hpp"

namespace fs = std::filesystem;

namespace denselora {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

// Restores the activation-derivative fault on scope exit.
class FaultGuard {
 public:
  explicit FaultGuard(double fault) : previous_(testing::derivative_fault()) { testing::set_derivative_fault(fault); }
  ~FaultGuard() { testing::set_derivative_fault(previous_); }
  FaultGuard(const FaultGuard&) = delete;
  FaultGuard& operator=(const FaultGuard&) = delete;

 private:
  double previous_;
};

std::string heatmap_name(const DensityEntry& e) {
  std::string n = e.name();
  std::replace(n.begin(), n.end(), ':', '_');
  return n + ".csv";
}

}  // namespace

fs::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "denselora-out";
}

double only_matrix_merge_error(const Model& model, std::size_t samples, std::uint64_t seed) {
  double worst = 0.0;
  Rng rng(mix_seed(seed, "merge-check"));
  for (const auto& [site, group] : model.adapters()) {
    if (group.variant != AdapterVariant::OnlyMatrix) continue;
    for (std::size_t l = 0; l < group.dense.size(); ++l) {
      const Parameter& w0 = model.projection(site, l);
      Tensor merged = w0.value;
      const Tensor delta = only_matrix_merge(group.dense[l]);
      for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += delta[i];
      for (std::size_t s = 0; s < samples; ++s) {
        Tensor h({group.shape.k});
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = rng.uniform(-1.0, 1.0);
        worst = std::max(worst, max_abs_diff(denselora_forward(h, w0, group.dense[l]), matmul(merged, h)));
      }
    }
  }
  return worst;
}

TrainOutcome run_train(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  ensure_dir(out_dir);
  write_text(out_dir / "manifest.json", run_manifest(config).dump(2) + "\n");
  write_text(out_dir / "config.ini", config.to_ini());

  Model model = build_adapted_model(config);
  for (const auto& n : model.notices()) log << "notice: " << n << "\n";
  const Task task = Task::generate(config.task, config.train.seed);

  TrainOutcome outcome;
  outcome.trainable_count = static_cast<std::size_t>(count_model(model).enumerated_total);

  const fs::path metrics_path = out_dir / "metrics.jsonl";
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw InputError("cannot open " + metrics_path.string() + " for writing");
  const RecordSink sink = [&](const StepRecord& r) {
    metrics << r.to_json().dump() << "\n";
    if (r.accuracy) log << "step " << r.step << " loss " << r.loss << " accuracy " << *r.accuracy << "\n";
  };
  try {
    outcome.result = train(model, task, config.train, sink);
  } catch (const TrainingDiverged&) {
    metrics.flush();
    throw;
  }
  metrics.close();

  save_checkpoint(out_dir / "adapters_before.dlck", outcome.result.before);
  save_checkpoint(out_dir / "adapters_after.dlck", outcome.result.after);
  save_model(out_dir / "model.dlmd", model, config.adapter.attachments());

  const bool only_matrix = std::any_of(model.adapters().begin(), model.adapters().end(),
                                       [](const auto& kv) { return kv.second.variant == AdapterVariant::OnlyMatrix; });
  if (only_matrix) outcome.merge_error = only_matrix_merge_error(model, 100, config.train.seed);
  return outcome;
}

GradCheckResult run_grad_check(const GradCheckRequest& request) {
  ModelConfig mc;
  mc.n_layers = request.n_layers;
  mc.d_model = request.d_model;
  mc.n_heads = request.n_heads;
  mc.d_ff = request.d_ff;
  mc.vocab_size = request.vocab_size;
  mc.max_seq_len = request.seq_len;
  mc.seed = request.seed;
  mc.validate();

  Model model(mc);
  AdapterOptions opts;
  opts.rank = request.rank;
  opts.activation = request.activation;
  opts.dropout = 0.0;
  Rng rng(mix_seed(request.seed, "adapter"));
  model.attach(request.variant, request.targets, opts, rng);

  const std::vector<ParameterPtr> params = model.trainable_parameters();
  std::size_t total = model.base_parameter_count();
  for (const auto& p : model.adapter_parameters()) total += p->numel();
  if (total > kGradCheckParamLimit) {
    throw ConfigError("grad-check: model has " + std::to_string(total) + " parameters, limit is " +
                      std::to_string(kGradCheckParamLimit));
  }

  Rng perturb = Rng(request.seed).fork("perturb");
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p->numel(); ++i) p->value[i] += perturb.uniform(-request.perturbation, request.perturbation);
  }

  Rng data = Rng(request.seed).fork("tokens");
  std::vector<int> ids(request.batch * request.seq_len), targets(ids.size());
  for (auto& t : ids) t = static_cast<int>(data.below(request.vocab_size));
  for (auto& t : targets) t = static_cast<int>(data.below(request.vocab_size));

  const Objective objective = [&](Tape& tape) {
    ForwardContext ctx;
    return cross_entropy(model.forward(tape, ids, request.seq_len, ctx), targets);
  };
  FaultGuard fault(request.corrupt_derivative);
  GradCheckOptions gopts;
  gopts.seed = request.seed;
  return grad_check(objective, params, gopts);
}

DensityFiles write_density_outputs(std::span<const RunSnapshots> runs, const DensityOptions& options,
                                   const fs::path& out_dir) {
  DensityFiles files;
  files.report = density_report(runs, options);
  const DensityReport& r = files.report;
  ensure_dir(out_dir / "heatmaps");

  auto emit = [&](const fs::path& p, const std::string& text) {
    write_text(p, text);
    files.written.push_back(p);
  };
  emit(out_dir / "density_report.json", r.to_json().dump(2) + "\n");

  std::ostringstream matrices;
  matrices << std::setprecision(17) << "name,rows,cols,tau,rms_increment,active_fraction,slice_active_fraction\n";
  for (const auto& e : r.entries) {
    matrices << e.name() << ',' << e.shape.front() << ',' << (e.shape.size() > 1 ? e.shape[1] : 1) << ','
             << e.stats.tau << ',' << e.stats.rms << ',';
    if (e.degenerate) {
      matrices << ",\n";
    } else {
      matrices << e.stats.active_fraction << ',' << e.slice_active_fraction << '\n';
    }
    if (!e.degenerate) emit(out_dir / "heatmaps" / heatmap_name(e), to_csv(e.slice));
  }
  emit(out_dir / "density_matrices.csv", matrices.str());

  std::ostringstream comps;
  comps << std::setprecision(17) << "module,layer,m,a,b,ratio\n";
  for (const auto& c : r.comparisons) {
    comps << c.module << ',' << c.layer << ',' << c.m_fraction << ',' << c.a_fraction << ',' << c.b_fraction << ','
          << c.ratio << '\n';
  }
  emit(out_dir / "density_comparisons.csv", comps.str());
  return files;
}

SweepResult run_rank_sweep(const RunConfig& config, const std::vector<std::size_t>& ranks, std::ostream& log) {
  SweepResult result;
  const Model probe(config.model);
  std::size_t limit = SIZE_MAX;
  TargetSet all = config.adapter.targets;
  if (config.adapter.hybrid_variant) all = all.united(config.adapter.hybrid_targets);
  for (Site s : all.sites()) {
    const SiteShape sh = probe.site_shape(s);
    limit = std::min({limit, sh.k, sh.d});
  }
  for (std::size_t rank : ranks) {
    if (rank == 0 || rank >= limit) {
      log << "notice: rank " << rank << " skipped, must be in [1, " << limit << ")\n";
      result.skipped.push_back(rank);
      continue;
    }
    RunConfig c = config;
    c.adapter.options.rank = rank;
    Model model = build_adapted_model(c);
    const ModelCountReport counts = count_model(model);
    const Task task = Task::generate(c.task, c.train.seed);
    const TrainResult tr = train(model, task, c.train);
    const double acc = tr.history.final_accuracy() ? *tr.history.final_accuracy() : evaluate(model, task.eval);
    result.rows.push_back({rank, counts.enumerated_total, counts.formula_total, acc});
    log << "rank " << rank << " done, accuracy " << acc << "\n";
  }
  return result;
}

namespace {

struct CountFlags {
  std::string preset;
  std::int64_t layers = 0, d = 0, k = 0, rank = 0;
  std::string modules;
  std::string method = "all";
  std::optional<std::int64_t> base_total;
  bool json = false;
};

std::vector<ModuleDims> parse_modules(const std::string& text) {
  std::vector<ModuleDims> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    ModuleDims m;
    std::stringstream is(item);
    std::string k, d;
    if (!std::getline(is, m.name, ':') || !std::getline(is, k, ':') || !std::getline(is, d)) {
      throw CLI::ValidationError("--modules", "expected name:k:d entries, got '" + item + "'");
    }
    try {
      m.k = std::stoll(k);
      m.d = std::stoll(d);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--modules", "non-integer width in '" + item + "'");
    }
    if (m.k <= 0 || m.d <= 0) throw CLI::ValidationError("--modules", "widths must be positive in '" + item + "'");
    out.push_back(m);
  }
  if (out.empty()) throw CLI::ValidationError("--modules", "empty module list");
  return out;
}

int cmd_count_params(const CountFlags& f, std::ostream& out) {
  std::int64_t layers = f.layers;
  std::vector<ModuleDims> modules;
  std::optional<std::int64_t> base = f.base_total;
  if (!f.preset.empty()) {
    auto preset = find_preset(f.preset);
    if (!preset) throw CLI::ValidationError("--preset", "unknown preset '" + f.preset + "'");
    layers = preset->layers;
    modules = preset->modules;
    if (!base) base = preset->base_total;
  } else if (!f.modules.empty()) {
    modules = parse_modules(f.modules);
  } else {
    if (f.d <= 0 || f.k <= 0) throw CLI::ValidationError("count-params", "give --preset, --modules, or --d and --k");
    modules.push_back({"W", f.k, f.d});
  }
  if (layers <= 0) throw CLI::ValidationError("--layers", "must be positive");

  const ParamCountReport report = count_params(layers, modules, f.rank, base);
  if (f.json) {
    out << report.to_json().dump(2) << "\n";
    return kExitOk;
  }
  const bool all = f.method == "all";
  out << "layers " << layers << " rank " << f.rank << "\n";
  out << "module k d full_ft lora denselora\n";
  for (std::size_t i = 0; i < modules.size(); ++i) {
    const auto& row = report.rows[i];
    out << row.module << ' ' << modules[i].k << ' ' << modules[i].d << ' ' << row.full_ft << ' ' << row.lora << ' '
        << row.denselora << "\n";
  }
  auto total = [&](const char* name, std::int64_t v) {
    out << name << ' ' << v;
    if (auto p = report.percent(v)) out << " (" << std::setprecision(4) << std::fixed << *p << "% of base)";
    out.unsetf(std::ios::floatfield);
    out << "\n";
  };
  if (all || f.method == "full") total("full_ft", report.full_ft);
  if (all || f.method == "lora") total("lora", report.lora);
  if (all || f.method == "denselora") total("denselora", report.denselora);
  if (all) out << "ratio lora/denselora " << std::setprecision(4) << report.lora_to_denselora_ratio() << "\n";
  if (base) out << "base_total " << *base << "\n";
  return kExitOk;
}

void add_override_flags(CLI::App* cmd, std::string* config_path, std::vector<std::string>* sets,
                        std::map<std::string, std::string>* shortcuts) {
  cmd->add_option("--config", *config_path, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--set", *sets, "Override as section.key=value (repeatable)");
  const std::pair<const char*, const char*> keys[] = {
      {"--variant", "adapter.variant"},     {"--targets", "adapter.targets"},
      {"--rank", "adapter.rank"},           {"--alpha", "adapter.alpha"},
      {"--activation", "adapter.activation"}, {"--dropout", "adapter.dropout"},
      {"--hybrid-variant", "adapter.hybrid_variant"}, {"--hybrid-targets", "adapter.hybrid_targets"},
      {"--lr", "train.learning_rate"},      {"--epochs", "train.epochs"},
      {"--warmup", "train.warmup_steps"},   {"--batch-size", "train.batch_size"},
      {"--seed", "train.seed"},             {"--task", "task.name"},
  };
  for (const auto& [flag, key] : keys) {
    cmd->add_option_function<std::string>(flag, [shortcuts, k = std::string(key)](const std::string& v) {
      (*shortcuts)[k] = v;
    }, std::string("Override ") + key);
  }
}

ConfigOverrides collect_overrides(const std::vector<std::string>& sets, const std::map<std::string, std::string>& shortcuts) {
  ConfigOverrides o;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected section.key=value, got '" + s + "'");
    o[s.substr(0, eq)] = s.substr(eq + 1);
  }
  for (const auto& [k, v] : shortcuts) o[k] = v;
  return o;
}

RunConfig resolve_config(const std::string& config_path, const std::string& manifest_path, const ConfigOverrides& o) {
  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) throw InputError("cannot open " + manifest_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("manifest: ") + e.what());
    }
    return apply_overrides(RunConfig::from_json(j.contains("config") ? j.at("config") : j), o);
  }
  if (!config_path.empty()) return load_run_config(config_path, o);
  return parse_run_config("", o);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DenseLoRA desk: adapters on a toy transformer", "denselora"};
  app.require_subcommand(1);

  CountFlags cf;
  auto* count = app.add_subcommand("count-params", "Closed-form trainable parameter counts");
  count->add_option("--preset", cf.preset, "Dimension preset (llama2-7b)");
  count->add_option("--layers", cf.layers, "Number of layers")->check(CLI::PositiveNumber);
  count->add_option("--d", cf.d, "Output width of a single module")->check(CLI::PositiveNumber);
  count->add_option("--k", cf.k, "Input width of a single module")->check(CLI::PositiveNumber);
  count->add_option("--modules", cf.modules, "Module list name:k:d,...");
  count->add_option("--rank", cf.rank, "Adapter rank")->required()->check(CLI::PositiveNumber);
  count->add_option("--method", cf.method, "all, full, lora or denselora")
      ->check(CLI::IsMember({"all", "full", "lora", "denselora"}));
  count->add_option("--base-total", cf.base_total, "Base model parameter total for percentages")
      ->check(CLI::PositiveNumber);
  count->add_flag("--json", cf.json, "Emit JSON");

  std::string train_config, train_manifest, train_out;
  std::vector<std::string> train_sets;
  std::map<std::string, std::string> train_short;
  auto* trainc = app.add_subcommand("train", "Attach adapters, train on a synthetic task, write checkpoints");
  add_override_flags(trainc, &train_config, &train_sets, &train_short);
  trainc->add_option("--manifest", train_manifest, "Reproduce a previous run from its manifest.json")
      ->check(CLI::ExistingFile);
  trainc->add_option("--out", train_out, std::string("Output directory (default $") + kOutDirEnv + " or denselora-out)");

  GradCheckRequest gr;
  std::string gr_variant = "denselora", gr_activation = "tanh", gr_targets = "QKVOGUD";
  auto* gc = app.add_subcommand("grad-check", "Central-difference gradient check on a tiny model");
  gc->add_option("--layers", gr.n_layers)->check(CLI::PositiveNumber);
  gc->add_option("--d-model", gr.d_model)->check(CLI::PositiveNumber);
  gc->add_option("--heads", gr.n_heads)->check(CLI::PositiveNumber);
  gc->add_option("--d-ff", gr.d_ff)->check(CLI::PositiveNumber);
  gc->add_option("--vocab", gr.vocab_size)->check(CLI::PositiveNumber);
  gc->add_option("--seq", gr.seq_len)->check(CLI::PositiveNumber);
  gc->add_option("--rank", gr.rank)->check(CLI::PositiveNumber);
  gc->add_option("--variant", gr_variant);
  gc->add_option("--activation", gr_activation);
  gc->add_option("--targets", gr_targets);
  gc->add_option("--seed", gr.seed);
  gc->add_option("--corrupt-derivative", gr.corrupt_derivative, "Test hook: relative error injected into activation derivatives");

  std::string d_before, d_after, d_base_before, d_base_after, d_out, d_mode = "pooled";
  DensityOptions dopts;
  auto* dens = app.add_subcommand("density", "Increment density of adapter matrices between two checkpoints");
  dens->add_option("--before", d_before)->required()->check(CLI::ExistingFile);
  dens->add_option("--after", d_after)->required()->check(CLI::ExistingFile);
  dens->add_option("--baseline-before", d_base_before, "Matched baseline run (e.g. LoRA) before")->check(CLI::ExistingFile);
  dens->add_option("--baseline-after", d_base_after)->check(CLI::ExistingFile);
  dens->add_option("--out", d_out);
  dens->add_option("--tau-mode", d_mode)->check(CLI::IsMember({"pooled", "per-matrix"}));
  dens->add_option("--tau-factor", dopts.tau_factor)->check(CLI::PositiveNumber);
  dens->add_option("--slice-seed", dopts.slice_seed);

  std::string s_config, s_out;
  std::vector<std::string> s_sets;
  std::map<std::string, std::string> s_short;
  std::vector<std::size_t> s_ranks;
  auto* sweep = app.add_subcommand("sweep-rank", "Train and evaluate over a list of ranks");
  add_override_flags(sweep, &s_config, &s_sets, &s_short);
  sweep->add_option("--ranks", s_ranks, "Comma-separated ranks")->required()->delimiter(',');
  sweep->add_option("--out", s_out, "Also write sweep.csv here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (*count) return cmd_count_params(cf, out);

    if (*trainc) {
      const RunConfig config = resolve_config(train_config, train_manifest, collect_overrides(train_sets, train_short));
      const fs::path dir = train_out.empty() ? default_out_dir() : fs::path(train_out);
      const TrainOutcome o = run_train(config, dir, err);
      const auto acc = o.result.history.final_accuracy();
      out << "steps " << o.result.history.steps.size() << "\n";
      out << "trainable " << o.trainable_count << "\n";
      if (!o.result.history.steps.empty()) out << "final_loss " << o.result.history.steps.back().loss << "\n";
      if (acc) out << "final_accuracy " << *acc << "\n";
      out << "output " << dir.string() << "\n";
      if (o.merge_error) {
        out << "merge_check max_abs_diff " << *o.merge_error << "\n";
        if (!(*o.merge_error <= 1e-12)) {
          err << "error: only-matrix merged-linear check failed\n";
          return kExitNumeric;
        }
      }
      return kExitOk;
    }

    if (*gc) {
      auto v = parse_variant(gr_variant);
      if (!v) throw CLI::ValidationError("--variant", "unknown variant '" + gr_variant + "'");
      auto a = parse_activation(gr_activation);
      if (!a) throw CLI::ValidationError("--activation", "unknown activation '" + gr_activation + "'");
      gr.variant = *v;
      gr.activation = *a;
      gr.targets = TargetSet::parse(gr_targets);
      const GradCheckResult r = run_grad_check(gr);
      const bool pass = r.max_relative_error <= kGradCheckTolerance;
      out << "max_relative_error " << std::setprecision(6) << r.max_relative_error << "\n"
          << "worst " << r.worst_parameter << "[" << r.worst_index << "] analytic " << r.worst_analytic << " numeric "
          << r.worst_numeric << "\n"
          << "coordinates " << r.coordinates_checked << "\n"
          << (pass ? "PASS" : "FAIL") << "\n";
      return pass ? kExitOk : kExitNumeric;
    }

    if (*dens) {
      if (d_base_before.empty() != d_base_after.empty()) {
        throw CLI::ValidationError("density", "--baseline-before and --baseline-after go together");
      }
      dopts.tau_mode = *parse_tau_mode(d_mode);
      const AdapterCheckpoint before = load_checkpoint(d_before), after = load_checkpoint(d_after);
      std::vector<RunSnapshots> runs{{"run", &before, &after}};
      AdapterCheckpoint bb, ba;
      if (!d_base_before.empty()) {
        bb = load_checkpoint(d_base_before);
        ba = load_checkpoint(d_base_after);
        runs.push_back({"baseline", &bb, &ba});
      }
      const fs::path dir = d_out.empty() ? default_out_dir() / "density" : fs::path(d_out);
      const DensityFiles files = write_density_outputs(runs, dopts, dir);
      const DensityReport& r = files.report;
      out << "tau_mode " << to_string(dopts.tau_mode) << " tau_factor " << dopts.tau_factor << " pooled_rms "
          << r.pooled_rms << "\n";
      for (const auto& e : r.entries) {
        out << e.name() << " active_fraction ";
        if (e.degenerate) {
          out << "degenerate\n";
        } else {
          out << e.stats.active_fraction << " rms " << e.stats.rms << "\n";
        }
      }
      if (r.ratio) {
        out << "summary M " << *r.m_fraction << " A " << *r.a_fraction << " B " << *r.b_fraction << "\n";
        out << "ratio M/max(A,B) " << *r.ratio << "\n";
      }
      out << "output " << dir.string() << "\n";
      if (r.degenerate) {
        err << "error: degenerate comparison, increments are all zero\n";
        return kExitNumeric;
      }
      return kExitOk;
    }

    if (*sweep) {
      const RunConfig config = resolve_config(s_config, "", collect_overrides(s_sets, s_short));
      const SweepResult r = run_rank_sweep(config, s_ranks, err);
      std::ostringstream table;
      table << "rank,trainable,formula,accuracy\n";
      for (const auto& row : r.rows) {
        table << row.rank << ',' << row.trainable << ',' << row.formula << ',' << std::setprecision(6) << row.accuracy
              << '\n';
      }
      out << table.str();
      if (!s_out.empty()) {
        ensure_dir(s_out);
        write_text(fs::path(s_out) / "sweep.csv", table.str());
      }
      return kExitOk;
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const InputError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace denselora

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

#include "denselora/cli/config.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "denselora/kernels/kernels.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

namespace denselora {

namespace {

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string* raw(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  template <typename T>
    requires std::is_unsigned_v<T>
  void read(const std::string& key, T& out) {
    if (auto* v = raw(key)) out = static_cast<T>(parse_u64(key, *v));
  }
  void read(const std::string& key, double& out) {
    if (auto* v = raw(key)) out = parse_double(key, *v);
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  static std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + text + "'");
    }
    return v;
  }

  static double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v)) {
      throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return v;
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

AdapterVariant variant_or_throw(const std::string& name) {
  auto v = parse_variant(name);
  if (!v) throw ConfigError("config: unknown adapter variant '" + name + "'");
  return *v;
}

TargetSet targets_or_throw(const std::string& text) {
  try {
    return TargetSet::parse(text);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig from_values(std::map<std::string, std::string> values) {
  RunConfig c;
  KeyReader r(std::move(values));

  r.read("model.n_layers", c.model.n_layers);
  r.read("model.d_model", c.model.d_model);
  r.read("model.n_heads", c.model.n_heads);
  r.read("model.d_ff", c.model.d_ff);
  r.read("model.vocab_size", c.model.vocab_size);
  r.read("model.max_seq_len", c.model.max_seq_len);
  r.read("model.seed", c.model.seed);

  r.read("train.learning_rate", c.train.learning_rate);
  r.read("train.warmup_steps", c.train.warmup_steps);
  r.read("train.batch_size", c.train.batch_size);
  r.read("train.epochs", c.train.epochs);
  r.read("train.seed", c.train.seed);
  r.read("train.beta1", c.train.beta1);
  r.read("train.beta2", c.train.beta2);
  r.read("train.eps", c.train.eps);
  r.read("train.weight_decay", c.train.weight_decay);
  r.read("train.eval_every", c.train.eval_every);

  if (auto* v = r.raw("task.name")) {
    auto kind = parse_task(*v);
    if (!kind) throw ConfigError("config: unknown task '" + *v + "'");
    c.task.kind = *kind;
  }
  r.read("task.vocab_size", c.task.vocab_size);
  r.read("task.seq_len", c.task.seq_len);
  r.read("task.train_size", c.task.train_size);
  r.read("task.eval_size", c.task.eval_size);

  if (auto* v = r.raw("adapter.variant")) c.adapter.variant = variant_or_throw(*v);
  if (auto* v = r.raw("adapter.targets")) c.adapter.targets = targets_or_throw(*v);
  r.read("adapter.rank", c.adapter.options.rank);
  if (auto* v = r.raw("adapter.alpha")) {
    if (*v == "auto" || v->empty()) {
      c.adapter.options.alpha.reset();
    } else {
      c.adapter.options.alpha = KeyReader::parse_double("adapter.alpha", *v);
    }
  }
  r.read("adapter.dropout", c.adapter.options.dropout);
  if (auto* v = r.raw("adapter.activation")) {
    auto a = parse_activation(*v);
    if (!a) throw ConfigError("config: unknown activation '" + *v + "'");
    c.adapter.options.activation = *a;
  }
  r.read("adapter.seed", c.adapter.seed);
  if (auto* v = r.raw("adapter.hybrid_variant")) {
    if (*v == "none" || v->empty()) {
      c.adapter.hybrid_variant.reset();
    } else {
      c.adapter.hybrid_variant = variant_or_throw(*v);
    }
  }
  if (auto* v = r.raw("adapter.hybrid_targets")) c.adapter.hybrid_targets = targets_or_throw(*v);
  r.finish();
  return c;
}

std::map<std::string, std::string> flatten(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::map<std::string, std::string> values;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside of a section");
    for (const auto& [key, value] : body) values[section + "." + key] = trim(value.data());
  }
  return values;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace

std::vector<Attachment> AdapterSpec::attachments() const {
  std::vector<Attachment> out{{variant, targets, options}};
  if (hybrid_variant) out.push_back({*hybrid_variant, hybrid_targets, options});
  return out;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  task.validate();
  adapter.options.validate();
  if (adapter.targets.empty()) throw ConfigError("config: adapter targets are empty");
  if (adapter.hybrid_variant) {
    if (adapter.hybrid_targets.empty()) throw ConfigError("config: hybrid_variant set without hybrid_targets");
    if (adapter.hybrid_targets.intersects(adapter.targets)) {
      throw ConfigError("config: hybrid_targets overlap targets");
    }
  } else if (!adapter.hybrid_targets.empty()) {
    throw ConfigError("config: hybrid_targets set without hybrid_variant");
  }
  if (task.vocab_size > model.vocab_size) {
    throw ConfigError("config: task vocab " + std::to_string(task.vocab_size) + " exceeds model vocab " +
                      std::to_string(model.vocab_size));
  }
  if (task.seq_len - 1 > model.max_seq_len) {
    throw ConfigError("config: task sequence length exceeds model max_seq_len");
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json a = {{"variant", to_string(adapter.variant)},
                      {"targets", adapter.targets.to_string()},
                      {"rank", adapter.options.rank},
                      {"alpha", adapter.options.alpha ? nlohmann::json(*adapter.options.alpha) : nlohmann::json(nullptr)},
                      {"dropout", adapter.options.dropout},
                      {"activation", to_string(adapter.options.activation)},
                      {"seed", adapter.seed},
                      {"hybrid_variant", adapter.hybrid_variant ? nlohmann::json(to_string(*adapter.hybrid_variant))
                                                                : nlohmann::json(nullptr)},
                      {"hybrid_targets", adapter.hybrid_targets.to_string()}};
  return {{"model", model.to_json()}, {"train", train.to_json()}, {"task", task.to_json()}, {"adapter", a}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.model = ModelConfig::from_json(j.at("model"));
    c.train = TrainConfig::from_json(j.at("train"));
    c.task = TaskSpec::from_json(j.at("task"));
    const auto& a = j.at("adapter");
    c.adapter.variant = variant_or_throw(a.at("variant").get<std::string>());
    c.adapter.targets = targets_or_throw(a.at("targets").get<std::string>());
    c.adapter.options.rank = a.at("rank").get<std::size_t>();
    if (!a.at("alpha").is_null()) c.adapter.options.alpha = a.at("alpha").get<double>();
    c.adapter.options.dropout = a.at("dropout").get<double>();
    auto act = parse_activation(a.at("activation").get<std::string>());
    if (!act) throw ConfigError("config: unknown activation in manifest");
    c.adapter.options.activation = *act;
    c.adapter.seed = a.at("seed").get<std::uint64_t>();
    if (!a.at("hybrid_variant").is_null()) {
      c.adapter.hybrid_variant = variant_or_throw(a.at("hybrid_variant").get<std::string>());
    }
    c.adapter.hybrid_targets = targets_or_throw(a.at("hybrid_targets").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: malformed manifest: ") + e.what());
  }
}

std::string RunConfig::to_ini() const {
  std::ostringstream s;
  s << "[model]\n"
    << "n_layers = " << model.n_layers << "\nd_model = " << model.d_model << "\nn_heads = " << model.n_heads
    << "\nd_ff = " << model.d_ff << "\nvocab_size = " << model.vocab_size << "\nmax_seq_len = " << model.max_seq_len
    << "\nseed = " << model.seed << "\n\n[train]\n"
    << "learning_rate = " << format_double(train.learning_rate) << "\nwarmup_steps = " << train.warmup_steps
    << "\nbatch_size = " << train.batch_size << "\nepochs = " << train.epochs << "\nseed = " << train.seed
    << "\nbeta1 = " << format_double(train.beta1) << "\nbeta2 = " << format_double(train.beta2)
    << "\neps = " << format_double(train.eps) << "\nweight_decay = " << format_double(train.weight_decay)
    << "\neval_every = " << train.eval_every << "\n\n[task]\n"
    << "name = " << to_string(task.kind) << "\nvocab_size = " << task.vocab_size << "\nseq_len = " << task.seq_len
    << "\ntrain_size = " << task.train_size << "\neval_size = " << task.eval_size << "\n\n[adapter]\n"
    << "variant = " << to_string(adapter.variant) << "\ntargets = " << adapter.targets.to_string()
    << "\nrank = " << adapter.options.rank
    << "\nalpha = " << (adapter.options.alpha ? format_double(*adapter.options.alpha) : std::string("auto"))
    << "\ndropout = " << format_double(adapter.options.dropout)
    << "\nactivation = " << to_string(adapter.options.activation) << "\nseed = " << adapter.seed
    << "\nhybrid_variant = " << (adapter.hybrid_variant ? std::string(to_string(*adapter.hybrid_variant)) : "none")
    << "\nhybrid_targets = " << adapter.hybrid_targets.to_string() << "\n";
  return s.str();
}

RunConfig parse_run_config(const std::string& ini_text, const ConfigOverrides& overrides) {
  auto values = flatten(ini_text);
  for (const auto& [k, v] : overrides) values[k] = trim(v);
  RunConfig c = from_values(std::move(values));
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), overrides);
}

RunConfig apply_overrides(const RunConfig& base, const ConfigOverrides& overrides) {
  return parse_run_config(base.to_ini(), overrides);
}

Model build_adapted_model(const RunConfig& config) {
  config.validate();
  Model model(config.model);
  Rng rng(mix_seed(config.adapter.seed, "adapter"));
  for (const auto& a : config.adapter.attachments()) model.attach(a.variant, a.targets, a.options, rng);
  return model;
}

nlohmann::json run_manifest(const RunConfig& config) {
  return {{"format", "denselora-run"},
          {"artifact_version", kArtifactVersion},
          {"created_utc", utc_timestamp()},
          {"simd_level", kernels::to_string(kernels::active().level)},
          {"seeds",
           {{"model", config.model.seed},
            {"train", config.train.seed},
            {"task", config.train.seed},
            {"adapter", config.adapter.seed}}},
          {"config", config.to_json()}};
}

}  // namespace denselora

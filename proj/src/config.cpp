/*
 * Copyright 2026 The chromaskew Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chromaskew/config.hpp"

#include <fstream>
#include <set>
#include <vector>

namespace chromaskew {
namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (!doc.is_object()) throw ConfigError(name_ + ": expected an object");
    doc_ = &doc;
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = doc_->find(key);
    if (it == doc_->end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name_ + "." + key + ": wrong type");
    }
  }

  template <typename Fn>
  void get_with(const char* key, Fn&& parse) {
    seen_.insert(key);
    auto it = doc_->find(key);
    if (it == doc_->end()) return;
    try {
      parse(*it);
    } catch (const json::exception&) {
      throw ConfigError(name_ + "." + key + ": wrong type");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = doc_->find(key);
    return it == doc_->end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : doc_->items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key '" + name_ + "." + k + "'");
    }
  }

 private:
  const json* doc_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

void read_grid(const json& doc, const std::string& name, attack::GridSpec& g) {
  Section s(doc, name);
  s.get("hue", g.hue);
  s.get("scale", g.scale);
  s.get("scale_per_channel", g.scale_per_channel);
  s.get("scale_all_channels", g.scale_all_channels);
  s.get("gamma", g.gamma);
  s.get("beta", g.beta);
  s.get_with("operators", [&](const json& v) {
    g.use_hue = g.use_rescale = g.use_jitter = false;
    for (const auto& op : v.get<std::vector<std::string>>()) {
      switch (color::parse_operator(op)) {
        case color::Operator::kHue: g.use_hue = true; break;
        case color::Operator::kRescale: g.use_rescale = true; break;
        case color::Operator::kJitter: g.use_jitter = true; break;
      }
    }
  });
  s.get("pairwise", g.pairwise);
  s.get_with("order", [&](const json& v) {
    const auto names = v.get<std::vector<std::string>>();
    if (names.size() != 3) throw std::invalid_argument("order lists all three operators");
    for (std::size_t i = 0; i < 3; ++i) g.order[i] = color::parse_operator(names[i]);
  });
  s.get("max_candidates", g.max_candidates);
  s.finish();
}

json grid_json(const attack::GridSpec& g) {
  std::vector<std::string> ops;
  if (g.use_hue) ops.push_back("hue");
  if (g.use_rescale) ops.push_back("rescale");
  if (g.use_jitter) ops.push_back("jitter");
  std::vector<std::string> order;
  for (auto op : g.order) order.push_back(color::to_string(op));
  return json{{"hue", g.hue},
              {"scale", g.scale},
              {"scale_per_channel", g.scale_per_channel},
              {"scale_all_channels", g.scale_all_channels},
              {"gamma", g.gamma},
              {"beta", g.beta},
              {"operators", ops},
              {"pairwise", g.pairwise},
              {"order", order},
              {"max_candidates", g.max_candidates}};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "config");
  if (const json* d = root.child("dataset")) {
    Section s(*d, "dataset");
    s.get("source", c.dataset.source);
    s.get_with("path", [&](const json& v) { c.dataset.path = v.get<std::string>(); });
    s.get("train", c.dataset.train);
    s.get("test", c.dataset.test);
    s.get("classes", c.dataset.classes);
    s.get("size", c.dataset.size);
    s.get_with("partition", [&](const json& v) {
      c.dataset.partition = data::parse_partition_mode(v.get<std::string>());
    });
    s.finish();
  }
  if (const json* d = root.child("model")) {
    Section s(*d, "model");
    s.get_with("architecture", [&](const json& v) {
      c.model.architecture = parse_architecture(v.get<std::string>());
    });
    s.get_with("transfer_architecture", [&](const json& v) {
      c.model.transfer_architecture = parse_architecture(v.get<std::string>());
    });
    s.get("epochs", c.model.epochs);
    s.get("learning_rate", c.model.learning_rate);
    s.get("batch", c.model.batch);
    s.get("capture_layer", c.model.capture_layer);
    s.get_with("weights", [&](const json& v) { c.model.weights = v.get<std::string>(); });
    s.finish();
  }
  if (const json* d = root.child("fl")) {
    Section s(*d, "fl");
    auto& f = c.fl.fl;
    s.get("clients", f.clients);
    s.get("selected", f.selected);
    s.get("local_epochs", f.local_epochs);
    s.get("learning_rate", f.learning_rate);
    s.get("batch", f.batch);
    s.get("rounds", f.rounds);
    s.get("adversarial_ratio", f.adversarial_ratio);
    s.get_with("aggregator", [&](const json& v) {
      f.aggregator = fl::parse_aggregator(v.get<std::string>());
    });
    s.get("trim_k", f.trim_k);
    s.get("pretrain_epochs", c.fl.pretrain_epochs);
    s.get("root_size", c.fl.root_size);
    if (const json* g = s.child("grid")) read_grid(*g, "fl.grid", f.grid);
    s.finish();
  }
  if (const json* d = root.child("attack")) {
    Section s(*d, "attack");
    s.get("samples", c.attack.samples);
    if (const json* g = s.child("grid")) read_grid(*g, "attack.grid", c.attack.grid);
    s.finish();
  }
  if (const json* d = root.child("metrics")) {
    Section s(*d, "metrics");
    s.get("tau", c.metrics.fl.tau);
    s.get("k_fraction", c.metrics.fl.k_fraction);
    s.get("probe", c.metrics.fl.probe);
    s.get("ig_steps", c.metrics.ig_steps);
    s.get("heatmaps", c.metrics.heatmaps);
    s.get("skew_samples", c.metrics.skew_samples);
    s.finish();
  }
  if (const json* d = root.child("seeds")) {
    Section s(*d, "seeds");
    s.get("run", c.seed);
    s.finish();
  }
  if (const json* d = root.child("output")) {
    Section s(*d, "output");
    s.get_with("dir", [&](const json& v) { c.output = v.get<std::string>(); });
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  const auto& f = fl.fl;
  return json{
      {"dataset",
       {{"source", dataset.source},
        {"path", dataset.path.string()},
        {"train", dataset.train},
        {"test", dataset.test},
        {"classes", dataset.classes},
        {"size", dataset.size},
        {"partition", data::to_string(dataset.partition)}}},
      {"model",
       {{"architecture", to_string(model.architecture)},
        {"transfer_architecture", to_string(model.transfer_architecture)},
        {"epochs", model.epochs},
        {"learning_rate", model.learning_rate},
        {"batch", model.batch},
        {"capture_layer", model.capture_layer},
        {"weights", model.weights.string()}}},
      {"fl",
       {{"clients", f.clients},
        {"selected", f.selected},
        {"local_epochs", f.local_epochs},
        {"learning_rate", f.learning_rate},
        {"batch", f.batch},
        {"rounds", f.rounds},
        {"adversarial_ratio", f.adversarial_ratio},
        {"aggregator", fl::to_string(f.aggregator)},
        {"trim_k", f.trim_k},
        {"pretrain_epochs", fl.pretrain_epochs},
        {"root_size", fl.root_size},
        {"grid", grid_json(f.grid)}}},
      {"attack", {{"samples", attack.samples}, {"grid", grid_json(attack.grid)}}},
      {"metrics",
       {{"tau", metrics.fl.tau},
        {"k_fraction", metrics.fl.k_fraction},
        {"probe", metrics.fl.probe},
        {"ig_steps", metrics.ig_steps},
        {"heatmaps", metrics.heatmaps},
        {"skew_samples", metrics.skew_samples}}},
      {"seeds", {{"run", seed}}},
      {"output", {{"dir", output.string()}}}};
}

void ExperimentConfig::validate() const {
  try {
    if (dataset.source != "shapes" && dataset.source != "cifar10") {
      throw std::invalid_argument("dataset.source must be shapes or cifar10");
    }
    if (dataset.train == 0 || dataset.test == 0) {
      throw std::invalid_argument("dataset.train and dataset.test must be >= 1");
    }
    if (dataset.source == "shapes") {
      if (dataset.classes < 2 || dataset.classes > data::kShapeCount) {
        throw std::invalid_argument("dataset.classes must lie in [2,10] for shapes");
      }
      if (dataset.size < 16 || dataset.size % 4 != 0) {
        throw std::invalid_argument("dataset.size must be a multiple of 4 and >= 16");
      }
    }
    if (model.batch == 0) throw std::invalid_argument("model.batch must be >= 1");
    if (!(model.learning_rate > 0.0f)) {
      throw std::invalid_argument("model.learning_rate must be > 0");
    }
    fl.fl.validate();
    if (fl.root_size == 0) throw std::invalid_argument("fl.root_size must be >= 1");
    attack.grid.candidates();
    fl.fl.grid.candidates();
    if (attack.samples == 0) throw std::invalid_argument("attack.samples must be >= 1");
    if (!(metrics.fl.tau > 0.0 && metrics.fl.tau < 1.0)) {
      throw std::invalid_argument("metrics.tau must lie in (0,1)");
    }
    if (!(metrics.fl.k_fraction > 0.0 && metrics.fl.k_fraction < 1.0)) {
      throw std::invalid_argument("metrics.k_fraction must lie in (0,1)");
    }
    if (metrics.fl.probe == 0) throw std::invalid_argument("metrics.probe must be >= 1");
    if (metrics.ig_steps == 0) throw std::invalid_argument("metrics.ig_steps must be >= 1");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace chromaskew

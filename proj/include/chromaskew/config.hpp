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

#ifndef CHROMASKEW_CONFIG_HPP_
#define CHROMASKEW_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "chromaskew/attack.hpp"
#include "chromaskew/data.hpp"
#include "chromaskew/federated.hpp"
#include "chromaskew/model.hpp"

namespace chromaskew {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  // "shapes" or "cifar10".
  std::string source = "shapes";
  std::filesystem::path path = "data/cifar-10-batches-bin";
  std::size_t train = 1000;
  std::size_t test = 200;
  int classes = 10;
  Index size = 32;
  data::PartitionMode partition = data::PartitionMode::kIid;
};

struct ModelConfig {
  Architecture architecture = Architecture::kA;
  // Second model for the transfer command.
  Architecture transfer_architecture = Architecture::kB;
  unsigned epochs = 5;
  float learning_rate = 0.05f;
  unsigned batch = 32;
  std::string capture_layer;
  // Optional pretrained weights for the primary architecture.
  std::filesystem::path weights;
};

struct FlSection {
  fl::FlConfig fl;
  // Central epochs on the clean training set that produce w_0.
  unsigned pretrain_epochs = 3;
  std::size_t root_size = 32;
};

struct AttackSection {
  attack::GridSpec grid;
  // Test images attacked by baseline/ablation/compare/transfer.
  std::size_t samples = 100;
};

struct MetricsSection {
  fl::MetricsConfig fl;
  unsigned ig_steps = 32;
  // Heatmap pairs written per command (0 disables).
  std::size_t heatmaps = 4;
  // Images used for the random-skew flip count.
  std::size_t skew_samples = 200;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  ModelConfig model;
  FlSection fl;
  AttackSection attack;
  MetricsSection metrics;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";

  // Throws ConfigError on unknown keys, wrong types or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

}  // namespace chromaskew

#endif  // CHROMASKEW_CONFIG_HPP_

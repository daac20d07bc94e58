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

#ifndef CHROMASKEW_HARNESS_HPP_
#define CHROMASKEW_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromaskew/attack.hpp"
#include "chromaskew/config.hpp"
#include "chromaskew/federated.hpp"
#include "chromaskew/model.hpp"

namespace chromaskew::harness {

// A metric came out NaN or infinite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Experiment {
  ExperimentConfig config;
  LabeledDataset train;
  LabeledDataset test;
};

// Generates or loads the train/test data (data::DataError on I/O problems).
Experiment load_experiment(const ExperimentConfig& config);

// Trains (or loads, for the primary architecture when model.weights is set)
// a model on the clean training set.
Model train_model(const Experiment& ex, Architecture arch);

// The first attack.samples test images.
LabeledDataset attack_set(const Experiment& ex);

struct BaselineRow {
  std::size_t id = 0;
  int label = 0;
  attack::AttackOutcome outcome;
  bool preserved = true;
};

struct BaselineReport {
  double clean_accuracy = 0.0;
  // Prediction preserved on the perturbed sample, in percent.
  double attack_accuracy = 100.0;
  attack::PoisonSummary summary;
  std::vector<BaselineRow> rows;
};

BaselineReport run_baseline(const Experiment& ex, const Model& model,
                            const LabeledDataset& samples, const attack::GridSpec& grid);

struct AblationRow {
  std::string op;
  std::size_t candidates = 0;
  double mean_ssim = 1.0;
  double success = 0.0;
};

// hue, rescale, jitter and combined rows, in that order.
std::vector<AblationRow> run_ablation(const Model& model, const LabeledDataset& samples,
                                      const attack::GridSpec& grid);

struct CompareRow {
  std::string method;
  std::size_t samples = 0;
  double preservation = 100.0;
  double mean_ssim = 1.0;
  double mean_delta_e = 0.0;
  double skew_scale = 0.0;
};

struct CompareReport {
  // cpm, random_skew (full ranges), random_skew_matched (dE-matched).
  std::vector<CompareRow> rows;
  std::size_t skew_flips = 0;
  std::size_t cpm_flips = 0;
};

CompareReport run_compare(const Experiment& ex, const Model& model,
                          const LabeledDataset& samples, const LabeledDataset& flip_samples,
                          const attack::GridSpec& grid);

struct TransferRow {
  std::string setting;
  std::string source;
  std::string target;
  std::size_t samples = 0;
  double preservation = 100.0;
  double mean_ssim = 1.0;
};

std::vector<TransferRow> run_transfer(const Model& source, const Model& target,
                                      const LabeledDataset& samples,
                                      const attack::GridSpec& grid);

// Clean-trained initial model, client partitions, root and probe sets.
fl::FlSetup make_fl_setup(const Experiment& ex);

fl::Simulation run_fl(const Experiment& ex, const fl::FlSetup& setup, const fl::FlConfig& config,
                      const fl::RoundHook& hook = {});

struct RobustRow {
  std::string aggregator;
  fl::RoundMetrics final;
};

std::vector<RobustRow> run_robust(const Experiment& ex, const fl::FlSetup& setup,
                                  const fl::FlConfig& config);

// Full commands: run, then write CSVs (and heatmaps/weights) under `out`.
void cmd_baseline(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_fl(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_ablation(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_compare(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_transfer(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_robust(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_gen_data(const ExperimentConfig& config, const std::filesystem::path& out);
void cmd_inspect(const ExperimentConfig& config, const std::filesystem::path& out,
                 std::size_t sample, std::ostream& print);

// CSV output: a "# generated <UTC time>" line, the header, then rows.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
  std::size_t columns_;
};

// Shortest text that reads back to the same double.
std::string num(double v);
std::string num(std::size_t v);

// Reads a CSV written by CsvWriter: skips comment lines, returns the header
// and data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace chromaskew::harness

#endif  // CHROMASKEW_HARNESS_HPP_

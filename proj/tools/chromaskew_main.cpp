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

// chromaskew command-line entry point.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chromaskew/config.hpp"
#include "chromaskew/data.hpp"
#include "chromaskew/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void apply_thread_override() {
  const char* v = std::getenv("CHROMASKEW_THREADS");
  if (v == nullptr || *v == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    throw chromaskew::ConfigError("CHROMASKEW_THREADS must be a positive integer");
  }
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

}  // namespace

int main(int argc, char** argv) {
  using namespace chromaskew;
  CLI::App app{"Chromatic perturbation attacks on saliency explanations"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> limit;
  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Run seed (overrides seeds.run)");
  app.add_option("--out", out_dir, "Output directory (overrides CHROMASKEW_OUT and output.dir)");
  app.add_option("--limit", limit,
                 "Cap on evaluated samples (attack.samples, metrics.probe, metrics.skew_samples, "
                 "dataset sizes for gen-data)");

  std::size_t inspect_id = 0;
  auto* baseline = app.add_subcommand("baseline", "Single-client CPM attack on a clean model");
  auto* fl = app.add_subcommand("fl", "Federated run with adversarial clients and vanilla twin");
  auto* ablation = app.add_subcommand("ablation", "Single-operator grids vs the combined grid");
  auto* compare = app.add_subcommand("compare", "CPM vs random color skew");
  auto* transfer = app.add_subcommand("transfer", "Cross-architecture transfer of CPM samples");
  auto* robust = app.add_subcommand("robust", "FL run under each aggregation rule");
  auto* gen = app.add_subcommand("gen-data", "Dump the dataset as PPM images and a label CSV");
  auto* inspect = app.add_subcommand("inspect", "Print the heatmap pair of one test sample");
  inspect->add_option("--sample", inspect_id, "Test sample id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    apply_thread_override();
    ExperimentConfig config =
        config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (seed) config.seed = *seed;
    if (const char* env = std::getenv("CHROMASKEW_OUT"); env != nullptr && *env != '\0') {
      config.output = env;
    }
    if (!out_dir.empty()) config.output = out_dir;
    if (limit) {
      if (*limit == 0) throw ConfigError("--limit must be >= 1");
      config.attack.samples = std::min(config.attack.samples, *limit);
      config.metrics.fl.probe = std::min(config.metrics.fl.probe, *limit);
      config.metrics.skew_samples = std::min(config.metrics.skew_samples, *limit);
      if (gen->parsed()) {
        config.dataset.train = std::min(config.dataset.train, *limit);
        config.dataset.test = std::min(config.dataset.test, *limit);
      }
    }
    config.validate();
    const std::filesystem::path out = config.output;
    std::filesystem::create_directories(out);

    if (baseline->parsed()) harness::cmd_baseline(config, out);
    if (fl->parsed()) harness::cmd_fl(config, out);
    if (ablation->parsed()) harness::cmd_ablation(config, out);
    if (compare->parsed()) harness::cmd_compare(config, out);
    if (transfer->parsed()) harness::cmd_transfer(config, out);
    if (robust->parsed()) harness::cmd_robust(config, out);
    if (gen->parsed()) harness::cmd_gen_data(config, out);
    if (inspect->parsed()) harness::cmd_inspect(config, out, inspect_id, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const data::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const harness::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chromaskew/config.hpp"
#include "chromaskew/harness.hpp"

namespace chromaskew::harness {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("chromaskew_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTinyConfig = R"({
  "dataset": {"train": 60, "test": 20, "classes": 4, "size": 16},
  "model": {"epochs": 1},
  "fl": {"clients": 4, "selected": 2, "rounds": 2, "pretrain_epochs": 1, "root_size": 8,
         "grid": {"pairwise": false}},
  "attack": {"samples": 4, "grid": {"pairwise": false}},
  "metrics": {"probe": 4, "ig_steps": 4, "heatmaps": 1, "skew_samples": 10}
})";

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHROMASKEW_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string body(const fs::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("# generated ", 0), 0u) << csv;
  std::stringstream rest;
  rest << in.rdbuf();
  return rest.str();
}

TEST(CsvTest, NumbersRoundTrip) {
  EXPECT_EQ(num(0.1), "0.1");
  EXPECT_EQ(num(1.0), "1");
  EXPECT_EQ(num(std::size_t{42}), "42");
  for (double v : {1.0 / 3.0, 2.5e-17, -7.125, 123456.789}) {
    EXPECT_EQ(std::stod(num(v)), v);
  }
}

TEST(CsvTest, WriterAndReader) {
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row({"1", "x"});
    w.row({"2", "y"});
    EXPECT_THROW(w.row({"3"}), std::logic_error);
  }
  const auto t = read_csv(dir / "t.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][t.column("b")], "y");
  EXPECT_THROW(t.column("c"), std::out_of_range);
  fs::remove_all(dir);
}

TEST(ConfigTest, ParsesAndRoundTrips) {
  const auto c = ExperimentConfig::from_json(nlohmann::json::parse(kTinyConfig));
  EXPECT_EQ(c.dataset.train, 60u);
  EXPECT_EQ(c.fl.fl.clients, 4u);
  EXPECT_FALSE(c.attack.grid.pairwise);
  EXPECT_EQ(c.attack.grid.candidates().size(), 31u);
  const auto again = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  using nlohmann::json;
  EXPECT_THROW(ExperimentConfig::from_json(json::parse(R"({"datset": {}})")), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json::parse(R"({"fl": {"rounds": 2, "round": 3}})")),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json::parse(R"({"fl": {"rounds": "ten"}})")),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json::parse(R"({"fl": {"adversarial_ratio": 2}})")),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json::parse(R"({"model": {"architecture": "vgg"}})")),
               ConfigError);
  EXPECT_THROW(
      ExperimentConfig::from_json(json::parse(R"({"attack": {"grid": {"scale": [2.0]}}})")),
      ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(json::parse(R"({"metrics": {"tau": 1.5}})")),
               ConfigError);
  EXPECT_NO_THROW(ExperimentConfig::from_json(json::object()));
}

TEST(CliTest, ExitCodes) {
  const auto dir = scratch("exit");
  const auto good = write_config(dir, kTinyConfig);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("inspect"), 2);
  EXPECT_EQ(run_cli("--config " + (dir / "missing.json").string() + " baseline"), 2);
  std::ofstream(dir / "unknown.json") << R"({"model": {"epoch": 3}})";
  EXPECT_EQ(run_cli("--config " + (dir / "unknown.json").string() + " baseline"), 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli("--config " + (dir / "broken.json").string() + " baseline"), 2);
  EXPECT_EQ(run_cli("--config " + good.string() + " --limit 0 baseline"), 2);
  std::ofstream(dir / "cifar.json")
      << R"({"dataset": {"source": "cifar10", "path": ")" << (dir / "nowhere").string()
      << R"("}})";
  EXPECT_EQ(run_cli("--config " + (dir / "cifar.json").string() + " baseline"), 3);
  EXPECT_EQ(run_cli("--config " + good.string() + " --out " + (dir / "o").string() +
                    " inspect --sample 999"),
            2);
  fs::remove_all(dir);
}

TEST(CliTest, GenDataWritesImagesAndLabels) {
  const auto dir = scratch("gen");
  const auto cfg = write_config(dir, kTinyConfig);
  ASSERT_EQ(run_cli("--config " + cfg.string() + " --limit 3 --out " + (dir / "o").string() +
                    " gen-data"),
            0);
  const auto t = read_csv(dir / "o" / "labels.csv");
  EXPECT_EQ(t.rows.size(), 6u);
  for (const auto& r : t.rows) EXPECT_TRUE(fs::exists(dir / "o" / r[t.column("file")]));
  fs::remove_all(dir);
}

TEST(CliTest, BaselineIsByteReproducible) {
  const auto dir = scratch("repro");
  const auto cfg = write_config(dir, kTinyConfig);
  for (const char* run : {"a", "b"}) {
    ASSERT_EQ(run_cli("--config " + cfg.string() + " --seed 5 --out " + (dir / run).string() +
                      " baseline"),
              0);
  }
  for (const char* f : {"baseline_samples.csv", "baseline_summary.csv"}) {
    EXPECT_EQ(body(dir / "a" / f), body(dir / "b" / f)) << f;
  }
  const auto summary = read_csv(dir / "a" / "baseline_summary.csv");
  ASSERT_EQ(summary.rows.size(), 1u);
  const auto samples = read_csv(dir / "a" / "baseline_samples.csv");
  EXPECT_EQ(samples.rows.size(), 4u);
  ASSERT_EQ(run_cli("--config " + cfg.string() + " --seed 6 --out " + (dir / "c").string() +
                    " baseline"),
            0);
  EXPECT_NE(body(dir / "a" / "baseline_samples.csv"), body(dir / "c" / "baseline_samples.csv"));
  fs::remove_all(dir);
}

TEST(CliTest, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("env");
  const auto cfg = write_config(dir, kTinyConfig);
  const std::string env = "CHROMASKEW_OUT=" + (dir / "from_env").string() + " ";
  const std::string cmd = env + CHROMASKEW_CLI + " --config " + cfg.string() +
                          " --limit 2 gen-data > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "from_env" / "labels.csv"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace chromaskew::harness

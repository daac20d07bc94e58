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

#include "chromaskew/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "chromaskew/image_io.hpp"
#include "chromaskew/rng.hpp"
#include "chromaskew/saliency.hpp"
#include "chromaskew/weights_io.hpp"

namespace chromaskew::harness {
namespace {

// Sub-stream tags under the run seed.
enum Stream : std::uint64_t {
  kTrainData = 1,
  kTestData = 2,
  kInit = 3,
  kTraining = 4,
  kPartition = 5,
  kFederation = 7,
  kSkew = 8,
  kPretrain = 9,
};

std::uint64_t arch_tag(Architecture a) { return a == Architecture::kA ? 0 : 1; }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite");
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

saliency::SaliencyMap cam_for(const Model& m, const Image& x, int cls) {
  auto pass = saliency::capture_pass(m.network, m.weights, x);
  return saliency::finish(saliency::raw_cams(pass, m.network, cls).grad_cam, m.network);
}

void write_pair(const std::filesystem::path& dir, const std::string& stem, const Model& m,
                const Image& clean, const Image& perturbed, int cls) {
  std::filesystem::create_directories(dir);
  save_ppm(dir / (stem + "_clean.ppm"), clean);
  save_ppm(dir / (stem + "_perturbed.ppm"), perturbed);
  save_pgm(dir / (stem + "_cam_clean.pgm"), cam_for(m, clean, cls));
  save_pgm(dir / (stem + "_cam_perturbed.pgm"), cam_for(m, perturbed, cls));
}

std::vector<std::string> theta_cells(const attack::PerturbationParams& t) {
  return {num(t.hue), num(t.scale[0]), num(t.scale[1]), num(t.scale[2]), num(t.contrast),
          num(t.brightness)};
}

Model prepare_model(const ExperimentConfig& config, Architecture arch,
                    const LabeledDataset& train) {
  const ModelSpec spec{arch, config.dataset.size, train.classes, config.model.capture_layer};
  Model m = build(spec, derive_seed(config.seed, {kInit, arch_tag(arch)}));
  m.weights = chromaskew::train(
      m.network, std::move(m.weights), train,
      {config.model.epochs, config.model.learning_rate, config.model.batch,
       derive_seed(config.seed, {kTraining, arch_tag(arch)})});
  return m;
}

}  // namespace

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string num(std::size_t v) { return std::to_string(v); }

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : impl_(new Impl), columns_(header.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  impl_->out.open(path, std::ios::binary);
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("cannot write " + path.string());
  }
  impl_->out << "# generated " << utc_now() << "\n";
  row(header);
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

Experiment load_experiment(const ExperimentConfig& config) {
  config.validate();
  Experiment ex{config, {}, {}};
  const auto& d = config.dataset;
  if (d.source == "shapes") {
    ex.train = data::generate_shapes(d.train, d.classes, d.size,
                                     derive_seed(config.seed, {kTrainData}));
    ex.test = data::generate_shapes(d.test, d.classes, d.size,
                                    derive_seed(config.seed, {kTestData}));
  } else {
    if (d.size != data::kCifarSide) throw ConfigError("cifar10 images are 32x32");
    ex.train = data::load_cifar10(d.path, d.train, data::Split::kTrain);
    ex.test = data::load_cifar10(d.path, d.test, data::Split::kTest);
    if (ex.train.empty() || ex.test.empty()) {
      throw data::DataError("no CIFAR-10 records under " + d.path.string());
    }
  }
  return ex;
}

Model train_model(const Experiment& ex, Architecture arch) {
  const auto& c = ex.config;
  if (arch == c.model.architecture && !c.model.weights.empty()) {
    const ModelSpec spec{arch, c.dataset.size, ex.train.classes, c.model.capture_layer};
    Model m{make_network(spec), load_weights(c.model.weights)};
    detail::check_weights_shape(m.network, [&] {
      std::vector<Shape> s;
      for (const auto& w : m.weights) s.push_back(w.shape());
      return s;
    }());
    return m;
  }
  return prepare_model(c, arch, ex.train);
}

LabeledDataset attack_set(const Experiment& ex) {
  return data::head(ex.test, ex.config.attack.samples);
}

BaselineReport run_baseline(const Experiment& ex, const Model& model,
                            const LabeledDataset& samples, const attack::GridSpec& grid) {
  BaselineReport r;
  r.clean_accuracy = 100.0 * accuracy(model.network, model.weights, ex.test);
  auto p = attack::poison_dataset(model.network, model.weights, samples, grid);
  const auto replay = predict_labels(model.network, model.weights, p.dataset.samples);
  std::size_t preserved = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    BaselineRow row{i, samples.samples[i].label, p.outcomes[i],
                    replay[i] == p.outcomes[i].label};
    preserved += row.preserved;
    check_finite(row.outcome.ssim, "SSIM");
    r.rows.push_back(row);
  }
  r.attack_accuracy = 100.0 * static_cast<double>(preserved) / static_cast<double>(samples.size());
  r.summary = p.summary;
  return r;
}

std::vector<AblationRow> run_ablation(const Model& model, const LabeledDataset& samples,
                                      const attack::GridSpec& grid) {
  std::vector<AblationRow> rows;
  auto add = [&](const std::string& name, const attack::GridSpec& g) {
    const auto p = attack::poison_dataset(model.network, model.weights, samples, g);
    rows.push_back({name, g.candidates().size(), p.summary.mean_ssim,
                    100.0 * p.summary.success_rate});
  };
  for (auto op : {color::Operator::kHue, color::Operator::kRescale, color::Operator::kJitter}) {
    add(color::to_string(op), grid.only(op));
  }
  add("combined", grid);
  return rows;
}

namespace {

struct SkewStats {
  double mean_ssim = 1.0;
  double mean_delta_e = 0.0;
  std::size_t flips = 0;
};

SkewStats skew_stats(const Experiment& ex, const Model& m, const LabeledDataset& samples,
                     const attack::SkewRanges& ranges, bool with_ssim) {
  const std::size_t n = samples.size();
  std::vector<double> ssim(n, 1.0), de(n);
  std::vector<char> flipped(n, 0);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Image& x = samples.samples[k].image;
    const Image y = attack::random_skew(x, derive_seed(ex.config.seed, {kSkew, k}), ranges);
    de[k] = color::mean_delta_e(x, y);
    if (!with_ssim) continue;
    auto pass = saliency::capture_pass(m.network, m.weights, x);
    const int cls = argmax(pass.tape.value(pass.logits));
    const auto a = saliency::finish(saliency::raw_cams(pass, m.network, cls).grad_cam, m.network);
    auto pass_y = saliency::capture_pass(m.network, m.weights, y);
    flipped[k] = argmax(pass_y.tape.value(pass_y.logits)) != cls;
    const auto b =
        saliency::finish(saliency::raw_cams(pass_y, m.network, cls).grad_cam, m.network);
    ssim[k] = saliency::ssim(a, b);
  }
  SkewStats s;
  s.mean_ssim = mean_of(ssim);
  s.mean_delta_e = mean_of(de);
  for (char f : flipped) s.flips += f != 0;
  return s;
}

}  // namespace

CompareReport run_compare(const Experiment& ex, const Model& model,
                          const LabeledDataset& samples, const LabeledDataset& flip_samples,
                          const attack::GridSpec& grid) {
  CompareReport r;
  const auto p = attack::poison_dataset(model.network, model.weights, samples, grid);
  const auto replay = predict_labels(model.network, model.weights, p.dataset.samples);
  for (std::size_t i = 0; i < replay.size(); ++i) r.cpm_flips += replay[i] != p.outcomes[i].label;
  const double n_cpm = static_cast<double>(samples.size());
  r.rows.push_back({"cpm", samples.size(),
                    100.0 * (1.0 - static_cast<double>(r.cpm_flips) / n_cpm),
                    p.summary.mean_ssim, p.summary.mean_delta_e, 0.0});

  const attack::SkewRanges full;
  const auto s_full = skew_stats(ex, model, flip_samples, full, true);
  r.skew_flips = s_full.flips;
  const double n_flip = static_cast<double>(flip_samples.size());
  r.rows.push_back({"random_skew", flip_samples.size(),
                    100.0 * (1.0 - static_cast<double>(s_full.flips) / n_flip),
                    s_full.mean_ssim, s_full.mean_delta_e, 1.0});

  // Contract the skew ranges until their mean dE matches CPM's.
  const double target = p.summary.mean_delta_e;
  double lo = 0.0, hi = 1.0;
  if (skew_stats(ex, model, samples, full, false).mean_delta_e > target) {
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (skew_stats(ex, model, samples, full.scaled(mid), false).mean_delta_e > target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  const auto s_matched = skew_stats(ex, model, samples, full.scaled(hi), true);
  r.rows.push_back({"random_skew_matched", samples.size(),
                    100.0 * (1.0 - static_cast<double>(s_matched.flips) / n_cpm),
                    s_matched.mean_ssim, s_matched.mean_delta_e, hi});
  return r;
}

std::vector<TransferRow> run_transfer(const Model& source, const Model& target,
                                      const LabeledDataset& samples,
                                      const attack::GridSpec& grid) {
  const auto p = attack::poison_dataset(source.network, source.weights, samples, grid);
  const auto replay = predict_labels(source.network, source.weights, p.dataset.samples);
  std::size_t same_ok = 0;
  for (std::size_t i = 0; i < replay.size(); ++i) same_ok += replay[i] == p.outcomes[i].label;

  const std::size_t n = samples.size();
  std::vector<double> ssim(n);
  std::vector<char> kept(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    auto pass = saliency::capture_pass(target.network, target.weights, samples.samples[k].image);
    const int cls = argmax(pass.tape.value(pass.logits));
    const auto a =
        saliency::finish(saliency::raw_cams(pass, target.network, cls).grad_cam, target.network);
    auto pass_p =
        saliency::capture_pass(target.network, target.weights, p.dataset.samples[k].image);
    kept[k] = argmax(pass_p.tape.value(pass_p.logits)) == cls;
    const auto b = saliency::finish(saliency::raw_cams(pass_p, target.network, cls).grad_cam,
                                    target.network);
    ssim[k] = saliency::ssim(a, b);
  }
  std::size_t cross_ok = 0;
  for (char c : kept) cross_ok += c != 0;
  const auto pct = [n](std::size_t ok) {
    return 100.0 * static_cast<double>(ok) / static_cast<double>(n);
  };
  const std::string src = to_string(architecture_of(source.network));
  const std::string dst = to_string(architecture_of(target.network));
  return {{"same_arch", src, src, n, pct(same_ok), p.summary.mean_ssim},
          {"cross_arch", src, dst, n, pct(cross_ok), mean_of(ssim)}};
}

fl::FlSetup make_fl_setup(const Experiment& ex) {
  const auto& c = ex.config;
  if (ex.train.size() <= c.fl.root_size + c.fl.fl.clients) {
    throw ConfigError("training set too small for the root set and client partitions");
  }
  fl::FlSetup setup;
  const std::size_t pool = ex.train.size() - c.fl.root_size;
  std::vector<std::size_t> client_idx(pool), root_idx(c.fl.root_size);
  std::iota(client_idx.begin(), client_idx.end(), std::size_t{0});
  std::iota(root_idx.begin(), root_idx.end(), pool);
  const LabeledDataset client_pool = data::subset(ex.train, client_idx);
  setup.root = data::subset(ex.train, root_idx);

  const ModelSpec spec{c.model.architecture, c.dataset.size, ex.train.classes,
                       c.model.capture_layer};
  Model m = build(spec, derive_seed(c.seed, {kInit, arch_tag(c.model.architecture)}));
  setup.network = m.network;
  setup.initial = chromaskew::train(m.network, std::move(m.weights), client_pool,
                                    {c.fl.pretrain_epochs, c.model.learning_rate, c.model.batch,
                                     derive_seed(c.seed, {kPretrain})});
  setup.client_data = data::partition(client_pool, c.fl.fl.clients, c.dataset.partition,
                                      derive_seed(c.seed, {kPartition}));
  setup.test = ex.test;
  setup.probe = data::head(ex.test, c.metrics.fl.probe);
  return setup;
}

fl::Simulation run_fl(const Experiment& ex, const fl::FlSetup& setup, const fl::FlConfig& config,
                      const fl::RoundHook& hook) {
  auto sim = fl::simulate(setup, config, ex.config.metrics.fl,
                          derive_seed(ex.config.seed, {kFederation}), hook);
  for (const auto& m : sim.rounds) {
    check_finite(m.ssim_gc, "round SSIM");
    check_finite(m.ssim_gcpp, "round SSIM (Grad-CAM++)");
  }
  return sim;
}

std::vector<RobustRow> run_robust(const Experiment& ex, const fl::FlSetup& setup,
                                  const fl::FlConfig& config) {
  std::vector<RobustRow> rows;
  for (auto a : {fl::Aggregator::kFedAvg, fl::Aggregator::kTrimmedMean, fl::Aggregator::kMedian,
                 fl::Aggregator::kFlTrust}) {
    fl::FlConfig c = config;
    c.aggregator = a;
    rows.push_back({fl::to_string(a), run_fl(ex, setup, c).rounds.back()});
  }
  return rows;
}

void cmd_baseline(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  const Model model = train_model(ex, config.model.architecture);
  const auto samples = attack_set(ex);
  const auto r = run_baseline(ex, model, samples, config.attack.grid);
  std::filesystem::create_directories(out);
  save_weights(out / "model.cdwt", model.weights);

  CsvWriter rows(out / "baseline_samples.csv",
                 {"sample_id", "label", "predicted", "hue", "scale_r", "scale_g", "scale_b",
                  "contrast", "brightness", "ssim", "delta_e", "feasible", "fallback",
                  "preserved"});
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{num(row.id), std::to_string(row.label),
                                   std::to_string(row.outcome.label)};
    for (auto& c : theta_cells(row.outcome.theta)) cells.push_back(c);
    cells.insert(cells.end(), {num(row.outcome.ssim), num(row.outcome.delta_e),
                               num(row.outcome.feasible), row.outcome.fallback ? "1" : "0",
                               row.preserved ? "1" : "0"});
    rows.row(cells);
  }
  CsvWriter summary(out / "baseline_summary.csv",
                    {"samples", "clean_accuracy", "attack_accuracy", "mean_ssim", "std_ssim",
                     "p10_ssim", "median_ssim", "p90_ssim", "mean_delta_e", "success"});
  const auto& s = r.summary;
  summary.row({num(s.samples), num(r.clean_accuracy), num(r.attack_accuracy), num(s.mean_ssim),
               num(s.std_ssim), num(s.p10_ssim), num(s.median_ssim), num(s.p90_ssim),
               num(s.mean_delta_e), num(100.0 * s.success_rate)});

  std::vector<std::size_t> order(r.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r.rows[a].outcome.ssim < r.rows[b].outcome.ssim;
  });
  for (std::size_t k = 0; k < std::min(config.metrics.heatmaps, order.size()); ++k) {
    const auto& row = r.rows[order[k]];
    const Image& x = samples.samples[row.id].image;
    write_pair(out / "heatmaps", "sample_" + num(row.id), model, x,
               color::apply(row.outcome.theta, x, config.attack.grid.order), row.outcome.label);
  }
  std::cout << "baseline: " << s.samples << " samples, mean SSIM " << s.mean_ssim
            << ", prediction preserved " << r.attack_accuracy << "%\n";
}

namespace {

void write_rounds(const std::filesystem::path& path, const std::vector<fl::RoundMetrics>& rounds) {
  CsvWriter csv(path, {"round", "adversarial_ratio", "accuracy", "reference_accuracy", "fidelity",
                       "ssim_gc", "ssim_gcpp", "ssim_std", "peak", "l1", "drift",
                       "fallback_rate"});
  for (const auto& m : rounds) {
    csv.row({std::to_string(m.round), num(m.adversarial_ratio), num(m.accuracy),
             num(m.reference_accuracy), num(m.fidelity), num(m.ssim_gc), num(m.ssim_gcpp),
             num(m.ssim_std), num(m.peak), num(m.l1), num(m.drift), num(m.fallback_rate)});
  }
}

}  // namespace

void cmd_fl(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  const auto setup = make_fl_setup(ex);
  const std::size_t dumps = std::min(config.metrics.heatmaps, setup.probe.size());
  const auto hook = [&](unsigned t, const ModelWeights& reference, const ModelWeights& attacked) {
    for (std::size_t k = 0; k < dumps; ++k) {
      const Image& x = setup.probe.samples[k].image;
      const Model ref{setup.network, reference};
      const Model att{setup.network, attacked};
      const int cls = predict_label(setup.network, reference, x);
      const std::string stem = "round_" + std::to_string(t) + "_sample_" + num(k);
      std::filesystem::create_directories(out / "heatmaps");
      save_pgm(out / "heatmaps" / (stem + "_reference.pgm"), cam_for(ref, x, cls));
      save_pgm(out / "heatmaps" / (stem + "_attacked.pgm"), cam_for(att, x, cls));
    }
  };
  std::filesystem::create_directories(out);
  const auto sim = run_fl(ex, setup, config.fl.fl, hook);
  write_rounds(out / "fl_rounds.csv", sim.rounds);
  CsvWriter summary(out / "fl_summary.csv",
                    {"rounds", "adversarial_ratio", "aggregator", "alpha_hat", "r2",
                     "final_accuracy", "final_reference_accuracy", "final_ssim_gc"});
  const auto& last = sim.rounds.back();
  summary.row({std::to_string(sim.rounds.size()), num(config.fl.fl.adversarial_ratio),
               fl::to_string(config.fl.fl.aggregator), num(sim.fit.alpha), num(sim.fit.r2),
               num(last.accuracy), num(last.reference_accuracy), num(last.ssim_gc)});
  save_weights(out / "global.cdwt", sim.attacked);
  save_weights(out / "reference.cdwt", sim.reference);
  std::cout << "fl: " << sim.rounds.size() << " rounds, final SSIM " << last.ssim_gc
            << ", alpha_hat " << sim.fit.alpha << "\n";
}

void cmd_ablation(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  const Model model = train_model(ex, config.model.architecture);
  const auto rows = run_ablation(model, attack_set(ex), config.attack.grid);
  CsvWriter csv(out / "ablation.csv", {"operator", "candidates", "mean_ssim", "success"});
  for (const auto& r : rows) {
    csv.row({r.op, num(r.candidates), num(r.mean_ssim), num(r.success)});
    std::cout << "ablation " << r.op << ": SSIM " << r.mean_ssim << ", success " << r.success
              << "%\n";
  }
}

void cmd_compare(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  const Model model = train_model(ex, config.model.architecture);
  const auto r = run_compare(ex, model, attack_set(ex),
                             data::head(ex.test, config.metrics.skew_samples), config.attack.grid);
  CsvWriter csv(out / "compare.csv", {"method", "samples", "preservation", "mean_ssim",
                                      "mean_delta_e", "skew_scale"});
  for (const auto& row : r.rows) {
    csv.row({row.method, num(row.samples), num(row.preservation), num(row.mean_ssim),
             num(row.mean_delta_e), num(row.skew_scale)});
    std::cout << "compare " << row.method << ": preserved " << row.preservation << "%, SSIM "
              << row.mean_ssim << ", dE " << row.mean_delta_e << "\n";
  }
}

void cmd_transfer(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  const Model source = train_model(ex, config.model.architecture);
  const Model target = train_model(ex, config.model.transfer_architecture);
  const auto rows = run_transfer(source, target, attack_set(ex), config.attack.grid);
  CsvWriter csv(out / "transfer.csv",
                {"setting", "source", "target", "samples", "preservation", "mean_ssim"});
  for (const auto& r : rows) {
    csv.row({r.setting, r.source, r.target, num(r.samples), num(r.preservation),
             num(r.mean_ssim)});
    std::cout << "transfer " << r.setting << ": preserved " << r.preservation << "%, SSIM "
              << r.mean_ssim << "\n";
  }
}

void cmd_robust(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  const auto setup = make_fl_setup(ex);
  const auto rows = run_robust(ex, setup, config.fl.fl);
  CsvWriter csv(out / "robust.csv", {"aggregator", "accuracy", "reference_accuracy", "fidelity",
                                     "ssim_gc", "ssim_gcpp", "peak", "l1"});
  for (const auto& r : rows) {
    const auto& m = r.final;
    csv.row({r.aggregator, num(m.accuracy), num(m.reference_accuracy), num(m.fidelity),
             num(m.ssim_gc), num(m.ssim_gcpp), num(m.peak), num(m.l1)});
    std::cout << "robust " << r.aggregator << ": acc " << m.accuracy << ", SSIM " << m.ssim_gc
              << "\n";
  }
}

void cmd_gen_data(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto ex = load_experiment(config);
  std::filesystem::create_directories(out / "images");
  CsvWriter csv(out / "labels.csv", {"split", "id", "label", "name", "file"});
  for (const auto* part : {&ex.train, &ex.test}) {
    const std::string split_name = part == &ex.train ? "train" : "test";
    for (std::size_t i = 0; i < part->size(); ++i) {
      const auto& s = part->samples[i];
      const std::string file = "images/" + split_name + "_" + num(i) + ".ppm";
      save_ppm(out / file, s.image);
      const std::string name = part->provenance == Provenance::kShapes
                                   ? data::shape_name(s.label)
                                   : std::to_string(s.label);
      csv.row({split_name, num(i), std::to_string(s.label), name, file});
    }
  }
  std::cout << "gen-data: " << ex.train.size() + ex.test.size() << " images in " << out << "\n";
}

namespace {

void print_map(std::ostream& os, const saliency::SaliencyMap& a, const saliency::SaliencyMap& b) {
  static constexpr char kRamp[] = " .:-=+*#%@";
  auto glyph = [](double v) {
    return kRamp[std::clamp(static_cast<int>(v * 9.0 + 0.5), 0, 9)];
  };
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) os << glyph(a(i, j));
    os << "   ";
    for (Index j = 0; j < b.cols(); ++j) os << glyph(b(i, j));
    os << '\n';
  }
}

}  // namespace

void cmd_inspect(const ExperimentConfig& config, const std::filesystem::path& out,
                 std::size_t sample, std::ostream& print) {
  const auto ex = load_experiment(config);
  if (sample >= ex.test.size()) {
    throw ConfigError("sample id " + std::to_string(sample) + " outside the test set");
  }
  const Model model = train_model(ex, config.model.architecture);
  const Image& x = ex.test.samples[sample].image;
  const auto r = attack::cpm_perturb(model.network, model.weights, x, config.attack.grid);
  write_pair(out / "inspect", "sample_" + num(sample), model, x, r.image, r.outcome.label);
  print << "sample " << sample << " label " << ex.test.samples[sample].label << " predicted "
        << r.outcome.label << " theta " << r.outcome.theta.to_string() << " SSIM "
        << r.outcome.ssim << "\n";
  print << "clean Grad-CAM" << std::string(static_cast<std::size_t>(x.width) - 11, ' ')
        << "perturbed Grad-CAM\n";
  print_map(print, cam_for(model, x, r.outcome.label), cam_for(model, r.image, r.outcome.label));
}

}  // namespace chromaskew::harness

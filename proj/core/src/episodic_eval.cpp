// Copyright 2026 The tokenshot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tokenshot/episodic_eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>
#include <utility>

#include "tokenshot/errors.hpp"
#include "tokenshot/importance.hpp"
#include "tokenshot/similarity.hpp"

namespace tokenshot {

TokenDataset::TokenDataset(std::vector<TokenClass> classes)
    : classes_(std::move(classes)) {
  if (classes_.empty()) throw DataError("dataset has no classes");
  for (const auto& c : classes_) {
    if (c.grids.empty()) throw DataError("class '" + c.name + "' has no grids");
  }
  grid_ = classes_.front().grids.front().grid();
  dim_ = classes_.front().grids.front().dim();
  for (const auto& c : classes_) {
    for (const auto& g : c.grids) {
      if (g.grid() != grid_ || g.dim() != dim_) {
        throw DataError("class '" + c.name + "' grid '" + g.image_id() +
                        "' does not share the dataset shape");
      }
    }
  }
}

void EvalConfig::Validate() const {
  if (n_way < 2) throw InvalidArgumentError("n_way must be >= 2");
  if (k_shot < 1) throw InvalidArgumentError("k_shot must be >= 1");
  if (n_query_per_class < 1) throw InvalidArgumentError("n_query must be >= 1");
  if (episodes < 1) throw InvalidArgumentError("episodes must be >= 1");
  if (jobs < 1) throw InvalidArgumentError("jobs must be >= 1");
  for (int s : steps_sweep) {
    if (s < 0) throw InvalidArgumentError("sweep step counts must be >= 0");
  }
  classifier.Validate();
}

MeanAndCi MeanWithCi95(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double stddev = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * stddev / std::sqrt(n)};
}

Episode SampleEpisode(const TokenDataset& dataset, const EvalConfig& config,
                      Rng& rng) {
  if (config.n_way > dataset.num_classes()) {
    throw DataError("dataset has " + std::to_string(dataset.num_classes()) +
                    " classes, episode needs " + std::to_string(config.n_way));
  }
  const int per_class = config.k_shot + config.n_query_per_class;

  std::vector<int> class_order(static_cast<std::size_t>(dataset.num_classes()));
  std::iota(class_order.begin(), class_order.end(), 0);
  // Partial Fisher-Yates: the first n_way slots are a uniform sample.
  for (int i = 0; i < config.n_way; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   rng.UniformIndex(class_order.size() - static_cast<std::size_t>(i));
    std::swap(class_order[static_cast<std::size_t>(i)], class_order[j]);
  }

  std::vector<LabeledGrid> support;
  std::vector<LabeledGrid> queries;
  for (int n = 0; n < config.n_way; ++n) {
    const auto& cls = dataset.classes()[static_cast<std::size_t>(class_order[static_cast<std::size_t>(n)])];
    if (static_cast<int>(cls.grids.size()) < per_class) {
      throw DataError("class '" + cls.name + "' has " +
                      std::to_string(cls.grids.size()) + " grids, episode needs " +
                      std::to_string(per_class));
    }
    std::vector<int> picks(cls.grids.size());
    std::iota(picks.begin(), picks.end(), 0);
    for (int i = 0; i < per_class; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     rng.UniformIndex(picks.size() - static_cast<std::size_t>(i));
      std::swap(picks[static_cast<std::size_t>(i)], picks[j]);
    }
    for (int i = 0; i < per_class; ++i) {
      const TokenGrid& g = cls.grids[static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
      (i < config.k_shot ? support : queries).push_back({g, n});
    }
  }
  return Episode(config.n_way, config.k_shot, std::move(support), std::move(queries));
}

Episode SampleEpisode(const TokenDataset& dataset, const EvalConfig& config,
                      int index) {
  Rng rng = Rng::ForStream(config.seed, static_cast<std::uint64_t>(index));
  return SampleEpisode(dataset, config, rng);
}

namespace {

struct EpisodeOutcome {
  std::vector<double> accuracy;  // one per step count
  double wall_ms = 0.0;
};

EpisodeOutcome RunEpisode(const TokenDataset& dataset, const EvalConfig& config,
                          std::span<const int> sorted_steps, int index) {
  const auto start = std::chrono::steady_clock::now();
  const Episode episode = SampleEpisode(dataset, config, index);
  const auto snapshots = ImportanceSnapshots(episode, config.classifier, sorted_steps);

  const QueryScorer scorer(episode, config.classifier.ResolvedTau(episode.dim()));
  EpisodeOutcome outcome;
  for (const auto& v : snapshots) {
    const auto predictions = scorer.Predict(v);
    int correct = 0;
    for (std::size_t q = 0; q < predictions.size(); ++q) {
      if (predictions[q].predicted == episode.queries()[q].label) ++correct;
    }
    outcome.accuracy.push_back(static_cast<double>(correct) /
                               static_cast<double>(predictions.size()));
  }
  outcome.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return outcome;
}

[[noreturn]] void RethrowForEpisode(std::exception_ptr error, int index) {
  const std::string prefix = "episode " + std::to_string(index) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::kInvalidArgument:
        throw InvalidArgumentError(prefix + e.what());
      case ErrorKind::kData:
        throw DataError(prefix + e.what());
      case ErrorKind::kNumerical:
        throw NumericalError(prefix + e.what());
    }
    throw;
  }
}

}  // namespace

std::vector<EvalReport> EvaluateSweep(const TokenDataset& dataset,
                                      const EvalConfig& config) {
  config.Validate();
  const std::vector<int> requested =
      config.steps_sweep.empty() ? std::vector<int>{config.classifier.steps}
                                 : config.steps_sweep;
  std::vector<int> sorted_steps = requested;
  std::ranges::sort(sorted_steps);
  sorted_steps.erase(std::unique(sorted_steps.begin(), sorted_steps.end()),
                     sorted_steps.end());

  const auto episodes = static_cast<std::size_t>(config.episodes);
  std::vector<EpisodeOutcome> outcomes(episodes);
  std::vector<std::exception_ptr> errors(episodes);
  std::atomic<int> next{0};
  std::atomic<int> first_failure{INT_MAX};

  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= config.episodes) return;
      // Episodes past a known failure are skipped; all earlier ones still
      // run so the reported failure is the lowest index.
      if (i > first_failure.load()) continue;
      try {
        outcomes[static_cast<std::size_t>(i)] = RunEpisode(dataset, config, sorted_steps, i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        int current = first_failure.load();
        while (i < current && !first_failure.compare_exchange_weak(current, i)) {
        }
      }
    }
  };

  const int workers = std::min(config.jobs, config.episodes);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < episodes; ++i) {
    if (errors[i]) RethrowForEpisode(errors[i], static_cast<int>(i));
  }

  double total_ms = 0.0;
  for (const auto& o : outcomes) total_ms += o.wall_ms;

  std::vector<EvalReport> reports;
  for (int steps : requested) {
    const auto slot = static_cast<std::size_t>(
        std::ranges::lower_bound(sorted_steps, steps) - sorted_steps.begin());
    EvalReport report;
    report.config = config;
    report.config.classifier.steps = steps;
    report.config.classifier.tau = config.classifier.ResolvedTau(dataset.dim());
    report.config.steps_sweep.clear();
    report.per_episode_accuracy.reserve(episodes);
    for (const auto& o : outcomes) report.per_episode_accuracy.push_back(o.accuracy[slot]);
    const auto stats = MeanWithCi95(report.per_episode_accuracy);
    report.mean = stats.mean;
    report.ci95 = stats.ci95;
    report.wall_ms_per_episode = total_ms / static_cast<double>(episodes);
    reports.push_back(std::move(report));
  }
  return reports;
}

EvalReport Evaluate(const TokenDataset& dataset, const EvalConfig& config) {
  EvalConfig single = config;
  single.steps_sweep.clear();
  return std::move(EvaluateSweep(dataset, single).front());
}

}  // namespace tokenshot

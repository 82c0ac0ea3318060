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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>
#include "tokenshot/episodic_eval.hpp"
#include "tokenshot/errors.hpp"
#include "tokenshot/heatmap.hpp"
#include "tokenshot/importance.hpp"
#include "tokenshot/io_formats.hpp"
#include "tokenshot/similarity.hpp"
#include "tokenshot/toy_encoder.hpp"

namespace tokenshot::cli {
namespace {

namespace fs = std::filesystem;

std::string Fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

struct EncodeArgs {
  std::string images;
  int patch_size = 16;
  int dim = 64;
  std::uint64_t seed = 0;
  std::string out;
};

// Flags shared by eval and classify.
struct EpisodeArgs {
  std::string manifest;
  int n_way = 5;
  int k_shot = 5;
  int n_query = 15;
  int steps = 15;
  double lr = 0.1;
  double tau = 0.0;  // 0 = 1/sqrt(D)
  int mask_window = 5;
  std::string config;
};

struct EvalArgs {
  int episodes = 600;
  std::uint64_t seed = 0;
  std::string sweep;
  std::string out;
  std::string csv;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

struct ClassifyArgs {
  std::uint64_t episode_seed = 0;
  std::string heatmaps;
  int scale = 8;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int trials = 20;
};

void AddEpisodeFlags(CLI::App* sub, EpisodeArgs& a) {
  sub->add_option("--manifest", a.manifest, "Dataset manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--n-way", a.n_way, "Classes per episode")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  sub->add_option("--k-shot", a.k_shot, "Support images per class")
      ->capture_default_str()
      ->check(CLI::Range(1, 1 << 20));
  sub->add_option("--n-query", a.n_query, "Query images per class")
      ->capture_default_str()
      ->check(CLI::Range(1, 1 << 20));
  sub->add_option("--steps", a.steps, "Inner-loop gradient steps")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--lr", a.lr, "Inner-loop learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--tau", a.tau,
                  "Softmax temperature [default: 1/sqrt(D) from the manifest]")
      ->check(CLI::PositiveNumber);
  sub->add_option("--mask-window", a.mask_window,
                  "Local mask window m for 1-shot episodes (odd)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--config", a.config,
                  "JSON object of flag values; command-line flags take precedence "
                  "[default: none]")
      ->check(CLI::ExistingFile);
}

// Applies a JSON overlay to every option of `sub` not given on the command
// line. Keys are flag names without the leading dashes.
void ApplyConfigOverlay(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("--config", path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw CLI::ValidationError("--config", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw CLI::ValidationError("--config", "config files cannot nest");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
    opt->run_callback();
  }
}

std::vector<int> ParseSweep(const std::string& text) {
  std::vector<int> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int value = -1;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos ||
        value < 0) {
      throw InvalidArgumentError("--sweep expects comma-separated non-negative "
                                 "integers, got '" + text + "'");
    }
    steps.push_back(value);
  }
  if (steps.empty()) throw InvalidArgumentError("--sweep is empty");
  return steps;
}

// report.json + steps 15 -> report_steps15.json
fs::path SuffixedPath(const fs::path& path, int steps) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + "_steps" + std::to_string(steps) +
                       path.extension().string());
  return out;
}

ClassifierConfig MakeClassifierConfig(const EpisodeArgs& a) {
  ClassifierConfig c;
  if (a.tau > 0.0) c.tau = a.tau;
  c.lr = a.lr;
  c.steps = a.steps;
  c.mask_window = a.mask_window;
  c.Validate();
  return c;
}

void WarnIgnoredMaskWindow(const CLI::App* sub, const EpisodeArgs& a, std::ostream& err) {
  if (a.k_shot > 1 && sub->get_option("--mask-window")->count() > 0) {
    err << "warning: --mask-window only applies to 1-shot episodes; K = " << a.k_shot
        << " uses block-diagonal masking, ignoring it\n";
  }
}

int RunEncode(const EncodeArgs& a, std::ostream& out) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.images)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::ranges::sort(files);
  if (files.empty()) throw DataError("no image files in '" + a.images + "'");

  std::vector<TokenGrid> grids;
  std::optional<PatchProjector> projector;
  int height = 0, width = 0;
  for (const auto& file : files) {
    const RawImage image = RawImage::FromPnm(ReadPnm(file));
    if (!projector) {
      projector.emplace(a.patch_size, image.channels, a.dim, a.seed);
      height = image.height;
      width = image.width;
    }
    if (image.height != height || image.width != width ||
        image.channels != projector->channels()) {
      throw DataError(file.string() + ": image is " + std::to_string(image.height) +
                      "x" + std::to_string(image.width) + "x" +
                      std::to_string(image.channels) + ", expected " +
                      std::to_string(height) + "x" + std::to_string(width) + "x" +
                      std::to_string(projector->channels()) + " like the first image");
    }
    try {
      grids.push_back(Encode(image, *projector, file.filename().string()));
    } catch (const InvalidArgumentError& e) {
      throw DataError(file.string() + ": " + e.what());
    }
  }
  WriteTokens(grids, a.out);
  const auto& g = grids.front();
  out << "encoded " << grids.size() << " images: L=" << g.num_tokens()
      << " D=" << g.dim() << " grid " << g.grid().height << "x" << g.grid().width
      << " -> " << a.out << "\n";
  return kExitOk;
}

int RunEval(const CLI::App* sub, const EpisodeArgs& e, const EvalArgs& a,
            std::ostream& out, std::ostream& err) {
  WarnIgnoredMaskWindow(sub, e, err);
  EvalConfig config;
  config.n_way = e.n_way;
  config.k_shot = e.k_shot;
  config.n_query_per_class = e.n_query;
  config.episodes = a.episodes;
  config.seed = a.seed;
  config.classifier = MakeClassifierConfig(e);
  config.jobs = a.jobs;
  if (!a.sweep.empty()) config.steps_sweep = ParseSweep(a.sweep);
  config.Validate();

  const TokenDataset dataset = LoadDataset(e.manifest);
  const auto reports = EvaluateSweep(dataset, config);
  const bool sweep = !config.steps_sweep.empty();
  for (const auto& r : reports) {
    out << "steps " << r.config.classifier.steps << ": mean " << Fixed(r.mean, 3)
        << " +- " << Fixed(r.ci95, 3) << " (95% CI, " << r.per_episode_accuracy.size()
        << " episodes, " << config.n_way << "-way " << config.k_shot << "-shot)\n";
    if (!a.out.empty()) {
      WriteReportJson(r, sweep ? SuffixedPath(a.out, r.config.classifier.steps)
                               : fs::path(a.out));
    }
    if (!a.csv.empty()) {
      WriteReportCsv(r, sweep ? SuffixedPath(a.csv, r.config.classifier.steps)
                              : fs::path(a.csv));
    }
  }
  return kExitOk;
}

int RunClassify(const CLI::App* sub, const EpisodeArgs& e, const ClassifyArgs& a,
                std::ostream& out, std::ostream& err) {
  WarnIgnoredMaskWindow(sub, e, err);
  EvalConfig config;
  config.n_way = e.n_way;
  config.k_shot = e.k_shot;
  config.n_query_per_class = e.n_query;
  config.episodes = 1;
  config.seed = a.episode_seed;
  config.classifier = MakeClassifierConfig(e);
  config.Validate();

  const TokenDataset dataset = LoadDataset(e.manifest);
  const Episode episode = SampleEpisode(dataset, config, 0);
  const InnerLoopTrace trace = OptimizeImportance(episode, config.classifier);
  const double tau = config.classifier.ResolvedTau(episode.dim());
  const auto predictions = QueryScorer(episode, tau).Predict(trace.v_final);

  out << "episode seed " << a.episode_seed << ": " << episode.n_way() << "-way "
      << episode.k_shot() << "-shot, " << episode.num_queries() << " queries, tau "
      << Fixed(tau, 6) << "\n";
  out << "support loss " << Fixed(trace.losses.front(), 6) << " -> "
      << Fixed(trace.losses.back(), 6) << " after " << trace.steps_taken << " steps\n";
  int correct = 0;
  for (std::size_t q = 0; q < predictions.size(); ++q) {
    const auto& p = predictions[q];
    const int truth = episode.queries()[q].label;
    if (p.predicted == truth) ++correct;
    out << "query " << q << " (" << episode.queries()[q].grid.image_id() << "): true "
        << truth << " predicted " << p.predicted << " probs [";
    for (std::size_t n = 0; n < p.probs.size(); ++n) {
      out << (n ? ", " : "") << Fixed(p.probs[n], 4);
    }
    out << "]\n";
  }
  out << "accuracy " << Fixed(static_cast<double>(correct) /
                                  static_cast<double>(predictions.size()), 4)
      << " (" << correct << "/" << predictions.size() << ")\n";

  if (!a.heatmaps.empty()) {
    const auto maps = RenderImportance(trace.v_final, episode, a.scale);
    const auto paths = WriteHeatmaps(maps, a.heatmaps, std::to_string(a.episode_seed));
    out << "wrote " << paths.size() << " heatmaps to " << a.heatmaps << "\n";
  }
  return kExitOk;
}

int RunGradcheckCommand(const GradcheckArgs& a, const Hooks& hooks, std::ostream& out,
                        std::ostream& err) {
  const GradCheckReport report = RunGradCheck(a.seed, a.trials, hooks.gradient);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6e", report.max_error);
  out << "max relative gradient error over " << a.trials << " trials: " << buf
      << " (tolerance " << kGradientTolerance << ")\n";
  if (!report.passed) {
    err << "gradcheck FAILED\n";
    return kExitNumerical;
  }
  out << "gradcheck passed\n";
  return kExitOk;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    case ErrorKind::kData:
      return kExitData;
    case ErrorKind::kNumerical:
      return kExitNumerical;
  }
  return kExitData;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks) {
  CLI::App app("Few-shot classification of patch-token embeddings with "
               "inference-time token importance reweighting.",
               "tokenshot");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  EncodeArgs encode_args;
  CLI::App* encode = app.add_subcommand(
      "encode", "Encode a directory of PGM/PPM images into a token file");
  encode->add_option("--images", encode_args.images, "Directory of P5/P6 images")
      ->required()
      ->check(CLI::ExistingDirectory);
  encode->add_option("--patch-size", encode_args.patch_size, "Patch edge P in pixels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  encode->add_option("--dim", encode_args.dim, "Token dimension D")
      ->capture_default_str()
      ->check(CLI::Range(1, 65535));
  encode->add_option("--seed", encode_args.seed, "Projection seed")->capture_default_str();
  encode->add_option("--out", encode_args.out, "Output token file")->required();

  EpisodeArgs eval_episode;
  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate mean accuracy and 95% CI over random episodes");
  AddEpisodeFlags(eval, eval_episode);
  eval->add_option("--episodes", eval_args.episodes, "Number of episodes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_args.seed, "Episode sampling seed")->capture_default_str();
  eval->add_option("--sweep", eval_args.sweep,
                   "Comma-separated inner-loop step counts evaluated on the same "
                   "episodes, e.g. \"0,5,10,15,20\" (overrides --steps) [default: none]");
  eval->add_option("--out", eval_args.out,
                   "Report JSON path; sweeps add _steps<T> before the extension "
                   "[default: none]");
  eval->add_option("--csv", eval_args.csv,
                   "Per-episode accuracy CSV path [default: none]");
  eval->add_option("--jobs", eval_args.jobs, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  EpisodeArgs classify_episode;
  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand(
      "classify", "Classify one sampled episode and export importance heatmaps");
  AddEpisodeFlags(classify, classify_episode);
  classify->add_option("--episode-seed", classify_args.episode_seed,
                       "Seed of the sampled episode")
      ->capture_default_str();
  classify->add_option("--heatmaps", classify_args.heatmaps,
                       "Directory for {episode}_{class}_{shot}.pgm heatmaps "
                       "[default: none]");
  classify->add_option("--scale", classify_args.scale, "Heatmap pixels per token")
      ->capture_default_str()
      ->check(CLI::Range(1, 256));

  GradcheckArgs gradcheck_args;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Compare the analytic support-loss gradient with finite differences");
  gradcheck->add_option("--seed", gradcheck_args.seed, "Seed for random episodes")
      ->capture_default_str();
  gradcheck->add_option("--trials", gradcheck_args.trials, "Number of random episodes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (eval->parsed()) ApplyConfigOverlay(eval, eval_episode.config);
    if (classify->parsed()) ApplyConfigOverlay(classify, classify_episode.config);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (encode->parsed()) return RunEncode(encode_args, out);
    if (eval->parsed()) return RunEval(eval, eval_episode, eval_args, out, err);
    if (classify->parsed()) {
      return RunClassify(classify, classify_episode, classify_args, out, err);
    }
    if (gradcheck->parsed()) return RunGradcheckCommand(gradcheck_args, hooks, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tokenshot::cli

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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails or overruns its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "test_support.hpp"
#include "tokenshot/episodic_eval.hpp"
#include "tokenshot/errors.hpp"
#include "tokenshot/gradient_check.hpp"
#include "tokenshot/heatmap.hpp"
#include "tokenshot/importance.hpp"
#include "tokenshot/io_formats.hpp"
#include "tokenshot/pnm.hpp"
#include "tokenshot/similarity.hpp"
#include "tokenshot/synthetic.hpp"

namespace tokenshot {
namespace {

using testing::OracleFiniteDifference;
using testing::OracleQueryLogits;
using testing::OracleSelfLogits;
using testing::OracleSoftmax;
using testing::RandomEpisode;
using testing::RandomVector;

struct Outcome {
  bool passed = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Checker {
 public:
  void Check(bool ok, const std::string& what) {
    if (ok) return;
    passed_ = false;
    if (++failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  Outcome Finish(const std::string& summary) const {
    if (passed_) return {true, summary};
    return {false, summary + " | " + messages_ +
                       (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "")};
  }

 private:
  bool passed_ = true;
  int failures_ = 0;
  std::string messages_;
};

std::string Fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

double RelErr(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

Mask MaskFor(const Episode& e, int window = 5) {
  return BuildMask(e.n_way(), e.k_shot(), e.tokens_per_image(), e.grid(), window);
}

std::vector<std::vector<double>> LibraryLogits(const Episode& e, std::span<const double> v,
                                               double tau) {
  const QueryScorer scorer(e, tau);
  std::vector<std::vector<double>> out;
  for (int q = 0; q < e.num_queries(); ++q) out.push_back(scorer.Logits(v, q));
  return out;
}

// ---- 1 ---------------------------------------------------------------------

Outcome GradientCheck() {
  Checker c;
  Rng rng(20260101);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const GradCheckProblem p = RandomGradCheckProblem(rng);
    const SupportObjective obj(p.episode, p.mask, p.tau);
    const auto analytic = obj.Gradient(p.v);
    const auto numeric = OracleFiniteDifference(
        [&](std::span<const double> x) { return obj.Loss(x); }, p.v, 1e-5);
    const double err = MaxRelativeError(analytic, numeric);
    worst = std::max(worst, err);
    c.Check(err < 1e-5, "trial " + std::to_string(trial) + " error " + Fmt("%.3e", err));
  }
  const GradCheckReport report = RunGradCheck(0, 20);
  c.Check(report.passed, "RunGradCheck(seed 0) failed");
  worst = std::max(worst, report.max_error);
  return c.Finish("max relative error " + Fmt("%.3e", worst) + " over 2x20 episodes");
}

// ---- 2 ---------------------------------------------------------------------

Outcome OracleEquivalence() {
  Checker c;
  Rng rng(77);
  const std::vector<GridShape> grids = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 3},
                                        {2, 3}, {3, 2}, {1, 4}, {4, 2}};
  int instances = 0;
  double worst = 0.0;
  while (instances < 50) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(3));
    const int k = 1 + static_cast<int>(rng.UniformIndex(2));
    const GridShape grid = grids[rng.UniformIndex(grids.size())];
    if (n * k * grid.size() > 32) continue;
    const int dim = 2 + static_cast<int>(rng.UniformIndex(5));
    const int window = 1 + 2 * static_cast<int>(rng.UniformIndex(2));
    const Episode e = RandomEpisode(rng, n, k, grid, dim, 2);
    const auto v = RandomVector(rng, static_cast<std::size_t>(e.num_support_tokens()), 0.7);
    const double tau = rng.Uniform(0.2, 1.5);
    ++instances;

    ClassifierConfig cfg;
    cfg.tau = tau;
    const auto preds = Predict(e, v, cfg);
    const auto oracle = OracleQueryLogits(e, v, tau);
    for (std::size_t q = 0; q < preds.size(); ++q) {
      const auto probs = OracleSoftmax(oracle[q]);
      int best = 0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        const double el = RelErr(preds[q].logits[i], oracle[q][i]);
        const double ep = std::abs(preds[q].probs[i] - probs[i]);
        worst = std::max({worst, el, ep});
        c.Check(el <= 1e-9 && ep <= 1e-9, "predict mismatch at instance " +
                                              std::to_string(instances));
        if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
      }
      c.Check(preds[q].predicted == best, "argmax mismatch");
    }

    const MatrixD self = SupportSelfLogits(e, v, MaskFor(e, window), tau);
    const auto self_oracle = OracleSelfLogits(e, v, window, tau);
    for (std::size_t p = 0; p < self_oracle.size(); ++p) {
      for (std::size_t cls = 0; cls < self_oracle[p].size(); ++cls) {
        const double a = self(p, cls);
        const double b = self_oracle[p][cls];
        if (std::isinf(a) || std::isinf(b)) {
          c.Check(a == b, "masked logit mismatch");
          continue;
        }
        worst = std::max(worst, RelErr(a, b));
        c.Check(RelErr(a, b) <= 1e-9, "self logit mismatch at instance " +
                                          std::to_string(instances));
      }
    }
  }
  return c.Finish(std::to_string(instances) + " instances, max deviation " + Fmt("%.2e", worst));
}

// ---- 3 ---------------------------------------------------------------------

TokenGrid Transformed(const TokenGrid& g, const std::function<void(MatrixF&)>& f) {
  MatrixF t = g.tokens();
  f(t);
  return TokenGrid(std::move(t), g.grid(), g.image_id());
}

double MaxLogitDiff(const std::vector<std::vector<double>>& a,
                    const std::vector<std::vector<double>>& b) {
  double worst = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    for (std::size_t i = 0; i < a[q].size(); ++i) worst = std::max(worst, RelErr(a[q][i], b[q][i]));
  }
  return worst;
}

// Powers of two keep the rescaled float tokens exact, so only the cosine's
// own arithmetic is under test.
float RandomPowerOfTwo(Rng& rng) {
  return std::ldexp(1.0F, static_cast<int>(rng.UniformIndex(13)) - 6);
}

Outcome Invariances() {
  Checker c;
  Rng rng(303);
  double worst_shift = 0, worst_scale = 0, worst_perm = 0, worst_patch = 0;
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(4));
    const int k = 1 + static_cast<int>(rng.UniformIndex(3));
    const GridShape grid{2 + static_cast<int>(rng.UniformIndex(2)), 2 + static_cast<int>(rng.UniformIndex(2))};
    const Episode e = RandomEpisode(rng, n, k, grid, 6, 2);
    const int L = grid.size();
    const auto v = RandomVector(rng, static_cast<std::size_t>(e.num_support_tokens()), 0.5);
    const double tau = 0.3;
    ClassifierConfig cfg;
    cfg.tau = tau;
    const auto base = Predict(e, v, cfg);
    const auto base_logits = LibraryLogits(e, v, tau);

    // Constant shift of v: probabilities unchanged.
    std::vector<double> shifted(v);
    const double shift = rng.Uniform(-3.0, 3.0);
    for (double& x : shifted) x += shift;
    const auto moved = Predict(e, shifted, cfg);
    for (std::size_t q = 0; q < base.size(); ++q) {
      for (std::size_t j = 0; j < base[q].probs.size(); ++j) {
        worst_shift = std::max(worst_shift, std::abs(base[q].probs[j] - moved[q].probs[j]));
      }
    }

    // Positive per-image rescaling of every token.
    std::vector<LabeledGrid> support, queries;
    for (const auto& s : e.support()) {
      const float a = RandomPowerOfTwo(rng);
      support.push_back({Transformed(s.grid, [a](MatrixF& t) { for (float& x : t.data()) x *= a; }), s.label});
    }
    for (const auto& q : e.queries()) {
      const float a = RandomPowerOfTwo(rng);
      queries.push_back({Transformed(q.grid, [a](MatrixF& t) { for (float& x : t.data()) x *= a; }), q.label});
    }
    worst_scale = std::max(worst_scale,
                           MaxLogitDiff(base_logits, LibraryLogits(Episode(n, k, support, queries), v, tau)));

    // Permute shots within each class, carrying their weights along.
    std::vector<LabeledGrid> permuted;
    std::vector<double> v_perm;
    for (int cls = 0; cls < n; ++cls) {
      std::vector<int> order(static_cast<std::size_t>(k));
      std::iota(order.begin(), order.end(), 0);
      for (int a = k - 1; a > 0; --a) {
        std::swap(order[static_cast<std::size_t>(a)],
                  order[rng.UniformIndex(static_cast<std::uint64_t>(a + 1))]);
      }
      for (int shot : order) {
        permuted.push_back(e.support()[static_cast<std::size_t>(cls * k + shot)]);
        const auto begin = v.begin() + (cls * k + shot) * L;
        v_perm.insert(v_perm.end(), begin, begin + L);
      }
    }
    worst_perm = std::max(worst_perm,
                          MaxLogitDiff(base_logits,
                                       LibraryLogits(Episode(n, k, permuted, e.queries()), v_perm, tau)));

    // Permute patches of every query image.
    std::vector<LabeledGrid> shuffled;
    for (const auto& q : e.queries()) {
      std::vector<std::size_t> order(static_cast<std::size_t>(L));
      std::iota(order.begin(), order.end(), 0U);
      for (std::size_t a = order.size() - 1; a > 0; --a) std::swap(order[a], order[rng.UniformIndex(a + 1)]);
      const MatrixF& src = q.grid.tokens();
      MatrixF dst(src.rows(), src.cols());
      for (std::size_t l = 0; l < order.size(); ++l) {
        std::copy(src.row(order[l]).begin(), src.row(order[l]).end(), dst.row(l).begin());
      }
      shuffled.push_back({TokenGrid(dst, q.grid.grid(), q.grid.image_id()), q.label});
    }
    worst_patch = std::max(worst_patch,
                           MaxLogitDiff(base_logits,
                                        LibraryLogits(Episode(n, k, e.support(), shuffled), v, tau)));
  }
  c.Check(worst_shift <= 1e-9, "shift " + Fmt("%.2e", worst_shift));
  c.Check(worst_scale <= 1e-9, "scale " + Fmt("%.2e", worst_scale));
  c.Check(worst_perm <= 1e-9, "support permutation " + Fmt("%.2e", worst_perm));
  c.Check(worst_patch <= 1e-9, "query patch permutation " + Fmt("%.2e", worst_patch));
  const double worst = std::max({worst_shift, worst_scale, worst_perm, worst_patch});
  return c.Finish("4 invariances x 20 instances, max deviation " + Fmt("%.2e", worst));
}

// ---- 4 ---------------------------------------------------------------------

Outcome Masks() {
  Checker c;
  int cases = 0;
  for (int n : {2, 3}) {
    for (int k : {2, 3}) {
      for (int l : {1, 4, 9}) {
        const Mask m = BuildMask(n, k, l, {1, l}, 5);
        c.Check(m.mode() == Mask::Mode::kBlockDiagonal, "K>1 mask is not block-diagonal");
        c.Check(m.Count() == static_cast<std::int64_t>(n) * k * l * l, "block-diagonal count");
        ++cases;
      }
    }
  }
  const int n = 2;
  for (int h = 1; h <= 8; ++h) {
    for (int w = 1; w <= 8; ++w) {
      const GridShape grid{h, w};
      const int L = grid.size();
      for (int window : {1, 3, 5, 7}) {
        const Mask m = BuildMask(n, 1, L, grid, window);
        std::int64_t total = 0;
        for (int col = 0; col < n * L; ++col) {
          const int img = col / L;
          int count = 0;
          for (int row = 0; row < n * L; ++row) {
            if (!m.IsMasked(row, col)) continue;
            ++count;
            c.Check(row / L == img, "local mask crosses images");
          }
          const int patch = col % L;
          c.Check(count == ClippedWindowCount(grid, grid.RowOf(patch), grid.ColOf(patch), window),
                  "window count at " + std::to_string(h) + "x" + std::to_string(w) + " m=" +
                      std::to_string(window));
          total += count;
        }
        c.Check(total == m.Count(), "Count() disagrees with IsMasked");
        ++cases;
      }
    }
  }
  return c.Finish(std::to_string(cases) + " mask configurations checked exhaustively");
}

// ---- 5 ---------------------------------------------------------------------

Outcome Distractors() {
  Checker c;
  const DistractorDataset data = MakeDistractorDataset(DistractorBenchmarkSpec());
  EvalConfig cfg;
  cfg.n_way = 5;
  cfg.k_shot = 5;
  cfg.episodes = 100;
  cfg.seed = 0;
  cfg.steps_sweep = {0, 15};
  const auto reports = EvaluateSweep(data.dataset, cfg);
  const double gain = reports[1].mean - reports[0].mean;
  c.Check(gain >= 0.02, "accuracy gain " + Fmt("%.4f", gain));

  // Loss at v_final against v_0; monotone counts every step as well.
  int decreasing = 0, monotone = 0;
  for (int i = 0; i < cfg.episodes; ++i) {
    const Episode e = SampleEpisode(data.dataset, cfg, i);
    const InnerLoopTrace trace = OptimizeImportance(e, cfg.classifier);
    bool strict = true;
    for (std::size_t t = 1; t < trace.losses.size(); ++t) strict &= trace.losses[t] < trace.losses[t - 1];
    monotone += strict ? 1 : 0;
    decreasing += trace.losses.back() < trace.losses.front() ? 1 : 0;
  }
  c.Check(decreasing >= 95, "loss decreased in only " + std::to_string(decreasing) + "/100");
  return c.Finish("acc " + Fmt("%.4f", reports[0].mean) + " -> " + Fmt("%.4f", reports[1].mean) +
                  " (gain " + Fmt("%+.4f", gain) + "), final loss below initial in " +
                  std::to_string(decreasing) + "/100 episodes (every step in " +
                  std::to_string(monotone) + ")");
}

// ---- 6 ---------------------------------------------------------------------

Outcome Sanity() {
  Checker c;
  const TokenDataset ortho = OrthogonalDataset(10, 25, {6, 6}, 16, 0.05, 5);
  std::string summary;
  for (int k : {1, 5}) {
    EvalConfig cfg;
    cfg.n_way = 5;
    cfg.k_shot = k;
    cfg.episodes = 50;
    cfg.seed = 11;
    const EvalReport r = Evaluate(ortho, cfg);
    c.Check(r.mean == 1.0 && r.ci95 == 0.0, "orthogonal K=" + std::to_string(k) + " mean " +
                                                Fmt("%.4f", r.mean));
    summary += "orthogonal K=" + std::to_string(k) + " " + Fmt("%.3f", r.mean) + " +- " +
               Fmt("%.3f", r.ci95) + ", ";
  }
  const TokenDataset noise = RandomTokenDataset(20, 30, {3, 3}, 16, 6);
  EvalConfig cfg;
  cfg.n_way = 5;
  cfg.k_shot = 5;
  cfg.episodes = 600;
  cfg.seed = 12;
  const EvalReport r = Evaluate(noise, cfg);
  c.Check(std::abs(r.mean - 0.2) <= 0.04, "random mean " + Fmt("%.4f", r.mean));
  summary += "random 5-way " + Fmt("%.3f", r.mean) + " +- " + Fmt("%.3f", r.ci95);
  return c.Finish(summary);
}

// ---- 7 ---------------------------------------------------------------------

Outcome Stability() {
  Checker c;
  Rng rng(707);
  double worst = 0.0;
  int evaluated = 0;
  for (double tau : {1.0, 0.25, 0.05}) {
    for (double magnitude : {1.0, 1e2, 1e3, 1e4}) {
      const Episode e = RandomEpisode(rng, 3, 2, {2, 2}, 5, 2);
      std::vector<double> v = RandomVector(rng, static_cast<std::size_t>(e.num_support_tokens()));
      for (double& x : v) x = std::clamp(x * magnitude, -magnitude, magnitude);
      const QueryScorer scorer(e, tau);
      const SimilarityTensor s_tilde = ApplyReweighting(scorer.similarity(), v);
      const int L = e.tokens_per_image();
      for (int q = 0; q < e.num_queries(); ++q) {
        const auto logits = scorer.Logits(v, q);
        const auto direct = ClassLogits(s_tilde, tau, q);
        for (int cls = 0; cls < e.n_way(); ++cls) {
          std::vector<double> terms;
          for (std::size_t j = 0; j < s_tilde.values.rows(); ++j) {
            if (s_tilde.row_class[j] != cls) continue;
            for (int l = 0; l < L; ++l) {
              terms.push_back(scorer.similarity().values(j, static_cast<std::size_t>(q * L + l)) + v[j]);
            }
          }
          const double oracle = testing::ExtendedLogSumExp(terms, tau);
          for (double got : {logits[static_cast<std::size_t>(cls)], direct[static_cast<std::size_t>(cls)]}) {
            c.Check(std::isfinite(got), "non-finite logit at tau " + Fmt("%g", tau));
            const double err = std::abs(got - oracle) / std::max(1.0, std::abs(oracle));
            worst = std::max(worst, err);
            c.Check(err <= 1e-9, "relative error " + Fmt("%.2e", err));
          }
          ++evaluated;
        }
      }
      const SupportObjective obj(e, MaskFor(e), tau);
      const auto eval = obj.Evaluate(v);
      c.Check(std::isfinite(eval.loss), "support loss not finite");
      for (double g : eval.gradient) c.Check(std::isfinite(g), "gradient not finite");
    }
  }
  return c.Finish(std::to_string(evaluated) + " class logits up to 1e4/tau, max relative error " +
                  Fmt("%.2e", worst));
}

// ---- 8 ---------------------------------------------------------------------

Outcome ByteExactness() {
  Checker c;
  const std::filesystem::path data_dir = TOKENSHOT_TEST_DATA_DIR;
  const auto golden = ReadFileBytes(data_dir / "golden_1x1x1.tok");
  const std::vector<std::uint8_t> expected = {'F', 'T', 'U', 'R', 1, 0, 0, 0, 1, 0, 0, 0,
                                              1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0x80, 0x3f};
  c.Check(golden == expected, "golden file content");
  const auto grids = ReadTokens(data_dir / "golden_1x1x1.tok");
  c.Check(grids.size() == 1 && grids[0].tokens()(0, 0) == 1.0F, "golden decode");
  c.Check(EncodeTokens(grids) == golden, "golden re-encode");
  const auto golden2 = ReadFileBytes(data_dir / "golden_2x2x3.tok");
  c.Check(EncodeTokens(ReadTokens(data_dir / "golden_2x2x3.tok")) == golden2, "second golden re-encode");

  testing::TempDir dir;
  Rng rng(808);
  std::vector<TokenGrid> random;
  for (int i = 0; i < 7; ++i) random.push_back(testing::RandomGrid(rng, {3, 4}, 9, "r" + std::to_string(i)));
  WriteTokens(random, dir / "a.tok");
  WriteTokens(ReadTokens(dir / "a.tok"), dir / "b.tok");
  const auto bytes = ReadFileBytes(dir / "a.tok");
  c.Check(bytes == ReadFileBytes(dir / "b.tok"), "token write/read/write not byte-exact");
  c.Check(bytes.size() == 20 + 7 * 12 * 9 * 4, "token file size");
  const auto back = ReadTokens(dir / "a.tok");
  for (std::size_t i = 0; i < random.size(); ++i) c.Check(back[i].tokens() == random[i].tokens(), "token values");

  // Heatmaps from two independent runs of the full pipeline.
  const DistractorDataset data = MakeDistractorDataset(DistractorBenchmarkSpec());
  EvalConfig cfg;
  std::vector<std::vector<std::uint8_t>> runs[2];
  for (int run = 0; run < 2; ++run) {
    const Episode e = SampleEpisode(data.dataset, cfg, 3);
    const auto trace = OptimizeImportance(e, cfg.classifier);
    const auto maps = RenderImportance(trace.v_final, e, 4);
    const auto paths = WriteHeatmaps(maps, dir / ("hm" + std::to_string(run)), "3");
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto file = ReadFileBytes(paths[i]);
      runs[run].push_back(file);
      c.Check(file == EncodePnm(maps[i].image), "heatmap file differs from encoded image");
      c.Check(EncodePnm(ReadPnm(paths[i])) == file, "heatmap read/write not byte-exact");
    }
  }
  c.Check(runs[0] == runs[1] && runs[0].size() == 25, "heatmaps differ across runs");
  return c.Finish("golden header, token round trips and " + std::to_string(runs[0].size()) +
                  " heatmaps byte-identical");
}

// ---- 9 ---------------------------------------------------------------------

std::string StripTiming(const EvalReport& r) {
  auto j = nlohmann::json::parse(ReportToJson(r));
  j.erase("wall_ms_per_episode");
  return j.dump();
}

Outcome ParallelDeterminism() {
  Checker c;
  const DistractorDataset data = MakeDistractorDataset(DistractorBenchmarkSpec());
  EvalConfig cfg;
  cfg.episodes = 40;
  cfg.seed = 9;
  cfg.steps_sweep = {0, 15};
  cfg.jobs = 1;
  const auto serial = EvaluateSweep(data.dataset, cfg);
  cfg.jobs = 8;
  const auto parallel = EvaluateSweep(data.dataset, cfg);
  c.Check(serial.size() == parallel.size(), "report count");
  for (std::size_t i = 0; i < serial.size(); ++i) {
    c.Check(StripTiming(serial[i]) == StripTiming(parallel[i]),
            "JSON differs for steps " + std::to_string(serial[i].config.classifier.steps));
  }

  // Same comparison through the command-line entry point.
  testing::TempDir dir;
  const std::string manifest = testing::WriteDatasetFiles(data.dataset, dir / "data").string();
  std::string reports[2];
  for (int run = 0; run < 2; ++run) {
    const std::string out = (dir / ("jobs" + std::to_string(run) + ".json")).string();
    std::ostringstream sink, err;
    const int code = cli::Run({"eval", "--manifest", manifest, "--episodes", "40", "--seed", "9",
                               "--jobs", run == 0 ? "1" : "8", "--out", out},
                              sink, err);
    c.Check(code == 0, "eval exited " + std::to_string(code) + ": " + err.str());
    if (code != 0) return c.Finish("eval failed");
    auto j = nlohmann::json::parse(testing::ReadText(out));
    j.erase("wall_ms_per_episode");
    reports[run] = j.dump();
  }
  c.Check(reports[0] == reports[1], "eval --jobs 1 and --jobs 8 JSON differ");
  return c.Finish("jobs 1 vs 8: " + std::to_string(serial.size()) +
                  " sweep reports and the eval JSON identical apart from wall time");
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace
}  // namespace tokenshot

int main() {
  using namespace tokenshot;
  const Criterion criteria[] = {
      {1, "gradient matches central differences", 10, GradientCheck},
      {2, "vectorised scoring matches brute force", 10, OracleEquivalence},
      {3, "invariances", 10, Invariances},
      {4, "mask counts", 5, Masks},
      {5, "importance reweighting helps on distractors", 120, Distractors},
      {6, "sanity datasets", 120, Sanity},
      {7, "numerical stability", 5, Stability},
      {8, "byte exactness", 5, ByteExactness},
      {9, "parallel determinism", 60, ParallelDeterminism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      o.passed = false;
      o.detail += " | exceeded " + std::to_string(static_cast<int>(c.budget_seconds)) + " s budget";
    }
    std::printf("[%s] criterion %d: %s (%.2f s) %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name,
                secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}

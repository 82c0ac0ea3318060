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

#include "tokenshot/importance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tokenshot/errors.hpp"

namespace tokenshot {

Mask::Mask(Mode mode, int size, int window)
    : mode_(mode),
      size_(size),
      window_(window),
      masked_(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0) {
  if (size < 0) throw InvalidArgumentError("mask size must be non-negative");
}

std::int64_t Mask::Count() const {
  return std::count(masked_.begin(), masked_.end(), std::uint8_t{1});
}

int ClippedWindowCount(GridShape grid, int row, int col, int window) {
  const int h = window / 2;
  const int rows = std::min(row + h, grid.height - 1) - std::max(row - h, 0) + 1;
  const int cols = std::min(col + h, grid.width - 1) - std::max(col - h, 0) + 1;
  return rows * cols;
}

Mask BuildMask(int n_way, int k_shot, int tokens_per_image, GridShape grid,
               int window) {
  if (grid.height < 1 || grid.width < 1 || grid.size() != tokens_per_image) {
    throw InvalidArgumentError("grid " + std::to_string(grid.height) + "x" +
                               std::to_string(grid.width) + " does not match L = " +
                               std::to_string(tokens_per_image));
  }
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgumentError("mask window must be odd and >= 1, got " +
                               std::to_string(window));
  }
  if (n_way < 1 || k_shot < 1) {
    throw InvalidArgumentError("mask needs N >= 1 and K >= 1");
  }
  const int L = tokens_per_image;
  const int images = n_way * k_shot;

  if (k_shot > 1) {
    Mask mask(Mask::Mode::kBlockDiagonal, images * L);
    for (int image = 0; image < images; ++image) {
      for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) mask.Set(image * L + r, image * L + c);
      }
    }
    return mask;
  }

  // Window centred on the pseudo-query (column) token, covering support
  // (row) tokens of the same image.
  Mask mask(Mask::Mode::kLocalWindow, images * L, window);
  const int h = window / 2;
  for (int image = 0; image < images; ++image) {
    for (int c = 0; c < L; ++c) {
      const int cr = grid.RowOf(c);
      const int cc = grid.ColOf(c);
      for (int r = 0; r < L; ++r) {
        if (std::abs(grid.RowOf(r) - cr) <= h && std::abs(grid.ColOf(r) - cc) <= h) {
          mask.Set(image * L + r, image * L + c);
        }
      }
    }
  }
  return mask;
}

SupportObjective::SupportObjective(const Episode& episode, const Mask& mask,
                                   double tau)
    : tau_(tau) {
  if (!(tau > 0.0)) throw InvalidArgumentError("tau must be positive");
  if (mask.size() != episode.num_support_tokens()) {
    throw InvalidArgumentError("mask covers " + std::to_string(mask.size()) +
                               " tokens, episode has N*K*L = " +
                               std::to_string(episode.num_support_tokens()));
  }
  const SupportLayout layout = FlattenSupport(episode);
  similarity_.values = CosineSimilarity(layout.tokens, layout.tokens);
  similarity_.row_class = layout.token_class;
  similarity_.num_classes = episode.n_way();
  similarity_.tokens_per_group = episode.tokens_per_image();

  const int size = mask.size();
  for (int r = 0; r < size; ++r) {
    auto row = similarity_.values.row(static_cast<std::size_t>(r));
    for (int c = 0; c < size; ++c) {
      if (mask.IsMasked(r, c)) row[static_cast<std::size_t>(c)] = kMasked;
    }
  }

  const int images = episode.n_way() * episode.k_shot();
  const auto L = static_cast<std::size_t>(episode.tokens_per_image());
  log_column_mass_ = MatrixD(static_cast<std::size_t>(size),
                             static_cast<std::size_t>(images));
  for (std::size_t j = 0; j < static_cast<std::size_t>(size); ++j) {
    const auto row = similarity_.values.row(j);
    std::vector<double> scaled(L);
    for (std::size_t p = 0; p < static_cast<std::size_t>(images); ++p) {
      for (std::size_t c = 0; c < L; ++c) scaled[c] = row[p * L + c] / tau_;
      log_column_mass_(j, p) = LogSumExp(scaled);
    }
  }

  labels_.resize(static_cast<std::size_t>(images));
  for (int p = 0; p < images; ++p) {
    labels_[static_cast<std::size_t>(p)] = p / episode.k_shot();
  }
}

MatrixD SupportObjective::SelfLogits(std::span<const double> v) const {
  const SimilarityTensor s_tilde = ApplyReweighting(similarity_, v);
  MatrixD out(labels_.size(), static_cast<std::size_t>(num_classes()));
  for (int p = 0; p < num_pseudo_queries(); ++p) {
    const auto logits = ClassLogits(s_tilde, tau_, p);
    std::ranges::copy(logits, out.row(static_cast<std::size_t>(p)).begin());
  }
  return out;
}

// Loss L = sum_p [ logsumexp_n A_pn - A_p,y(p) ] with
//   A_pn = log sum_{j in class n, c in p} exp((S_jc + v_j) / tau)
//        = log sum_{j in class n} exp(M_jp + v_j / tau),
//   M_jp = log sum_{c in p} exp(S_jc / tau).
// Chain rule:
//   dL/dA_pn   = softmax(A_p)_n - [n == y(p)]             (delta_pn)
//   dA_pn/dv_j = (1/tau) * exp(M_jp + v_j / tau - A_pn)    for j in class n
// and 0 otherwise. Masked entries contribute exp(-inf) = 0 to M.
SupportObjective::Evaluation SupportObjective::Evaluate(
    std::span<const double> v) const {
  const auto rows = similarity_.values.rows();
  if (v.size() != rows) {
    throw InvalidArgumentError("importance weights have length " +
                               std::to_string(v.size()) + ", expected " +
                               std::to_string(rows));
  }
  const auto N = static_cast<std::size_t>(num_classes());

  Evaluation result{0.0, std::vector<double>(rows, 0.0)};
  std::vector<double> z(rows);
  std::vector<double> w(rows);
  std::vector<double> class_max(N);
  std::vector<double> class_sum(N);
  std::vector<double> a(N);

  for (std::size_t p = 0; p < labels_.size(); ++p) {
    std::fill(class_max.begin(), class_max.end(), kMasked);
    std::fill(class_sum.begin(), class_sum.end(), 0.0);
    for (std::size_t j = 0; j < rows; ++j) {
      const auto n = static_cast<std::size_t>(similarity_.row_class[j]);
      z[j] = log_column_mass_(j, p) + v[j] / tau_;
      class_max[n] = std::max(class_max[n], z[j]);
    }
    for (std::size_t j = 0; j < rows; ++j) {
      const auto n = static_cast<std::size_t>(similarity_.row_class[j]);
      w[j] = class_max[n] == kMasked ? 0.0 : std::exp(z[j] - class_max[n]);
      class_sum[n] += w[j];
    }
    for (std::size_t n = 0; n < N; ++n) {
      a[n] = class_max[n] == kMasked ? kMasked : class_max[n] + std::log(class_sum[n]);
    }

    const auto y = static_cast<std::size_t>(labels_[p]);
    if (a[y] == kMasked) {
      result.loss = std::numeric_limits<double>::infinity();
      result.gradient.clear();
      return result;
    }
    const double lse = LogSumExp(a);
    result.loss += lse - a[y];

    for (std::size_t j = 0; j < rows; ++j) {
      if (w[j] == 0.0) continue;
      const auto n = static_cast<std::size_t>(similarity_.row_class[j]);
      const double delta = std::exp(a[n] - lse) - (n == y ? 1.0 : 0.0);
      result.gradient[j] += delta * (w[j] / class_sum[n]) / tau_;
    }
  }
  if (!std::isfinite(result.loss)) result.gradient.clear();
  return result;
}

double SupportObjective::Loss(std::span<const double> v) const {
  return Evaluate(v).loss;
}

std::vector<double> SupportObjective::Gradient(std::span<const double> v) const {
  Evaluation e = Evaluate(v);
  if (!std::isfinite(e.loss)) {
    throw NumericalError("support loss is not finite; gradient undefined");
  }
  return std::move(e.gradient);
}

MatrixD SupportSelfLogits(const Episode& episode, std::span<const double> v,
                          const Mask& mask, double tau) {
  return SupportObjective(episode, mask, tau).SelfLogits(v);
}

double SupportLoss(const Episode& episode, std::span<const double> v,
                   const Mask& mask, double tau) {
  return SupportObjective(episode, mask, tau).Loss(v);
}

std::vector<double> SupportLossGradient(const Episode& episode,
                                        std::span<const double> v,
                                        const Mask& mask, double tau) {
  return SupportObjective(episode, mask, tau).Gradient(v);
}

namespace {

SupportObjective MakeObjective(const Episode& episode,
                               const ClassifierConfig& config) {
  config.Validate();
  const Mask mask = BuildMask(episode.n_way(), episode.k_shot(),
                              episode.tokens_per_image(), episode.grid(),
                              config.mask_window);
  return SupportObjective(episode, mask, config.ResolvedTau(episode.dim()));
}

[[noreturn]] void ThrowNonFinite(int step, double loss) {
  throw NumericalError("support loss is " + std::to_string(loss) + " at step " +
                       std::to_string(step) +
                       " (a pseudo-query has every same-class pair masked)");
}

}  // namespace

InnerLoopTrace OptimizeImportance(const Episode& episode,
                                  const ClassifierConfig& config) {
  const SupportObjective objective = MakeObjective(episode, config);
  InnerLoopTrace trace;
  trace.v_final.assign(static_cast<std::size_t>(objective.num_weights()), 0.0);

  for (int step = 0; step < config.steps; ++step) {
    auto e = objective.Evaluate(trace.v_final);
    if (!std::isfinite(e.loss)) ThrowNonFinite(step, e.loss);
    trace.losses.push_back(e.loss);
    for (std::size_t j = 0; j < trace.v_final.size(); ++j) {
      trace.v_final[j] -= config.lr * e.gradient[j];
    }
    ++trace.steps_taken;
  }
  const double final_loss = objective.Loss(trace.v_final);
  if (!std::isfinite(final_loss)) ThrowNonFinite(config.steps, final_loss);
  trace.losses.push_back(final_loss);
  return trace;
}

std::vector<std::vector<double>> ImportanceSnapshots(
    const Episode& episode, const ClassifierConfig& config,
    std::span<const int> step_counts) {
  if (!std::ranges::is_sorted(step_counts)) {
    throw InvalidArgumentError("snapshot step counts must be ascending");
  }
  config.Validate();
  std::vector<double> v(static_cast<std::size_t>(episode.num_support_tokens()), 0.0);
  std::vector<std::vector<double>> out;
  out.reserve(step_counts.size());
  if (step_counts.empty()) return out;
  if (step_counts.front() < 0) throw InvalidArgumentError("negative step count");

  std::size_t next = 0;
  while (next < step_counts.size() && step_counts[next] == 0) {
    out.push_back(v);
    ++next;
  }
  if (next == step_counts.size()) return out;

  const SupportObjective objective = MakeObjective(episode, config);
  for (int step = 0; next < step_counts.size(); ++step) {
    auto e = objective.Evaluate(v);
    if (!std::isfinite(e.loss)) ThrowNonFinite(step, e.loss);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= config.lr * e.gradient[j];
    while (next < step_counts.size() && step_counts[next] == step + 1) {
      out.push_back(v);
      ++next;
    }
  }
  return out;
}

}  // namespace tokenshot

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

#include "tokenshot/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tokenshot/errors.hpp"

namespace tokenshot {
namespace {

template <typename T>
double CosineImpl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw InvalidArgumentError("cosine of vectors with different lengths");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu < kMinNorm || nv < kMinNorm) return 0.0;
  return dot / (nu * nv);
}

// Rows scaled to unit length; rows with norm below kMinNorm become zero so
// their similarities come out as exactly 0.
MatrixD NormalizedRows(const MatrixF& m) {
  MatrixD out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double ss = 0.0;
    for (float x : m.row(r)) ss += static_cast<double>(x) * x;
    const double norm = std::sqrt(ss);
    if (norm < kMinNorm) continue;
    auto dst = out.row(r);
    auto src = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c] / norm;
  }
  return out;
}

}  // namespace

double Cosine(std::span<const float> u, std::span<const float> v) {
  return CosineImpl(u, v);
}

double Cosine(std::span<const double> u, std::span<const double> v) {
  return CosineImpl(u, v);
}

MatrixD CosineSimilarity(const MatrixF& a, const MatrixF& b) {
  if (a.cols() != b.cols()) {
    throw InvalidArgumentError("token dimension mismatch: " +
                               std::to_string(a.cols()) + " vs " +
                               std::to_string(b.cols()));
  }
  const MatrixD an = NormalizedRows(a);
  const MatrixD bn = NormalizedRows(b);
  MatrixD out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto x = an.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto y = bn.row(j);
      double dot = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) dot += x[d] * y[d];
      // Rounding can push |dot| a hair above 1 for parallel vectors.
      dst[j] = std::clamp(dot, -1.0, 1.0);
    }
  }
  return out;
}

SimilarityTensor BuildSimilarity(const SupportLayout& support, int num_classes,
                                 const MatrixF& query_tokens,
                                 int tokens_per_query) {
  if (tokens_per_query < 1 ||
      query_tokens.rows() % static_cast<std::size_t>(tokens_per_query) != 0) {
    throw InvalidArgumentError("query token count is not a multiple of L");
  }
  SimilarityTensor s;
  s.values = CosineSimilarity(support.tokens, query_tokens);
  s.row_class = support.token_class;
  s.num_classes = num_classes;
  s.tokens_per_group = tokens_per_query;
  return s;
}

SimilarityTensor ApplyReweighting(const SimilarityTensor& s,
                                  std::span<const double> v) {
  if (v.size() != s.values.rows()) {
    throw InvalidArgumentError("importance weights have length " +
                               std::to_string(v.size()) + ", expected " +
                               std::to_string(s.values.rows()));
  }
  SimilarityTensor out = s;
  for (std::size_t j = 0; j < out.values.rows(); ++j) {
    for (double& x : out.values.row(j)) x += v[j];
  }
  return out;
}

double LogSumExp(std::span<const double> x) {
  double m = kMasked;
  for (double xi : x) m = std::max(m, xi);
  if (m == kMasked) return kMasked;
  double sum = 0.0;
  for (double xi : x) sum += std::exp(xi - m);
  return m + std::log(sum);
}

std::vector<double> ClassLogits(const SimilarityTensor& s_tilde, double tau,
                                int group) {
  if (!(tau > 0.0)) throw InvalidArgumentError("tau must be positive");
  if (group < 0 || group >= s_tilde.num_groups()) {
    throw InvalidArgumentError("query index " + std::to_string(group) +
                               " out of range [0, " +
                               std::to_string(s_tilde.num_groups()) + ")");
  }
  const auto c0 = static_cast<std::size_t>(group * s_tilde.tokens_per_group);
  const auto c1 = c0 + static_cast<std::size_t>(s_tilde.tokens_per_group);
  const auto num_classes = static_cast<std::size_t>(s_tilde.num_classes);

  // Two passes per class: max of the scaled entries, then the shifted sum.
  std::vector<double> max_scaled(num_classes, kMasked);
  for (std::size_t j = 0; j < s_tilde.values.rows(); ++j) {
    const auto n = static_cast<std::size_t>(s_tilde.row_class[j]);
    const auto row = s_tilde.values.row(j);
    for (std::size_t c = c0; c < c1; ++c) {
      max_scaled[n] = std::max(max_scaled[n], row[c] / tau);
    }
  }
  std::vector<double> sums(num_classes, 0.0);
  for (std::size_t j = 0; j < s_tilde.values.rows(); ++j) {
    const auto n = static_cast<std::size_t>(s_tilde.row_class[j]);
    if (max_scaled[n] == kMasked) continue;
    const auto row = s_tilde.values.row(j);
    for (std::size_t c = c0; c < c1; ++c) {
      sums[n] += std::exp(row[c] / tau - max_scaled[n]);
    }
  }
  std::vector<double> logits(num_classes);
  for (std::size_t n = 0; n < num_classes; ++n) {
    logits[n] = max_scaled[n] == kMasked ? kMasked
                                         : max_scaled[n] + std::log(sums[n]);
  }
  return logits;
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> probs(logits.size(), 0.0);
  if (lse == kMasked) return probs;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - lse);
  }
  return probs;
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

QueryScorer::QueryScorer(const Episode& episode, double tau) : tau_(tau) {
  if (!(tau > 0.0)) throw InvalidArgumentError("tau must be positive");
  similarity_ = BuildSimilarity(FlattenSupport(episode), episode.n_way(),
                                FlattenQueries(episode), episode.tokens_per_image());
  const std::size_t rows = similarity_.values.rows();
  const auto L = static_cast<std::size_t>(similarity_.tokens_per_group);
  const auto Q = static_cast<std::size_t>(similarity_.num_groups());
  log_query_mass_ = MatrixD(rows, Q);
  std::vector<double> scaled(L);
  for (std::size_t j = 0; j < rows; ++j) {
    const auto row = similarity_.values.row(j);
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t c = 0; c < L; ++c) scaled[c] = row[q * L + c] / tau_;
      log_query_mass_(j, q) = LogSumExp(scaled);
    }
  }
}

std::vector<double> QueryScorer::Logits(std::span<const double> v, int query) const {
  const std::size_t rows = similarity_.values.rows();
  if (v.size() != rows) {
    throw InvalidArgumentError("importance weights have length " +
                               std::to_string(v.size()) + ", expected N*K*L = " +
                               std::to_string(rows));
  }
  if (query < 0 || query >= num_queries()) {
    throw InvalidArgumentError("query index " + std::to_string(query) + " out of range");
  }
  const auto N = static_cast<std::size_t>(similarity_.num_classes);
  const auto q = static_cast<std::size_t>(query);
  std::vector<double> class_max(N, kMasked);
  for (std::size_t j = 0; j < rows; ++j) {
    const auto n = static_cast<std::size_t>(similarity_.row_class[j]);
    class_max[n] = std::max(class_max[n], log_query_mass_(j, q) + v[j] / tau_);
  }
  std::vector<double> sums(N, 0.0);
  for (std::size_t j = 0; j < rows; ++j) {
    const auto n = static_cast<std::size_t>(similarity_.row_class[j]);
    if (class_max[n] == kMasked) continue;
    sums[n] += std::exp(log_query_mass_(j, q) + v[j] / tau_ - class_max[n]);
  }
  std::vector<double> logits(N);
  for (std::size_t n = 0; n < N; ++n) {
    logits[n] = class_max[n] == kMasked ? kMasked : class_max[n] + std::log(sums[n]);
  }
  return logits;
}

std::vector<ClassPrediction> QueryScorer::Predict(std::span<const double> v) const {
  std::vector<ClassPrediction> out;
  out.reserve(static_cast<std::size_t>(num_queries()));
  for (int q = 0; q < num_queries(); ++q) {
    ClassPrediction p;
    p.logits = Logits(v, q);
    p.probs = Softmax(p.logits);
    p.predicted = ArgMax(p.probs);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ClassPrediction> Predict(const Episode& episode,
                                     std::span<const double> v,
                                     const ClassifierConfig& config) {
  config.Validate();
  if (v.size() != static_cast<std::size_t>(episode.num_support_tokens())) {
    throw InvalidArgumentError("importance weights have length " +
                               std::to_string(v.size()) + ", expected N*K*L = " +
                               std::to_string(episode.num_support_tokens()));
  }
  return QueryScorer(episode, config.ResolvedTau(episode.dim())).Predict(v);
}

}  // namespace tokenshot

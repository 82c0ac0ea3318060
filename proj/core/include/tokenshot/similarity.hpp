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

// Classification by reweighted token similarity.
//
// Every support token is compared with every query token. An importance
// weight v_j is added to all similarities of support token j, and each class
// logit is the LogSumExp of the temperature-scaled similarities between the
// query's tokens and that class's support tokens:
//
//   logit_n(q) = log sum_{k, l_s, l_q} exp((S[(n,k,l_s), (q,l_q)] + v_(n,k,l_s)) / tau)
//
// Class probabilities are softmax(logit). Storage is float, arithmetic double.

#ifndef TOKENSHOT_SIMILARITY_HPP_
#define TOKENSHOT_SIMILARITY_HPP_

#include <limits>
#include <span>
#include <vector>

#include "tokenshot/token_model.hpp"

namespace tokenshot {

/// Similarities at or below this are treated as excluded pairs.
inline constexpr double kMasked = -std::numeric_limits<double>::infinity();

/// Norms below this make cosine() return 0.
inline constexpr double kMinNorm = 1e-12;

double Cosine(std::span<const float> u, std::span<const float> v);
double Cosine(std::span<const double> u, std::span<const double> v);

/// Pairwise cosine similarities, a.rows() x b.rows().
MatrixD CosineSimilarity(const MatrixF& a, const MatrixF& b);

/// Support-vs-query similarities plus the bookkeeping needed to aggregate
/// them: rows follow the class-major support layout, columns come in
/// consecutive groups of `tokens_per_group` (one group per query image).
struct SimilarityTensor {
  MatrixD values;
  std::vector<int> row_class;
  int num_classes = 0;
  int tokens_per_group = 0;

  int num_groups() const {
    return tokens_per_group == 0
               ? 0
               : static_cast<int>(values.cols()) / tokens_per_group;
  }
};

/// Throws InvalidArgumentError on a token dimension mismatch.
SimilarityTensor BuildSimilarity(const SupportLayout& support, int num_classes,
                                 const MatrixF& query_tokens,
                                 int tokens_per_query);

/// out[j, c] = S[j, c] + v[j]; masked entries stay masked.
SimilarityTensor ApplyReweighting(const SimilarityTensor& s,
                                  std::span<const double> v);

/// Per-class LogSumExp of the temperature-scaled entries of column group
/// `group`. Masked entries are skipped; a class with no unmasked entries gets
/// -inf. Throws InvalidArgumentError for tau <= 0 or an invalid group.
std::vector<double> ClassLogits(const SimilarityTensor& s_tilde, double tau,
                                int group);

/// Max-shifted log(sum(exp(x))). Returns -inf when every x is -inf.
double LogSumExp(std::span<const double> x);

/// Softmax over logits that may contain -inf entries (which map to 0).
std::vector<double> Softmax(std::span<const double> logits);

/// First index of the maximum value.
int ArgMax(std::span<const double> values);

struct ClassPrediction {
  std::vector<double> logits;
  std::vector<double> probs;
  int predicted = 0;
};

/// Scores the queries of one episode for any number of weight vectors. The
/// similarity tensor is built once and reduced over each query's columns:
/// because v_j is constant along a row,
///   logit_n(q) = log sum_{j in class n} exp(v_j / tau + M_jq),
///   M_jq = log sum_{l_q} exp(S[j, (q, l_q)] / tau),
/// which equals ClassLogits on the reweighted tensor.
class QueryScorer {
 public:
  QueryScorer(const Episode& episode, double tau);

  int num_queries() const { return static_cast<int>(log_query_mass_.cols()); }
  const SimilarityTensor& similarity() const { return similarity_; }

  std::vector<double> Logits(std::span<const double> v, int query) const;
  std::vector<ClassPrediction> Predict(std::span<const double> v) const;

 private:
  SimilarityTensor similarity_;
  MatrixD log_query_mass_;  // (N*K*L) x Q
  double tau_;
};

/// Classifies every query of `episode` from one shared similarity tensor.
/// `v` has one weight per support token (all zeros for the unadapted
/// classifier).
std::vector<ClassPrediction> Predict(const Episode& episode,
                                     std::span<const double> v,
                                     const ClassifierConfig& config);

}  // namespace tokenshot

#endif  // TOKENSHOT_SIMILARITY_HPP_

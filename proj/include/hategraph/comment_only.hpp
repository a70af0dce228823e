#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hategraph/matrix.hpp"
#include "hategraph/prediction.hpp"

namespace hategraph {

// Single-comment scorer: feed-forward input_dim -> hidden_dim -> 1 with a
// tanh hidden layer and a final sigmoid, blind to everything but the
// comment's own text.
struct CommentOnlyConfig {
  int input_dim = 64;
  int hidden_dim = 32;

  void validate() const;
};

struct CommentOnlyParameters {
  CommentOnlyConfig config;
  Matrix w1;  // input_dim x hidden_dim
  Matrix b1;  // 1 x hidden_dim
  Matrix w2;  // hidden_dim x 1
  Matrix b2;  // 1 x 1

  static CommentOnlyParameters init(const CommentOnlyConfig& cfg, uint64_t seed, double init_scale);
  static CommentOnlyParameters zeros(const CommentOnlyConfig& cfg);
  std::vector<std::pair<std::string, Matrix*>> named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;
};

struct CommentOnlyCache {
  const Matrix* features = nullptr;
  Matrix hidden_pre;  // n x hidden_dim
  Matrix hidden;      // tanh(hidden_pre)
  std::vector<double> scores;
};

// Deterministic scalar in (0,1) for one feature row.
double comment_score(const CommentOnlyParameters& params, const double* feature);

// Scores for every row of a feature matrix.
std::vector<double> comment_scores(const CommentOnlyParameters& params, const Matrix& features,
                                   CommentOnlyCache* cache = nullptr);

// Width-0.20 bins: [0,0.2) -> 0, [0.2,0.4) -> 1, [0.4,0.6) -> 2,
// [0.6,0.8) -> 3, [0.8,1.0] -> 4. Throws on non-finite p or p outside [0,1].
int map_to_bins(double p);

// Wraps binned scores as a PredictionSet (one-hot probabilities) so the
// streaming protocol and reports treat all model kinds uniformly.
PredictionSet comment_only_predictions(const CommentOnlyParameters& params, const Matrix& features);

// Accumulates parameter gradients given d(loss)/d(score) per node.
void comment_only_backward(const CommentOnlyParameters& params, const CommentOnlyCache& cache,
                           const std::vector<double>& dscores, CommentOnlyParameters& grads);

}  // namespace hategraph

#pragma once

#include <vector>

#include "hategraph/matrix.hpp"

namespace hategraph {

inline constexpr int kNumClasses = 5;  // ordinal labels 0..4

// Per-node 5-way ordinal outputs. probs rows are softmax(logits) rows;
// labels are argmax with lowest-index tie-break.
struct PredictionSet {
  Matrix logits;  // n x 5
  Matrix probs;   // n x 5
  std::vector<int> labels;

  int node_count() const { return logits.rows; }
};

// Argmax over 5 logits, lowest index wins ties. Throws on non-finite logits.
int predict_label(const double* logits);
std::vector<int> predict(const Matrix& logits);

// Softmax + argmax over raw logits. Throws on non-finite logits.
PredictionSet finalize_predictions(Matrix logits);

}  // namespace hategraph

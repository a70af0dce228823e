#include "hategraph/prediction.hpp"

#include <cmath>
#include <stdexcept>

namespace hategraph {

int predict_label(const double* logits) {
  int best = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (!std::isfinite(logits[c])) throw std::domain_error("non-finite logit");
    if (logits[c] > logits[best]) best = c;
  }
  return best;
}

std::vector<int> predict(const Matrix& logits) {
  if (logits.cols != kNumClasses) throw std::invalid_argument("expected 5 logits per node");
  std::vector<int> labels(logits.rows);
  for (int i = 0; i < logits.rows; ++i) labels[i] = predict_label(logits.row(i));
  return labels;
}

PredictionSet finalize_predictions(Matrix logits) {
  PredictionSet out;
  out.labels = predict(logits);
  out.probs = Matrix(logits.rows, kNumClasses);
  for (int i = 0; i < logits.rows; ++i) {
    const double* l = logits.row(i);
    double m = l[0];
    for (int c = 1; c < kNumClasses; ++c) m = std::max(m, l[c]);
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
      out.probs(i, c) = std::exp(l[c] - m);
      sum += out.probs(i, c);
    }
    for (int c = 0; c < kNumClasses; ++c) out.probs(i, c) /= sum;
  }
  out.logits = std::move(logits);
  return out;
}

}  // namespace hategraph

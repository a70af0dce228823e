#include "hategraph/comment_only.hpp"

#include <cmath>
#include <stdexcept>

#include "hategraph/nn.hpp"

namespace hategraph {

void CommentOnlyConfig::validate() const {
  if (input_dim < 1 || hidden_dim < 1) throw std::invalid_argument("comment-only dims must be positive");
}

CommentOnlyParameters CommentOnlyParameters::zeros(const CommentOnlyConfig& cfg) {
  cfg.validate();
  CommentOnlyParameters p;
  p.config = cfg;
  p.w1 = Matrix(cfg.input_dim, cfg.hidden_dim);
  p.b1 = Matrix(1, cfg.hidden_dim);
  p.w2 = Matrix(cfg.hidden_dim, 1);
  p.b2 = Matrix(1, 1);
  return p;
}

CommentOnlyParameters CommentOnlyParameters::init(const CommentOnlyConfig& cfg, uint64_t seed, double init_scale) {
  CommentOnlyParameters p = zeros(cfg);
  Rng rng(seed);
  init_uniform(p.w1, cfg.input_dim, init_scale, rng);
  init_uniform(p.w2, cfg.hidden_dim, init_scale, rng);
  return p;
}

std::vector<std::pair<std::string, Matrix*>> CommentOnlyParameters::named_tensors() {
  return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
}

std::vector<std::pair<std::string, const Matrix*>> CommentOnlyParameters::named_tensors() const {
  auto mut = const_cast<CommentOnlyParameters*>(this)->named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mut.size());
  for (auto& [name, m] : mut) out.emplace_back(name, m);
  return out;
}

double comment_score(const CommentOnlyParameters& params, const double* feature) {
  const CommentOnlyConfig& cfg = params.config;
  double z = params.b2(0, 0);
  for (int hcol = 0; hcol < cfg.hidden_dim; ++hcol) {
    double pre = params.b1(0, hcol);
    for (int j = 0; j < cfg.input_dim; ++j) pre += feature[j] * params.w1(j, hcol);
    z += std::tanh(pre) * params.w2(hcol, 0);
  }
  return sigmoid(z);
}

std::vector<double> comment_scores(const CommentOnlyParameters& params, const Matrix& features,
                                   CommentOnlyCache* cache) {
  const CommentOnlyConfig& cfg = params.config;
  cfg.validate();
  if (features.cols != cfg.input_dim) {
    throw std::invalid_argument("feature width " + std::to_string(features.cols) + " does not match input_dim " +
                                std::to_string(cfg.input_dim));
  }
  for (const auto& [name, m] : params.named_tensors()) {
    if (!all_finite(*m)) throw std::domain_error("non-finite parameter in tensor '" + name + "'");
  }
  const int n = features.rows;
  Matrix pre = matmul(features, params.w1);
  add_row_inplace(pre, params.b1);
  Matrix hidden(n, cfg.hidden_dim);
  for (size_t i = 0; i < pre.data.size(); ++i) hidden.data[i] = std::tanh(pre.data[i]);
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) {
    double z = params.b2(0, 0);
    const double* hi = hidden.row(i);
    for (int hcol = 0; hcol < cfg.hidden_dim; ++hcol) z += hi[hcol] * params.w2(hcol, 0);
    scores[i] = sigmoid(z);
  }
  if (cache) {
    cache->features = &features;
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hidden);
    cache->scores = scores;
  }
  return scores;
}

int map_to_bins(double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw std::domain_error("score outside [0,1]");
  if (p < 0.2) return 0;
  if (p < 0.4) return 1;
  if (p < 0.6) return 2;
  if (p < 0.8) return 3;
  return 4;
}

PredictionSet comment_only_predictions(const CommentOnlyParameters& params, const Matrix& features) {
  const std::vector<double> scores = comment_scores(params, features);
  PredictionSet out;
  const int n = features.rows;
  out.logits = Matrix(n, kNumClasses);
  out.probs = Matrix(n, kNumClasses);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int bin = map_to_bins(scores[i]);
    out.labels[i] = bin;
    for (int c = 0; c < kNumClasses; ++c) {
      out.logits(i, c) = (c == bin) ? 0.0 : -1.0;
      out.probs(i, c) = (c == bin) ? 1.0 : 0.0;
    }
  }
  return out;
}

void comment_only_backward(const CommentOnlyParameters& params, const CommentOnlyCache& cache,
                           const std::vector<double>& dscores, CommentOnlyParameters& grads) {
  const CommentOnlyConfig& cfg = params.config;
  const int n = static_cast<int>(dscores.size());
  Matrix dhidden(n, cfg.hidden_dim);
  for (int i = 0; i < n; ++i) {
    const double s = cache.scores[i];
    const double dz = dscores[i] * s * (1.0 - s);  // sigmoid'
    grads.b2(0, 0) += dz;
    const double* hi = cache.hidden.row(i);
    double* dhi = dhidden.row(i);
    for (int hcol = 0; hcol < cfg.hidden_dim; ++hcol) {
      grads.w2(hcol, 0) += dz * hi[hcol];
      const double dtanh = dz * params.w2(hcol, 0);
      dhi[hcol] = dtanh * (1.0 - hi[hcol] * hi[hcol]);
    }
  }
  add_inplace(grads.w1, matmul_tn(*cache.features, dhidden));
  add_inplace(grads.b1, col_sums(dhidden));
}

}  // namespace hategraph

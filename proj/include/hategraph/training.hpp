#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hategraph/model.hpp"

namespace hategraph {

enum class LossKind { cross_entropy, ordinal_weighted };
enum class OptimizerKind { sgd, adam };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 20;
  uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  LossKind loss = LossKind::cross_entropy;
  double l2_penalty = 0.0;
  double init_scale = 1.0;

  void validate() const;
  static TrainConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// 5-way losses over the labeled nodes of one graph (mean over labeled):
//   cross_entropy:    -log softmax[gold]
//   ordinal_weighted: sum_c softmax_c * |c - gold|  (expected ordinal distance)
// gold holds one optional label per node; throws if none is present or a
// label is outside [0,4].
double loss_value(const PredictionSet& pred, const std::vector<std::optional<int>>& gold, LossKind kind);

// d(loss)/d(logits), already divided by the labeled-node count.
Matrix loss_logit_grad(const PredictionSet& pred, const std::vector<std::optional<int>>& gold, LossKind kind);

// The comment-only scorer emits one scalar in (0,1), so its training
// objective is the scalar analogue of each loss: binary cross-entropy
// against gold/4 for "ce", |4*score - gold| for "ordinal_weighted".
double comment_loss_value(const std::vector<double>& scores, const std::vector<std::optional<int>>& gold,
                          LossKind kind);
std::vector<double> comment_loss_score_grad(const std::vector<double>& scores,
                                            const std::vector<std::optional<int>>& gold, LossKind kind);

struct TrainItem {
  const DiscussionGraph* graph = nullptr;
  const Matrix* features = nullptr;  // encoded in graph node order
  std::vector<std::optional<int>> gold;
};

// Mean batch loss (plus 0.5 * l2 * sum of squared parameters when l2 > 0)
// and its exact reverse-mode gradients, written into grads, which must come
// in zero-filled (model.zero_like()). Throws on an empty batch or a
// non-finite gradient (named tensor reported).
double batch_loss_and_grads(const Model& model, const std::vector<TrainItem>& batch, LossKind kind, double l2_penalty,
                            Model& grads);

// Forward-only batch loss, used by the finite-difference checker.
double batch_loss(const Model& model, const std::vector<TrainItem>& batch, LossKind kind, double l2_penalty);

struct OptimizerState {
  int64_t step_count = 0;
  std::vector<Matrix> first_moment;   // parallel to named_tensors order
  std::vector<Matrix> second_moment;
};

// sgd: p -= lr * g. adam: bias-corrected first/second moment update.
void step(Model& params, const Model& grads, const TrainConfig& config, OptimizerState& state);

struct TrainResult {
  Model model;
  std::vector<double> epoch_losses;       // mean loss per epoch
  std::vector<std::string> warnings;      // e.g. unlabeled graphs skipped
};

// Deterministic given (corpus, config, seed): seeded init, seeded per-epoch
// graph order, one optimizer step per graph (all labeled nodes at once).
// Graphs without any labeled node are skipped with a warning.
TrainResult train(const std::vector<DiscussionGraph>& corpus,
                  const std::variant<GraphormerConfig, GatConfig, CommentOnlyConfig>& model_config,
                  const EncoderSpec& encoder, const TrainConfig& config);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  int worst_index = -1;
  int64_t coords_checked = 0;
};

// Central finite differences (step h) against analytic gradients over every
// parameter coordinate; relative error uses max(|a|, |b|, 1e-8).
GradCheckResult finite_difference_check(Model model, const std::vector<TrainItem>& batch, LossKind kind,
                                        double l2_penalty, double h = 1e-5);

}  // namespace hategraph

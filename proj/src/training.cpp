#include "hategraph/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hategraph/rng.hpp"
#include "json.hpp"

namespace hategraph {

using nlohmann::json;

std::string to_string(LossKind k) { return k == LossKind::cross_entropy ? "ce" : "ordinal_weighted"; }

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "ce") return LossKind::cross_entropy;
  if (s == "ordinal_weighted") return LossKind::ordinal_weighted;
  throw std::invalid_argument("unknown loss '" + s + "' (expected 'ce' or 'ordinal_weighted')");
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected 'sgd' or 'adam')");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (l2_penalty < 0.0) throw std::invalid_argument("l2_penalty must be non-negative");
  if (init_scale <= 0.0) throw std::invalid_argument("init_scale must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw std::invalid_argument("adam betas must lie in [0,1)");
  }
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed train config: ") + e.what());
  }
  TrainConfig c;
  if (doc.contains("learning_rate")) c.learning_rate = doc["learning_rate"].get<double>();
  if (doc.contains("epochs")) c.epochs = doc["epochs"].get<int>();
  if (doc.contains("seed")) c.seed = doc["seed"].get<uint64_t>();
  if (doc.contains("optimizer")) c.optimizer = optimizer_kind_from_string(doc["optimizer"].get<std::string>());
  if (doc.contains("beta1")) c.beta1 = doc["beta1"].get<double>();
  if (doc.contains("beta2")) c.beta2 = doc["beta2"].get<double>();
  if (doc.contains("epsilon")) c.epsilon = doc["epsilon"].get<double>();
  if (doc.contains("loss")) c.loss = loss_kind_from_string(doc["loss"].get<std::string>());
  if (doc.contains("l2_penalty")) c.l2_penalty = doc["l2_penalty"].get<double>();
  if (doc.contains("init_scale")) c.init_scale = doc["init_scale"].get<double>();
  c.validate();
  return c;
}

std::string TrainConfig::to_json_text() const {
  json doc{{"learning_rate", learning_rate},
           {"epochs", epochs},
           {"seed", seed},
           {"optimizer", to_string(optimizer)},
           {"beta1", beta1},
           {"beta2", beta2},
           {"epsilon", epsilon},
           {"loss", to_string(loss)},
           {"l2_penalty", l2_penalty},
           {"init_scale", init_scale}};
  return doc.dump(2) + "\n";
}

namespace {

std::vector<int> labeled_indices(const std::vector<std::optional<int>>& gold) {
  std::vector<int> idx;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i]) {
      if (*gold[i] < 0 || *gold[i] > 4) throw std::invalid_argument("gold label outside [0,4]");
      idx.push_back(static_cast<int>(i));
    }
  }
  if (idx.empty()) throw std::invalid_argument("no labeled nodes");
  return idx;
}

}  // namespace

double loss_value(const PredictionSet& pred, const std::vector<std::optional<int>>& gold, LossKind kind) {
  if (static_cast<size_t>(pred.node_count()) != gold.size()) {
    throw std::invalid_argument("prediction/label count mismatch");
  }
  const std::vector<int> idx = labeled_indices(gold);
  double total = 0.0;
  for (int i : idx) {
    const int y = *gold[i];
    if (kind == LossKind::cross_entropy) {
      // log-sum-exp for stability; probs alone can underflow for big logits
      const double* l = pred.logits.row(i);
      double m = l[0];
      for (int c = 1; c < kNumClasses; ++c) m = std::max(m, l[c]);
      double sum = 0.0;
      for (int c = 0; c < kNumClasses; ++c) sum += std::exp(l[c] - m);
      total += std::log(sum) + m - l[y];
    } else {
      double expected = 0.0;
      for (int c = 0; c < kNumClasses; ++c) expected += pred.probs(i, c) * std::abs(c - y);
      total += expected;
    }
  }
  return total / static_cast<double>(idx.size());
}

Matrix loss_logit_grad(const PredictionSet& pred, const std::vector<std::optional<int>>& gold, LossKind kind) {
  const std::vector<int> idx = labeled_indices(gold);
  const double inv_m = 1.0 / static_cast<double>(idx.size());
  Matrix dlogits(pred.node_count(), kNumClasses);
  for (int i : idx) {
    const int y = *gold[i];
    const double* p = pred.probs.row(i);
    double* d = dlogits.row(i);
    if (kind == LossKind::cross_entropy) {
      for (int c = 0; c < kNumClasses; ++c) d[c] = (p[c] - (c == y ? 1.0 : 0.0)) * inv_m;
    } else {
      double expected = 0.0;
      for (int c = 0; c < kNumClasses; ++c) expected += p[c] * std::abs(c - y);
      for (int c = 0; c < kNumClasses; ++c) d[c] = p[c] * (std::abs(c - y) - expected) * inv_m;
    }
  }
  return dlogits;
}

double comment_loss_value(const std::vector<double>& scores, const std::vector<std::optional<int>>& gold,
                          LossKind kind) {
  if (scores.size() != gold.size()) throw std::invalid_argument("score/label count mismatch");
  const std::vector<int> idx = labeled_indices(gold);
  double total = 0.0;
  for (int i : idx) {
    const double target = *gold[i] / 4.0;
    const double s = scores[i];
    if (kind == LossKind::cross_entropy) {
      total += -(target * std::log(s) + (1.0 - target) * std::log(1.0 - s));
    } else {
      total += std::abs(4.0 * s - *gold[i]);
    }
  }
  return total / static_cast<double>(idx.size());
}

std::vector<double> comment_loss_score_grad(const std::vector<double>& scores,
                                            const std::vector<std::optional<int>>& gold, LossKind kind) {
  const std::vector<int> idx = labeled_indices(gold);
  const double inv_m = 1.0 / static_cast<double>(idx.size());
  std::vector<double> d(scores.size(), 0.0);
  for (int i : idx) {
    const double target = *gold[i] / 4.0;
    const double s = scores[i];
    if (kind == LossKind::cross_entropy) {
      d[i] = (-target / s + (1.0 - target) / (1.0 - s)) * inv_m;
    } else {
      const double diff = 4.0 * s - *gold[i];
      d[i] = (diff > 0.0 ? 4.0 : (diff < 0.0 ? -4.0 : 0.0)) * inv_m;
    }
  }
  return d;
}

namespace {

double graph_loss_and_grads(const Model& model, const TrainItem& item, LossKind kind, Model& grads) {
  if (const auto* gp = std::get_if<GraphormerParameters>(&model.params)) {
    const IntMatrix dist = build_distance_matrix(*item.graph, gp->config.max_distance);
    GraphormerCache cache;
    const PredictionSet pred = graphormer_forward(*gp, *item.features, dist, degrees(*item.graph), &cache);
    const double loss = loss_value(pred, item.gold, kind);
    const Matrix dlogits = loss_logit_grad(pred, item.gold, kind);
    graphormer_backward(*gp, cache, dlogits, std::get<GraphormerParameters>(grads.params));
    return loss;
  }
  if (const auto* ap = std::get_if<GatParameters>(&model.params)) {
    GatCache cache;
    const PredictionSet pred = gat_forward(*ap, *item.features, *item.graph, &cache);
    const double loss = loss_value(pred, item.gold, kind);
    const Matrix dlogits = loss_logit_grad(pred, item.gold, kind);
    gat_backward(*ap, cache, dlogits, std::get<GatParameters>(grads.params));
    return loss;
  }
  const auto& cp = std::get<CommentOnlyParameters>(model.params);
  CommentOnlyCache cache;
  const std::vector<double> scores = comment_scores(cp, *item.features, &cache);
  const double loss = comment_loss_value(scores, item.gold, kind);
  const std::vector<double> dscores = comment_loss_score_grad(scores, item.gold, kind);
  comment_only_backward(cp, cache, dscores, std::get<CommentOnlyParameters>(grads.params));
  return loss;
}

double graph_loss_only(const Model& model, const TrainItem& item, LossKind kind) {
  if (std::holds_alternative<CommentOnlyParameters>(model.params)) {
    const std::vector<double> scores = comment_scores(std::get<CommentOnlyParameters>(model.params), *item.features);
    return comment_loss_value(scores, item.gold, kind);
  }
  const PredictionSet pred = model.predict_graph(*item.graph, *item.features);
  return loss_value(pred, item.gold, kind);
}

void scale_tensors(Model& m, double factor) {
  for (auto& [name, t] : m.named_tensors()) {
    for (double& v : t->data) v *= factor;
  }
}

}  // namespace

double batch_loss_and_grads(const Model& model, const std::vector<TrainItem>& batch, LossKind kind, double l2_penalty,
                            Model& grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const TrainItem& item : batch) total += graph_loss_and_grads(model, item, kind, grads);
  total /= static_cast<double>(batch.size());
  scale_tensors(grads, 1.0 / static_cast<double>(batch.size()));

  if (l2_penalty > 0.0) {
    auto ps = model.named_tensors();
    auto gs = grads.named_tensors();
    double sq = 0.0;
    for (size_t i = 0; i < ps.size(); ++i) {
      const Matrix& p = *ps[i].second;
      Matrix& g = *gs[i].second;
      for (size_t t = 0; t < p.data.size(); ++t) {
        sq += p.data[t] * p.data[t];
        g.data[t] += l2_penalty * p.data[t];
      }
    }
    total += 0.5 * l2_penalty * sq;
  }

  for (const auto& [name, t] : grads.named_tensors()) {
    if (!all_finite(*t)) throw std::domain_error("non-finite gradient in tensor '" + name + "'");
  }
  return total;
}

double batch_loss(const Model& model, const std::vector<TrainItem>& batch, LossKind kind, double l2_penalty) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const TrainItem& item : batch) total += graph_loss_only(model, item, kind);
  total /= static_cast<double>(batch.size());
  if (l2_penalty > 0.0) {
    double sq = 0.0;
    for (const auto& [name, t] : model.named_tensors()) {
      for (double v : t->data) sq += v * v;
    }
    total += 0.5 * l2_penalty * sq;
  }
  return total;
}

void step(Model& params, const Model& grads, const TrainConfig& config, OptimizerState& state) {
  auto ps = params.named_tensors();
  auto gs = grads.named_tensors();
  if (ps.size() != gs.size()) throw std::invalid_argument("parameter/gradient tensor count mismatch");

  if (config.optimizer == OptimizerKind::sgd) {
    for (size_t i = 0; i < ps.size(); ++i) {
      Matrix& p = *ps[i].second;
      const Matrix& g = *gs[i].second;
      if (!p.same_shape(g)) throw std::invalid_argument("gradient shape mismatch on '" + ps[i].first + "'");
      for (size_t t = 0; t < p.data.size(); ++t) p.data[t] -= config.learning_rate * g.data[t];
    }
    ++state.step_count;
    return;
  }

  if (state.first_moment.empty()) {
    state.first_moment.reserve(ps.size());
    state.second_moment.reserve(ps.size());
    for (auto& [name, p] : ps) {
      state.first_moment.emplace_back(p->rows, p->cols);
      state.second_moment.emplace_back(p->rows, p->cols);
    }
  }
  ++state.step_count;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step_count));
  for (size_t i = 0; i < ps.size(); ++i) {
    Matrix& p = *ps[i].second;
    const Matrix& g = *gs[i].second;
    if (!p.same_shape(g)) throw std::invalid_argument("gradient shape mismatch on '" + ps[i].first + "'");
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    for (size_t t = 0; t < p.data.size(); ++t) {
      m.data[t] = config.beta1 * m.data[t] + (1.0 - config.beta1) * g.data[t];
      v.data[t] = config.beta2 * v.data[t] + (1.0 - config.beta2) * g.data[t] * g.data[t];
      const double mhat = m.data[t] / bc1;
      const double vhat = v.data[t] / bc2;
      p.data[t] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

TrainResult train(const std::vector<DiscussionGraph>& corpus,
                  const std::variant<GraphormerConfig, GatConfig, CommentOnlyConfig>& model_config,
                  const EncoderSpec& encoder, const TrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw std::invalid_argument("empty training corpus");

  TrainResult result;
  if (const auto* gc = std::get_if<GraphormerConfig>(&model_config)) {
    result.model = make_graphormer(*gc, encoder, config.seed, config.init_scale);
  } else if (const auto* ac = std::get_if<GatConfig>(&model_config)) {
    result.model = make_gat(*ac, encoder, config.seed, config.init_scale);
  } else {
    result.model = make_comment_only(std::get<CommentOnlyConfig>(model_config), encoder, config.seed,
                                     config.init_scale);
  }

  // Encode once; graphs without a single labeled node cannot contribute.
  std::vector<Matrix> features;
  std::vector<TrainItem> items;
  features.reserve(corpus.size());
  for (const DiscussionGraph& g : corpus) {
    bool labeled = false;
    for (const Comment& c : g.comments) {
      if (c.gold_label) {
        labeled = true;
        break;
      }
    }
    if (!labeled) {
      result.warnings.push_back("skipping unlabeled graph '" + g.thread_id + "'");
      continue;
    }
    features.push_back(encode_graph(g, encoder));
    TrainItem item;
    item.graph = &g;
    item.gold.reserve(g.node_count());
    for (const Comment& c : g.comments) item.gold.push_back(c.gold_label);
    items.push_back(std::move(item));
  }
  for (size_t i = 0; i < items.size(); ++i) items[i].features = &features[i];
  if (items.empty()) throw std::invalid_argument("no labeled graphs in training corpus");

  OptimizerState state;
  Rng order_rng(config.seed ^ 0xA02B9FE5E7C11D03ULL);
  std::vector<size_t> order(items.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the training stream keeps epochs reproducible.
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(order_rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (size_t oi : order) {
      Model grads = result.model.zero_like();
      const std::vector<TrainItem> batch{items[oi]};
      epoch_loss += batch_loss_and_grads(result.model, batch, config.loss, config.l2_penalty, grads);
      step(result.model, grads, config, state);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(items.size()));
  }
  return result;
}

GradCheckResult finite_difference_check(Model model, const std::vector<TrainItem>& batch, LossKind kind,
                                        double l2_penalty, double h) {
  Model grads = model.zero_like();
  batch_loss_and_grads(model, batch, kind, l2_penalty, grads);

  GradCheckResult result;
  auto ps = model.named_tensors();
  auto gs = grads.named_tensors();
  for (size_t ti = 0; ti < ps.size(); ++ti) {
    Matrix& p = *ps[ti].second;
    const Matrix& g = *gs[ti].second;
    for (size_t c = 0; c < p.data.size(); ++c) {
      const double saved = p.data[c];
      p.data[c] = saved + h;
      const double up = batch_loss(model, batch, kind, l2_penalty);
      p.data[c] = saved - h;
      const double down = batch_loss(model, batch, kind, l2_penalty);
      p.data[c] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = g.data[c];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      const double rel = std::abs(numeric - analytic) / denom;
      ++result.coords_checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = ps[ti].first;
        result.worst_index = static_cast<int>(c);
      }
    }
  }
  return result;
}

}  // namespace hategraph

#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hategraph/comment_only.hpp"
#include "hategraph/discussion.hpp"
#include "hategraph/encoder.hpp"
#include "hategraph/gat.hpp"
#include "hategraph/graphormer.hpp"
#include "hategraph/prediction.hpp"

namespace hategraph {

enum class ModelKind { graphormer, gat, comment_only };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// One trained (or initialized) model of any kind, bound to the encoder spec
// its inputs were produced with.
struct Model {
  EncoderSpec encoder;
  std::variant<GraphormerParameters, GatParameters, CommentOnlyParameters> params;

  ModelKind kind() const;
  int input_dim() const;

  // Zero-filled gradient holder with congruent tensor shapes.
  Model zero_like() const;

  std::vector<std::pair<std::string, Matrix*>> named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;

  // Full forward pass over one graph: encodes nothing itself, the caller
  // supplies features in graph node order (width must match input_dim).
  PredictionSet predict_graph(const DiscussionGraph& g, const Matrix& features) const;
};

Model make_graphormer(const GraphormerConfig& cfg, const EncoderSpec& enc, uint64_t seed, double init_scale);
Model make_gat(const GatConfig& cfg, const EncoderSpec& enc, uint64_t seed, double init_scale);
Model make_comment_only(const CommentOnlyConfig& cfg, const EncoderSpec& enc, uint64_t seed, double init_scale);

// Checkpoint JSON: { "format_version": 1, "model_kind": ..., "encoder_spec":
// {...}, "config": {...}, "tensors": { name: { "shape": [r, c], "data":
// [row-major f64] } } }. Loading rejects unknown versions, unknown or
// missing tensors, shape mismatches, and encoder width != config.input_dim.
std::string checkpoint_to_json(const Model& model);
Model checkpoint_from_json(const std::string& text);
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace hategraph

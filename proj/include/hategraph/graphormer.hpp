#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hategraph/discussion.hpp"
#include "hategraph/matrix.hpp"
#include "hategraph/prediction.hpp"

namespace hategraph {

struct GraphormerConfig {
  int num_layers = 2;
  int num_heads = 4;
  int model_dim = 64;
  int ffn_dim = 128;
  int max_distance = 8;  // pairwise tree distances clamp here
  int max_degree = 16;   // degrees clamp here
  int input_dim = 64;

  void validate() const;
  int head_dim() const { return model_dim / num_heads; }
};

struct GraphormerLayerParams {
  Matrix ln1_scale, ln1_offset;  // 1 x model_dim
  Matrix wq, wk, wv, wo;         // model_dim x model_dim
  Matrix bq, bk, bv, bo;         // 1 x model_dim
  Matrix ln2_scale, ln2_offset;  // 1 x model_dim
  Matrix w1, w2;                 // model_dim x ffn_dim, ffn_dim x model_dim
  Matrix b1, b2;                 // 1 x ffn_dim, 1 x model_dim
};

// Full parameter set: input projection, per-distance attention-logit bias
// table, per-degree input embeddings, transformer layers, 5-way readout.
struct GraphormerParameters {
  GraphormerConfig config;
  Matrix input_weight;      // input_dim x model_dim
  Matrix input_bias;        // 1 x model_dim
  Matrix spatial_bias;      // num_heads x (max_distance + 1)
  Matrix in_degree_table;   // (max_degree + 1) x model_dim
  Matrix out_degree_table;  // (max_degree + 1) x model_dim
  std::vector<GraphormerLayerParams> layers;
  Matrix readout_weight;  // model_dim x 5
  Matrix readout_bias;    // 1 x 5

  // Seeded uniform(-s, s) init with s = init_scale / sqrt(fan_in);
  // layer-norm scales start at 1, offsets and the bias table at 0.
  static GraphormerParameters init(const GraphormerConfig& cfg, uint64_t seed, double init_scale);
  static GraphormerParameters zeros(const GraphormerConfig& cfg);

  // Stable name -> tensor enumeration shared by checkpoints, the optimizer
  // and the finite-difference checker.
  std::vector<std::pair<std::string, Matrix*>> named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;
};

// Pairwise tree distances clamped at max_distance; BFS per source node over
// the undirected reply adjacency. Symmetric with a zero diagonal.
IntMatrix build_distance_matrix(const DiscussionGraph& g, int max_distance);

// Forward-pass activations retained for the backward pass.
struct GraphormerLayerCache {
  Matrix input;                   // layer input h
  Matrix ln1_xhat;                // normalized pre-scale activations
  std::vector<double> ln1_invstd;
  Matrix attn_in;                 // ln1 output
  Matrix q, k, v;                 // n x model_dim
  std::vector<Matrix> attn_probs;  // per head, n x n
  Matrix attn_concat;             // n x model_dim (heads concatenated)
  Matrix post_attn;               // h + attention output
  Matrix ln2_xhat;
  std::vector<double> ln2_invstd;
  Matrix ffn_in;       // ln2 output
  Matrix ffn_pre;      // n x ffn_dim, pre-activation
  Matrix ffn_act;      // gelu(ffn_pre)
};

struct GraphormerCache {
  const Matrix* features = nullptr;
  const IntMatrix* distances = nullptr;
  std::vector<DegreePair> node_degrees;
  Matrix h0;
  std::vector<GraphormerLayerCache> layers;
  Matrix final_state;
};

// Multi-head self-attention over all node pairs with the per-(head, clamped
// distance) logit bias and per-degree input embeddings, pre-norm residual
// blocks, then a 5-logit readout per node. Deterministic; no dropout.
// distances must come from build_distance_matrix over the same graph with
// the config's max_distance.
PredictionSet graphormer_forward(const GraphormerParameters& params, const Matrix& features,
                                 const IntMatrix& distances, const std::vector<DegreePair>& node_degrees,
                                 GraphormerCache* cache = nullptr);

// Accumulates d(loss)/d(params) into grads given d(loss)/d(logits).
void graphormer_backward(const GraphormerParameters& params, const GraphormerCache& cache,
                         const Matrix& dlogits, GraphormerParameters& grads);

}  // namespace hategraph

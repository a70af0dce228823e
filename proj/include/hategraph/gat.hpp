#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hategraph/discussion.hpp"
#include "hategraph/matrix.hpp"
#include "hategraph/prediction.hpp"

namespace hategraph {

// Attention restricted to direct reply neighbours; num_layers is the
// receptive-field radius in hops.
struct GatConfig {
  int num_layers = 2;
  int num_heads = 4;
  int model_dim = 64;
  int input_dim = 64;

  void validate() const;
  int head_dim() const { return model_dim / num_heads; }
};

struct GatLayerParams {
  std::vector<Matrix> w;      // per head: model_dim x head_dim
  std::vector<Matrix> a_src;  // per head: 1 x head_dim
  std::vector<Matrix> a_dst;  // per head: 1 x head_dim
  Matrix bias;                // 1 x model_dim
};

struct GatParameters {
  GatConfig config;
  Matrix input_weight;  // input_dim x model_dim
  Matrix input_bias;    // 1 x model_dim
  std::vector<GatLayerParams> layers;
  Matrix readout_weight;  // model_dim x 5
  Matrix readout_bias;    // 1 x 5

  static GatParameters init(const GatConfig& cfg, uint64_t seed, double init_scale);
  static GatParameters zeros(const GatConfig& cfg);
  std::vector<std::pair<std::string, Matrix*>> named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;
};

struct GatLayerCache {
  Matrix input;
  std::vector<Matrix> z;  // per head: n x head_dim
  std::vector<Matrix> s;  // per head: n x 1, z . a_src
  std::vector<Matrix> t;  // per head: n x 1, z . a_dst
  std::vector<std::vector<std::vector<double>>> alpha;  // [head][node][neighbor slot]
  Matrix pre_act;  // n x model_dim, before ELU
};

struct GatCache {
  const Matrix* features = nullptr;
  std::vector<std::vector<int>> neighbors;  // undirected reply adjacency + self, ascending
  Matrix h0;
  std::vector<GatLayerCache> layers;
  Matrix final_state;
};

// Per layer and head: score(i,j) = leaky_relu(a_src.z_i + a_dst.z_j) for j
// in {parent, children, self}, softmax over that masked set, weighted value
// sum, heads concatenated, then ELU with a residual connection. 5-logit
// readout per node.
PredictionSet gat_forward(const GatParameters& params, const Matrix& features, const DiscussionGraph& g,
                          GatCache* cache = nullptr);

void gat_backward(const GatParameters& params, const GatCache& cache, const Matrix& dlogits, GatParameters& grads);

}  // namespace hategraph

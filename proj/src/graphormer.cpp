#include "hategraph/graphormer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "hategraph/nn.hpp"

namespace hategraph {

void GraphormerConfig::validate() const {
  if (num_layers < 1 || num_heads < 1 || model_dim < 1 || ffn_dim < 1 || input_dim < 1) {
    throw std::invalid_argument("graphormer dims must be positive");
  }
  if (model_dim % num_heads != 0) throw std::invalid_argument("model_dim must be divisible by num_heads");
  if (max_distance < 1) throw std::invalid_argument("max_distance must be at least 1");
  if (max_degree < 0) throw std::invalid_argument("max_degree must be non-negative");
}

GraphormerParameters GraphormerParameters::zeros(const GraphormerConfig& cfg) {
  cfg.validate();
  GraphormerParameters p;
  p.config = cfg;
  const int dm = cfg.model_dim;
  p.input_weight = Matrix(cfg.input_dim, dm);
  p.input_bias = Matrix(1, dm);
  p.spatial_bias = Matrix(cfg.num_heads, cfg.max_distance + 1);
  p.in_degree_table = Matrix(cfg.max_degree + 1, dm);
  p.out_degree_table = Matrix(cfg.max_degree + 1, dm);
  p.layers.resize(cfg.num_layers);
  for (auto& l : p.layers) {
    l.ln1_scale = Matrix(1, dm);
    l.ln1_offset = Matrix(1, dm);
    l.wq = Matrix(dm, dm);
    l.wk = Matrix(dm, dm);
    l.wv = Matrix(dm, dm);
    l.wo = Matrix(dm, dm);
    l.bq = Matrix(1, dm);
    l.bk = Matrix(1, dm);
    l.bv = Matrix(1, dm);
    l.bo = Matrix(1, dm);
    l.ln2_scale = Matrix(1, dm);
    l.ln2_offset = Matrix(1, dm);
    l.w1 = Matrix(dm, cfg.ffn_dim);
    l.b1 = Matrix(1, cfg.ffn_dim);
    l.w2 = Matrix(cfg.ffn_dim, dm);
    l.b2 = Matrix(1, dm);
  }
  p.readout_weight = Matrix(cfg.model_dim, kNumClasses);
  p.readout_bias = Matrix(1, kNumClasses);
  return p;
}

GraphormerParameters GraphormerParameters::init(const GraphormerConfig& cfg, uint64_t seed, double init_scale) {
  GraphormerParameters p = zeros(cfg);
  Rng rng(seed);
  init_uniform(p.input_weight, cfg.input_dim, init_scale, rng);
  init_uniform(p.in_degree_table, cfg.model_dim, init_scale, rng);
  init_uniform(p.out_degree_table, cfg.model_dim, init_scale, rng);
  for (auto& l : p.layers) {
    l.ln1_scale.fill(1.0);
    l.ln2_scale.fill(1.0);
    init_uniform(l.wq, cfg.model_dim, init_scale, rng);
    init_uniform(l.wk, cfg.model_dim, init_scale, rng);
    init_uniform(l.wv, cfg.model_dim, init_scale, rng);
    init_uniform(l.wo, cfg.model_dim, init_scale, rng);
    init_uniform(l.w1, cfg.model_dim, init_scale, rng);
    init_uniform(l.w2, cfg.ffn_dim, init_scale, rng);
  }
  init_uniform(p.readout_weight, cfg.model_dim, init_scale, rng);
  // spatial_bias starts flat (no distance prior); degree tables are learned
  // embeddings so they start like weights, biases start at zero.
  return p;
}

std::vector<std::pair<std::string, Matrix*>> GraphormerParameters::named_tensors() {
  std::vector<std::pair<std::string, Matrix*>> out;
  out.emplace_back("input.weight", &input_weight);
  out.emplace_back("input.bias", &input_bias);
  out.emplace_back("spatial_bias", &spatial_bias);
  out.emplace_back("in_degree_table", &in_degree_table);
  out.emplace_back("out_degree_table", &out_degree_table);
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string pre = "layers." + std::to_string(i) + ".";
    auto& l = layers[i];
    out.emplace_back(pre + "ln1.scale", &l.ln1_scale);
    out.emplace_back(pre + "ln1.offset", &l.ln1_offset);
    out.emplace_back(pre + "attn.wq", &l.wq);
    out.emplace_back(pre + "attn.bq", &l.bq);
    out.emplace_back(pre + "attn.wk", &l.wk);
    out.emplace_back(pre + "attn.bk", &l.bk);
    out.emplace_back(pre + "attn.wv", &l.wv);
    out.emplace_back(pre + "attn.bv", &l.bv);
    out.emplace_back(pre + "attn.wo", &l.wo);
    out.emplace_back(pre + "attn.bo", &l.bo);
    out.emplace_back(pre + "ln2.scale", &l.ln2_scale);
    out.emplace_back(pre + "ln2.offset", &l.ln2_offset);
    out.emplace_back(pre + "ffn.w1", &l.w1);
    out.emplace_back(pre + "ffn.b1", &l.b1);
    out.emplace_back(pre + "ffn.w2", &l.w2);
    out.emplace_back(pre + "ffn.b2", &l.b2);
  }
  out.emplace_back("readout.weight", &readout_weight);
  out.emplace_back("readout.bias", &readout_bias);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> GraphormerParameters::named_tensors() const {
  auto mut = const_cast<GraphormerParameters*>(this)->named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mut.size());
  for (auto& [name, m] : mut) out.emplace_back(name, m);
  return out;
}

IntMatrix build_distance_matrix(const DiscussionGraph& g, int max_distance) {
  if (max_distance < 1) throw std::invalid_argument("max_distance must be at least 1");
  const int n = g.node_count();
  IntMatrix dist(n, n);
  std::vector<int> level(n);
  std::deque<int> queue;
  for (int src = 0; src < n; ++src) {
    std::fill(level.begin(), level.end(), -1);
    level[src] = 0;
    queue.assign(1, src);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      const int next = level[u] + 1;
      if (g.parent[u] >= 0 && level[g.parent[u]] < 0) {
        level[g.parent[u]] = next;
        queue.push_back(g.parent[u]);
      }
      for (int c : g.children[u]) {
        if (level[c] < 0) {
          level[c] = next;
          queue.push_back(c);
        }
      }
    }
    for (int j = 0; j < n; ++j) dist(src, j) = std::min(level[j], max_distance);
  }
  return dist;
}

namespace {

Matrix slice_cols(const Matrix& m, int c0, int width) {
  Matrix out(m.rows, width);
  for (int i = 0; i < m.rows; ++i) {
    const double* src = m.row(i) + c0;
    std::copy(src, src + width, out.row(i));
  }
  return out;
}

void add_into_cols(Matrix& dst, const Matrix& src, int c0) {
  for (int i = 0; i < src.rows; ++i) {
    double* d = dst.row(i) + c0;
    const double* s = src.row(i);
    for (int j = 0; j < src.cols; ++j) d[j] += s[j];
  }
}

Matrix linear(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = matmul(x, w);
  add_row_inplace(y, b);
  return y;
}

void check_params_finite(const GraphormerParameters& params) {
  for (const auto& [name, m] : params.named_tensors()) {
    if (!all_finite(*m)) throw std::domain_error("non-finite parameter in tensor '" + name + "'");
  }
}

}  // namespace

PredictionSet graphormer_forward(const GraphormerParameters& params, const Matrix& features,
                                 const IntMatrix& distances, const std::vector<DegreePair>& node_degrees,
                                 GraphormerCache* cache) {
  const GraphormerConfig& cfg = params.config;
  cfg.validate();
  const int n = features.rows;
  if (features.cols != cfg.input_dim) {
    throw std::invalid_argument("feature width " + std::to_string(features.cols) + " does not match input_dim " +
                                std::to_string(cfg.input_dim));
  }
  if (distances.rows != n || distances.cols != n) throw std::invalid_argument("distance matrix shape mismatch");
  if (static_cast<int>(node_degrees.size()) != n) throw std::invalid_argument("degree list size mismatch");
  check_params_finite(params);

  const int dm = cfg.model_dim;
  const int nh = cfg.num_heads;
  const int dh = cfg.head_dim();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix h = linear(features, params.input_weight, params.input_bias);
  for (int i = 0; i < n; ++i) {
    const int din = std::min(node_degrees[i].in, cfg.max_degree);
    const int dout = std::min(node_degrees[i].out, cfg.max_degree);
    double* hi = h.row(i);
    const double* tin = params.in_degree_table.row(din);
    const double* tout = params.out_degree_table.row(dout);
    for (int j = 0; j < dm; ++j) hi[j] += tin[j] + tout[j];
  }

  if (cache) {
    cache->features = &features;
    cache->distances = &distances;
    cache->node_degrees = node_degrees;
    cache->h0 = h;
    cache->layers.assign(cfg.num_layers, {});
  }

  for (int li = 0; li < cfg.num_layers; ++li) {
    const GraphormerLayerParams& lp = params.layers[li];
    GraphormerLayerCache local;
    GraphormerLayerCache& lc = cache ? cache->layers[li] : local;
    lc.input = h;

    Matrix a = layernorm_forward(h, lp.ln1_scale, lp.ln1_offset, lc.ln1_xhat, lc.ln1_invstd);
    Matrix q = linear(a, lp.wq, lp.bq);
    Matrix k = linear(a, lp.wk, lp.bk);
    Matrix v = linear(a, lp.wv, lp.bv);

    Matrix attn_concat(n, dm);
    lc.attn_probs.assign(nh, Matrix());
    for (int hd = 0; hd < nh; ++hd) {
      const int c0 = hd * dh;
      Matrix probs(n, n);
      for (int i = 0; i < n; ++i) {
        const double* qi = q.row(i) + c0;
        double* pi = probs.row(i);
        double row_max = -1e300;
        for (int j = 0; j < n; ++j) {
          const double* kj = k.row(j) + c0;
          double s = 0.0;
          for (int t = 0; t < dh; ++t) s += qi[t] * kj[t];
          s = s * inv_sqrt_dh + params.spatial_bias(hd, distances(i, j));
          pi[j] = s;
          row_max = std::max(row_max, s);
        }
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
          pi[j] = std::exp(pi[j] - row_max);
          sum += pi[j];
        }
        const double inv = 1.0 / sum;
        for (int j = 0; j < n; ++j) pi[j] *= inv;
        // weighted value sum for this query row
        double* oi = attn_concat.row(i) + c0;
        for (int j = 0; j < n; ++j) {
          const double w = pi[j];
          const double* vj = v.row(j) + c0;
          for (int t = 0; t < dh; ++t) oi[t] += w * vj[t];
        }
      }
      lc.attn_probs[hd] = std::move(probs);
    }

    Matrix attn_out = linear(attn_concat, lp.wo, lp.bo);
    Matrix post_attn = h;
    add_inplace(post_attn, attn_out);

    Matrix f = layernorm_forward(post_attn, lp.ln2_scale, lp.ln2_offset, lc.ln2_xhat, lc.ln2_invstd);
    Matrix ffn_pre = linear(f, lp.w1, lp.b1);
    Matrix ffn_act(n, cfg.ffn_dim);
    for (size_t t = 0; t < ffn_pre.data.size(); ++t) ffn_act.data[t] = gelu(ffn_pre.data[t]);
    Matrix ffn_out = linear(ffn_act, lp.w2, lp.b2);

    h = post_attn;
    add_inplace(h, ffn_out);

    lc.attn_in = std::move(a);
    lc.q = std::move(q);
    lc.k = std::move(k);
    lc.v = std::move(v);
    lc.attn_concat = std::move(attn_concat);
    lc.post_attn = std::move(post_attn);
    lc.ffn_in = std::move(f);
    lc.ffn_pre = std::move(ffn_pre);
    lc.ffn_act = std::move(ffn_act);
  }

  if (cache) cache->final_state = h;
  Matrix logits = linear(h, params.readout_weight, params.readout_bias);
  return finalize_predictions(std::move(logits));
}

void graphormer_backward(const GraphormerParameters& params, const GraphormerCache& cache,
                         const Matrix& dlogits, GraphormerParameters& grads) {
  const GraphormerConfig& cfg = params.config;
  const int n = dlogits.rows;
  const int dm = cfg.model_dim;
  const int nh = cfg.num_heads;
  const int dh = cfg.head_dim();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  const IntMatrix& distances = *cache.distances;

  add_inplace(grads.readout_weight, matmul_tn(cache.final_state, dlogits));
  add_inplace(grads.readout_bias, col_sums(dlogits));
  Matrix dh_state = matmul_nt(dlogits, params.readout_weight);

  for (int li = cfg.num_layers - 1; li >= 0; --li) {
    const GraphormerLayerParams& lp = params.layers[li];
    const GraphormerLayerCache& lc = cache.layers[li];
    GraphormerLayerParams& lg = grads.layers[li];

    // h_out = post_attn + ffn(ln2(post_attn))
    const Matrix& dffn_out = dh_state;
    add_inplace(lg.w2, matmul_tn(lc.ffn_act, dffn_out));
    add_inplace(lg.b2, col_sums(dffn_out));
    Matrix dffn_act = matmul_nt(dffn_out, lp.w2);
    Matrix dffn_pre(n, cfg.ffn_dim);
    for (size_t t = 0; t < dffn_pre.data.size(); ++t) {
      dffn_pre.data[t] = dffn_act.data[t] * gelu_prime(lc.ffn_pre.data[t]);
    }
    add_inplace(lg.w1, matmul_tn(lc.ffn_in, dffn_pre));
    add_inplace(lg.b1, col_sums(dffn_pre));
    Matrix dffn_in = matmul_nt(dffn_pre, lp.w1);
    Matrix dpost = layernorm_backward(dffn_in, lc.ln2_xhat, lc.ln2_invstd, lp.ln2_scale, lg.ln2_scale, lg.ln2_offset);
    add_inplace(dpost, dh_state);

    // post_attn = input + wo(attention(ln1(input)))
    const Matrix& dattn_out = dpost;
    add_inplace(lg.wo, matmul_tn(lc.attn_concat, dattn_out));
    add_inplace(lg.bo, col_sums(dattn_out));
    Matrix dattn_concat = matmul_nt(dattn_out, lp.wo);

    Matrix dq(n, dm), dk(n, dm), dv(n, dm);
    for (int hd = 0; hd < nh; ++hd) {
      const int c0 = hd * dh;
      const Matrix& probs = lc.attn_probs[hd];
      Matrix do_h = slice_cols(dattn_concat, c0, dh);
      Matrix v_h = slice_cols(lc.v, c0, dh);
      Matrix q_h = slice_cols(lc.q, c0, dh);
      Matrix k_h = slice_cols(lc.k, c0, dh);

      Matrix dprobs = matmul_nt(do_h, v_h);           // n x n
      add_into_cols(dv, matmul_tn(probs, do_h), c0);  // dv_h = P^T dO

      Matrix dscores(n, n);
      for (int i = 0; i < n; ++i) {
        const double* pi = probs.row(i);
        const double* dpi = dprobs.row(i);
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += pi[j] * dpi[j];
        double* dsi = dscores.row(i);
        for (int j = 0; j < n; ++j) {
          const double ds = pi[j] * (dpi[j] - dot);
          dsi[j] = ds;
          grads.spatial_bias(hd, distances(i, j)) += ds;
        }
      }
      Matrix dq_h = matmul(dscores, k_h);
      Matrix dk_h = matmul_tn(dscores, q_h);
      for (double& x : dq_h.data) x *= inv_sqrt_dh;
      for (double& x : dk_h.data) x *= inv_sqrt_dh;
      add_into_cols(dq, dq_h, c0);
      add_into_cols(dk, dk_h, c0);
    }

    add_inplace(lg.wq, matmul_tn(lc.attn_in, dq));
    add_inplace(lg.bq, col_sums(dq));
    add_inplace(lg.wk, matmul_tn(lc.attn_in, dk));
    add_inplace(lg.bk, col_sums(dk));
    add_inplace(lg.wv, matmul_tn(lc.attn_in, dv));
    add_inplace(lg.bv, col_sums(dv));
    Matrix da = matmul_nt(dq, lp.wq);
    add_inplace(da, matmul_nt(dk, lp.wk));
    add_inplace(da, matmul_nt(dv, lp.wv));

    Matrix dinput = layernorm_backward(da, lc.ln1_xhat, lc.ln1_invstd, lp.ln1_scale, lg.ln1_scale, lg.ln1_offset);
    add_inplace(dinput, dpost);
    dh_state = std::move(dinput);
  }

  add_inplace(grads.input_weight, matmul_tn(*cache.features, dh_state));
  add_inplace(grads.input_bias, col_sums(dh_state));
  for (int i = 0; i < n; ++i) {
    const int din = std::min(cache.node_degrees[i].in, cfg.max_degree);
    const int dout = std::min(cache.node_degrees[i].out, cfg.max_degree);
    const double* dhi = dh_state.row(i);
    double* tin = grads.in_degree_table.row(din);
    double* tout = grads.out_degree_table.row(dout);
    for (int j = 0; j < dm; ++j) {
      tin[j] += dhi[j];
      tout[j] += dhi[j];
    }
  }
}

}  // namespace hategraph

#include "hategraph/gat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hategraph/nn.hpp"

namespace hategraph {

void GatConfig::validate() const {
  if (num_layers < 1 || num_heads < 1 || model_dim < 1 || input_dim < 1) {
    throw std::invalid_argument("gat dims must be positive");
  }
  if (model_dim % num_heads != 0) throw std::invalid_argument("model_dim must be divisible by num_heads");
}

GatParameters GatParameters::zeros(const GatConfig& cfg) {
  cfg.validate();
  GatParameters p;
  p.config = cfg;
  const int dh = cfg.head_dim();
  p.input_weight = Matrix(cfg.input_dim, cfg.model_dim);
  p.input_bias = Matrix(1, cfg.model_dim);
  p.layers.resize(cfg.num_layers);
  for (auto& l : p.layers) {
    l.w.assign(cfg.num_heads, Matrix(cfg.model_dim, dh));
    l.a_src.assign(cfg.num_heads, Matrix(1, dh));
    l.a_dst.assign(cfg.num_heads, Matrix(1, dh));
    l.bias = Matrix(1, cfg.model_dim);
  }
  p.readout_weight = Matrix(cfg.model_dim, kNumClasses);
  p.readout_bias = Matrix(1, kNumClasses);
  return p;
}

GatParameters GatParameters::init(const GatConfig& cfg, uint64_t seed, double init_scale) {
  GatParameters p = zeros(cfg);
  Rng rng(seed);
  init_uniform(p.input_weight, cfg.input_dim, init_scale, rng);
  for (auto& l : p.layers) {
    for (int hd = 0; hd < cfg.num_heads; ++hd) {
      init_uniform(l.w[hd], cfg.model_dim, init_scale, rng);
      init_uniform(l.a_src[hd], cfg.head_dim(), init_scale, rng);
      init_uniform(l.a_dst[hd], cfg.head_dim(), init_scale, rng);
    }
  }
  init_uniform(p.readout_weight, cfg.model_dim, init_scale, rng);
  return p;
}

std::vector<std::pair<std::string, Matrix*>> GatParameters::named_tensors() {
  std::vector<std::pair<std::string, Matrix*>> out;
  out.emplace_back("input.weight", &input_weight);
  out.emplace_back("input.bias", &input_bias);
  for (size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const std::string pre = "layers." + std::to_string(i) + ".";
    for (size_t hd = 0; hd < l.w.size(); ++hd) {
      const std::string hp = pre + "heads." + std::to_string(hd) + ".";
      out.emplace_back(hp + "w", &l.w[hd]);
      out.emplace_back(hp + "a_src", &l.a_src[hd]);
      out.emplace_back(hp + "a_dst", &l.a_dst[hd]);
    }
    out.emplace_back(pre + "bias", &l.bias);
  }
  out.emplace_back("readout.weight", &readout_weight);
  out.emplace_back("readout.bias", &readout_bias);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> GatParameters::named_tensors() const {
  auto mut = const_cast<GatParameters*>(this)->named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mut.size());
  for (auto& [name, m] : mut) out.emplace_back(name, m);
  return out;
}

namespace {

std::vector<std::vector<int>> neighbor_lists(const DiscussionGraph& g) {
  const int n = g.node_count();
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) {
    nbrs[i].push_back(i);
    if (g.parent[i] >= 0) nbrs[i].push_back(g.parent[i]);
    for (int c : g.children[i]) nbrs[i].push_back(c);
    std::sort(nbrs[i].begin(), nbrs[i].end());
  }
  return nbrs;
}

void check_params_finite(const GatParameters& params) {
  for (const auto& [name, m] : params.named_tensors()) {
    if (!all_finite(*m)) throw std::domain_error("non-finite parameter in tensor '" + name + "'");
  }
}

}  // namespace

PredictionSet gat_forward(const GatParameters& params, const Matrix& features, const DiscussionGraph& g,
                          GatCache* cache) {
  const GatConfig& cfg = params.config;
  cfg.validate();
  const int n = g.node_count();
  if (features.rows != n) throw std::invalid_argument("feature row count does not match graph");
  if (features.cols != cfg.input_dim) {
    throw std::invalid_argument("feature width " + std::to_string(features.cols) + " does not match input_dim " +
                                std::to_string(cfg.input_dim));
  }
  check_params_finite(params);

  const int dh = cfg.head_dim();
  std::vector<std::vector<int>> nbrs = neighbor_lists(g);

  Matrix h = matmul(features, params.input_weight);
  add_row_inplace(h, params.input_bias);

  if (cache) {
    cache->features = &features;
    cache->neighbors = nbrs;
    cache->h0 = h;
    cache->layers.assign(cfg.num_layers, {});
  }

  for (int li = 0; li < cfg.num_layers; ++li) {
    const GatLayerParams& lp = params.layers[li];
    GatLayerCache local;
    GatLayerCache& lc = cache ? cache->layers[li] : local;
    lc.input = h;
    lc.z.assign(cfg.num_heads, Matrix());
    lc.s.assign(cfg.num_heads, Matrix());
    lc.t.assign(cfg.num_heads, Matrix());
    lc.alpha.assign(cfg.num_heads, {});

    Matrix concat(n, cfg.model_dim);
    for (int hd = 0; hd < cfg.num_heads; ++hd) {
      Matrix z = matmul(h, lp.w[hd]);  // n x dh
      Matrix s(n, 1), t(n, 1);
      for (int i = 0; i < n; ++i) {
        double ssum = 0.0, tsum = 0.0;
        const double* zi = z.row(i);
        for (int d = 0; d < dh; ++d) {
          ssum += zi[d] * lp.a_src[hd](0, d);
          tsum += zi[d] * lp.a_dst[hd](0, d);
        }
        s(i, 0) = ssum;
        t(i, 0) = tsum;
      }
      std::vector<std::vector<double>> alpha(n);
      for (int i = 0; i < n; ++i) {
        const auto& nb = nbrs[i];
        std::vector<double>& ai = alpha[i];
        ai.resize(nb.size());
        double row_max = -1e300;
        for (size_t k = 0; k < nb.size(); ++k) {
          ai[k] = leaky_relu(s(i, 0) + t(nb[k], 0));
          row_max = std::max(row_max, ai[k]);
        }
        double sum = 0.0;
        for (double& a : ai) {
          a = std::exp(a - row_max);
          sum += a;
        }
        for (double& a : ai) a /= sum;
        double* oi = concat.row(i) + hd * dh;
        for (size_t k = 0; k < nb.size(); ++k) {
          const double* zj = z.row(nb[k]);
          for (int d = 0; d < dh; ++d) oi[d] += ai[k] * zj[d];
        }
      }
      lc.z[hd] = std::move(z);
      lc.s[hd] = std::move(s);
      lc.t[hd] = std::move(t);
      lc.alpha[hd] = std::move(alpha);
    }

    add_row_inplace(concat, lp.bias);
    lc.pre_act = concat;
    Matrix next = h;  // residual
    for (int i = 0; i < n; ++i) {
      double* ni = next.row(i);
      const double* ci = concat.row(i);
      for (int j = 0; j < cfg.model_dim; ++j) ni[j] += elu(ci[j]);
    }
    h = std::move(next);
  }

  if (cache) cache->final_state = h;
  Matrix logits = matmul(h, params.readout_weight);
  add_row_inplace(logits, params.readout_bias);
  return finalize_predictions(std::move(logits));
}

void gat_backward(const GatParameters& params, const GatCache& cache, const Matrix& dlogits, GatParameters& grads) {
  const GatConfig& cfg = params.config;
  const int n = dlogits.rows;
  const int dh = cfg.head_dim();
  const std::vector<std::vector<int>>& nbrs = cache.neighbors;

  add_inplace(grads.readout_weight, matmul_tn(cache.final_state, dlogits));
  add_inplace(grads.readout_bias, col_sums(dlogits));
  Matrix dh_state = matmul_nt(dlogits, params.readout_weight);

  for (int li = cfg.num_layers - 1; li >= 0; --li) {
    const GatLayerParams& lp = params.layers[li];
    const GatLayerCache& lc = cache.layers[li];
    GatLayerParams& lg = grads.layers[li];

    // h_out = h_in + elu(concat + bias)
    Matrix dpre(n, cfg.model_dim);
    for (int i = 0; i < n; ++i) {
      const double* di = dh_state.row(i);
      const double* pi = lc.pre_act.row(i);
      double* dpi = dpre.row(i);
      for (int j = 0; j < cfg.model_dim; ++j) dpi[j] = di[j] * elu_prime(pi[j]);
    }
    add_inplace(lg.bias, col_sums(dpre));

    Matrix dinput = dh_state;  // residual path
    for (int hd = 0; hd < cfg.num_heads; ++hd) {
      const Matrix& z = lc.z[hd];
      const Matrix& s = lc.s[hd];
      const Matrix& t = lc.t[hd];
      const auto& alpha = lc.alpha[hd];
      Matrix dz(n, dh);
      Matrix ds(n, 1), dt(n, 1);

      for (int i = 0; i < n; ++i) {
        const auto& nb = nbrs[i];
        const std::vector<double>& ai = alpha[i];
        const double* doi = dpre.row(i) + hd * dh;

        // out_i = sum_k a_ik z_{nb_k}
        std::vector<double> dalpha(nb.size());
        for (size_t k = 0; k < nb.size(); ++k) {
          const double* zj = z.row(nb[k]);
          double dot = 0.0;
          for (int d = 0; d < dh; ++d) dot += doi[d] * zj[d];
          dalpha[k] = dot;
          double* dzj = dz.row(nb[k]);
          for (int d = 0; d < dh; ++d) dzj[d] += ai[k] * doi[d];
        }
        // softmax over the masked neighbour set
        double dot = 0.0;
        for (size_t k = 0; k < nb.size(); ++k) dot += ai[k] * dalpha[k];
        for (size_t k = 0; k < nb.size(); ++k) {
          const double de = ai[k] * (dalpha[k] - dot);
          const double dpre_score = de * leaky_relu_prime(s(i, 0) + t(nb[k], 0));
          ds(i, 0) += dpre_score;
          dt(nb[k], 0) += dpre_score;
        }
      }

      // s_i = z_i . a_src, t_i = z_i . a_dst
      for (int i = 0; i < n; ++i) {
        const double* zi = z.row(i);
        double* dzi = dz.row(i);
        for (int d = 0; d < dh; ++d) {
          lg.a_src[hd](0, d) += ds(i, 0) * zi[d];
          lg.a_dst[hd](0, d) += dt(i, 0) * zi[d];
          dzi[d] += ds(i, 0) * lp.a_src[hd](0, d) + dt(i, 0) * lp.a_dst[hd](0, d);
        }
      }
      add_inplace(lg.w[hd], matmul_tn(lc.input, dz));
      add_inplace(dinput, matmul_nt(dz, lp.w[hd]));
    }
    dh_state = std::move(dinput);
  }

  add_inplace(grads.input_weight, matmul_tn(*cache.features, dh_state));
  add_inplace(grads.input_bias, col_sums(dh_state));
}

}  // namespace hategraph

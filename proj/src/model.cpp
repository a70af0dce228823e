#include "hategraph/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hategraph {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::graphormer: return "graphormer";
    case ModelKind::gat: return "gat";
    case ModelKind::comment_only: return "comment_only";
  }
  throw std::logic_error("unreachable model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "graphormer") return ModelKind::graphormer;
  if (s == "gat") return ModelKind::gat;
  if (s == "comment_only") return ModelKind::comment_only;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

ModelKind Model::kind() const {
  if (std::holds_alternative<GraphormerParameters>(params)) return ModelKind::graphormer;
  if (std::holds_alternative<GatParameters>(params)) return ModelKind::gat;
  return ModelKind::comment_only;
}

int Model::input_dim() const {
  return std::visit([](const auto& p) { return p.config.input_dim; }, params);
}

Model Model::zero_like() const {
  Model out;
  out.encoder = encoder;
  std::visit(
      [&out](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        out.params = P::zeros(p.config);
      },
      params);
  return out;
}

std::vector<std::pair<std::string, Matrix*>> Model::named_tensors() {
  return std::visit([](auto& p) { return p.named_tensors(); }, params);
}

std::vector<std::pair<std::string, const Matrix*>> Model::named_tensors() const {
  return std::visit([](const auto& p) { return p.named_tensors(); }, params);
}

PredictionSet Model::predict_graph(const DiscussionGraph& g, const Matrix& features) const {
  if (features.rows != g.node_count()) throw std::invalid_argument("feature row count does not match graph");
  if (const auto* gp = std::get_if<GraphormerParameters>(&params)) {
    const IntMatrix dist = build_distance_matrix(g, gp->config.max_distance);
    return graphormer_forward(*gp, features, dist, degrees(g));
  }
  if (const auto* ap = std::get_if<GatParameters>(&params)) {
    return gat_forward(*ap, features, g);
  }
  return comment_only_predictions(std::get<CommentOnlyParameters>(params), features);
}

Model make_graphormer(const GraphormerConfig& cfg, const EncoderSpec& enc, uint64_t seed, double init_scale) {
  enc.validate();
  if (enc.dim != cfg.input_dim) throw std::invalid_argument("encoder dim does not match config.input_dim");
  Model m;
  m.encoder = enc;
  m.params = GraphormerParameters::init(cfg, seed, init_scale);
  return m;
}

Model make_gat(const GatConfig& cfg, const EncoderSpec& enc, uint64_t seed, double init_scale) {
  enc.validate();
  if (enc.dim != cfg.input_dim) throw std::invalid_argument("encoder dim does not match config.input_dim");
  Model m;
  m.encoder = enc;
  m.params = GatParameters::init(cfg, seed, init_scale);
  return m;
}

Model make_comment_only(const CommentOnlyConfig& cfg, const EncoderSpec& enc, uint64_t seed, double init_scale) {
  enc.validate();
  if (enc.dim != cfg.input_dim) throw std::invalid_argument("encoder dim does not match config.input_dim");
  Model m;
  m.encoder = enc;
  m.params = CommentOnlyParameters::init(cfg, seed, init_scale);
  return m;
}

namespace {

json encoder_to_json(const EncoderSpec& e) {
  return json{{"dim", e.dim}, {"hash_seed", e.hash_seed}, {"normalize", e.normalize}};
}

EncoderSpec encoder_from_json(const json& j) {
  EncoderSpec e;
  e.dim = j.at("dim").get<int>();
  e.hash_seed = j.at("hash_seed").get<uint64_t>();
  e.normalize = j.at("normalize").get<bool>();
  e.validate();
  return e;
}

json config_to_json(const Model& model) {
  switch (model.kind()) {
    case ModelKind::graphormer: {
      const auto& c = std::get<GraphormerParameters>(model.params).config;
      return json{{"num_layers", c.num_layers}, {"num_heads", c.num_heads},   {"model_dim", c.model_dim},
                  {"ffn_dim", c.ffn_dim},       {"max_distance", c.max_distance}, {"max_degree", c.max_degree},
                  {"input_dim", c.input_dim}};
    }
    case ModelKind::gat: {
      const auto& c = std::get<GatParameters>(model.params).config;
      return json{{"num_layers", c.num_layers},
                  {"num_heads", c.num_heads},
                  {"model_dim", c.model_dim},
                  {"input_dim", c.input_dim}};
    }
    case ModelKind::comment_only: {
      const auto& c = std::get<CommentOnlyParameters>(model.params).config;
      return json{{"input_dim", c.input_dim}, {"hidden_dim", c.hidden_dim}};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string checkpoint_to_json(const Model& model) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["model_kind"] = to_string(model.kind());
  doc["encoder_spec"] = encoder_to_json(model.encoder);
  doc["config"] = config_to_json(model);
  json tensors = json::object();
  for (const auto& [name, m] : model.named_tensors()) {
    if (!all_finite(*m)) throw std::domain_error("refusing to save non-finite tensor '" + name + "'");
    tensors[name] = json{{"shape", {m->rows, m->cols}}, {"data", m->data}};
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump(1) + "\n";
}

Model checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
  }
  if (!doc.contains("format_version") || doc["format_version"].get<int>() != kFormatVersion) {
    throw std::invalid_argument("unsupported checkpoint format_version");
  }
  const ModelKind kind = model_kind_from_string(doc.at("model_kind").get<std::string>());
  Model model;
  model.encoder = encoder_from_json(doc.at("encoder_spec"));
  const json& cfg = doc.at("config");

  switch (kind) {
    case ModelKind::graphormer: {
      GraphormerConfig c;
      c.num_layers = cfg.at("num_layers").get<int>();
      c.num_heads = cfg.at("num_heads").get<int>();
      c.model_dim = cfg.at("model_dim").get<int>();
      c.ffn_dim = cfg.at("ffn_dim").get<int>();
      c.max_distance = cfg.at("max_distance").get<int>();
      c.max_degree = cfg.at("max_degree").get<int>();
      c.input_dim = cfg.at("input_dim").get<int>();
      model.params = GraphormerParameters::zeros(c);
      break;
    }
    case ModelKind::gat: {
      GatConfig c;
      c.num_layers = cfg.at("num_layers").get<int>();
      c.num_heads = cfg.at("num_heads").get<int>();
      c.model_dim = cfg.at("model_dim").get<int>();
      c.input_dim = cfg.at("input_dim").get<int>();
      model.params = GatParameters::zeros(c);
      break;
    }
    case ModelKind::comment_only: {
      CommentOnlyConfig c;
      c.input_dim = cfg.at("input_dim").get<int>();
      c.hidden_dim = cfg.at("hidden_dim").get<int>();
      model.params = CommentOnlyParameters::zeros(c);
      break;
    }
  }

  if (model.encoder.dim != model.input_dim()) {
    throw std::invalid_argument("encoder dim " + std::to_string(model.encoder.dim) +
                                " does not match config.input_dim " + std::to_string(model.input_dim()));
  }

  const json& tensors = doc.at("tensors");
  size_t consumed = 0;
  for (auto& [name, m] : model.named_tensors()) {
    if (!tensors.contains(name)) throw std::invalid_argument("checkpoint is missing tensor '" + name + "'");
    const json& t = tensors.at(name);
    const auto shape = t.at("shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] != m->rows || shape[1] != m->cols) {
      throw std::invalid_argument("tensor '" + name + "' has mismatched shape");
    }
    const auto data = t.at("data").get<std::vector<double>>();
    if (data.size() != m->data.size()) throw std::invalid_argument("tensor '" + name + "' has mismatched length");
    m->data = data;
    if (!all_finite(*m)) throw std::invalid_argument("tensor '" + name + "' contains non-finite values");
    ++consumed;
  }
  if (consumed != tensors.size()) throw std::invalid_argument("checkpoint contains unknown tensors");
  return model;
}

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << checkpoint_to_json(model);
  if (!out) throw std::runtime_error("failed writing checkpoint to '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace hategraph

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "hategraph/model.hpp"
#include "hategraph/rng.hpp"
#include "hategraph/streaming.hpp"
#include "hategraph/synthgen.hpp"
#include "hategraph/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hategraph;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

json metrics_to_json(const EvalMetrics& m) {
  json confusion = json::array();
  for (const auto& row : m.confusion) confusion.push_back(row);
  return json{{"accuracy", m.accuracy},
              {"mean_absolute_error", m.mean_absolute_error},
              {"confusion", std::move(confusion)},
              {"per_class_counts", m.per_class_counts},
              {"total", m.total}};
}

int run_generate(uint64_t seed, const std::string& out_dir, int num_graphs, GenSpec spec) {
  spec.seed = seed;
  spec.num_graphs = num_graphs;
  const SyntheticCorpus corpus = generate(spec);
  write_corpus(corpus, out_dir);
  std::cout << "wrote " << corpus.graphs.size() << " graphs to " << out_dir << " (spec hash " << corpus.spec_hash
            << ")\n";
  return 0;
}

int run_train(const std::string& corpus_dir, const std::string& model_kind, uint64_t seed,
              const std::string& config_path, const std::string& loss_override, int epochs_override,
              double lr_override, const std::string& ckpt_path, const std::string& history_path, int encoder_dim,
              uint64_t encoder_seed) {
  TrainConfig config;
  if (!config_path.empty()) config = TrainConfig::from_json_text(read_file(config_path));
  config.seed = seed;
  if (!loss_override.empty()) config.loss = loss_kind_from_string(loss_override);
  if (epochs_override > 0) config.epochs = epochs_override;
  if (lr_override > 0.0) config.learning_rate = lr_override;
  config.validate();

  EncoderSpec encoder;
  encoder.dim = encoder_dim;
  encoder.hash_seed = encoder_seed;

  const ModelKind kind = model_kind_from_string(model_kind);
  std::variant<GraphormerConfig, GatConfig, CommentOnlyConfig> model_config;
  if (kind == ModelKind::graphormer) {
    GraphormerConfig c;
    c.input_dim = encoder.dim;
    model_config = c;
  } else if (kind == ModelKind::gat) {
    GatConfig c;
    c.input_dim = encoder.dim;
    model_config = c;
  } else {
    CommentOnlyConfig c;
    c.input_dim = encoder.dim;
    model_config = c;
  }

  const LoadedCorpus corpus = load_corpus(corpus_dir);
  const TrainResult result = train(corpus.graphs, model_config, encoder, config);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";

  save_checkpoint(result.model, ckpt_path);
  if (!history_path.empty()) {
    json history{{"format_version", 1}, {"loss", to_string(config.loss)}, {"epoch_losses", result.epoch_losses}};
    write_file(history_path, history.dump(2) + "\n");
  }
  std::cout << "trained " << model_kind << " on " << corpus.graphs.size() << " graphs; final epoch loss "
            << (result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back()) << "\n";
  return 0;
}

int run_evaluate(const std::string& ckpt_path, const std::string& corpus_dir, const std::string& out_path,
                 const std::string& at, int threads) {
  const Model model = load_checkpoint(ckpt_path);
  const LoadedCorpus corpus = load_corpus(corpus_dir);

  std::optional<int> at_horizon;
  if (!at.empty() && at != "final") at_horizon = std::stoi(at);

  const size_t n = corpus.graphs.size();
  std::vector<TrajectorySet> trajectories(n);
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) trajectories[i] = stream_predict(model, corpus.graphs[i], model.encoder);
  } else {
    // Opt-in parallelism: graphs are scored concurrently, then reduced in
    // index order, so the emitted metrics stay deterministic.
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          trajectories[i] = stream_predict(model, corpus.graphs[i], model.encoder);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  MetricsAccumulator acc;
  std::vector<MetricsAccumulator> horizon_acc;
  for (size_t i = 0; i < n; ++i) {
    const DiscussionGraph& g = corpus.graphs[i];
    const EvalMetrics gm = metrics(trajectories[i], g, at_horizon);
    for (int gold = 0; gold < kNumClasses; ++gold) {
      for (int pred = 0; pred < kNumClasses; ++pred) {
        for (int64_t k = 0; k < gm.confusion[gold][pred]; ++k) acc.add(gold, pred);
      }
    }
    for (const NodeTrajectory& node : trajectories[i].nodes) {
      const auto& gold_label = g.comments[g.index_of(node.node_id)].gold_label;
      if (!gold_label) throw std::runtime_error("missing gold label on comment '" + node.node_id + "'");
      const int gold = *gold_label;
      for (const TrajectoryPoint& pt : node.points) {
        if (static_cast<size_t>(pt.horizon) >= horizon_acc.size()) horizon_acc.resize(pt.horizon + 1);
        horizon_acc[pt.horizon].add(gold, pt.label);
      }
    }
  }

  json by_horizon = json::object();
  for (size_t h = 1; h < horizon_acc.size(); ++h) {
    const EvalMetrics hm = horizon_acc[h].finalize();
    if (hm.total > 0) {
      by_horizon[std::to_string(h)] =
          json{{"accuracy", hm.accuracy}, {"mean_absolute_error", hm.mean_absolute_error}, {"total", hm.total}};
    }
  }
  json doc = metrics_to_json(acc.finalize());
  doc["format_version"] = 1;
  doc["at"] = at_horizon ? json(*at_horizon) : json("final");
  doc["by_horizon"] = std::move(by_horizon);
  write_file(out_path, doc.dump(2) + "\n");
  std::cout << "evaluated " << n << " graphs: accuracy " << doc["accuracy"] << ", mae "
            << doc["mean_absolute_error"] << "\n";
  return 0;
}

int run_stream_report(const std::vector<std::string>& ckpt_paths, const std::string& thread_path,
                      const std::string& format, const std::string& out_path, int text_width) {
  const DiscussionGraph g = parse_thread(read_file(thread_path));
  std::vector<Model> models;
  std::vector<TrajectorySet> trajectories;
  models.reserve(ckpt_paths.size());
  for (const std::string& path : ckpt_paths) {
    models.push_back(load_checkpoint(path));
    trajectories.push_back(stream_predict(models.back(), g, models.back().encoder));
  }
  std::vector<std::pair<std::string, const TrajectorySet*>> columns;
  for (size_t i = 0; i < models.size(); ++i) {
    columns.emplace_back(to_string(models[i].kind()), &trajectories[i]);
  }
  const ReportFormat fmt = format == "csv" ? ReportFormat::csv : ReportFormat::markdown;
  if (format != "csv" && format != "markdown") throw std::runtime_error("format must be 'markdown' or 'csv'");
  const std::string report = render_report(g, columns, fmt, text_width);
  if (out_path.empty()) {
    std::cout << report;
  } else {
    write_file(out_path, report);
    std::cout << "wrote report to " << out_path << "\n";
  }
  return 0;
}

int run_grad_check(uint64_t seed, const std::string& which) {
  // Small seeded tree: 7 nodes, every node labeled.
  Rng rng(seed);
  std::vector<Comment> comments;
  for (int i = 0; i < 7; ++i) {
    Comment c;
    c.id = "n" + std::to_string(i);
    if (i > 0) c.parent_id = "n" + std::to_string(rng.uniform_int(0, i - 1));
    c.text = "sample comment number " + std::to_string(i) + (i % 2 ? " with spice" : " plain");
    c.gold_label = rng.uniform_int(0, 4);
    comments.push_back(std::move(c));
  }
  const DiscussionGraph g = build_graph("grad-check", std::nullopt, std::move(comments));

  EncoderSpec encoder;
  encoder.dim = 16;

  const Matrix features = encode_graph(g, encoder);
  TrainItem item;
  item.graph = &g;
  item.features = &features;
  for (const Comment& c : g.comments) item.gold.push_back(c.gold_label);
  const std::vector<TrainItem> batch{item};

  double worst = 0.0;
  auto check = [&](const std::string& name, Model model) {
    for (LossKind loss : {LossKind::cross_entropy, LossKind::ordinal_weighted}) {
      const GradCheckResult r = finite_difference_check(model, batch, loss, 0.0);
      std::cout << name << " / " << to_string(loss) << ": max relative error " << r.max_rel_error << " ("
                << r.coords_checked << " coordinates, worst at " << r.worst_tensor << "[" << r.worst_index << "])\n";
      worst = std::max(worst, r.max_rel_error);
    }
  };

  if (which == "all" || which == "graphormer") {
    GraphormerConfig cfg;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.model_dim = 8;
    cfg.ffn_dim = 16;
    cfg.input_dim = encoder.dim;
    check("graphormer", make_graphormer(cfg, encoder, seed + 1, 1.0));
  }
  if (which == "all" || which == "gat") {
    GatConfig cfg;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.model_dim = 8;
    cfg.input_dim = encoder.dim;
    check("gat", make_gat(cfg, encoder, seed + 2, 1.0));
  }
  if (which == "all" || which == "comment_only") {
    CommentOnlyConfig cfg;
    cfg.hidden_dim = 8;
    cfg.input_dim = encoder.dim;
    check("comment_only", make_comment_only(cfg, encoder, seed + 3, 1.0));
  }

  std::cout << "worst relative error: " << worst << "\n";
  if (worst >= 1e-4) {
    std::cerr << "gradient check FAILED (threshold 1e-4)\n";
    return 1;
  }
  std::cout << "gradient check passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discussion-graph hate speech forecasting toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic labeled corpus");
  uint64_t gen_seed = 0;
  std::string gen_out;
  int gen_num = 100;
  GenSpec gen_spec;
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--num-graphs", gen_num, "Number of graphs")->required();
  gen->add_option("--depth-min", gen_spec.depth_range[0], "Minimum tree depth");
  gen->add_option("--depth-max", gen_spec.depth_range[1], "Maximum tree depth");
  gen->add_option("--branching-min", gen_spec.branching_range[0], "Minimum level width");
  gen->add_option("--branching-max", gen_spec.branching_range[1], "Maximum level width");
  gen->add_option("--trigger-rate", gen_spec.trigger_rate, "Per-graph trigger probability");
  gen->add_option("--dependence-distance", gen_spec.dependence_distance, "Planted context distance");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on a labeled corpus");
  std::string tr_corpus, tr_model = "graphormer", tr_config, tr_loss, tr_ckpt, tr_history;
  uint64_t tr_seed = 0;
  int tr_epochs = 0;
  double tr_lr = 0.0;
  int tr_encoder_dim = 64;
  uint64_t tr_encoder_seed = 0;
  tr->add_option("--corpus", tr_corpus, "Corpus directory")->required();
  tr->add_option("--model", tr_model, "graphormer | gat | comment_only")->required();
  tr->add_option("--seed", tr_seed, "Training seed")->required();
  tr->add_option("--out", tr_ckpt, "Checkpoint output path")->required();
  tr->add_option("--config", tr_config, "TrainConfig JSON path");
  tr->add_option("--loss", tr_loss, "ce | ordinal_weighted (overrides config)");
  tr->add_option("--epochs", tr_epochs, "Epoch count (overrides config)");
  tr->add_option("--lr", tr_lr, "Learning rate (overrides config)");
  tr->add_option("--history", tr_history, "Loss history output path");
  tr->add_option("--encoder-dim", tr_encoder_dim, "Encoder width");
  tr->add_option("--encoder-seed", tr_encoder_seed, "Encoder hash seed");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a labeled corpus");
  std::string ev_ckpt, ev_corpus, ev_out, ev_at = "final";
  int ev_threads = 1;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint path")->required();
  ev->add_option("--corpus", ev_corpus, "Corpus directory")->required();
  ev->add_option("--out", ev_out, "Metrics JSON output path")->required();
  ev->add_option("--at", ev_at, "'final' or a horizon number");
  ev->add_option("--threads", ev_threads, "Opt-in parallelism across graphs");

  // stream-report
  auto* sr = app.add_subcommand("stream-report", "Render the streaming prediction table for a thread");
  std::vector<std::string> sr_ckpts;
  std::string sr_thread, sr_format = "markdown", sr_out;
  int sr_width = 60;
  sr->add_option("--ckpt", sr_ckpts, "Checkpoint path (repeatable, one column per model)")->required();
  sr->add_option("--thread", sr_thread, "Thread file")->required();
  sr->add_option("--format", sr_format, "markdown | csv");
  sr->add_option("--out", sr_out, "Output path (stdout when omitted)");
  sr->add_option("--text-width", sr_width, "Text truncation width");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Verify analytic gradients with finite differences");
  uint64_t gc_seed = 0;
  std::string gc_model = "all";
  gc->add_option("--seed", gc_seed, "Seed for graph and parameters")->required();
  gc->add_option("--model", gc_model, "all | graphormer | gat | comment_only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_generate(gen_seed, gen_out, gen_num, gen_spec);
    if (tr->parsed()) {
      return run_train(tr_corpus, tr_model, tr_seed, tr_config, tr_loss, tr_epochs, tr_lr, tr_ckpt, tr_history,
                       tr_encoder_dim, tr_encoder_seed);
    }
    if (ev->parsed()) return run_evaluate(ev_ckpt, ev_corpus, ev_out, ev_at, ev_threads);
    if (sr->parsed()) return run_stream_report(sr_ckpts, sr_thread, sr_format, sr_out, sr_width);
    if (gc->parsed()) return run_grad_check(gc_seed, gc_model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "hategraph/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hategraph {

TrajectorySet stream_predict(const Model& model, const DiscussionGraph& g, const EncoderSpec& encoder) {
  if (!(model.encoder == encoder)) {
    throw std::invalid_argument("encoder spec does not match the model checkpoint");
  }
  const int n = g.node_count();
  TrajectorySet out;
  out.max_horizon = std::max(1, g.max_depth);
  out.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    out.nodes[i].node_id = g.comments[i].id;
    out.nodes[i].depth = g.depth[i];
  }

  if (model.kind() == ModelKind::comment_only) {
    // A comment-only score cannot depend on context, so one pass over the
    // full node set serves every horizon.
    const Matrix features = encode_graph(g, encoder);
    const PredictionSet pred = model.predict_graph(g, features);
    for (int i = 0; i < n; ++i) {
      for (int d = std::max(1, g.depth[i]); d <= out.max_horizon; ++d) {
        TrajectoryPoint pt;
        pt.horizon = d;
        pt.label = pred.labels[i];
        for (int c = 0; c < kNumClasses; ++c) pt.probs[c] = pred.probs(i, c);
        out.nodes[i].points.push_back(pt);
      }
    }
    return out;
  }

  for (int d = 1; d <= out.max_horizon; ++d) {
    const DepthSnapshot snap = snapshot_at_depth(g, d);
    const Matrix features = encode_graph(snap.graph, encoder);
    const PredictionSet pred = model.predict_graph(snap.graph, features);
    for (int row = 0; row < snap.graph.node_count(); ++row) {
      const int orig = snap.original_index[row];
      TrajectoryPoint pt;
      pt.horizon = d;
      pt.label = pred.labels[row];
      for (int c = 0; c < kNumClasses; ++c) pt.probs[c] = pred.probs(row, c);
      out.nodes[orig].points.push_back(pt);
    }
  }
  return out;
}

void MetricsAccumulator::add(int gold, int predicted) {
  if (gold < 0 || gold > 4 || predicted < 0 || predicted > 4) {
    throw std::invalid_argument("labels must lie in [0,4]");
  }
  ++m_.confusion[static_cast<size_t>(gold)][static_cast<size_t>(predicted)];
  ++m_.per_class_counts[static_cast<size_t>(gold)];
  ++m_.total;
  abs_error_sum_ += std::abs(gold - predicted);
  if (gold == predicted) ++match_sum_;
}

EvalMetrics MetricsAccumulator::finalize() const {
  EvalMetrics out = m_;
  if (out.total > 0) {
    out.accuracy = static_cast<double>(match_sum_) / static_cast<double>(out.total);
    out.mean_absolute_error = static_cast<double>(abs_error_sum_) / static_cast<double>(out.total);
  }
  return out;
}

EvalMetrics metrics(const TrajectorySet& traj, const DiscussionGraph& g, std::optional<int> at_horizon) {
  if (static_cast<int>(traj.nodes.size()) != g.node_count()) {
    throw std::invalid_argument("trajectory set does not match the graph");
  }
  MetricsAccumulator acc;
  for (int i = 0; i < g.node_count(); ++i) {
    const NodeTrajectory& node = traj.nodes[i];
    if (node.node_id != g.comments[i].id) throw std::invalid_argument("trajectory set does not match the graph");
    const TrajectoryPoint* chosen = nullptr;
    if (!at_horizon) {
      if (!node.points.empty()) chosen = &node.points.back();
    } else {
      for (const TrajectoryPoint& pt : node.points) {
        if (pt.horizon == *at_horizon) {
          chosen = &pt;
          break;
        }
      }
    }
    if (!chosen) continue;
    if (!g.comments[i].gold_label) {
      throw std::invalid_argument("missing gold label on comment '" + g.comments[i].id + "'");
    }
    acc.add(*g.comments[i].gold_label, chosen->label);
  }
  return acc.finalize();
}

std::vector<std::string> depth_labels(const DiscussionGraph& g) {
  const int n = g.node_count();
  std::vector<int> depth_total(g.max_depth + 1, 0);
  for (int i = 0; i < n; ++i) ++depth_total[g.depth[i]];

  auto letters = [](int k) {  // 0 -> a, 25 -> z, 26 -> aa
    std::string s;
    ++k;
    while (k > 0) {
      --k;
      s.insert(s.begin(), static_cast<char>('a' + (k % 26)));
      k /= 26;
    }
    return s;
  };

  std::vector<int> seen(g.max_depth + 1, 0);
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) {
    const int d = g.depth[i];
    std::string label = std::to_string(d);
    if (depth_total[d] > 1) label += letters(seen[d]);
    ++seen[d];
    labels[i] = std::move(label);
  }
  return labels;
}

namespace {

// Truncation respects UTF-8 boundaries so a multibyte char never splits.
std::string truncate_text(const std::string& text, int width) {
  if (width <= 0 || static_cast<int>(text.size()) <= width) return text;
  int cut = width;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return text.substr(0, static_cast<size_t>(cut)) + " [...]";
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string render_report(const DiscussionGraph& g,
                          const std::vector<std::pair<std::string, const TrajectorySet*>>& models,
                          ReportFormat format, int text_width) {
  const int n = g.node_count();
  for (const auto& [name, traj] : models) {
    if (!traj || static_cast<int>(traj->nodes.size()) != n) {
      throw std::invalid_argument("trajectory set for model '" + name + "' does not match the graph");
    }
    for (int i = 0; i < n; ++i) {
      if (traj->nodes[i].node_id != g.comments[i].id) {
        throw std::invalid_argument("trajectory set for model '" + name + "' does not match the graph");
      }
    }
  }

  // Depth order, stable by node order within a depth.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&g](int a, int b) { return g.depth[a] < g.depth[b]; });

  const std::vector<std::string> labels = depth_labels(g);
  std::ostringstream out;

  if (format == ReportFormat::markdown) {
    out << "| Depth | Text |";
    for (const auto& [name, traj] : models) out << ' ' << name << " |";
    out << '\n';
    out << "| --- | --- |";
    for (size_t k = 0; k < models.size(); ++k) out << " --- |";
    out << '\n';
    for (int i : order) {
      out << "| " << labels[i] << " | " << truncate_text(g.comments[i].text, text_width) << " |";
      for (const auto& [name, traj] : models) {
        const auto& points = traj->nodes[i].points;
        out << ' ' << (points.empty() ? std::string("-") : std::to_string(points.back().label)) << " |";
      }
      out << '\n';
    }
  } else {
    out << "Depth,Text";
    for (const auto& [name, traj] : models) out << ',' << csv_quote(name);
    out << '\n';
    for (int i : order) {
      out << labels[i] << ',' << csv_quote(truncate_text(g.comments[i].text, text_width));
      for (const auto& [name, traj] : models) {
        const auto& points = traj->nodes[i].points;
        out << ',' << (points.empty() ? std::string("-") : std::to_string(points.back().label));
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace hategraph

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hategraph/model.hpp"

namespace hategraph {

struct TrajectoryPoint {
  int horizon = 0;
  int label = 0;
  std::array<double, kNumClasses> probs{};
};

// One node's prediction at every horizon from the first at which it is
// visible (max(1, its depth)) up to the tree's max depth.
struct NodeTrajectory {
  std::string node_id;
  int depth = 0;
  std::vector<TrajectoryPoint> points;
};

struct TrajectorySet {
  std::vector<NodeTrajectory> nodes;  // graph node order
  int max_horizon = 1;
};

// Depth-wise streaming protocol: for each horizon d = 1..max_depth the
// model predicts every node of the depth-d snapshot, so predictions never
// see deeper comments. Comment-only models score each node once from its
// own text and the result is replicated across horizons. Throws when the
// passed encoder differs from the model checkpoint's encoder.
TrajectorySet stream_predict(const Model& model, const DiscussionGraph& g, const EncoderSpec& encoder);

struct EvalMetrics {
  double accuracy = 0.0;
  double mean_absolute_error = 0.0;
  std::array<std::array<int64_t, kNumClasses>, kNumClasses> confusion{};  // [gold][predicted]
  std::array<int64_t, kNumClasses> per_class_counts{};                    // gold counts
  int64_t total = 0;
};

// Streaming-friendly tally; metrics() and corpus-level evaluation share it.
struct MetricsAccumulator {
  void add(int gold, int predicted);
  EvalMetrics finalize() const;

 private:
  EvalMetrics m_;
  int64_t abs_error_sum_ = 0;
  int64_t match_sum_ = 0;
};

// Scores trajectories against the graph's gold labels at the requested
// horizon (nullopt = each node's final horizon; otherwise only nodes
// visible at that horizon). Throws when a scored node lacks a gold label.
EvalMetrics metrics(const TrajectorySet& traj, const DiscussionGraph& g, std::optional<int> at_horizon = std::nullopt);

enum class ReportFormat { markdown, csv };

// Table with one row per comment in depth order, depth labels with sibling
// letters (0, 1a, 1b, ...), truncated text and one column per model showing
// the final-horizon label.
std::string render_report(const DiscussionGraph& g,
                          const std::vector<std::pair<std::string, const TrajectorySet*>>& models,
                          ReportFormat format, int text_width = 60);

// Depth label of every node: depth number plus a sibling letter when the
// depth level holds more than one node ("1a"), bare otherwise ("4").
std::vector<std::string> depth_labels(const DiscussionGraph& g);

}  // namespace hategraph

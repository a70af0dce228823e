#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hategraph/discussion.hpp"

namespace hategraph {

// Token pools for synthetic corpora. Hateful templates are the only texts
// containing lexicon tokens; trigger templates are fixed surface strings
// reused verbatim under both topics.
struct Vocabulary {
  std::vector<std::string> filler;
  std::string benign_topic = "topic_b";
  std::string contentious_topic = "topic_c";
  std::vector<std::string> trigger_templates;
  std::vector<int> trigger_benign_labels;  // label of each trigger template under topic_b
  std::vector<std::string> hateful_templates;
  std::vector<std::string> hateful_lexicon;
  std::vector<std::string> benign_templates;
  std::vector<int> benign_labels;

  static Vocabulary defaults();
  void validate() const;

  // Index of the trigger/benign template matching text, or -1.
  int trigger_template_index(const std::string& text) const;
  int benign_template_index(const std::string& text) const;
  bool contains_hateful_token(const std::string& text) const;
};

struct GenSpec {
  uint64_t seed = 0;
  int num_graphs = 1;
  std::array<int, 2> depth_range{7, 10};
  std::array<int, 2> branching_range{1, 3};  // nodes added per depth level
  double trigger_rate = 0.25;                // probability a graph hosts a trigger
  int dependence_distance = 3;
  Vocabulary vocabulary = Vocabulary::defaults();

  void validate() const;
  std::string to_json_text() const;
  static GenSpec from_json_text(const std::string& text);
};

struct GraphManifest {
  std::string graph_id;
  bool contentious = false;
  std::vector<std::string> trigger_ids;
  std::vector<std::string> hateful_ids;
};

struct SyntheticCorpus {
  GenSpec spec;
  std::string spec_hash;
  std::vector<DiscussionGraph> graphs;
  std::vector<GraphManifest> manifests;  // parallel to graphs
};

// Seeded generator. Every graph's root embeds exactly one topic token among
// filler; a trigger (at most one per graph) sits at depth >=
// dependence_distance, and under the contentious topic its hateful-lexicon
// descendants sit a further >= dependence_distance below it, so no
// topic-dependent content exists within dependence_distance - 1 hops of a
// trigger. Gold labels come from oracle_label for every node.
SyntheticCorpus generate(const GenSpec& spec);

// Labeling rule: trigger under the contentious topic scores 3 with fewer
// than two hateful descendants, else 4; the same trigger text under the
// benign topic scores its template's 0/1 label; hateful-lexicon nodes score
// 2; the root scores 1 under the contentious topic and 0 otherwise; all
// remaining nodes score their benign template's 0/1 label. Throws when the
// manifest or vocabulary does not cover the node.
int oracle_label(const DiscussionGraph& g, int node_index, const GraphManifest& manifest, const Vocabulary& vocab);

struct AuditViolation {
  std::string kind;  // "text_single_topic" | "text_label_concentration" | "trigger_too_shallow"
  std::string detail;
};

struct TriggerTextStats {
  std::string text;
  int64_t count = 0;
  bool seen_benign_topic = false;
  bool seen_contentious_topic = false;
  std::array<int64_t, 5> label_counts{};
  double max_class_share = 0.0;
};

struct AuditReport {
  int64_t trigger_count = 0;
  std::vector<TriggerTextStats> per_text;
  std::vector<AuditViolation> violations;
  // Bayes accuracy of any predictor that sees only the trigger text:
  // sum over texts of P(text) * max_label P(label | text).
  double text_only_ceiling = 0.0;
};

// Checks that (a) every trigger surface text occurs under both topics,
// (b) per text the label distribution has >= 2 values with max share <= 0.6,
// (c) every trigger sits at tree distance >= dependence_distance from its
// root. Violations are report content, not errors.
AuditReport ambiguity_audit(const SyntheticCorpus& corpus);

// One thread file per graph plus manifest.json in dir.
void write_corpus(const SyntheticCorpus& corpus, const std::string& dir);

struct LoadedCorpus {
  std::vector<DiscussionGraph> graphs;
  std::vector<GraphManifest> manifests;  // empty when no manifest.json exists
  std::string spec_hash;
};

// Reads the graphs named by dir/manifest.json, or every *.json thread file
// (sorted by name) when no manifest is present.
LoadedCorpus load_corpus(const std::string& dir);

}  // namespace hategraph

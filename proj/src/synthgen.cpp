#include "hategraph/synthgen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "hategraph/encoder.hpp"
#include "hategraph/rng.hpp"
#include "json.hpp"

namespace hategraph {

namespace fs = std::filesystem;
using nlohmann::json;

Vocabulary Vocabulary::defaults() {
  Vocabulary v;
  v.filler = {"the",  "discussion", "thread", "reply",   "point", "people", "today",  "maybe",
              "really", "just",     "quite",  "still",   "another", "small", "detail", "while"};
  v.trigger_templates = {
      "you all know exactly what happens next in these threads",
      "someone should keep an eye on where this is heading",
      "i have seen this exact setup before and it never ends well",
      "watch the replies under this one closely",
      "this is the part where the usual crowd arrives",
      "let us see how long this stays civil",
  };
  v.trigger_benign_labels = {1, 0, 1, 0, 1, 0};
  v.hateful_templates = {
      "those people are absolute vermin and everyone knows it",
      "utter scum the lot of them get them out",
      "nothing but filth spreading through this place",
      "these degenerates deserve everything coming to them",
  };
  v.hateful_lexicon = {"vermin", "scum", "filth", "degenerates"};
  v.benign_templates = {
      "thanks for sharing this",
      "interesting point i had not considered",
      "could you add a source for that",
      "i slightly disagree but fair enough",
      "this take is a bit heated honestly",
      "not sure this adds much to the thread",
      "good context appreciated",
      "tempers are flaring a little here",
  };
  v.benign_labels = {0, 0, 0, 1, 1, 1, 0, 1};
  return v;
}

void Vocabulary::validate() const {
  if (filler.empty() || trigger_templates.empty() || hateful_templates.empty() || benign_templates.empty() ||
      hateful_lexicon.empty()) {
    throw std::invalid_argument("vocabulary pools must be non-empty");
  }
  if (trigger_benign_labels.size() != trigger_templates.size() || benign_labels.size() != benign_templates.size()) {
    throw std::invalid_argument("template label lists must parallel their templates");
  }
  for (int l : trigger_benign_labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("trigger benign labels must be 0 or 1");
  }
  for (int l : benign_labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("benign labels must be 0 or 1");
  }
  for (const std::string& t : hateful_templates) {
    if (!contains_hateful_token(t)) {
      throw std::invalid_argument("hateful template lacks a lexicon token: '" + t + "'");
    }
  }
  for (const std::string& t : trigger_templates) {
    if (contains_hateful_token(t)) throw std::invalid_argument("trigger template contains a lexicon token");
  }
  for (const std::string& t : benign_templates) {
    if (contains_hateful_token(t)) throw std::invalid_argument("benign template contains a lexicon token");
  }
}

int Vocabulary::trigger_template_index(const std::string& text) const {
  for (size_t i = 0; i < trigger_templates.size(); ++i) {
    if (trigger_templates[i] == text) return static_cast<int>(i);
  }
  return -1;
}

int Vocabulary::benign_template_index(const std::string& text) const {
  for (size_t i = 0; i < benign_templates.size(); ++i) {
    if (benign_templates[i] == text) return static_cast<int>(i);
  }
  return -1;
}

bool Vocabulary::contains_hateful_token(const std::string& text) const {
  for (const std::string& tok : tokenize(text)) {
    for (const std::string& bad : hateful_lexicon) {
      if (tok == bad) return true;
    }
  }
  return false;
}

void GenSpec::validate() const {
  if (num_graphs < 1) throw std::invalid_argument("num_graphs must be positive");
  if (depth_range[0] < 4 || depth_range[0] > depth_range[1]) {
    throw std::invalid_argument("depth_range must satisfy 4 <= min <= max");
  }
  if (branching_range[0] < 1 || branching_range[0] > branching_range[1]) {
    throw std::invalid_argument("branching_range must satisfy 1 <= min <= max");
  }
  if (trigger_rate < 0.0 || trigger_rate >= 1.0) throw std::invalid_argument("trigger_rate must lie in [0,1)");
  if (dependence_distance < 3) throw std::invalid_argument("dependence_distance must be at least 3");
  if (dependence_distance > depth_range[0]) {
    throw std::invalid_argument("dependence_distance must not exceed depth_range.min");
  }
  if (dependence_distance > depth_range[1]) {
    throw std::invalid_argument("unsatisfiable spec: dependence_distance exceeds depth_range.max");
  }
  vocabulary.validate();
}

namespace {

json vocab_to_json(const Vocabulary& v) {
  return json{{"filler", v.filler},
              {"benign_topic", v.benign_topic},
              {"contentious_topic", v.contentious_topic},
              {"trigger_templates", v.trigger_templates},
              {"trigger_benign_labels", v.trigger_benign_labels},
              {"hateful_templates", v.hateful_templates},
              {"hateful_lexicon", v.hateful_lexicon},
              {"benign_templates", v.benign_templates},
              {"benign_labels", v.benign_labels}};
}

Vocabulary vocab_from_json(const json& j) {
  Vocabulary v;
  v.filler = j.at("filler").get<std::vector<std::string>>();
  v.benign_topic = j.at("benign_topic").get<std::string>();
  v.contentious_topic = j.at("contentious_topic").get<std::string>();
  v.trigger_templates = j.at("trigger_templates").get<std::vector<std::string>>();
  v.trigger_benign_labels = j.at("trigger_benign_labels").get<std::vector<int>>();
  v.hateful_templates = j.at("hateful_templates").get<std::vector<std::string>>();
  v.hateful_lexicon = j.at("hateful_lexicon").get<std::vector<std::string>>();
  v.benign_templates = j.at("benign_templates").get<std::vector<std::string>>();
  v.benign_labels = j.at("benign_labels").get<std::vector<int>>();
  return v;
}

json spec_to_json(const GenSpec& s) {
  return json{{"seed", s.seed},
              {"num_graphs", s.num_graphs},
              {"depth_range", s.depth_range},
              {"branching_range", s.branching_range},
              {"trigger_rate", s.trigger_rate},
              {"dependence_distance", s.dependence_distance},
              {"vocabulary", vocab_to_json(s.vocabulary)}};
}

GenSpec spec_from_json(const json& j) {
  GenSpec s;
  s.seed = j.at("seed").get<uint64_t>();
  s.num_graphs = j.at("num_graphs").get<int>();
  s.depth_range = j.at("depth_range").get<std::array<int, 2>>();
  s.branching_range = j.at("branching_range").get<std::array<int, 2>>();
  s.trigger_rate = j.at("trigger_rate").get<double>();
  s.dependence_distance = j.at("dependence_distance").get<int>();
  if (j.contains("vocabulary")) s.vocabulary = vocab_from_json(j.at("vocabulary"));
  s.validate();
  return s;
}

std::string fnv_hex(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

bool is_descendant(const DiscussionGraph& g, int node, int ancestor) {
  while (node >= 0) {
    if (node == ancestor) return true;
    node = g.parent[node];
  }
  return false;
}

}  // namespace

std::string GenSpec::to_json_text() const { return spec_to_json(*this).dump(2) + "\n"; }

GenSpec GenSpec::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed generator spec: ") + e.what());
  }
  return spec_from_json(doc);
}

int oracle_label(const DiscussionGraph& g, int node_index, const GraphManifest& manifest, const Vocabulary& vocab) {
  if (node_index < 0 || node_index >= g.node_count()) throw std::invalid_argument("node index out of range");
  const Comment& c = g.comments[node_index];

  const bool is_trigger =
      std::find(manifest.trigger_ids.begin(), manifest.trigger_ids.end(), c.id) != manifest.trigger_ids.end();
  if (is_trigger) {
    const int ti = vocab.trigger_template_index(c.text);
    if (ti < 0) throw std::invalid_argument("manifest mismatch: trigger '" + c.id + "' has an unknown template");
    if (!manifest.contentious) return vocab.trigger_benign_labels[ti];
    int hateful_descendants = 0;
    for (int j = 0; j < g.node_count(); ++j) {
      if (j != node_index && is_descendant(g, j, node_index) && vocab.contains_hateful_token(g.comments[j].text)) {
        ++hateful_descendants;
      }
    }
    return hateful_descendants < 2 ? 3 : 4;
  }
  if (vocab.contains_hateful_token(c.text)) return 2;
  if (node_index == g.root_index) return manifest.contentious ? 1 : 0;
  const int bi = vocab.benign_template_index(c.text);
  if (bi < 0) throw std::invalid_argument("manifest mismatch: node '" + c.id + "' has an unknown template");
  return vocab.benign_labels[bi];
}

SyntheticCorpus generate(const GenSpec& spec) {
  spec.validate();
  const Vocabulary& vocab = spec.vocabulary;
  const int dep = spec.dependence_distance;

  SyntheticCorpus corpus;
  corpus.spec = spec;
  corpus.spec_hash = fnv_hex(spec_to_json(spec).dump());
  corpus.graphs.reserve(spec.num_graphs);
  corpus.manifests.reserve(spec.num_graphs);

  Rng rng(spec.seed);
  for (int gi = 0; gi < spec.num_graphs; ++gi) {
    std::ostringstream idss;
    idss << "synth-" << std::setw(5) << std::setfill('0') << gi;
    const std::string graph_id = idss.str();

    const bool contentious = rng.next_bool();
    const int depth_target = rng.uniform_int(spec.depth_range[0], spec.depth_range[1]);

    // Level-by-level shape: each level's width comes from branching_range
    // and every node picks a parent uniformly in the level above, so the
    // tree reaches depth_target exactly and stays linear in size.
    std::vector<int> parent{-1};
    std::vector<std::vector<int>> levels{{0}};
    for (int d = 1; d <= depth_target; ++d) {
      const int width = rng.uniform_int(spec.branching_range[0], spec.branching_range[1]);
      std::vector<int> level;
      for (int k = 0; k < width; ++k) {
        const auto& prev = levels[d - 1];
        const int p = prev[rng.uniform_int(0, static_cast<int>(prev.size()) - 1)];
        parent.push_back(p);
        level.push_back(static_cast<int>(parent.size()) - 1);
      }
      levels.push_back(std::move(level));
    }
    const int n = static_cast<int>(parent.size());

    // Trigger placement: hang it on the chain above a deepest node so its
    // descendants are guaranteed to reach depth_target, leaving room for
    // hateful nodes at tree distance >= dep below it.
    int trigger = -1;
    std::vector<int> hateful_nodes;
    if (spec.trigger_rate > 0.0 && rng.next_double() < spec.trigger_rate) {
      const auto& deepest = levels[depth_target];
      const int leaf = deepest[rng.uniform_int(0, static_cast<int>(deepest.size()) - 1)];
      std::vector<int> chain(depth_target + 1, -1);  // chain[d] = ancestor of leaf at depth d
      {
        int cur = leaf;
        for (int d = depth_target; d >= 0; --d) {
          chain[d] = cur;
          cur = parent[cur];
        }
      }
      int trigger_depth;
      bool want_four = false;
      if (depth_target >= 2 * dep + 1) {
        trigger_depth = rng.uniform_int(dep, depth_target - dep - 1);
        want_four = rng.next_bool();
      } else if (depth_target >= 2 * dep) {
        trigger_depth = dep;
      } else {
        trigger_depth = rng.uniform_int(dep, depth_target);
      }
      trigger = chain[trigger_depth];

      if (contentious && trigger_depth + dep <= depth_target) {
        if (want_four) {
          // every trigger descendant at depth >= trigger_depth + dep
          std::vector<int> depth_of(n, 0);
          for (int i = 1; i < n; ++i) depth_of[i] = depth_of[parent[i]] + 1;
          std::vector<bool> under(n, false);
          under[trigger] = true;
          for (int i = 0; i < n; ++i) {
            if (parent[i] >= 0 && under[parent[i]]) under[i] = true;
          }
          for (int i = 0; i < n; ++i) {
            if (i != trigger && under[i] && depth_of[i] >= trigger_depth + dep) hateful_nodes.push_back(i);
          }
        } else {
          hateful_nodes.push_back(chain[trigger_depth + dep]);
        }
      }
    }

    std::vector<bool> is_hateful(n, false);
    for (int i : hateful_nodes) is_hateful[i] = true;

    std::vector<Comment> comments(n);
    for (int i = 0; i < n; ++i) {
      Comment& c = comments[i];
      c.id = "n" + std::to_string(i);
      if (i > 0) c.parent_id = "n" + std::to_string(parent[i]);
      if (i == 0) {
        const int fill_count = rng.uniform_int(4, 7);
        std::vector<std::string> words(fill_count);
        for (auto& w : words) w = vocab.filler[rng.uniform_int(0, static_cast<int>(vocab.filler.size()) - 1)];
        const std::string& topic = contentious ? vocab.contentious_topic : vocab.benign_topic;
        words.insert(words.begin() + rng.uniform_int(0, fill_count), topic);
        std::string text;
        for (size_t w = 0; w < words.size(); ++w) {
          if (w) text += ' ';
          text += words[w];
        }
        c.text = std::move(text);
      } else if (i == trigger) {
        c.text = vocab.trigger_templates[rng.uniform_int(0, static_cast<int>(vocab.trigger_templates.size()) - 1)];
      } else if (is_hateful[i]) {
        c.text = vocab.hateful_templates[rng.uniform_int(0, static_cast<int>(vocab.hateful_templates.size()) - 1)];
      } else {
        c.text = vocab.benign_templates[rng.uniform_int(0, static_cast<int>(vocab.benign_templates.size()) - 1)];
      }
    }

    DiscussionGraph graph = build_graph(graph_id, std::nullopt, std::move(comments));
    GraphManifest manifest;
    manifest.graph_id = graph_id;
    manifest.contentious = contentious;
    if (trigger >= 0) manifest.trigger_ids.push_back(graph.comments[trigger].id);
    for (int i : hateful_nodes) manifest.hateful_ids.push_back(graph.comments[i].id);

    for (int i = 0; i < graph.node_count(); ++i) {
      graph.comments[i].gold_label = oracle_label(graph, i, manifest, vocab);
    }
    corpus.graphs.push_back(std::move(graph));
    corpus.manifests.push_back(std::move(manifest));
  }
  return corpus;
}

AuditReport ambiguity_audit(const SyntheticCorpus& corpus) {
  if (corpus.graphs.empty()) throw std::invalid_argument("empty corpus");
  AuditReport report;
  std::vector<TriggerTextStats> stats;

  auto stats_for = [&stats](const std::string& text) -> TriggerTextStats& {
    for (auto& s : stats) {
      if (s.text == text) return s;
    }
    stats.push_back(TriggerTextStats{});
    stats.back().text = text;
    return stats.back();
  };

  for (size_t gi = 0; gi < corpus.graphs.size(); ++gi) {
    const DiscussionGraph& g = corpus.graphs[gi];
    const GraphManifest& manifest = corpus.manifests[gi];
    for (const std::string& tid : manifest.trigger_ids) {
      const int idx = g.index_of(tid);
      const Comment& c = g.comments[idx];
      if (!c.gold_label) throw std::invalid_argument("trigger '" + tid + "' is unlabeled");
      ++report.trigger_count;
      TriggerTextStats& s = stats_for(c.text);
      ++s.count;
      (manifest.contentious ? s.seen_contentious_topic : s.seen_benign_topic) = true;
      ++s.label_counts[static_cast<size_t>(*c.gold_label)];
      if (g.depth[idx] < corpus.spec.dependence_distance) {
        report.violations.push_back(
            {"trigger_too_shallow", "graph '" + manifest.graph_id + "' trigger '" + tid + "' at depth " +
                                        std::to_string(g.depth[idx]) + " < " +
                                        std::to_string(corpus.spec.dependence_distance)});
      }
    }
  }

  double ceiling_mass = 0.0;
  for (TriggerTextStats& s : stats) {
    if (!s.seen_benign_topic || !s.seen_contentious_topic) {
      report.violations.push_back({"text_single_topic", "trigger text '" + s.text + "' occurs under one topic only"});
    }
    int distinct = 0;
    int64_t max_count = 0;
    for (int64_t cnt : s.label_counts) {
      if (cnt > 0) ++distinct;
      max_count = std::max(max_count, cnt);
    }
    s.max_class_share = s.count > 0 ? static_cast<double>(max_count) / static_cast<double>(s.count) : 0.0;
    if (distinct < 2 || s.max_class_share > 0.6) {
      std::ostringstream detail;
      detail << "trigger text '" << s.text << "' has " << distinct << " label values, max share "
             << s.max_class_share;
      report.violations.push_back({"text_label_concentration", detail.str()});
    }
    ceiling_mass += static_cast<double>(max_count);
  }
  report.per_text = std::move(stats);
  report.text_only_ceiling = report.trigger_count > 0 ? ceiling_mass / static_cast<double>(report.trigger_count) : 0.0;
  return report;
}

void write_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  json graphs = json::array();
  for (size_t gi = 0; gi < corpus.graphs.size(); ++gi) {
    const DiscussionGraph& g = corpus.graphs[gi];
    const GraphManifest& m = corpus.manifests[gi];
    const fs::path path = fs::path(dir) / (g.thread_id + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << serialize_thread(g);
    graphs.push_back(json{{"id", m.graph_id},
                          {"topic", m.contentious ? corpus.spec.vocabulary.contentious_topic
                                                  : corpus.spec.vocabulary.benign_topic},
                          {"trigger_ids", m.trigger_ids},
                          {"hateful_ids", m.hateful_ids}});
  }
  json manifest{{"format_version", 1},
                {"spec_hash", corpus.spec_hash},
                {"gen_spec", spec_to_json(corpus.spec)},
                {"graphs", std::move(graphs)}};
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(1) << "\n";
}

LoadedCorpus load_corpus(const std::string& dir) {
  LoadedCorpus out;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw std::runtime_error("corpus directory '" + dir + "' does not exist");

  auto read_file = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const fs::path manifest_path = root / "manifest.json";
  if (fs::exists(manifest_path)) {
    json manifest;
    try {
      manifest = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("malformed manifest.json: ") + e.what());
    }
    out.spec_hash = manifest.value("spec_hash", "");
    std::string contentious_topic = "topic_c";
    if (manifest.contains("gen_spec")) {
      contentious_topic = manifest["gen_spec"]["vocabulary"].value("contentious_topic", "topic_c");
    }
    for (const json& entry : manifest.at("graphs")) {
      GraphManifest m;
      m.graph_id = entry.at("id").get<std::string>();
      m.contentious = entry.at("topic").get<std::string>() == contentious_topic;
      m.trigger_ids = entry.at("trigger_ids").get<std::vector<std::string>>();
      if (entry.contains("hateful_ids")) m.hateful_ids = entry.at("hateful_ids").get<std::vector<std::string>>();
      out.graphs.push_back(parse_thread(read_file(root / (m.graph_id + ".json"))));
      out.manifests.push_back(std::move(m));
    }
    return out;
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) out.graphs.push_back(parse_thread(read_file(p)));
  if (out.graphs.empty()) throw std::runtime_error("no thread files found in '" + dir + "'");
  return out;
}

}  // namespace hategraph

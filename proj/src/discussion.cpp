#include "hategraph/discussion.hpp"

#include <algorithm>
#include <deque>

#include "json.hpp"

namespace hategraph {

using nlohmann::json;

DiscussionGraph build_graph(std::string thread_id,
                            std::optional<std::string> community,
                            std::vector<Comment> comments) {
  if (comments.empty()) throw std::invalid_argument("thread has no comments");
  if (comments.size() > static_cast<size_t>(kMaxGraphNodes)) {
    throw std::invalid_argument("thread exceeds the " + std::to_string(kMaxGraphNodes) +
                                "-comment limit (" + std::to_string(comments.size()) + " comments)");
  }

  DiscussionGraph g;
  g.thread_id = std::move(thread_id);
  g.community = std::move(community);
  g.comments = std::move(comments);

  const int n = g.node_count();
  for (int i = 0; i < n; ++i) {
    const Comment& c = g.comments[i];
    if (c.id.empty()) throw std::invalid_argument("comment at position " + std::to_string(i) + " has an empty id");
    if (!g.index_.emplace(c.id, i).second) throw std::invalid_argument("duplicate comment id '" + c.id + "'");
    if (c.gold_label && (*c.gold_label < 0 || *c.gold_label > 4)) {
      throw std::invalid_argument("gold label " + std::to_string(*c.gold_label) + " outside [0,4] on comment '" +
                                  c.id + "'");
    }
  }

  g.parent.assign(n, -1);
  g.children.assign(n, {});
  for (int i = 0; i < n; ++i) {
    const Comment& c = g.comments[i];
    if (!c.parent_id) {
      if (g.root_index >= 0) {
        throw std::invalid_argument("multiple roots: '" + g.comments[g.root_index].id + "' and '" + c.id + "'");
      }
      g.root_index = i;
      g.root_id = c.id;
    } else {
      auto it = g.index_.find(*c.parent_id);
      if (it == g.index_.end()) {
        throw std::invalid_argument("unknown parent '" + *c.parent_id + "' for comment '" + c.id + "'");
      }
      g.parent[i] = it->second;
      g.children[it->second].push_back(i);
    }
  }
  if (g.root_index < 0) throw std::invalid_argument("no root: every comment has a parent_id");

  // BFS from the root; anything unreached sits on a reply cycle.
  g.depth.assign(n, -1);
  g.depth[g.root_index] = 0;
  std::deque<int> queue{g.root_index};
  int reached = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    ++reached;
    g.max_depth = std::max(g.max_depth, g.depth[u]);
    for (int v : g.children[u]) {
      g.depth[v] = g.depth[u] + 1;
      queue.push_back(v);
    }
  }
  if (reached != n) {
    for (int i = 0; i < n; ++i) {
      if (g.depth[i] < 0) {
        throw std::invalid_argument("reply cycle: comment '" + g.comments[i].id + "' is not reachable from the root");
      }
    }
  }
  return g;
}

DiscussionGraph parse_thread(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed thread file: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("malformed thread file: top level is not an object");
  if (!doc.contains("id") || !doc["id"].is_string()) throw std::invalid_argument("thread is missing a string 'id'");
  if (!doc.contains("comments") || !doc["comments"].is_array()) {
    throw std::invalid_argument("thread is missing a 'comments' array");
  }

  std::optional<std::string> community;
  if (doc.contains("community") && !doc["community"].is_null()) {
    if (!doc["community"].is_string()) throw std::invalid_argument("'community' must be a string");
    community = doc["community"].get<std::string>();
  }

  std::vector<Comment> comments;
  comments.reserve(doc["comments"].size());
  for (const auto& item : doc["comments"]) {
    if (!item.is_object()) throw std::invalid_argument("comment entry is not an object");
    Comment c;
    if (!item.contains("id") || !item["id"].is_string()) throw std::invalid_argument("comment is missing a string 'id'");
    c.id = item["id"].get<std::string>();
    if (!item.contains("parent_id")) throw std::invalid_argument("comment '" + c.id + "' is missing 'parent_id'");
    if (!item["parent_id"].is_null()) {
      if (!item["parent_id"].is_string()) {
        throw std::invalid_argument("comment '" + c.id + "' has a non-string parent_id");
      }
      c.parent_id = item["parent_id"].get<std::string>();
    }
    if (!item.contains("text") || !item["text"].is_string()) {
      throw std::invalid_argument("comment '" + c.id + "' is missing a string 'text'");
    }
    c.text = item["text"].get<std::string>();
    if (item.contains("label") && !item["label"].is_null()) {
      if (!item["label"].is_number_integer()) {
        throw std::invalid_argument("comment '" + c.id + "' has a non-integer label");
      }
      c.gold_label = item["label"].get<int>();
    }
    if (item.contains("author") && !item["author"].is_null()) {
      if (!item["author"].is_string()) throw std::invalid_argument("comment '" + c.id + "' has a non-string author");
      c.author = item["author"].get<std::string>();
    }
    comments.push_back(std::move(c));
  }
  return build_graph(doc["id"].get<std::string>(), std::move(community), std::move(comments));
}

std::string serialize_thread(const DiscussionGraph& g) {
  json doc;
  doc["id"] = g.thread_id;
  if (g.community) doc["community"] = *g.community;
  json arr = json::array();
  for (const Comment& c : g.comments) {
    json item;
    item["id"] = c.id;
    item["parent_id"] = c.parent_id ? json(*c.parent_id) : json(nullptr);
    item["text"] = c.text;
    if (c.gold_label) item["label"] = *c.gold_label;
    if (c.author) item["author"] = *c.author;
    arr.push_back(std::move(item));
  }
  doc["comments"] = std::move(arr);
  return doc.dump(2) + "\n";
}

int tree_distance_by_index(const DiscussionGraph& g, int u, int v) {
  int du = g.depth[u];
  int dv = g.depth[v];
  int dist = 0;
  while (du > dv) {
    u = g.parent[u];
    --du;
    ++dist;
  }
  while (dv > du) {
    v = g.parent[v];
    --dv;
    ++dist;
  }
  while (u != v) {
    u = g.parent[u];
    v = g.parent[v];
    dist += 2;
  }
  return dist;
}

int tree_distance(const DiscussionGraph& g, const std::string& u, const std::string& v) {
  return tree_distance_by_index(g, g.index_of(u), g.index_of(v));
}

DepthSnapshot snapshot_at_depth(const DiscussionGraph& g, int d) {
  if (d < 0) throw std::invalid_argument("snapshot depth must be non-negative");
  DepthSnapshot snap;
  snap.horizon = d;
  std::vector<Comment> kept;
  for (int i = 0; i < g.node_count(); ++i) {
    if (g.depth[i] <= d) {
      kept.push_back(g.comments[i]);
      snap.original_index.push_back(i);
    }
  }
  snap.graph = build_graph(g.thread_id, g.community, std::move(kept));
  return snap;
}

std::vector<DegreePair> degrees(const DiscussionGraph& g) {
  std::vector<DegreePair> out(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    out[i].in = (i == g.root_index) ? 0 : 1;
    out[i].out = static_cast<int>(g.children[i].size());
  }
  return out;
}

}  // namespace hategraph

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hategraph {

// Hard cap on nodes per graph: attention cost is quadratic in node count.
inline constexpr int kMaxGraphNodes = 4096;

struct Comment {
  std::string id;
  std::optional<std::string> parent_id;  // absent exactly for the root post
  std::string text;
  std::optional<int> gold_label;  // ordinal 0..4
  std::optional<std::string> author;
};

// Rooted reply tree. Immutable after construction; node order is file order
// and every downstream matrix indexes nodes by it.
struct DiscussionGraph {
  std::string thread_id;
  std::optional<std::string> community;
  std::vector<Comment> comments;
  std::string root_id;
  int root_index = -1;
  std::vector<int> parent;                 // parent index, -1 for root
  std::vector<std::vector<int>> children;  // child indices in file order
  std::vector<int> depth;                  // root is 0
  int max_depth = 0;

  int node_count() const { return static_cast<int>(comments.size()); }

  int index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown comment id '" + id + "'");
    return it->second;
  }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  friend DiscussionGraph build_graph(std::string thread_id,
                                     std::optional<std::string> community,
                                     std::vector<Comment> comments);

 private:
  std::unordered_map<std::string, int> index_;
};

// Validates the comment list and computes the tree structure. Throws
// std::invalid_argument naming the offending id on: duplicate or empty id,
// zero or multiple roots, dangling parent_id, a reply cycle, a gold label
// outside [0,4], or more than kMaxGraphNodes comments.
DiscussionGraph build_graph(std::string thread_id,
                            std::optional<std::string> community,
                            std::vector<Comment> comments);

// Parses one thread file (UTF-8 JSON, see README for the schema).
DiscussionGraph parse_thread(const std::string& bytes);

// Inverse of parse_thread up to JSON formatting; round-trips structurally.
std::string serialize_thread(const DiscussionGraph& g);

// Edge count of the unique undirected path between u and v, computed from
// depths and the lowest common ancestor.
int tree_distance(const DiscussionGraph& g, const std::string& u, const std::string& v);
int tree_distance_by_index(const DiscussionGraph& g, int u, int v);

struct DepthSnapshot {
  DiscussionGraph graph;  // exactly the nodes with depth <= horizon
  int horizon = 0;
  std::vector<int> original_index;  // snapshot row -> row in the source graph
};

// Truncates g to nodes of depth <= d, preserving ids, texts and order.
// d beyond the tree depth is legal and returns the whole graph.
DepthSnapshot snapshot_at_depth(const DiscussionGraph& g, int d);

struct DegreePair {
  int in = 0;   // 0 for the root, 1 otherwise
  int out = 0;  // number of direct replies
};

std::vector<DegreePair> degrees(const DiscussionGraph& g);

}  // namespace hategraph

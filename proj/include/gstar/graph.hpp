#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gstar {

// Directed labeled graph on n aerial vertices (1..n) and m ground vertices
// (-1..-m).  Edges leave aerial vertices only, carry no loops and no
// duplicates, and are listed grouped by source in increasing source order;
// the order inside each group is part of the data.
struct Graph {
  int n = 0;
  int m = 0;
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  int out_degree(int v) const;
  // Contiguous [begin, end) range of edge positions with source v.
  std::pair<int, int> block_range(int v) const;

  bool operator==(const Graph& o) const {
    return n == o.n && m == o.m && edges == o.edges;
  }
  bool operator<(const Graph& o) const {
    if (n != o.n) return n < o.n;
    if (m != o.m) return m < o.m;
    return edges < o.edges;
  }
};

// Sort key placing aerial targets 1..n before ground targets -1..-m.
inline int target_key(const Graph& g, int t) {
  return t > 0 ? t : g.n - t;
}

// Dimension count: nonzero weights require edge_count == 2n + m - 2.
inline int expected_edge_count(int n, int m) { return 2 * n + m - 2; }

// Empty list when admissible; otherwise one message per violation.
std::vector<std::string> validate(const Graph& g);
inline bool is_valid(const Graph& g) { return validate(g).empty(); }

// "n m : (s->t),(s->t),..."
std::string encode(const Graph& g);
std::optional<Graph> parse_graph(const std::string& text);

// All admissible labeled graphs with the given shape, deterministic order:
// out-degree compositions lexicographically, then per-vertex ordered target
// tuples lexicographically.
std::vector<Graph> enumerate_graphs(int n, int m, int edge_count);

// Same, restricted to one fixed out-degree profile.
std::vector<Graph> enumerate_graphs_profile(int n, int m,
                                            const std::vector<int>& profile);

// Permutes edge labels; sigma[i] is the new position of edge i.  Must map
// every source block to itself.  Returns the relabeled graph and sign(sigma).
std::pair<Graph, int> permute_edges(const Graph& g,
                                    const std::vector<int>& sigma);

// Sorts the first vertex's out-edges by target; returns graph and sort sign.
std::pair<Graph, int> privileged_form(const Graph& g);

// Sorts every block by target; canonical representative for equivariant
// cache lookup.  Returns graph and total sort sign.
std::pair<Graph, int> canonical_edge_order(const Graph& g);

// Merges aerial vertices 1 and 2.  Empty when an edge joins them or the
// merge would create a duplicate edge.
std::optional<Graph> contract_12(const Graph& g);

enum class InternalEdge { none, first_to_second, second_to_first };

// Splits vertex 1 of delta into two vertices of out-degrees k1 and k2.  The
// old out-edges are divided prefix/suffix; with an internal edge requested,
// it occupies each possible slot of the receiving block in turn.  Incoming
// edges are redistributed in all 2^indeg ways.  Results keep block order;
// inadmissible candidates are dropped.
std::vector<Graph> double_first_vertex(const Graph& delta, int k1, int k2,
                                       InternalEdge mode);

// Decomposition of the aerial vertices into three clouds, the first two
// containing vertices 1 and 2, together with a ground split at m1.  The
// third component sees each cloud as one ground vertex.  `zero` marks
// decompositions whose weight factor vanishes: an edge escapes cloud 1 or 2,
// or two edges from one outside vertex land in the same cloud.
struct Splitting {
  Graph g1, g2, g3;
  std::vector<int> cloud;  // per aerial vertex: 1, 2 or 3
  int m1 = 0;
  bool zero = false;
  int sign = 1;  // parity of the edge regrouping
};

std::vector<Splitting> enumerate_splittings(const Graph& g);

}  // namespace gstar

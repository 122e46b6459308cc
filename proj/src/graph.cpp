#include "gstar/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "gstar/multivector.hpp"

namespace gstar {

int Graph::out_degree(int v) const {
  int c = 0;
  for (const auto& e : edges) c += (e.first == v);
  return c;
}

std::pair<int, int> Graph::block_range(int v) const {
  int b = 0;
  while (b < edge_count() && edges[b].first < v) ++b;
  int e = b;
  while (e < edge_count() && edges[e].first == v) ++e;
  return {b, e};
}

std::vector<std::string> validate(const Graph& g) {
  std::vector<std::string> bad;
  if (g.n < 0) bad.push_back("negative aerial count");
  if (g.m < 0) bad.push_back("negative ground count");
  std::set<std::pair<int, int>> seen;
  int prev_src = 0;
  for (const auto& [s, t] : g.edges) {
    if (s < 1 || s > g.n) bad.push_back("edge source out of range");
    if (!((t >= 1 && t <= g.n) || (t <= -1 && t >= -g.m)))
      bad.push_back("edge target out of range");
    if (s == t) bad.push_back("loop edge");
    if (!seen.insert({s, t}).second) bad.push_back("duplicate edge");
    if (s < prev_src) bad.push_back("edges not grouped by source");
    prev_src = std::max(prev_src, s);
  }
  return bad;
}

std::string encode(const Graph& g) {
  std::ostringstream os;
  os << g.n << " " << g.m << " :";
  for (size_t i = 0; i < g.edges.size(); ++i)
    os << (i ? "," : " ") << "(" << g.edges[i].first << "->"
       << g.edges[i].second << ")";
  return os.str();
}

std::optional<Graph> parse_graph(const std::string& text) {
  std::istringstream is(text);
  Graph g;
  char colon = 0;
  if (!(is >> g.n >> g.m >> colon) || colon != ':') return std::nullopt;
  std::string rest;
  std::getline(is, rest);
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < rest.size() && std::isspace(static_cast<unsigned char>(rest[pos])))
      ++pos;
  };
  skip_ws();
  bool first = true;
  while (pos < rest.size()) {
    if (!first) {
      if (rest[pos] != ',') return std::nullopt;
      ++pos;
      skip_ws();
    }
    first = false;
    if (pos >= rest.size() || rest[pos] != '(') return std::nullopt;
    size_t close = rest.find(')', pos);
    size_t arrow = rest.find("->", pos);
    if (close == std::string::npos || arrow == std::string::npos ||
        arrow > close)
      return std::nullopt;
    try {
      int s = std::stoi(rest.substr(pos + 1, arrow - pos - 1));
      int t = std::stoi(rest.substr(arrow + 2, close - arrow - 2));
      g.edges.emplace_back(s, t);
    } catch (...) {
      return std::nullopt;
    }
    pos = close + 1;
    skip_ws();
  }
  if (!validate(g).empty()) return std::nullopt;
  return g;
}

namespace {

// Targets available to vertex v, in canonical order: aerial ascending
// (skipping v), then ground -1..-m.
std::vector<int> targets_for(int v, int n, int m) {
  std::vector<int> t;
  for (int u = 1; u <= n; ++u)
    if (u != v) t.push_back(u);
  for (int j = 1; j <= m; ++j) t.push_back(-j);
  return t;
}

void tuples_rec(const std::vector<int>& pool, int len, std::vector<char>& used,
                std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == len) {
    out.push_back(cur);
    return;
  }
  for (size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    used[i] = 1;
    cur.push_back(pool[i]);
    tuples_rec(pool, len, used, cur, out);
    cur.pop_back();
    used[i] = 0;
  }
}

// Ordered tuples of `len` distinct entries of pool, lexicographic by
// pool position.
std::vector<std::vector<int>> ordered_tuples(const std::vector<int>& pool,
                                             int len) {
  std::vector<std::vector<int>> out;
  if (len > static_cast<int>(pool.size())) return out;
  std::vector<char> used(pool.size(), 0);
  std::vector<int> cur;
  tuples_rec(pool, len, used, cur, out);
  return out;
}

void compositions_rec(int total, int parts, int maxdeg, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    if (total <= maxdeg) {
      cur.push_back(total);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (int s = 0; s <= std::min(total, maxdeg); ++s) {
    cur.push_back(s);
    compositions_rec(total - s, parts - 1, maxdeg, cur, out);
    cur.pop_back();
  }
}

}  // namespace

namespace {

void append_for_profile(int n, int m, const std::vector<int>& comp,
                        std::vector<Graph>& out) {
  // Per-vertex choices, then the product in vertex-major order.
  std::vector<std::vector<std::vector<int>>> choices(n);
  for (int v = 1; v <= n; ++v) {
    choices[v - 1] = ordered_tuples(targets_for(v, n, m), comp[v - 1]);
    if (choices[v - 1].empty()) return;
  }
  std::vector<size_t> idx(n, 0);
  while (true) {
    Graph g{n, m, {}};
    for (int v = 1; v <= n; ++v)
      for (int t : choices[v - 1][idx[v - 1]]) g.edges.emplace_back(v, t);
    out.push_back(std::move(g));
    int v = n - 1;
    while (v >= 0 && ++idx[v] == choices[v].size()) {
      idx[v] = 0;
      --v;
    }
    if (v < 0) break;
  }
}

}  // namespace

std::vector<Graph> enumerate_graphs(int n, int m, int edge_count) {
  std::vector<Graph> out;
  if (n < 0 || m < 0 || edge_count < 0) return out;
  if (n == 0) {
    if (edge_count == 0) out.push_back(Graph{0, m, {}});
    return out;
  }
  int maxdeg = n - 1 + m;
  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  compositions_rec(edge_count, n, maxdeg, cur, comps);
  for (const auto& comp : comps) append_for_profile(n, m, comp, out);
  return out;
}

std::vector<Graph> enumerate_graphs_profile(int n, int m,
                                            const std::vector<int>& profile) {
  std::vector<Graph> out;
  if (static_cast<int>(profile.size()) != n)
    throw std::invalid_argument("enumerate_graphs_profile: profile size");
  if (n == 0) {
    if (m >= 0) out.push_back(Graph{0, m, {}});
    return out;
  }
  for (int s : profile)
    if (s < 0) throw std::invalid_argument("enumerate_graphs_profile: degree");
  append_for_profile(n, m, profile, out);
  return out;
}

std::pair<Graph, int> permute_edges(const Graph& g,
                                    const std::vector<int>& sigma) {
  const int E = g.edge_count();
  if (static_cast<int>(sigma.size()) != E)
    throw std::invalid_argument("permute_edges: size mismatch");
  int sign = permutation_sign(sigma);
  if (sign == 0) throw std::invalid_argument("permute_edges: not a permutation");
  Graph out = g;
  for (int i = 0; i < E; ++i) out.edges[sigma[i]] = g.edges[i];
  for (int i = 0; i < E; ++i)
    if (out.edges[i].first != g.edges[i].first)
      throw std::invalid_argument("permute_edges: must preserve source blocks");
  return {out, sign};
}

namespace {

// Insertion sort of a block by target key; returns the sort parity.
int sort_block(Graph& g, int begin, int end) {
  int sign = 1;
  for (int i = begin + 1; i < end; ++i) {
    int j = i;
    while (j > begin && target_key(g, g.edges[j - 1].second) >
                            target_key(g, g.edges[j].second)) {
      std::swap(g.edges[j - 1], g.edges[j]);
      sign = -sign;
      --j;
    }
  }
  return sign;
}

}  // namespace

std::pair<Graph, int> privileged_form(const Graph& g) {
  Graph out = g;
  auto [b, e] = out.block_range(1);
  int sign = sort_block(out, b, e);
  return {out, sign};
}

std::pair<Graph, int> canonical_edge_order(const Graph& g) {
  Graph out = g;
  int sign = 1;
  for (int v = 1; v <= g.n; ++v) {
    auto [b, e] = out.block_range(v);
    sign *= sort_block(out, b, e);
  }
  return {out, sign};
}

std::optional<Graph> contract_12(const Graph& g) {
  if (g.n < 2) return std::nullopt;
  for (const auto& [s, t] : g.edges)
    if ((s == 1 && t == 2) || (s == 2 && t == 1)) return std::nullopt;
  Graph out{g.n - 1, g.m, {}};
  std::set<std::pair<int, int>> seen;
  for (const auto& [s, t] : g.edges) {
    int ns = (s <= 2) ? 1 : s - 1;
    int nt = (t > 0) ? ((t <= 2) ? 1 : t - 1) : t;
    if (!seen.insert({ns, nt}).second) return std::nullopt;
    out.edges.emplace_back(ns, nt);
  }
  return out;
}

std::vector<Graph> double_first_vertex(const Graph& delta, int k1, int k2,
                                       InternalEdge mode) {
  if (k1 < 0 || k2 < 0)
    throw std::invalid_argument("double_first_vertex: negative valence");
  if (mode == InternalEdge::first_to_second && k1 < 1)
    throw std::invalid_argument("double_first_vertex: k1 must carry the edge");
  if (mode == InternalEdge::second_to_first && k2 < 1)
    throw std::invalid_argument("double_first_vertex: k2 must carry the edge");
  int need = k1 + k2 - (mode == InternalEdge::none ? 0 : 1);
  if (delta.out_degree(1) != need)
    throw std::invalid_argument("double_first_vertex: valence mismatch");

  auto relabel = [](int t) { return t >= 2 ? t + 1 : t; };  // targets != 1 here
  std::vector<int> old_out;
  std::vector<int> incoming;  // positions of edges targeting vertex 1
  for (int i = 0; i < delta.edge_count(); ++i) {
    if (delta.edges[i].first == 1) old_out.push_back(delta.edges[i].second);
    if (delta.edges[i].second == 1) incoming.push_back(i);
  }
  // The inner edge always occupies the first slot of its source block:
  // sweeping it over slots would cancel pairwise against the source
  // tensor's antisymmetry.  The half-contraction matches this slot, with
  // the contracted direction moved to the front.
  std::vector<Graph> out;
  for (unsigned long mask = 0; mask < (1ul << incoming.size()); ++mask) {
      std::vector<int> t1, t2;
      if (mode == InternalEdge::none) {
        for (int i = 0; i < k1; ++i) t1.push_back(relabel(old_out[i]));
        for (int i = k1; i < k1 + k2; ++i) t2.push_back(relabel(old_out[i]));
      } else if (mode == InternalEdge::first_to_second) {
        t1.push_back(2);
        for (int i = 0; i < k1 - 1; ++i) t1.push_back(relabel(old_out[i]));
        for (int i = k1 - 1; i < need; ++i) t2.push_back(relabel(old_out[i]));
      } else {
        for (int i = 0; i < k1; ++i) t1.push_back(relabel(old_out[i]));
        t2.push_back(1);
        for (int i = k1; i < need; ++i) t2.push_back(relabel(old_out[i]));
      }
      Graph g{delta.n + 1, delta.m, {}};
      for (int t : t1) g.edges.emplace_back(1, t);
      for (int t : t2) g.edges.emplace_back(2, t);
      for (int i = 0; i < delta.edge_count(); ++i) {
        auto [s, t] = delta.edges[i];
        if (s == 1) continue;
        int nt;
        if (t == 1) {
          size_t pos = std::find(incoming.begin(), incoming.end(), i) -
                       incoming.begin();
          nt = (mask >> pos) & 1 ? 2 : 1;
        } else {
          nt = relabel(t);
        }
        g.edges.emplace_back(s + 1, nt);
      }
      if (is_valid(g)) out.push_back(std::move(g));
    }
  return out;
}

std::vector<Splitting> enumerate_splittings(const Graph& g) {
  if (g.n < 2)
    throw std::invalid_argument("enumerate_splittings: needs vertices 1 and 2");
  std::vector<Splitting> out;
  long pow3 = 1;
  for (int i = 0; i < g.n - 2; ++i) pow3 *= 3;

  for (int m1 = 0; m1 <= g.m; ++m1)
    for (long code = 0; code < pow3; ++code) {
      Splitting sp;
      sp.m1 = m1;
      sp.cloud.assign(g.n, 3);
      sp.cloud[0] = 1;
      sp.cloud[1] = 2;
      long c = code;
      for (int v = 3; v <= g.n; ++v, c /= 3) sp.cloud[v - 1] = 1 + (c % 3);

      auto in_cloud = [&](int t, int cl) {
        if (t > 0) return sp.cloud[t - 1] == cl;
        return cl == 1 ? (-t <= m1) : (cl == 2 ? (-t > m1) : false);
      };
      bool zero = false;
      for (const auto& [s, t] : g.edges) {
        int cl = sp.cloud[s - 1];
        if (cl != 3 && !in_cloud(t, cl)) zero = true;
      }
      // Outside edges into one cloud collide when they share a source.
      if (!zero) {
        std::set<std::pair<int, int>> seen;
        for (const auto& [s, t] : g.edges) {
          if (sp.cloud[s - 1] != 3) continue;
          int nt = (t > 0 && sp.cloud[t - 1] == 3) ? t
                   : in_cloud(t, 1)                ? -1
                                                   : -2;
          if (nt < 0 && !seen.insert({s, nt}).second) zero = true;
        }
      }
      if (zero) {
        sp.zero = true;
        out.push_back(std::move(sp));
        continue;
      }

      std::vector<int> rank(g.n + 1, 0);
      std::vector<int> count(4, 0);
      for (int v = 1; v <= g.n; ++v) rank[v] = ++count[sp.cloud[v - 1]];
      sp.g1 = Graph{count[1], m1, {}};
      sp.g2 = Graph{count[2], g.m - m1, {}};
      sp.g3 = Graph{count[3], 2, {}};
      std::vector<int> order;  // original edge index in regrouped order
      for (int pass = 1; pass <= 3; ++pass)
        for (int i = 0; i < g.edge_count(); ++i) {
          auto [s, t] = g.edges[i];
          if (sp.cloud[s - 1] != pass) continue;
          order.push_back(i);
          if (pass == 1)
            sp.g1.edges.emplace_back(rank[s], t > 0 ? rank[t] : t);
          else if (pass == 2)
            sp.g2.edges.emplace_back(rank[s], t > 0 ? rank[t] : t + m1);
          else
            sp.g3.edges.emplace_back(
                rank[s], (t > 0 && sp.cloud[t - 1] == 3) ? rank[t]
                         : in_cloud(t, 1)                ? -1
                                                         : -2);
        }
      sp.sign = permutation_sign(order);
      out.push_back(std::move(sp));
    }
  return out;
}

}  // namespace gstar

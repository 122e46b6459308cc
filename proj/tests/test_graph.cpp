#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "gstar/graph.hpp"
#include "test_util.hpp"

using namespace gstar;
using testutil::Rng;

namespace {

// Independent generator: grow the edge list arc by arc with non-decreasing
// sources, rejecting loops and duplicate arcs, then filter by validity.
void grow_arcs(int n, int m, int target_edges,
               std::vector<std::pair<int, int>>& cur,
               std::vector<Graph>& out) {
  if (static_cast<int>(cur.size()) == target_edges) {
    Graph g{n, m, cur};
    if (is_valid(g)) out.push_back(g);
    return;
  }
  int smin = cur.empty() ? 1 : cur.back().first;
  for (int s = smin; s <= n; ++s) {
    for (int t = -m; t <= n; ++t) {
      if (t == 0 || t == s) continue;
      bool dup = false;
      for (const auto& e : cur)
        if (e.first == s && e.second == t) dup = true;
      if (dup) continue;
      cur.push_back({s, t});
      grow_arcs(n, m, target_edges, cur, out);
      cur.pop_back();
    }
  }
}

std::vector<Graph> reference_enumeration(int n, int m, int edges) {
  std::vector<Graph> out;
  std::vector<std::pair<int, int>> cur;
  grow_arcs(n, m, edges, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

Graph wedge_graph() { return Graph{1, 2, {{1, -1}, {1, -2}}}; }

}  // namespace

TEST_CASE("validity and encoding round trip") {
  Graph w = wedge_graph();
  CHECK(is_valid(w));
  CHECK(encode(w) == "1 2 : (1->-1),(1->-2)");
  auto back = parse_graph(encode(w));
  REQUIRE(back.has_value());
  CHECK(*back == w);

  CHECK(!parse_graph("nonsense").has_value());
  CHECK(!parse_graph("1 2 : (3->-1)").has_value());

  // Loops, duplicate arcs, ground sources, unsorted blocks all rejected.
  CHECK(!is_valid(Graph{1, 1, {{1, 1}}}));
  CHECK(!is_valid(Graph{1, 2, {{1, -1}, {1, -1}}}));
  CHECK(!is_valid(Graph{2, 1, {{2, -1}, {1, 2}}}));
  Graph empty{0, 2, {}};
  CHECK(is_valid(empty));
  CHECK(parse_graph(encode(empty)) == empty);
}

TEST_CASE("block bookkeeping") {
  Graph g{2, 2, {{1, -1}, {1, 2}, {2, -2}}};
  CHECK(g.out_degree(1) == 2);
  CHECK(g.out_degree(2) == 1);
  CHECK(g.block_range(1) == std::pair<int, int>{0, 2});
  CHECK(g.block_range(2) == std::pair<int, int>{2, 3});
  CHECK(expected_edge_count(2, 2) == 4);
  CHECK(target_key(g, 2) < target_key(g, -1));
  CHECK(target_key(g, -1) < target_key(g, -2));
}

TEST_CASE("enumeration agrees with an arc-growth reference") {
  struct Shape {
    int n, m, e;
  };
  for (Shape s : std::vector<Shape>{{1, 2, 2},
                                    {1, 3, 3},
                                    {2, 0, 2},
                                    {2, 1, 3},
                                    {2, 2, 4},
                                    {3, 1, 5},
                                    {2, 2, 3}}) {
    std::vector<Graph> got = enumerate_graphs(s.n, s.m, s.e);
    std::vector<Graph> sorted = got;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == reference_enumeration(s.n, s.m, s.e));
    // No duplicates in the enumeration.
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  }
  CHECK(enumerate_graphs(1, 2, 2).size() == 2);
  CHECK(enumerate_graphs(2, 2, 4).size() == 72);
  CHECK(enumerate_graphs(0, 2, 0).size() == 1);
  CHECK(enumerate_graphs(0, 2, 1).empty());
}

TEST_CASE("profile enumeration slices the full one") {
  std::vector<Graph> all = enumerate_graphs(2, 2, 4);
  std::vector<Graph> sliced;
  for (int s1 = 0; s1 <= 4; ++s1) {
    std::vector<Graph> part = enumerate_graphs_profile(2, 2, {s1, 4 - s1});
    for (const Graph& g : part) {
      CHECK(g.out_degree(1) == s1);
      CHECK(g.out_degree(2) == 4 - s1);
      sliced.push_back(g);
    }
  }
  std::sort(all.begin(), all.end());
  std::sort(sliced.begin(), sliced.end());
  CHECK(all == sliced);

  std::vector<Graph> none = enumerate_graphs_profile(0, 2, {});
  REQUIRE(none.size() == 1);
  CHECK(none[0] == Graph{0, 2, {}});
}

TEST_CASE("edge permutations track parity and stay within blocks") {
  Graph g{2, 2, {{1, -1}, {1, -2}, {2, -1}, {2, -2}}};
  auto [swapped, sgn] = permute_edges(g, {1, 0, 2, 3});
  CHECK(sgn == -1);
  CHECK(swapped.edges ==
        std::vector<std::pair<int, int>>{
            {1, -2}, {1, -1}, {2, -1}, {2, -2}});
  CHECK_THROWS(permute_edges(g, {2, 1, 0, 3}));  // crosses blocks

  Rng rng(17);
  for (int it = 0; it < 40; ++it) {
    std::vector<Graph> fam = enumerate_graphs(2, 2, 4);
    const Graph& h = fam[testutil::rand_int(rng, 0, fam.size() - 1)];
    // Random within-block permutation via repeated adjacent swaps.
    std::vector<int> sigma(h.edge_count());
    for (size_t i = 0; i < sigma.size(); ++i) sigma[i] = i;
    int expect_sign = 1;
    for (int k = 0; k < 4; ++k) {
      int v = testutil::rand_int(rng, 1, 2);
      auto [b, e] = h.block_range(v);
      if (e - b < 2) continue;
      int i = testutil::rand_int(rng, b, e - 2);
      std::swap(sigma[i], sigma[i + 1]);
      expect_sign = -expect_sign;
    }
    std::vector<int> inv(sigma.size());
    for (size_t i = 0; i < sigma.size(); ++i) inv[sigma[i]] = i;
    auto [hp, s] = permute_edges(h, inv);
    CHECK(s == expect_sign);
    CHECK(is_valid(hp));
    // Edge multiset per block is unchanged.
    for (int v = 1; v <= 2; ++v) {
      auto [b, e] = h.block_range(v);
      std::multiset<std::pair<int, int>> a(h.edges.begin() + b,
                                           h.edges.begin() + e);
      std::multiset<std::pair<int, int>> c(hp.edges.begin() + b,
                                           hp.edges.begin() + e);
      CHECK(a == c);
    }
  }
}

TEST_CASE("privileged and canonical forms") {
  Graph g{2, 2, {{1, -2}, {1, -1}, {2, -2}, {2, -1}}};
  auto [pg, psgn] = privileged_form(g);
  CHECK(psgn == -1);
  CHECK(pg.edges ==
        std::vector<std::pair<int, int>>{
            {1, -1}, {1, -2}, {2, -2}, {2, -1}});
  auto [cg, csgn] = canonical_edge_order(g);
  CHECK(csgn == 1);
  CHECK(cg.edges ==
        std::vector<std::pair<int, int>>{
            {1, -1}, {1, -2}, {2, -1}, {2, -2}});

  // Canonical form is idempotent and reachable by a block permutation.
  Rng rng(19);
  std::vector<Graph> fam = enumerate_graphs(2, 2, 4);
  for (int it = 0; it < 30; ++it) {
    const Graph& h = fam[testutil::rand_int(rng, 0, fam.size() - 1)];
    auto [ch, s] = canonical_edge_order(h);
    CHECK(is_valid(ch));
    CHECK((s == 1 || s == -1));
    auto [ch2, s2] = canonical_edge_order(ch);
    CHECK(ch2 == ch);
    CHECK(s2 == 1);
    // Aerial targets first, sorted within blocks.
    for (int v = 1; v <= 2; ++v) {
      auto [b, e] = ch.block_range(v);
      for (int i = b; i + 1 < e; ++i)
        CHECK(target_key(ch, ch.edges[i].second) <
              target_key(ch, ch.edges[i + 1].second));
    }
  }
}

TEST_CASE("contraction of the first two vertices") {
  // Edge between 1 and 2 kills the contraction.
  CHECK(!contract_12(Graph{2, 2, {{1, 2}, {1, -1}, {2, -1}, {2, -2}}})
           .has_value());
  // Duplicate edge after the merge kills it too.
  CHECK(!contract_12(Graph{2, 2, {{1, -1}, {1, -2}, {2, -1}, {2, -2}}})
           .has_value());
  // A clean merge keeps edge order: vertex-1 block then vertex-2 block.
  Graph g{3, 2, {{1, -1}, {2, 3}, {2, -2}, {3, -1}, {3, -2}}};
  auto merged = contract_12(g);
  REQUIRE(merged.has_value());
  CHECK(merged->n == 2);
  CHECK(merged->m == 2);
  CHECK(merged->edges ==
        std::vector<std::pair<int, int>>{
            {1, -1}, {1, 2}, {1, -2}, {2, -1}, {2, -2}});
  CHECK(is_valid(*merged));

  // Incoming edges retarget to the merged vertex.
  Graph h{3, 1, {{1, -1}, {2, -1}, {3, 1}, {3, 2}}};
  auto mh = contract_12(h);
  REQUIRE(!mh.has_value());  // 3->1 and 3->2 collapse to a duplicate
  Graph h2{3, 1, {{1, -1}, {2, 3}, {3, 2}}};
  auto mh2 = contract_12(h2);  // opposite edges 1->2, 2->1 are fine
  REQUIRE(mh2.has_value());
  CHECK(mh2->edges ==
        std::vector<std::pair<int, int>>{{1, -1}, {1, 2}, {2, 1}});
  Graph h3{3, 2, {{1, -1}, {2, -2}, {3, 2}}};
  auto mh3 = contract_12(h3);
  REQUIRE(mh3.has_value());
  CHECK(mh3->edges ==
        std::vector<std::pair<int, int>>{{1, -1}, {1, -2}, {2, 1}});
}

TEST_CASE("doubling inverts contraction") {
  Rng rng(29);
  for (const Graph& delta : enumerate_graphs(2, 2, 4)) {
    int deg = delta.out_degree(1);
    for (int k1 = 0; k1 <= deg; ++k1) {
      int k2 = deg - k1;
      std::vector<Graph> doubles =
          double_first_vertex(delta, k1, k2, InternalEdge::none);
      // Count: one prefix split, all incoming redistributions.
      int indeg = 0;
      for (const auto& e : delta.edges)
        if (e.second == 1) ++indeg;
      CHECK(static_cast<int>(doubles.size()) == (1 << indeg));
      std::set<Graph> seen;
      for (const Graph& g : doubles) {
        CHECK(is_valid(g));
        CHECK(g.n == delta.n + 1);
        CHECK(g.out_degree(1) == k1);
        CHECK(g.out_degree(2) == k2);
        auto back = contract_12(g);
        REQUIRE(back.has_value());
        CHECK(*back == delta);
        seen.insert(g);
      }
      CHECK(seen.size() == doubles.size());
    }
  }
}

TEST_CASE("doubling places the internal edge at the source block head") {
  Graph delta{1, 2, {{1, -1}, {1, -2}}};
  // k1 = 1, k2 = 1 with the new edge inside: slots of the receiving block.
  std::vector<Graph> fwd =
      double_first_vertex(delta, 1, 2, InternalEdge::first_to_second);
  // Receiving block is vertex 1 of size k1 = 1: one slot, no incoming edges.
  CHECK(fwd.size() == 1);
  for (const Graph& g : fwd) {
    CHECK(g.out_degree(1) == 1);
    CHECK(g.out_degree(2) == 2);
    int internal = 0;
    for (const auto& e : g.edges)
      if (e.first == 1 && e.second == 2) ++internal;
    CHECK(internal == 1);
    CHECK(!contract_12(g).has_value());
  }
  std::vector<Graph> bwd =
      double_first_vertex(delta, 2, 1, InternalEdge::second_to_first);
  CHECK(bwd.size() == 1);
  for (const Graph& g : bwd) {
    int internal = 0;
    for (const auto& e : g.edges)
      if (e.first == 2 && e.second == 1) ++internal;
    CHECK(internal == 1);
  }

  // Wrong total out-degree is a caller error.
  CHECK_THROWS_AS(double_first_vertex(delta, 1, 2, InternalEdge::none),
                  std::invalid_argument);
  CHECK_THROWS_AS(double_first_vertex(delta, 2, 2, InternalEdge::first_to_second),
                  std::invalid_argument);

  // The internal edge occupies the first slot of its source block: other
  // placements differ only by the source tensor's antisymmetry sign, so
  // exactly one graph is produced per incoming-edge split.
  Graph big{1, 3, {{1, -1}, {1, -2}, {1, -3}}};
  std::vector<Graph> sw =
      double_first_vertex(big, 2, 2, InternalEdge::first_to_second);
  REQUIRE(sw.size() == 1);
  CHECK(sw[0].edges == std::vector<std::pair<int, int>>{
                           {1, 2}, {1, -1}, {2, -2}, {2, -3}});
}

TEST_CASE("splitting enumeration marks escapes and factors shapes") {
  Graph g{2, 2, {{1, -1}, {2, -2}}};
  std::vector<Splitting> sp = enumerate_splittings(g);
  CHECK(sp.size() == 3);  // two fixed clouds, ground split at 0, 1, 2
  int nonzero = 0;
  for (const Splitting& s : sp) {
    if (s.zero) continue;  // component graphs are only built for live splits
    CHECK(s.g3.m == 2);
    CHECK(s.g1.m + s.g2.m == g.m);
    CHECK(s.g1.m == s.m1);
    ++nonzero;
    CHECK(is_valid(s.g1));
    CHECK(is_valid(s.g2));
    CHECK(is_valid(s.g3));
    CHECK(s.g1.edge_count() + s.g2.edge_count() + s.g3.edge_count() ==
          g.edge_count());
    CHECK((s.sign == 1 || s.sign == -1));
  }
  // Only the balanced split m1 = 1 avoids an escaping ground edge.
  CHECK(nonzero == 1);

  // Every split of the parallel wedge pair escapes: each vertex reaches
  // both ground points, so one of its edges always leaves its cloud.
  Graph par{2, 2, {{1, -1}, {1, -2}, {2, -1}, {2, -2}}};
  for (const Splitting& s : enumerate_splittings(par)) CHECK(s.zero);

  // Three aerial vertices: the third one may sit in either cloud or outside.
  Graph h{3, 1, {{1, -1}, {2, -1}, {3, 1}, {3, 2}}};
  std::vector<Splitting> sph = enumerate_splittings(h);
  CHECK(sph.size() == 6);  // 3 cloud choices x 2 ground splits
  for (const Splitting& s : sph) {
    CHECK(s.cloud[0] == 1);
    CHECK(s.cloud[1] == 2);
    if (s.zero) continue;
    CHECK(s.g1.n + s.g2.n + s.g3.n == h.n);
  }
}

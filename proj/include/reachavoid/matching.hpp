#ifndef REACHAVOID_MATCHING_HPP_
#define REACHAVOID_MATCHING_HPP_

#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "reachavoid/grid.hpp"

namespace reachavoid {

enum class Provenance : std::uint8_t { PD = 0, Oracle = 1 };

inline const char* to_string(Provenance p) { return p == Provenance::PD ? "PD" : "ORACLE"; }

//! wins(i, j): defender i beats attacker j in the one-on-one game.
struct PairwiseOutcomeMatrix {
  int defenders = 0;
  int attackers = 0;
  std::vector<std::uint8_t> win;
  std::vector<Provenance> provenance;
  std::uint64_t scenario_hash = 0;

  PairwiseOutcomeMatrix() = default;
  PairwiseOutcomeMatrix(int nd, int na, Provenance p = Provenance::PD)
      : defenders(nd), attackers(na) {
    if (nd < 0 || na < 0) throw ValidationError("negative matrix dimension");
    win.assign(static_cast<std::size_t>(nd) * na, 0);
    provenance.assign(static_cast<std::size_t>(nd) * na, p);
  }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * attackers + j; }
  bool wins(int i, int j) const { return win[index(i, j)] != 0; }
  void set(int i, int j, bool w, Provenance p) {
    win[index(i, j)] = w ? 1 : 0;
    provenance[index(i, j)] = p;
  }
};

struct BipartiteGraph {
  int left = 0;   // defenders
  int right = 0;  // attackers
  std::vector<std::vector<int>> adj;  // ascending attacker indices

  std::size_t edges() const {
    std::size_t e = 0;
    for (const auto& a : adj) e += a.size();
    return e;
  }
};

inline BipartiteGraph build_graph(const PairwiseOutcomeMatrix& m) {
  if (m.win.size() != static_cast<std::size_t>(m.defenders) * m.attackers) {
    throw ValidationError("outcome matrix size mismatch");
  }
  BipartiteGraph g;
  g.left = m.defenders;
  g.right = m.attackers;
  g.adj.resize(m.defenders);
  for (int i = 0; i < m.defenders; ++i) {
    for (int j = 0; j < m.attackers; ++j) {
      if (m.wins(i, j)) g.adj[i].push_back(j);
    }
  }
  return g;
}

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (defender, attacker), by defender
  int size() const { return static_cast<int>(pairs.size()); }

  int attacker_of(int defender) const {
    for (auto [d, a] : pairs) {
      if (d == defender) return a;
    }
    return -1;
  }
};

//! Hopcroft-Karp. `initial` pairs that are still edges seed the search, which
//! keeps existing assignments when a maximum matching containing them exists
//! along augmenting paths. Ties go to the lowest index.
inline Matching max_matching(const BipartiteGraph& g, const Matching* initial = nullptr) {
  constexpr int kNil = -1;
  constexpr int kFar = std::numeric_limits<int>::max();
  std::vector<int> match_l(g.left, kNil), match_r(g.right, kNil);
  if (initial) {
    for (auto [d, a] : initial->pairs) {
      if (d < 0 || d >= g.left || a < 0 || a >= g.right) continue;
      if (match_l[d] != kNil || match_r[a] != kNil) continue;
      bool edge = false;
      for (int x : g.adj[d]) edge = edge || x == a;
      if (!edge) continue;
      match_l[d] = a;
      match_r[a] = d;
    }
  }
  std::vector<int> dist(g.left);

  auto bfs = [&] {
    std::queue<int> q;
    bool found = false;
    for (int u = 0; u < g.left; ++u) {
      if (match_l[u] == kNil) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = kFar;
      }
    }
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : g.adj[u]) {
        const int w = match_r[v];
        if (w == kNil) {
          found = true;
        } else if (dist[w] == kFar) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  };

  std::vector<std::size_t> it(g.left);
  auto dfs = [&](auto&& self, int u) -> bool {
    for (; it[u] < g.adj[u].size(); ++it[u]) {
      const int v = g.adj[u][it[u]];
      const int w = match_r[v];
      if (w == kNil || (dist[w] == dist[u] + 1 && self(self, w))) {
        match_l[u] = v;
        match_r[v] = u;
        return true;
      }
    }
    dist[u] = kFar;
    return false;
  };

  while (bfs()) {
    std::fill(it.begin(), it.end(), 0);
    for (int u = 0; u < g.left; ++u) {
      if (match_l[u] == kNil) dfs(dfs, u);
    }
  }

  Matching m;
  for (int u = 0; u < g.left; ++u) {
    if (match_l[u] != kNil) m.pairs.push_back({u, match_l[u]});
  }
  return m;
}

inline bool is_valid_matching(const BipartiteGraph& g, const Matching& m) {
  std::vector<char> used_l(g.left, 0), used_r(g.right, 0);
  for (auto [d, a] : m.pairs) {
    if (d < 0 || d >= g.left || a < 0 || a >= g.right) return false;
    if (used_l[d] || used_r[a]) return false;
    bool edge = false;
    for (int x : g.adj[d]) edge = edge || x == a;
    if (!edge) return false;
    used_l[d] = used_r[a] = 1;
  }
  return true;
}

struct DefenseGuarantee {
  int blocked = 0;
  int bound_reaching = 0;
  bool attackers_win_m = true;  // false: the defense provably stops m attackers
};

inline DefenseGuarantee defense_guarantee(const Matching& m, int num_attackers, int required_m) {
  DefenseGuarantee g;
  g.blocked = m.size();
  g.bound_reaching = num_attackers - g.blocked;
  g.attackers_win_m = g.bound_reaching >= required_m;
  return g;
}

}  // namespace reachavoid

#endif  // REACHAVOID_MATCHING_HPP_

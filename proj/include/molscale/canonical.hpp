//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "molscale/mol_graph.hpp"
#include "molscale/smiles.hpp"

namespace molscale {

namespace detail {

// Dense ranks of `keys` (equal keys share a rank, ranks start at 0).
template <class Key>
std::vector<int> dense_ranks(const std::vector<Key> &keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[a] < keys[b]; });
  std::vector<int> rank(n, 0);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && keys[idx[i - 1]] < keys[idx[i]])
      ++r;
    rank[idx[i]] = r;
  }
  return rank;
}

inline int count_classes(const std::vector<int> &rank) {
  return rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end()) + 1;
}

inline std::vector<int> initial_ranks(const MolGraph &g) {
  using Key = std::tuple<int, int, int, int, int, int, int>;
  std::vector<Key> keys;
  keys.reserve(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    keys.emplace_back(a.element, a.formal_charge, g.degree(i), a.total_h(),
                      a.aromatic ? 1 : 0, a.isotope.value_or(0), a.ring_member ? 1 : 0);
  }
  return dense_ranks(keys);
}

// Iterates neighbor-signature refinement until the partition is stable.
// Existing rank order is preserved; ties are only ever split.
inline std::vector<int> refine(const MolGraph &g, std::vector<int> rank) {
  int classes = count_classes(rank);
  while (true) {
    std::vector<std::vector<int>> sig(g.num_atoms());
    for (int i = 0; i < g.num_atoms(); ++i) {
      std::vector<int> nb;
      nb.reserve(g.degree(i));
      for (const Neighbor &n: g.neighbors(i))
        nb.push_back(rank[n.atom] * 8 + static_cast<int>(g.bond(n.bond).order));
      std::sort(nb.begin(), nb.end());
      sig[i].reserve(nb.size() + 1);
      sig[i].push_back(rank[i]);
      sig[i].insert(sig[i].end(), nb.begin(), nb.end());
    }
    std::vector<int> next = dense_ranks(sig);
    const int next_classes = count_classes(next);
    rank = std::move(next);
    if (next_classes == classes)
      return rank;
    classes = next_classes;
  }
}

class Canonicalizer {
public:
  explicit Canonicalizer(const MolGraph &g, int leaf_budget): g_(g), budget_(leaf_budget) { }

  void run() {
    if (g_.empty())
      return;
    search(refine(g_, initial_ranks(g_)));
  }

  const std::string &best() const { return best_; }
  const std::vector<int> &best_ranks() const { return best_ranks_; }

private:
  std::string render(const std::vector<int> &rank) const {
    WriteOptions opt;
    opt.rank = rank;
    return write_smiles_detailed(g_, opt).joined();
  }

  void search(const std::vector<int> &rank) {
    const int n = g_.num_atoms();
    // smallest rank value shared by at least two atoms
    std::vector<int> count(n, 0);
    for (int r: rank)
      ++count[r];
    int tied = -1;
    for (int r = 0; r < n; ++r) {
      if (count[r] >= 2) {
        tied = r;
        break;
      }
    }

    if (tied < 0) {
      std::string s = render(rank);
      if (best_ranks_.empty() || s < best_) {
        best_ = std::move(s);
        best_ranks_ = rank;
      }
      ++leaves_;
      return;
    }

    bool first = true;
    for (int m = 0; m < n; ++m) {
      if (rank[m] != tied)
        continue;
      if (!first && leaves_ >= budget_)
        break;
      first = false;
      std::vector<int> split(n);
      for (int i = 0; i < n; ++i)
        split[i] = 2 * rank[i] + (rank[i] == tied && i != m ? 1 : 0);
      search(refine(g_, dense_ranks(split)));
    }
  }

  const MolGraph &g_;
  int budget_;
  int leaves_ = 0;
  std::string best_;
  std::vector<int> best_ranks_;
};

}  // namespace detail

inline constexpr int kCanonicalLeafBudget = 2048;

/// Canonical atom ranks: a total order that depends only on the graph's
/// isomorphism class (up to the leaf budget for highly symmetric graphs).
inline std::vector<int> canonical_ranks(const MolGraph &g) {
  detail::Canonicalizer c(g, kCanonicalLeafBudget);
  c.run();
  return c.best_ranks();
}

inline std::string canonical_form(const MolGraph &g) {
  detail::Canonicalizer c(g, kCanonicalLeafBudget);
  c.run();
  return c.best();
}

inline std::string canonicalize(std::string_view smiles) {
  return canonical_form(parse_smiles(smiles));
}

inline bool isomorphic(const MolGraph &a, const MolGraph &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  return canonical_form(a) == canonical_form(b);
}

}  // namespace molscale

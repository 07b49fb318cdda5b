//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molscale/element.hpp"

namespace molscale {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Contribution to the valence sum. Aromatic bonds count as one; the
// aromatic "extra" electron is handled by the hydrogen rules instead.
constexpr int valence_contribution(BondOrder order) {
  return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  int element = 6;
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<int> explicit_h;  // set iff the atom was written in brackets
  std::optional<int> isotope;
  int implicit_h = 0;
  bool ring_member = false;

  bool bracketed() const { return explicit_h.has_value(); }
  int total_h() const { return explicit_h.value_or(implicit_h); }
  bool is_dummy() const { return element == kDummyElement; }
};

struct Bond {
  int begin;
  int end;
  BondOrder order = BondOrder::kSingle;
  bool ring = false;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

class MolGraph {
public:
  MolGraph() = default;

  int add_atom(const Atom &atom) {
    atoms_.push_back(atom);
    adj_.emplace_back();
    return static_cast<int>(atoms_.size()) - 1;
  }

  // Returns -1 for a self loop, out-of-range endpoint or duplicate bond.
  int add_bond(int a, int b, BondOrder order) {
    if (a == b || a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
      return -1;
    if (find_bond(a, b) >= 0)
      return -1;
    const int id = static_cast<int>(bonds_.size());
    bonds_.push_back({ a, b, order, false });
    adj_[a].push_back({ b, id });
    adj_[b].push_back({ a, id });
    return id;
  }

  int find_bond(int a, int b) const {
    if (a < 0 || a >= num_atoms())
      return -1;
    for (const Neighbor &n: adj_[a])
      if (n.atom == b)
        return n.bond;
    return -1;
  }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const std::vector<Neighbor> &neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  int bond_valence(int i) const {
    int sum = 0;
    for (const Neighbor &n: adj_[i])
      sum += valence_contribution(bonds_[n.bond].order);
    return sum;
  }

  bool has_dummy() const {
    return std::any_of(atoms_.begin(), atoms_.end(),
                       [](const Atom &a) { return a.is_dummy(); });
  }

  // Recomputes implicit hydrogens of unbracketed atoms and the ring flags.
  void perceive() {
    assign_implicit_hydrogens();
    perceive_rings();
  }

  void assign_implicit_hydrogens() {
    for (int i = 0; i < num_atoms(); ++i) {
      Atom &a = atoms_[i];
      if (a.bracketed()) {
        a.implicit_h = 0;
        continue;
      }
      a.implicit_h = implicit_hydrogens(a.element, a.aromatic, bond_valence(i));
    }
  }

  // Ring bonds are exactly the non-bridges; found with an iterative
  // low-link walk so long chains cannot exhaust the call stack.
  void perceive_rings() {
    const int n = num_atoms();
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<bool> bridge(num_bonds(), false);
    int timer = 0;

    struct Frame {
      int atom;
      int parent_bond;
      std::size_t next;
    };
    std::vector<Frame> stack;
    for (int root = 0; root < n; ++root) {
      if (disc[root] >= 0)
        continue;
      disc[root] = low[root] = timer++;
      stack.push_back({ root, -1, 0 });
      while (!stack.empty()) {
        Frame &f = stack.back();
        if (f.next < adj_[f.atom].size()) {
          const Neighbor nb = adj_[f.atom][f.next++];
          if (nb.bond == f.parent_bond)
            continue;
          if (disc[nb.atom] < 0) {
            disc[nb.atom] = low[nb.atom] = timer++;
            stack.push_back({ nb.atom, nb.bond, 0 });
          } else {
            low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
          }
          continue;
        }
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame &parent = stack.back();
          low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
          if (low[done.atom] > disc[parent.atom])
            bridge[done.parent_bond] = true;
        }
      }
    }

    for (Atom &a: atoms_)
      a.ring_member = false;
    for (int b = 0; b < num_bonds(); ++b) {
      bonds_[b].ring = !bridge[b];
      if (bonds_[b].ring) {
        atoms_[bonds_[b].begin].ring_member = true;
        atoms_[bonds_[b].end].ring_member = true;
      }
    }
  }

  // Implicit hydrogen count for an atom written without brackets.
  static int implicit_hydrogens(int element, bool aromatic, int bond_valence) {
    if (element == kDummyElement)
      return 0;
    const ElementInfo *e = find_element(element);
    if (e == nullptr || !e->organic)
      return 0;
    if (aromatic)
      return std::max(0, e->valences[0] - bond_valence - 1);
    for (int v: e->valences)
      if (v != 0 && v >= bond_valence)
        return v - bond_valence;
    return 0;
  }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
};

// Returns the graph restricted to `keep` (in the given order) with bonds
// among kept atoms preserved. Hydrogen counts are carried over verbatim.
inline MolGraph induced_subgraph(const MolGraph &g, const std::vector<int> &keep,
                                 std::vector<int> *old_to_new = nullptr) {
  std::vector<int> map(g.num_atoms(), -1);
  MolGraph out;
  for (int a: keep)
    map[a] = out.add_atom(g.atom(a));
  for (const Bond &b: g.bonds())
    if (map[b.begin] >= 0 && map[b.end] >= 0)
      out.add_bond(map[b.begin], map[b.end], b.order);
  out.perceive_rings();
  if (old_to_new != nullptr)
    *old_to_new = std::move(map);
  return out;
}

// Connected components as atom lists, each sorted ascending, ordered by
// their smallest atom.
inline std::vector<std::vector<int>> connected_components(const MolGraph &g) {
  std::vector<int> comp(g.num_atoms(), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < g.num_atoms(); ++s) {
    if (comp[s] >= 0)
      continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> todo { s };
    comp[s] = id;
    while (!todo.empty()) {
      const int a = todo.back();
      todo.pop_back();
      out[id].push_back(a);
      for (const Neighbor &n: g.neighbors(a)) {
        if (comp[n.atom] < 0) {
          comp[n.atom] = id;
          todo.push_back(n.atom);
        }
      }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

enum class DiagnosticKind {
  kUnclosedRing,
  kUnmatchedParen,
  kUnknownSymbol,
  kValenceExceeded,
  kEmptyInput,
  kBadBracketAtom,
  kInvalidBond,
  kInvalidAromaticity,
};

inline std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
  case DiagnosticKind::kUnclosedRing:
    return "unclosed_ring";
  case DiagnosticKind::kUnmatchedParen:
    return "unmatched_paren";
  case DiagnosticKind::kUnknownSymbol:
    return "unknown_symbol";
  case DiagnosticKind::kValenceExceeded:
    return "valence_exceeded";
  case DiagnosticKind::kEmptyInput:
    return "empty_input";
  case DiagnosticKind::kBadBracketAtom:
    return "bad_bracket_atom";
  case DiagnosticKind::kInvalidBond:
    return "invalid_bond";
  case DiagnosticKind::kInvalidAromaticity:
    return "invalid_aromaticity";
  }
  return "unknown";
}

struct ParseDiagnostic {
  std::size_t position = 0;
  DiagnosticKind kind = DiagnosticKind::kUnknownSymbol;
  std::string message;
};

class ParseError: public std::runtime_error {
public:
  explicit ParseError(ParseDiagnostic diag)
      : std::runtime_error(std::string(to_string(diag.kind)) + " at "
                           + std::to_string(diag.position) + ": " + diag.message),
        diag_(std::move(diag)) { }

  const ParseDiagnostic &diagnostic() const { return diag_; }

private:
  ParseDiagnostic diag_;
};

namespace detail {

// Post-construction checks shared by every decoder that yields a graph:
// aromatic atoms on a cycle, aromatic bonds between aromatic atoms, and the
// valence table. `positions` maps atoms to input offsets for diagnostics.
inline void check_graph(const MolGraph &g, const std::vector<std::size_t> &positions) {
  auto pos = [&](int atom) {
    return atom < static_cast<int>(positions.size()) ? positions[atom] : 0;
  };

  for (const Bond &b: g.bonds()) {
    if (b.order == BondOrder::kAromatic
        && (!g.atom(b.begin).aromatic || !g.atom(b.end).aromatic)) {
      throw ParseError({ pos(b.end), DiagnosticKind::kInvalidAromaticity,
                         "aromatic bond between non-aromatic atoms" });
    }
  }

  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    if (a.aromatic && !a.ring_member) {
      throw ParseError({ pos(i), DiagnosticKind::kInvalidAromaticity,
                         "aromatic atom outside a ring" });
    }
    const std::optional<int> limit = max_valence(a.element, a.formal_charge);
    if (!limit)
      continue;
    const int used = g.bond_valence(i) + a.total_h();
    if (used > *limit) {
      throw ParseError({ pos(i), DiagnosticKind::kValenceExceeded,
                         std::string(element_symbol(a.element)) + " with valence "
                             + std::to_string(used) + " exceeds "
                             + std::to_string(*limit) });
    }
  }
}

}  // namespace detail

}  // namespace molscale

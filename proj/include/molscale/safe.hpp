//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "molscale/canonical.hpp"
#include "molscale/fragments.hpp"
#include "molscale/mol_graph.hpp"
#include "molscale/smiles.hpp"

namespace molscale {

// SAFE-lite: the molecule is split into units that are written as separate
// dot-separated pieces and stitched back together with ring-closure digits.
//  - ring systems (components over ring bonds) -> "{...}"
//  - hetero groups: acyclic atoms joined by acyclic bonds that touch a
//    heteroatom, two or more atoms -> "{...}"
//  - everything else (acyclic carbon runs, lone heteroatoms) -> bare

namespace detail {

struct SafeUnits {
  std::vector<int> unit_of_atom;
  std::vector<bool> braced;
};

inline SafeUnits safe_units(const MolGraph &g) {
  const int n = g.num_atoms();
  SafeUnits u;
  u.unit_of_atom.assign(n, -1);

  auto flood = [&](int seed, auto &&joins) {
    const int id = static_cast<int>(u.braced.size());
    u.braced.push_back(false);
    std::vector<int> todo { seed };
    u.unit_of_atom[seed] = id;
    int size = 0;
    while (!todo.empty()) {
      const int a = todo.back();
      todo.pop_back();
      ++size;
      for (const Neighbor &nb: g.neighbors(a)) {
        if (u.unit_of_atom[nb.atom] < 0 && joins(a, nb)) {
          u.unit_of_atom[nb.atom] = id;
          todo.push_back(nb.atom);
        }
      }
    }
    return size;
  };

  for (int a = 0; a < n; ++a) {
    if (u.unit_of_atom[a] < 0 && g.atom(a).ring_member) {
      flood(a, [&](int, const Neighbor &nb) { return g.bond(nb.bond).ring; });
      u.braced.back() = true;
    }
  }

  auto hetero_bond = [&](int a, const Neighbor &nb) {
    const Bond &b = g.bond(nb.bond);
    return !b.ring && !g.atom(nb.atom).ring_member
           && (is_heteroatom(g.atom(a).element) || is_heteroatom(g.atom(nb.atom).element));
  };
  for (int a = 0; a < n; ++a) {
    if (u.unit_of_atom[a] >= 0 || !is_heteroatom(g.atom(a).element))
      continue;
    const int size = flood(a, hetero_bond);
    u.braced.back() = size >= 2;
  }

  for (int a = 0; a < n; ++a) {
    if (u.unit_of_atom[a] >= 0)
      continue;
    flood(a, [&](int, const Neighbor &nb) {
      return !g.bond(nb.bond).ring && !g.atom(nb.atom).ring_member
             && !is_heteroatom(g.atom(nb.atom).element);
    });
  }
  return u;
}

}  // namespace detail

inline std::string encode_safe(const MolGraph &g) {
  if (g.empty())
    return "";
  const detail::SafeUnits units = detail::safe_units(g);
  WriteOptions opt;
  opt.rank = canonical_ranks(g);
  opt.closure_bonds.assign(g.num_bonds(), false);
  for (int b = 0; b < g.num_bonds(); ++b)
    opt.closure_bonds[b]
        = units.unit_of_atom[g.bond(b).begin] != units.unit_of_atom[g.bond(b).end];

  const WriteResult w = write_smiles_detailed(g, opt);
  std::string out;
  for (std::size_t i = 0; i < w.pieces.size(); ++i) {
    if (i > 0)
      out += '.';
    const bool braced = units.braced[units.unit_of_atom[w.roots[i]]];
    if (braced)
      out += '{';
    out += w.pieces[i];
    if (braced)
      out += '}';
  }
  return out;
}

inline MolGraph decode_safe(std::string_view text) {
  std::string plain;
  plain.reserve(text.size());
  bool inside = false;
  std::size_t open_at = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '{') {
      if (inside || (i > 0 && text[i - 1] != '.'))
        throw ParseError({ i, DiagnosticKind::kUnmatchedParen,
                           "'{' must open a whole unit" });
      inside = true;
      open_at = i;
    } else if (c == '}') {
      if (!inside || i == open_at + 1 || (i + 1 < text.size() && text[i + 1] != '.'))
        throw ParseError({ i, DiagnosticKind::kUnmatchedParen,
                           "'}' must close a non-empty unit" });
      inside = false;
    } else {
      if (inside && c == '.')
        throw ParseError({ i, DiagnosticKind::kUnmatchedParen, "'.' inside a unit" });
      plain += c;
    }
  }
  if (inside)
    throw ParseError({ open_at, DiagnosticKind::kUnmatchedParen, "unclosed '{'" });
  return parse_smiles(plain);
}

}  // namespace molscale

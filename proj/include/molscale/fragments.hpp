//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "molscale/canonical.hpp"
#include "molscale/mol_graph.hpp"
#include "molscale/smiles.hpp"

namespace molscale {

enum class CodecErrorKind {
  kDanglingAttachment,
  kAmbiguousPairing,
  kMalformedMarker,
  kChainViolation,
  kMalformedInput,
};

inline std::string_view to_string(CodecErrorKind kind) {
  switch (kind) {
  case CodecErrorKind::kDanglingAttachment:
    return "dangling_attachment";
  case CodecErrorKind::kAmbiguousPairing:
    return "ambiguous_pairing";
  case CodecErrorKind::kMalformedMarker:
    return "malformed_marker";
  case CodecErrorKind::kChainViolation:
    return "chain_violation";
  case CodecErrorKind::kMalformedInput:
    return "malformed_input";
  }
  return "unknown";
}

class CodecError: public std::runtime_error {
public:
  CodecError(CodecErrorKind kind, const std::string &msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) { }

  CodecErrorKind kind() const { return kind_; }

private:
  CodecErrorKind kind_;
};

class ChainViolation: public CodecError {
public:
  explicit ChainViolation(int fragment)
      : CodecError(CodecErrorKind::kChainViolation,
                   "fragment " + std::to_string(fragment)
                       + " links to more than two neighbors; the fragment tree is not a chain"),
        fragment_(fragment) { }

  int fragment() const { return fragment_; }

private:
  int fragment_;
};

struct Fragment {
  MolGraph graph;                // real atoms plus one dummy per attachment
  std::vector<int> attachments;  // dummy atom of each slot, in slot order
};

struct FragmentLink {
  int frag_a;
  int slot_a;
  int frag_b;
  int slot_b;
};

/// Ordered fragments with attachment bookkeeping. Every slot appears in
/// exactly one link; when chain_constrained, links join i and i+1 only.
struct FragmentSeq {
  std::vector<Fragment> fragments;
  std::vector<FragmentLink> links;
  bool chain_constrained = true;
};

namespace detail {

inline Atom dummy_atom() {
  Atom a;
  a.element = kDummyElement;
  return a;
}

inline bool cuttable(const MolGraph &g, const Bond &b) {
  if (b.order != BondOrder::kSingle || b.ring)
    return false;
  const Atom &u = g.atom(b.begin);
  const Atom &v = g.atom(b.end);
  if (u.element == 1 || v.element == 1 || u.is_dummy() || v.is_dummy())
    return false;
  return u.ring_member || v.ring_member || is_heteroatom(u.element) || is_heteroatom(v.element);
}

inline std::vector<int> canonical_order(const MolGraph &g) {
  WriteOptions opt;
  opt.rank = canonical_ranks(g);
  return write_smiles_detailed(g, opt).atom_order;
}

struct Partition {
  std::vector<int> frag_of_atom;
  int count = 0;
};

// Components of g after removing `cut`, numbered by first appearance in `order`.
inline Partition partition(const MolGraph &g, const std::vector<bool> &cut,
                           const std::vector<int> &order) {
  Partition p;
  p.frag_of_atom.assign(g.num_atoms(), -1);
  for (int seed: order) {
    if (p.frag_of_atom[seed] >= 0)
      continue;
    const int id = p.count++;
    std::vector<int> todo { seed };
    p.frag_of_atom[seed] = id;
    while (!todo.empty()) {
      const int a = todo.back();
      todo.pop_back();
      for (const Neighbor &n: g.neighbors(a)) {
        if (cut[n.bond] || p.frag_of_atom[n.atom] >= 0)
          continue;
        p.frag_of_atom[n.atom] = id;
        todo.push_back(n.atom);
      }
    }
  }
  return p;
}

// Materializes fragments: atoms in `order`, one dummy per cut bond, slots
// numbered in traversal order.
inline FragmentSeq build_fragments(const MolGraph &g, const std::vector<bool> &cut,
                                   const std::vector<int> &order, const Partition &p) {
  std::vector<int> order_pos(g.num_atoms());
  for (std::size_t i = 0; i < order.size(); ++i)
    order_pos[order[i]] = static_cast<int>(i);

  FragmentSeq seq;
  seq.fragments.resize(p.count);
  std::vector<int> local(g.num_atoms(), -1);
  for (int a: order)
    local[a] = seq.fragments[p.frag_of_atom[a]].graph.add_atom(g.atom(a));
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    const Bond &b = g.bond(bi);
    if (cut[bi])
      continue;
    seq.fragments[p.frag_of_atom[b.begin]].graph.add_bond(local[b.begin], local[b.end], b.order);
  }

  std::vector<std::pair<int, int>> slot_of_side(2 * g.num_bonds(), { -1, -1 });
  for (int a: order) {
    std::vector<Neighbor> nbrs = g.neighbors(a);
    std::sort(nbrs.begin(), nbrs.end(), [&](const Neighbor &x, const Neighbor &y) {
      return order_pos[x.atom] < order_pos[y.atom];
    });
    for (const Neighbor &n: nbrs) {
      if (!cut[n.bond])
        continue;
      const int f = p.frag_of_atom[a];
      Fragment &frag = seq.fragments[f];
      const int d = frag.graph.add_atom(dummy_atom());
      frag.graph.add_bond(local[a], d, BondOrder::kSingle);
      const int side = g.bond(n.bond).begin == a ? 0 : 1;
      slot_of_side[2 * n.bond + side] = { f, static_cast<int>(frag.attachments.size()) };
      frag.attachments.push_back(d);
    }
  }

  for (int b = 0; b < g.num_bonds(); ++b) {
    if (!cut[b])
      continue;
    auto x = slot_of_side[2 * b];
    auto y = slot_of_side[2 * b + 1];
    if (x > y)
      std::swap(x, y);
    seq.links.push_back({ x.first, x.second, y.first, y.second });
  }
  std::sort(seq.links.begin(), seq.links.end(), [](const FragmentLink &l, const FragmentLink &r) {
    return std::tie(l.frag_a, l.slot_a) < std::tie(r.frag_a, r.slot_a);
  });

  for (Fragment &f: seq.fragments)
    f.graph.perceive_rings();

  seq.chain_constrained = std::all_of(seq.links.begin(), seq.links.end(),
                                      [](const FragmentLink &l) { return l.frag_b == l.frag_a + 1; });
  return seq;
}

inline std::vector<std::vector<int>> fragment_tree(const FragmentSeq &f) {
  std::vector<std::vector<int>> adj(f.fragments.size());
  for (const FragmentLink &l: f.links) {
    adj[l.frag_a].push_back(l.frag_b);
    adj[l.frag_b].push_back(l.frag_a);
  }
  return adj;
}

// Farthest node from `src` (ties to the smallest index) and the BFS parents.
inline std::pair<int, std::vector<int>> bfs_farthest(const std::vector<std::vector<int>> &adj,
                                                     int src) {
  std::vector<int> dist(adj.size(), -1), parent(adj.size(), -1);
  std::queue<int> q;
  q.push(src);
  dist[src] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    std::vector<int> nb = adj[u];
    std::sort(nb.begin(), nb.end());
    for (int v: nb) {
      if (dist[v] >= 0)
        continue;
      dist[v] = dist[u] + 1;
      parent[v] = u;
      q.push(v);
    }
  }
  int best = src;
  for (int v = 0; v < static_cast<int>(adj.size()); ++v)
    if (dist[v] > dist[best])
      best = v;
  return { best, parent };
}

// Atom-level reassembly: each link becomes a single bond between the atoms
// that carry the two paired dummies.
inline MolGraph reassemble(const FragmentSeq &seq) {
  const int n = static_cast<int>(seq.fragments.size());
  std::vector<std::vector<int>> global(n);
  std::vector<std::vector<int>> used(n);
  MolGraph out;
  for (int f = 0; f < n; ++f) {
    const MolGraph &g = seq.fragments[f].graph;
    global[f].assign(g.num_atoms(), -1);
    used[f].assign(seq.fragments[f].attachments.size(), 0);
    for (int a = 0; a < g.num_atoms(); ++a)
      if (!g.atom(a).is_dummy())
        global[f][a] = out.add_atom(g.atom(a));
    for (const Bond &b: g.bonds())
      if (global[f][b.begin] >= 0 && global[f][b.end] >= 0)
        out.add_bond(global[f][b.begin], global[f][b.end], b.order);
  }

  auto anchor = [&](int f, int slot) {
    if (f < 0 || f >= n || slot < 0
        || slot >= static_cast<int>(seq.fragments[f].attachments.size()))
      throw CodecError(CodecErrorKind::kDanglingAttachment, "link refers to a missing slot");
    if (used[f][slot]++ > 0)
      throw CodecError(CodecErrorKind::kDanglingAttachment, "attachment slot used twice");
    const MolGraph &g = seq.fragments[f].graph;
    const int d = seq.fragments[f].attachments[slot];
    if (g.degree(d) != 1)
      throw CodecError(CodecErrorKind::kMalformedMarker, "attachment point must have one bond");
    const int a = global[f][g.neighbors(d)[0].atom];
    if (a < 0)
      throw CodecError(CodecErrorKind::kMalformedMarker, "attachment points bonded together");
    return a;
  };

  for (const FragmentLink &l: seq.links) {
    const int a = anchor(l.frag_a, l.slot_a);
    const int b = anchor(l.frag_b, l.slot_b);
    if (out.add_bond(a, b, BondOrder::kSingle) < 0)
      throw CodecError(CodecErrorKind::kMalformedInput, "link duplicates a bond");
  }
  for (int f = 0; f < n; ++f)
    for (int u: used[f])
      if (u == 0)
        throw CodecError(CodecErrorKind::kDanglingAttachment,
                         "fragment " + std::to_string(f) + " has an unpaired attachment point");

  out.perceive();
  check_graph(out, {});
  return out;
}

struct Piece {
  std::string_view text;
  std::size_t offset;
};

inline std::vector<Piece> split_sep(std::string_view text) {
  constexpr std::string_view kSep = "[SEP]";
  std::vector<Piece> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(kSep, start);
    if (at == std::string_view::npos) {
      out.push_back({ text.substr(start), start });
      return out;
    }
    out.push_back({ text.substr(start, at - start), start });
    start = at + kSep.size();
  }
}

inline MolGraph parse_piece(const Piece &p) {
  if (p.text.empty())
    throw CodecError(CodecErrorKind::kMalformedInput,
                     "empty fragment at offset " + std::to_string(p.offset));
  try {
    return parse_smiles(p.text);
  } catch (const ParseError &e) {
    ParseDiagnostic d = e.diagnostic();
    d.position += p.offset;
    throw ParseError(std::move(d));
  }
}

inline std::vector<int> dummies_of(const MolGraph &g) {
  std::vector<int> out;
  for (int a = 0; a < g.num_atoms(); ++a)
    if (g.atom(a).is_dummy())
      out.push_back(a);
  return out;
}

}  // namespace detail

/// Cuts acyclic single bonds that touch a ring atom or a heteroatom.
/// Fragments are numbered by their first atom in canonical traversal.
inline FragmentSeq fragment_molecule(const MolGraph &g) {
  std::vector<bool> cut(g.num_bonds(), false);
  for (int b = 0; b < g.num_bonds(); ++b)
    cut[b] = detail::cuttable(g, g.bond(b));
  const std::vector<int> order = detail::canonical_order(g);
  return detail::build_fragments(g, cut, order, detail::partition(g, cut, order));
}

/// Fragmentation restricted to a chain: only the cuts on the longest path
/// of the fragment tree are kept, so side fragments merge into their path
/// neighbor. Fragments are numbered along the path.
inline FragmentSeq chain_fragment_molecule(const MolGraph &g) {
  std::vector<bool> cut(g.num_bonds(), false);
  for (int b = 0; b < g.num_bonds(); ++b)
    cut[b] = detail::cuttable(g, g.bond(b));
  const std::vector<int> order = detail::canonical_order(g);
  const detail::Partition full = detail::partition(g, cut, order);
  if (full.count <= 1)
    return detail::build_fragments(g, cut, order, full);

  std::vector<std::vector<int>> adj(full.count);
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (!cut[b])
      continue;
    const int x = full.frag_of_atom[g.bond(b).begin];
    const int y = full.frag_of_atom[g.bond(b).end];
    adj[x].push_back(y);
    adj[y].push_back(x);
  }
  const int u = detail::bfs_farthest(adj, 0).first;
  auto [v, parent] = detail::bfs_farthest(adj, u);
  std::vector<int> path;
  for (int x = v; x >= 0; x = parent[x])
    path.push_back(x);
  if (path.front() > path.back())
    std::reverse(path.begin(), path.end());

  std::vector<int> path_pos(full.count, -1);
  for (std::size_t i = 0; i < path.size(); ++i)
    path_pos[path[i]] = static_cast<int>(i);
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (!cut[b])
      continue;
    const int x = path_pos[full.frag_of_atom[g.bond(b).begin]];
    const int y = path_pos[full.frag_of_atom[g.bond(b).end]];
    cut[b] = x >= 0 && y >= 0 && std::abs(x - y) == 1;
  }

  detail::Partition merged = detail::partition(g, cut, order);
  // renumber merged components along the path
  std::vector<int> rename(merged.count, -1);
  for (std::size_t i = 0; i < path.size(); ++i) {
    for (int a = 0; a < g.num_atoms(); ++a) {
      if (full.frag_of_atom[a] == path[i]) {
        rename[merged.frag_of_atom[a]] = static_cast<int>(i);
        break;
      }
    }
  }
  for (int &f: merged.frag_of_atom)
    f = rename[f];
  return detail::build_fragments(g, cut, order, merged);
}

inline MolGraph reassemble(const FragmentSeq &seq) { return detail::reassemble(seq); }

// ---------------------------------------------------------------------------
// FragSeq: fragments with generic '*' joined by [SEP]

/// Depth-first over the fragment tree from fragment 0. Each fragment is
/// written from the '*' that links it to its parent; its remaining '*'s are
/// followed in the order they appear in its string.
inline std::string encode_fragseq(const FragmentSeq &f) {
  const int n = static_cast<int>(f.fragments.size());
  if (n == 0)
    return "";
  // partner[(frag, slot)] = (frag, slot)
  std::vector<std::vector<std::pair<int, int>>> partner(n);
  for (int i = 0; i < n; ++i)
    partner[i].assign(f.fragments[i].attachments.size(), { -1, -1 });
  for (const FragmentLink &l: f.links) {
    partner[l.frag_a][l.slot_a] = { l.frag_b, l.slot_b };
    partner[l.frag_b][l.slot_b] = { l.frag_a, l.slot_a };
  }

  std::string out;
  std::vector<bool> seen(n, false);
  struct Task {
    int frag;
    int entry_slot;
  };
  std::vector<Task> stack { { 0, -1 } };
  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    if (seen[t.frag])
      throw CodecError(CodecErrorKind::kMalformedInput, "fragment links contain a cycle");
    seen[t.frag] = true;
    const Fragment &frag = f.fragments[t.frag];

    WriteOptions opt;
    if (t.entry_slot >= 0)
      opt.roots.push_back(frag.attachments[t.entry_slot]);
    const WriteResult w = write_smiles_detailed(frag.graph, opt);
    if (!out.empty())
      out += "[SEP]";
    out += w.joined();

    std::vector<int> slot_of_atom(frag.graph.num_atoms(), -1);
    for (std::size_t s = 0; s < frag.attachments.size(); ++s)
      slot_of_atom[frag.attachments[s]] = static_cast<int>(s);
    std::vector<Task> children;
    for (int a: w.atom_order) {
      const int s = slot_of_atom[a];
      if (s < 0 || s == t.entry_slot)
        continue;
      const auto [cf, cs] = partner[t.frag][s];
      if (cf < 0)
        throw CodecError(CodecErrorKind::kDanglingAttachment, "unlinked attachment slot");
      children.push_back({ cf, cs });
    }
    for (auto it = children.rbegin(); it != children.rend(); ++it)
      stack.push_back(*it);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw CodecError(CodecErrorKind::kMalformedInput, "fragment tree is disconnected");
  return out;
}

struct FragSeqDecode {
  MolGraph graph;
  bool ambiguous = false;
  std::vector<std::string> notes;  // one line per ambiguous attachment
};

/// Greedy positional pairing: a fragment's first '*' binds the most recently
/// opened unpaired '*'; its other '*'s are opened in string order. A pairing
/// is reported ambiguous when open '*'s that are not symmetry-equivalent
/// compete for it.
inline FragSeqDecode decode_fragseq(std::string_view text, bool strict = false) {
  const std::vector<detail::Piece> pieces = detail::split_sep(text);
  FragmentSeq seq;
  seq.chain_constrained = false;
  FragSeqDecode result;

  struct Open {
    int frag;
    int slot;
    int cls;
  };
  std::vector<Open> stack;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Fragment frag;
    frag.graph = detail::parse_piece(pieces[i]);
    frag.attachments = detail::dummies_of(frag.graph);
    for (int d: frag.attachments)
      if (frag.graph.atom(d).formal_charge != 0 || frag.graph.atom(d).total_h() != 0)
        throw CodecError(CodecErrorKind::kMalformedMarker, "attachment point must be a plain '*'");
    const std::vector<int> cls = detail::refine(frag.graph, detail::initial_ranks(frag.graph));
    const int f = static_cast<int>(i);
    std::size_t first_open = 0;
    if (i > 0) {
      if (frag.attachments.empty())
        throw CodecError(CodecErrorKind::kDanglingAttachment,
                         "fragment " + std::to_string(i) + " has no attachment point");
      if (stack.empty())
        throw CodecError(CodecErrorKind::kDanglingAttachment,
                         "fragment " + std::to_string(i) + " has nothing to attach to");
      const Open top = stack.back();
      for (const Open &o: stack) {
        if (o.frag != top.frag || o.cls != top.cls) {
          result.ambiguous = true;
          result.notes.push_back("fragment " + std::to_string(i) + " could attach to "
                                 + std::to_string(stack.size()) + " open points");
          break;
        }
      }
      stack.pop_back();
      seq.links.push_back({ top.frag, top.slot, f, 0 });
      first_open = 1;
    }
    for (std::size_t s = frag.attachments.size(); s-- > first_open;)
      stack.push_back({ f, static_cast<int>(s), cls[frag.attachments[s]] });
    seq.fragments.push_back(std::move(frag));
  }
  if (!stack.empty())
    throw CodecError(CodecErrorKind::kDanglingAttachment,
                     std::to_string(stack.size()) + " attachment point(s) left unpaired");
  if (strict && result.ambiguous)
    throw CodecError(CodecErrorKind::kAmbiguousPairing, result.notes.front());

  result.graph = detail::reassemble(seq);
  return result;
}

// ---------------------------------------------------------------------------
// FragLink: chain fragments with [*+] (toward previous) and [*-] (toward next)

/// Requires the fragment tree to be a path. The first fragment carries one
/// [*-], interior fragments one [*+] and one [*-], the last one [*+]; every
/// fragment after the first is written starting at its [*+].
inline std::string encode_fraglink(const FragmentSeq &f) {
  const int n = static_cast<int>(f.fragments.size());
  if (n == 0)
    return "";
  if (static_cast<int>(f.links.size()) != n - 1)
    throw CodecError(CodecErrorKind::kMalformedInput, "fragment links do not form a tree");

  const std::vector<std::vector<int>> adj = detail::fragment_tree(f);
  for (int i = 0; i < n; ++i)
    if (adj[i].size() > 2)
      throw ChainViolation(i);

  std::vector<int> path;
  if (f.chain_constrained) {
    path.resize(n);
    std::iota(path.begin(), path.end(), 0);
  } else {
    int start = -1;
    for (int i = 0; i < n && start < 0; ++i)
      if (adj[i].size() <= 1)
        start = i;
    if (start < 0)
      throw CodecError(CodecErrorKind::kMalformedInput, "fragment links contain a cycle");
    for (int prev = -1, cur = start; cur >= 0;) {
      path.push_back(cur);
      int next = -1;
      for (int x: adj[cur])
        if (x != prev)
          next = x;
      prev = cur;
      cur = next;
      if (static_cast<int>(path.size()) > n)
        throw CodecError(CodecErrorKind::kMalformedInput, "fragment links contain a cycle");
    }
    if (static_cast<int>(path.size()) != n)
      throw CodecError(CodecErrorKind::kMalformedInput, "fragment tree is disconnected");
  }

  std::vector<Fragment> frags = f.fragments;
  std::vector<int> plus(n, -1), minus(n, -1);
  auto mark = [&](int frag, int slot, int charge) {
    Atom &a = frags[frag].graph.atom(frags[frag].attachments[slot]);
    a.formal_charge = charge;
    a.explicit_h = 0;
    (charge > 0 ? plus : minus)[frag] = frags[frag].attachments[slot];
  };
  std::vector<int> pos(n);
  for (int i = 0; i < n; ++i)
    pos[path[i]] = i;
  for (const FragmentLink &l: f.links) {
    const bool forward = pos[l.frag_b] == pos[l.frag_a] + 1;
    if (forward) {
      mark(l.frag_a, l.slot_a, -1);
      mark(l.frag_b, l.slot_b, +1);
    } else {
      mark(l.frag_a, l.slot_a, +1);
      mark(l.frag_b, l.slot_b, -1);
    }
  }

  std::string out;
  for (int i = 0; i < n; ++i) {
    const int fi = path[i];
    const MolGraph &g = frags[fi].graph;
    WriteOptions opt;
    opt.rank.resize(g.num_atoms());
    std::iota(opt.rank.begin(), opt.rank.end(), 0);
    if (minus[fi] >= 0)
      opt.rank[minus[fi]] = g.num_atoms();
    if (plus[fi] >= 0)
      opt.roots.push_back(plus[fi]);
    if (i > 0)
      out += "[SEP]";
    out += write_smiles_detailed(g, opt).joined();
  }
  return out;
}

/// Chain-linearized FragLink encoding of a molecule; never throws a chain
/// violation because the fragmentation is restricted to a path.
inline std::string encode_fraglink(const MolGraph &g) {
  return encode_fraglink(chain_fragment_molecule(g));
}

inline MolGraph decode_fraglink(std::string_view text) {
  const std::vector<detail::Piece> pieces = detail::split_sep(text);
  const int n = static_cast<int>(pieces.size());
  FragmentSeq seq;
  std::vector<int> plus_slot(n, -1), minus_slot(n, -1);
  for (int i = 0; i < n; ++i) {
    Fragment frag;
    frag.graph = detail::parse_piece(pieces[i]);
    frag.attachments = detail::dummies_of(frag.graph);
    for (std::size_t s = 0; s < frag.attachments.size(); ++s) {
      const Atom &a = frag.graph.atom(frag.attachments[s]);
      int &slot = a.formal_charge == 1 ? plus_slot[i] : minus_slot[i];
      if ((a.formal_charge != 1 && a.formal_charge != -1) || a.total_h() != 0)
        throw CodecError(CodecErrorKind::kMalformedMarker,
                         "fragment " + std::to_string(i) + " has a marker other than [*+]/[*-]");
      if (slot >= 0)
        throw CodecError(CodecErrorKind::kMalformedMarker,
                         "fragment " + std::to_string(i) + " repeats a marker");
      slot = static_cast<int>(s);
    }
    const bool want_plus = i > 0;
    const bool want_minus = i + 1 < n;
    if ((plus_slot[i] >= 0) != want_plus || (minus_slot[i] >= 0) != want_minus)
      throw CodecError(CodecErrorKind::kDanglingAttachment,
                       "fragment " + std::to_string(i) + " markers do not match its chain position");
    seq.fragments.push_back(std::move(frag));
  }
  for (int i = 0; i + 1 < n; ++i)
    seq.links.push_back({ i, minus_slot[i], i + 1, plus_slot[i + 1] });
  return detail::reassemble(seq);
}

}  // namespace molscale

//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molscale/element.hpp"
#include "molscale/mol_graph.hpp"

namespace molscale {

namespace detail {

constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }
constexpr bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
constexpr bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

inline std::optional<BondOrder> bond_symbol(char c) {
  switch (c) {
  case '-':
  case '/':
  case '\\':
    return BondOrder::kSingle;
  case '=':
    return BondOrder::kDouble;
  case '#':
    return BondOrder::kTriple;
  case ':':
    return BondOrder::kAromatic;
  default:
    return std::nullopt;
  }
}

inline BondOrder default_bond(const Atom &a, const Atom &b) {
  return a.aromatic && b.aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
}

struct ScannedAtom {
  Atom atom;
  std::size_t length;
};

inline ScannedAtom scan_bracket_atom(std::string_view text, std::size_t start) {
  auto fail = [&](std::size_t at, std::string msg) -> ScannedAtom {
    throw ParseError({ at, DiagnosticKind::kBadBracketAtom, std::move(msg) });
  };

  const std::size_t close = text.find(']', start);
  if (close == std::string_view::npos)
    return fail(start, "unterminated bracket atom");

  std::size_t p = start + 1;
  Atom atom;
  atom.explicit_h = 0;

  if (p < close && is_digit(text[p])) {
    int iso = 0;
    std::size_t digits = 0;
    while (p < close && is_digit(text[p])) {
      if (++digits > 3)
        return fail(p, "isotope too long");
      iso = iso * 10 + (text[p] - '0');
      ++p;
    }
    if (iso == 0)
      return fail(start + 1, "isotope must be positive");
    atom.isotope = iso;
  }

  if (p >= close)
    return fail(p, "missing element symbol");

  if (text[p] == '*') {
    atom.element = kDummyElement;
    ++p;
  } else if (is_lower(text[p])) {
    const ElementInfo *e = nullptr;
    if (p + 1 < close && is_lower(text[p + 1])) {
      std::string two { static_cast<char>(text[p] - 'a' + 'A'), text[p + 1] };
      e = find_element(two);
      if (e != nullptr && e->aromatic)
        p += 2;
      else
        e = nullptr;
    }
    if (e == nullptr) {
      std::string one { static_cast<char>(text[p] - 'a' + 'A') };
      e = find_element(one);
      if (e == nullptr || !e->aromatic)
        throw ParseError({ p, DiagnosticKind::kUnknownSymbol,
                           "unknown aromatic symbol in bracket atom" });
      ++p;
    }
    atom.element = e->number;
    atom.aromatic = true;
  } else if (is_upper(text[p])) {
    const ElementInfo *e = nullptr;
    if (p + 1 < close && is_lower(text[p + 1])) {
      e = find_element(text.substr(p, 2));
      if (e != nullptr)
        p += 2;
    }
    if (e == nullptr) {
      e = find_element(text.substr(p, 1));
      if (e == nullptr)
        throw ParseError({ p, DiagnosticKind::kUnknownSymbol, "unknown element symbol" });
      ++p;
    }
    atom.element = e->number;
  } else {
    return fail(p, "missing element symbol");
  }

  // chirality is accepted and dropped
  if (p < close && text[p] == '@') {
    ++p;
    if (p < close && text[p] == '@')
      ++p;
  }

  if (p < close && text[p] == 'H') {
    ++p;
    int h = 1;
    if (p < close && is_digit(text[p])) {
      h = text[p] - '0';
      ++p;
    }
    atom.explicit_h = h;
  }

  if (p < close && (text[p] == '+' || text[p] == '-')) {
    const char sign = text[p];
    const int unit = sign == '+' ? 1 : -1;
    ++p;
    int mag = 1;
    if (p < close && is_digit(text[p])) {
      mag = 0;
      while (p < close && is_digit(text[p])) {
        mag = mag * 10 + (text[p] - '0');
        if (mag > 99)
          return fail(p, "charge too large");
        ++p;
      }
    } else {
      while (p < close && text[p] == sign) {
        ++mag;
        ++p;
      }
    }
    if (mag > 4)
      return fail(start, "formal charge outside [-4, +4]");
    atom.formal_charge = unit * mag;
  }

  if (p < close && text[p] == ':') {
    ++p;
    if (p >= close || !is_digit(text[p]))
      return fail(p, "atom class requires digits");
    while (p < close && is_digit(text[p]))
      ++p;
  }

  if (p != close)
    return fail(p, "unexpected character in bracket atom");

  return { atom, close - start + 1 };
}

// Scans one atom token (organic subset, '*', or bracket atom) at `pos`.
// Returns nullopt if no atom starts there.
inline std::optional<ScannedAtom> scan_atom(std::string_view text, std::size_t pos) {
  if (pos >= text.size())
    return std::nullopt;

  const char c = text[pos];
  if (c == '[')
    return scan_bracket_atom(text, pos);

  Atom atom;
  if (c == '*') {
    atom.element = kDummyElement;
    return ScannedAtom { atom, 1 };
  }
  if (c == 'C' && pos + 1 < text.size() && text[pos + 1] == 'l') {
    atom.element = 17;
    return ScannedAtom { atom, 2 };
  }
  if (c == 'B' && pos + 1 < text.size() && text[pos + 1] == 'r') {
    atom.element = 35;
    return ScannedAtom { atom, 2 };
  }
  switch (c) {
  case 'B':
    atom.element = 5;
    break;
  case 'C':
    atom.element = 6;
    break;
  case 'N':
    atom.element = 7;
    break;
  case 'O':
    atom.element = 8;
    break;
  case 'P':
    atom.element = 15;
    break;
  case 'S':
    atom.element = 16;
    break;
  case 'F':
    atom.element = 9;
    break;
  case 'I':
    atom.element = 53;
    break;
  case 'b':
    atom.element = 5;
    atom.aromatic = true;
    break;
  case 'c':
    atom.element = 6;
    atom.aromatic = true;
    break;
  case 'n':
    atom.element = 7;
    atom.aromatic = true;
    break;
  case 'o':
    atom.element = 8;
    atom.aromatic = true;
    break;
  case 'p':
    atom.element = 15;
    atom.aromatic = true;
    break;
  case 's':
    atom.element = 16;
    atom.aromatic = true;
    break;
  default:
    return std::nullopt;
  }
  return ScannedAtom { atom, 1 };
}

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text): text_(text) { }

  MolGraph parse() {
    if (text_.empty())
      throw ParseError({ 0, DiagnosticKind::kEmptyInput, "empty input" });

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::optional<ScannedAtom> sa = scan_atom(text_, pos_)) {
        add_atom(sa->atom);
        pos_ += sa->length;
      } else if (std::optional<BondOrder> order = bond_symbol(c)) {
        if (pending_ || prev_ < 0)
          error(DiagnosticKind::kInvalidBond, "bond symbol without a preceding atom");
        pending_ = order;
        pending_pos_ = pos_;
        ++pos_;
      } else if (c == '(') {
        if (prev_ < 0)
          error(DiagnosticKind::kUnmatchedParen, "branch without a preceding atom");
        if (pending_)
          error(DiagnosticKind::kInvalidBond, "bond symbol before '('");
        branches_.push_back({ prev_, pos_, atoms_in_branch_ });
        atoms_in_branch_ = 0;
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty())
          error(DiagnosticKind::kUnmatchedParen, "')' without matching '('");
        if (pending_)
          error(DiagnosticKind::kInvalidBond, "dangling bond symbol before ')'");
        if (atoms_in_branch_ == 0)
          error(DiagnosticKind::kUnmatchedParen, "empty branch");
        prev_ = branches_.back().atom;
        atoms_in_branch_ = branches_.back().outer_count;
        branches_.pop_back();
        ++pos_;
      } else if (is_digit(c) || c == '%') {
        ring_closure();
      } else if (c == '.') {
        if (pending_)
          error(DiagnosticKind::kInvalidBond, "bond symbol before '.'");
        if (!branches_.empty())
          error(DiagnosticKind::kUnmatchedParen, "'.' inside a branch");
        if (prev_ < 0)
          error(DiagnosticKind::kInvalidBond, "'.' without a preceding atom");
        prev_ = -1;
        ++pos_;
      } else {
        error(DiagnosticKind::kUnknownSymbol,
              std::string("unexpected character '") + c + "'");
      }
    }

    if (pending_)
      throw ParseError({ pending_pos_, DiagnosticKind::kInvalidBond,
                         "dangling bond symbol at end of input" });
    if (!branches_.empty())
      throw ParseError({ branches_.back().pos, DiagnosticKind::kUnmatchedParen,
                         "unclosed '('" });
    for (const RingOpen &r: rings_) {
      if (r.atom >= 0)
        throw ParseError({ r.pos, DiagnosticKind::kUnclosedRing,
                           "ring-closure digit never closed" });
    }

    graph_.perceive();
    check_graph(graph_, positions_);
    return std::move(graph_);
  }

private:
  struct Branch {
    int atom;
    std::size_t pos;
    int outer_count;
  };
  struct RingOpen {
    int atom = -1;
    std::optional<BondOrder> order;
    std::size_t pos = 0;
  };

  [[noreturn]] void error(DiagnosticKind kind, std::string msg) const {
    throw ParseError({ pos_, kind, std::move(msg) });
  }

  void add_atom(const Atom &atom) {
    const int id = graph_.add_atom(atom);
    positions_.push_back(pos_);
    if (prev_ >= 0) {
      const BondOrder order
          = pending_.value_or(default_bond(graph_.atom(prev_), graph_.atom(id)));
      graph_.add_bond(prev_, id, order);
    } else if (pending_) {
      error(DiagnosticKind::kInvalidBond, "bond symbol without a preceding atom");
    }
    pending_.reset();
    prev_ = id;
    ++atoms_in_branch_;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0)
      error(DiagnosticKind::kInvalidBond, "ring-closure digit without a preceding atom");

    int digit;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !is_digit(text_[pos_ + 1])
          || !is_digit(text_[pos_ + 2]))
        error(DiagnosticKind::kUnknownSymbol, "'%' must be followed by two digits");
      digit = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      digit = text_[pos_] - '0';
      ++pos_;
    }

    RingOpen &slot = rings_[digit];
    if (slot.atom < 0) {
      slot.atom = prev_;
      slot.order = pending_;
      slot.pos = start;
      pending_.reset();
      return;
    }

    const int partner = slot.atom;
    std::optional<BondOrder> order = pending_;
    if (slot.order && order && *slot.order != *order)
      throw ParseError({ start, DiagnosticKind::kInvalidBond,
                         "conflicting ring-closure bond symbols" });
    if (!order)
      order = slot.order;
    if (partner == prev_)
      throw ParseError({ start, DiagnosticKind::kInvalidBond, "ring closure to itself" });
    const BondOrder actual
        = order.value_or(default_bond(graph_.atom(partner), graph_.atom(prev_)));
    if (graph_.add_bond(partner, prev_, actual) < 0)
      throw ParseError({ start, DiagnosticKind::kInvalidBond,
                         "ring closure duplicates an existing bond" });
    slot = RingOpen {};
    pending_.reset();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph graph_;
  std::vector<std::size_t> positions_;
  std::vector<Branch> branches_;
  std::array<RingOpen, 100> rings_ {};
  int prev_ = -1;
  int atoms_in_branch_ = 0;
  std::optional<BondOrder> pending_;
  std::size_t pending_pos_ = 0;
};

}  // namespace detail

/// Parses a SMILES string into a molecular graph. Stereo marks are read
/// and dropped. Throws ParseError on syntax or valence problems.
inline MolGraph parse_smiles(std::string_view text) {
  return detail::SmilesParser(text).parse();
}

struct Verdict {
  bool valid = false;
  std::vector<ParseDiagnostic> diagnostics;
};

inline Verdict validate(std::string_view text) {
  Verdict v;
  try {
    parse_smiles(text);
    v.valid = true;
  } catch (const ParseError &e) {
    v.diagnostics.push_back(e.diagnostic());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Writing

struct WriteOptions {
  // Ordering key for roots and neighbor visits; empty means atom index.
  std::vector<int> rank;
  // Roots tried first, in order; the rest follow by rank.
  std::vector<int> roots;
  // Bonds forced to be written as ring-closure digits. Trees never cross
  // them, so each connected piece of the remaining graph is one tree.
  std::vector<bool> closure_bonds;
};

struct WriteResult {
  std::vector<std::string> pieces;  // one string per DFS tree
  std::vector<int> roots;           // root atom of each piece
  std::vector<int> atom_order;      // emission order over all pieces

  std::string joined(char sep = '.') const {
    std::string out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i > 0)
        out += sep;
      out += pieces[i];
    }
    return out;
  }
};

namespace detail {

inline std::string bracket_token(const Atom &a) {
  std::string s = "[";
  if (a.isotope)
    s += std::to_string(*a.isotope);
  std::string sym(element_symbol(a.element));
  if (a.aromatic)
    for (char &ch: sym)
      ch = static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch);
  s += sym;
  const int h = a.total_h();
  if (h > 0) {
    s += 'H';
    if (h > 1)
      s += std::to_string(h);
  }
  if (a.formal_charge != 0) {
    s += a.formal_charge > 0 ? '+' : '-';
    if (std::abs(a.formal_charge) > 1)
      s += std::to_string(std::abs(a.formal_charge));
  }
  s += ']';
  return s;
}

inline std::string atom_token(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  const ElementInfo *e = find_element(a.element);
  const bool bare_ok = e != nullptr && e->organic && a.formal_charge == 0 && !a.isotope
                       && (!a.aromatic || e->aromatic)
                       && MolGraph::implicit_hydrogens(a.element, a.aromatic, g.bond_valence(i))
                              == a.total_h();
  if (!bare_ok)
    return bracket_token(a);
  if (a.is_dummy())
    return "*";
  std::string sym(e->symbol);
  if (a.aromatic)
    sym[0] = static_cast<char>(sym[0] - 'A' + 'a');
  return sym;
}

inline std::string bond_token(const MolGraph &g, int bond) {
  const Bond &b = g.bond(bond);
  const bool both_aromatic = g.atom(b.begin).aromatic && g.atom(b.end).aromatic;
  switch (b.order) {
  case BondOrder::kSingle:
    return both_aromatic ? "-" : "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kAromatic:
    return both_aromatic ? "" : ":";
  }
  return "";
}

inline std::string ring_label(int d) {
  if (d < 10)
    return std::string(1, static_cast<char>('0' + d));
  return "%" + std::to_string(d);
}

class SmilesWriter {
public:
  SmilesWriter(const MolGraph &g, const WriteOptions &opt): g_(g), opt_(opt) {
    const int n = g.num_atoms();
    key_.resize(n);
    if (static_cast<int>(opt.rank.size()) == n)
      key_ = opt.rank;
    else
      std::iota(key_.begin(), key_.end(), 0);

    sorted_nbrs_.resize(n);
    for (int a = 0; a < n; ++a) {
      sorted_nbrs_[a] = g.neighbors(a);
      std::sort(sorted_nbrs_[a].begin(), sorted_nbrs_[a].end(),
                [&](const Neighbor &x, const Neighbor &y) {
                  return std::pair(key_[x.atom], x.atom) < std::pair(key_[y.atom], y.atom);
                });
    }
  }

  WriteResult write() {
    const int n = g_.num_atoms();
    visited_.assign(n, false);
    children_.assign(n, {});
    closures_.assign(n, {});
    is_closure_.assign(g_.num_bonds(), false);
    order_pos_.assign(n, -1);

    std::vector<int> root_order = opt_.roots;
    std::vector<int> by_key(n);
    std::iota(by_key.begin(), by_key.end(), 0);
    std::sort(by_key.begin(), by_key.end(), [&](int x, int y) {
      return std::pair(key_[x], x) < std::pair(key_[y], y);
    });
    root_order.insert(root_order.end(), by_key.begin(), by_key.end());

    WriteResult out;
    for (int r: root_order) {
      if (r < 0 || r >= n || visited_[r])
        continue;
      out.roots.push_back(r);
      traverse(r, out.atom_order);
    }
    for (std::size_t i = 0; i < out.atom_order.size(); ++i)
      order_pos_[out.atom_order[i]] = static_cast<int>(i);

    for (int b = 0; b < g_.num_bonds(); ++b) {
      if (!is_closure_[b])
        continue;
      const Bond &bond = g_.bond(b);
      closures_[bond.begin].push_back(b);
      closures_[bond.end].push_back(b);
    }
    for (int a = 0; a < n; ++a) {
      std::sort(closures_[a].begin(), closures_[a].end(), [&](int x, int y) {
        return order_pos_[g_.bond(x).other(a)] < order_pos_[g_.bond(y).other(a)];
      });
    }

    digit_of_.assign(g_.num_bonds(), 0);
    in_use_.reset();
    for (int r: out.roots) {
      std::string s;
      emit(r, s);
      out.pieces.push_back(std::move(s));
    }
    return out;
  }

private:
  bool forced(int bond) const {
    return bond < static_cast<int>(opt_.closure_bonds.size()) && opt_.closure_bonds[bond];
  }

  void traverse(int root, std::vector<int> &order) {
    struct Frame {
      int atom;
      int parent_bond;
      std::size_t next;
    };
    std::vector<Frame> stack;
    visited_[root] = true;
    order.push_back(root);
    stack.push_back({ root, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.next >= sorted_nbrs_[f.atom].size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = sorted_nbrs_[f.atom][f.next++];
      if (nb.bond == f.parent_bond)
        continue;
      if (forced(nb.bond)) {
        is_closure_[nb.bond] = true;
        continue;
      }
      if (!visited_[nb.atom]) {
        visited_[nb.atom] = true;
        order.push_back(nb.atom);
        children_[f.atom].push_back({ nb.atom, nb.bond });
        stack.push_back({ nb.atom, nb.bond, 0 });
      } else {
        is_closure_[nb.bond] = true;
      }
    }
  }

  int allocate_digit(const std::bitset<100> &released_here) {
    for (int d = 1; d < 100; ++d) {
      if (!in_use_[d] && !released_here[d]) {
        in_use_[d] = true;
        return d;
      }
    }
    throw std::runtime_error("more than 99 simultaneously open ring closures");
  }

  void emit(int a, std::string &s) {
    s += atom_token(g_, a);

    std::bitset<100> released;
    for (int b: closures_[a]) {
      const int other = g_.bond(b).other(a);
      if (order_pos_[other] < order_pos_[a]) {
        const int d = digit_of_[b];
        s += ring_label(d);
        in_use_[d] = false;
        released[d] = true;
      }
    }
    for (int b: closures_[a]) {
      const int other = g_.bond(b).other(a);
      if (order_pos_[other] > order_pos_[a]) {
        const int d = allocate_digit(released);
        digit_of_[b] = d;
        s += bond_token(g_, b);
        s += ring_label(d);
      }
    }

    const auto &kids = children_[a];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool last = i + 1 == kids.size();
      if (!last)
        s += '(';
      s += bond_token(g_, kids[i].bond);
      emit(kids[i].atom, s);
      if (!last)
        s += ')';
    }
  }

  const MolGraph &g_;
  const WriteOptions &opt_;
  std::vector<int> key_;
  std::vector<std::vector<Neighbor>> sorted_nbrs_;
  std::vector<bool> visited_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<int>> closures_;
  std::vector<bool> is_closure_;
  std::vector<int> order_pos_;
  std::vector<int> digit_of_;
  std::bitset<100> in_use_;
};

}  // namespace detail

inline WriteResult write_smiles_detailed(const MolGraph &g, const WriteOptions &opt) {
  return detail::SmilesWriter(g, opt).write();
}

/// Depth-first SMILES rendering starting at `start`; neighbors are visited
/// in atom-index order. Other components follow, separated by '.'.
inline std::string write_smiles(const MolGraph &g, int start = 0) {
  WriteOptions opt;
  if (start >= 0 && start < g.num_atoms())
    opt.roots.push_back(start);
  return write_smiles_detailed(g, opt).joined();
}

}  // namespace molscale

//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molscale/mol_graph.hpp"
#include "molscale/smiles.hpp"

namespace molscale {

namespace detail {

inline bool is_deep_bond_char(char c) {
  switch (c) {
  case '-':
  case '=':
  case '#':
  case '$':
  case '\\':
  case '/':
  case ':':
    return true;
  default:
    return false;
  }
}

inline std::string deep_ring_label(int size) {
  if (size < 10)
    return std::to_string(size);
  if (size < 100)
    return "%" + std::to_string(size);
  return "%(" + std::to_string(size) + ")";
}

// Syntactic SMILES -> DeepSMILES rewrite. Branch closes become one ')' per
// atom in the closed branch; ring closures become the path length back to
// the opening atom. Returns nullopt when a closure does not point at an
// atom on the current path (the rewrite is only defined for those).
inline std::optional<std::string> deepsmiles_transcode(std::string_view smi) {
  struct Opening {
    int depth;
    std::string bond;
    int atom;
  };

  std::vector<std::string> out;
  std::map<std::size_t, std::vector<std::string>> suffixes;
  std::vector<std::vector<int>> levels(1);
  std::vector<bool> on_path;
  std::map<std::string, Opening> open;
  int idx = -1;

  auto preceding_bond = [&](std::size_t i) {
    return i > 0 && is_deep_bond_char(smi[i - 1]) ? std::string(1, smi[i - 1]) : std::string();
  };
  auto depth = [&] {
    int d = 0;
    for (const auto &level: levels)
      d += static_cast<int>(level.size());
    return d;
  };

  for (std::size_t i = 0; i < smi.size(); ++i) {
    const char c = smi[i];
    if (c == ')') {
      if (levels.size() < 2)
        return std::nullopt;
      for (int a: levels.back())
        on_path[a] = false;
      out.emplace_back(levels.back().size(), ')');
      levels.pop_back();
    } else if (c == '(') {
      levels.emplace_back();
    } else if (is_deep_bond_char(c)) {
      continue;
    } else if (is_digit(c) || c == '%') {
      const std::string bond = preceding_bond(i);
      std::string label;
      if (c == '%') {
        label = std::string(smi.substr(i, 3));
        i += 2;
      } else {
        label = std::string(1, c);
      }
      auto it = open.find(label);
      if (it == open.end()) {
        open[label] = { depth(), bond, idx };
        continue;
      }
      const Opening o = it->second;
      open.erase(it);
      if (o.atom < 0 || !on_path[o.atom] || out.empty())
        return std::nullopt;
      std::string out_bond = bond;
      if (out_bond.empty()) {
        out_bond = o.bond;
        if (out_bond == "\\")
          out_bond = "/";
        else if (out_bond == "/")
          out_bond = "\\";
      }
      suffixes[out.size() - 1].push_back(out_bond + deep_ring_label(depth() - o.depth + 1));
    } else {
      const std::string bond = preceding_bond(i);
      ++idx;
      levels.back().push_back(idx);
      on_path.push_back(true);
      if (c == '.') {
        // a closure may not cross a component boundary
        for (std::size_t a = 0; a < on_path.size(); ++a)
          on_path[a] = false;
        out.push_back(bond + ".");
      } else if (c == '[') {
        const std::size_t close = smi.find(']', i);
        if (close == std::string_view::npos)
          return std::nullopt;
        out.push_back(bond + std::string(smi.substr(i, close - i + 1)));
        i = close;
      } else if (i + 1 < smi.size()
                 && ((c == 'C' && smi[i + 1] == 'l') || (c == 'B' && smi[i + 1] == 'r'))) {
        out.push_back(bond + std::string(smi.substr(i, 2)));
        ++i;
      } else {
        out.push_back(bond + std::string(1, c));
      }
    }
  }

  std::string result;
  for (std::size_t k = 0; k < out.size(); ++k) {
    result += out[k];
    auto it = suffixes.find(k);
    if (it != suffixes.end())
      for (const std::string &s: it->second)
        result += s;
  }
  return result;
}

class DeepSmilesDecoder {
public:
  explicit DeepSmilesDecoder(std::string_view text): text_(text) { }

  MolGraph decode() {
    if (text_.empty())
      throw ParseError({ 0, DiagnosticKind::kEmptyInput, "empty input" });

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::optional<ScannedAtom> sa = scan_atom(text_, pos_)) {
        add_atom(sa->atom);
        pos_ += sa->length;
      } else if (std::optional<BondOrder> order = bond_symbol(c)) {
        if (pending_ || last_ < 0)
          error(DiagnosticKind::kInvalidBond, "bond symbol without a preceding atom");
        pending_ = order;
        ++pos_;
      } else if (c == ')') {
        if (pending_)
          error(DiagnosticKind::kInvalidBond, "dangling bond symbol before ')'");
        if (stack_.empty())
          error(DiagnosticKind::kUnmatchedParen, "close-run exceeds the stack depth");
        stack_.pop_back();
        ++pos_;
      } else if (is_digit(c) || c == '%') {
        ring_closure();
      } else if (c == '.') {
        if (pending_)
          error(DiagnosticKind::kInvalidBond, "bond symbol before '.'");
        if (last_ < 0)
          error(DiagnosticKind::kInvalidBond, "'.' without a preceding atom");
        stack_.clear();
        last_ = -1;
        fresh_ = true;
        ++pos_;
      } else {
        error(DiagnosticKind::kUnknownSymbol, std::string("unexpected character '") + c + "'");
      }
    }

    if (pending_)
      error(DiagnosticKind::kInvalidBond, "dangling bond symbol at end of input");
    if (last_ < 0)
      error(DiagnosticKind::kInvalidBond, "input ends without an atom");

    graph_.perceive();
    check_graph(graph_, positions_);
    return std::move(graph_);
  }

private:
  [[noreturn]] void error(DiagnosticKind kind, std::string msg) const {
    throw ParseError({ std::min(pos_, text_.size()), kind, std::move(msg) });
  }

  void add_atom(const Atom &atom) {
    if (stack_.empty() && !fresh_)
      error(DiagnosticKind::kUnmatchedParen, "close-run emptied the stack before this atom");
    const int id = graph_.add_atom(atom);
    positions_.push_back(pos_);
    parent_.push_back(stack_.empty() ? -1 : stack_.back());
    if (!stack_.empty()) {
      const Atom &prev = graph_.atom(stack_.back());
      graph_.add_bond(stack_.back(), id, pending_.value_or(default_bond(prev, graph_.atom(id))));
    }
    pending_.reset();
    stack_.push_back(id);
    last_ = id;
    fresh_ = false;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (last_ < 0)
      error(DiagnosticKind::kInvalidBond, "ring-size token without a preceding atom");

    long size = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '(') {
        std::size_t p = pos_ + 2;
        const std::size_t digits_begin = p;
        while (p < text_.size() && is_digit(text_[p]) && size < 100000) {
          size = size * 10 + (text_[p] - '0');
          ++p;
        }
        if (p == digits_begin || p >= text_.size() || text_[p] != ')')
          error(DiagnosticKind::kUnknownSymbol, "malformed '%(n)' ring-size token");
        pos_ = p + 1;
      } else {
        if (pos_ + 2 >= text_.size() || !is_digit(text_[pos_ + 1]) || !is_digit(text_[pos_ + 2]))
          error(DiagnosticKind::kUnknownSymbol, "'%' must be followed by two digits");
        size = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
        pos_ += 3;
      }
    } else {
      size = text_[pos_] - '0';
      ++pos_;
    }

    int target = last_;
    for (long k = 1; k < size && target >= 0; ++k)
      target = parent_[target];
    if (size < 3 || target < 0)
      throw ParseError({ start, DiagnosticKind::kUnclosedRing,
                         "ring size " + std::to_string(size) + " has no atom to close onto" });
    const BondOrder order
        = pending_.value_or(default_bond(graph_.atom(target), graph_.atom(last_)));
    if (graph_.add_bond(target, last_, order) < 0)
      throw ParseError({ start, DiagnosticKind::kInvalidBond,
                         "ring closure duplicates an existing bond" });
    pending_.reset();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph graph_;
  std::vector<std::size_t> positions_;
  std::vector<int> parent_;
  std::vector<int> stack_;
  int last_ = -1;
  bool fresh_ = true;
  std::optional<BondOrder> pending_;
};

}  // namespace detail

/// Rewrites a SMILES string into DeepSMILES. Inputs whose ring closures do
/// not return to an atom on the current path are first rewritten by a
/// depth-first traversal, where every closure does.
inline std::string to_deepsmiles(std::string_view smiles) {
  MolGraph g = parse_smiles(smiles);
  if (std::optional<std::string> direct = detail::deepsmiles_transcode(smiles))
    return *direct;
  const std::string rewritten = write_smiles(g);
  if (std::optional<std::string> via = detail::deepsmiles_transcode(rewritten))
    return *via;
  throw std::logic_error("depth-first rewrite produced a non-ancestor ring closure");
}

inline MolGraph decode_deepsmiles(std::string_view text) {
  return detail::DeepSmilesDecoder(text).decode();
}

inline std::string from_deepsmiles(std::string_view text) {
  return write_smiles(decode_deepsmiles(text));
}

}  // namespace molscale

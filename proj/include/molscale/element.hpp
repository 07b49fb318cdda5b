//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <optional>
#include <string_view>

namespace molscale {

// Atomic number 0 is the attachment-point dummy written as '*'.
inline constexpr int kDummyElement = 0;

struct ElementInfo {
  std::string_view symbol;
  int number;
  std::array<int, 3> valences;  // ascending, 0-padded
  bool organic;                 // may be written outside brackets
  bool aromatic;                // has a lowercase aromatic spelling
};

namespace detail {

inline constexpr std::array<ElementInfo, 32> kElements = { {
  { "*", 0, { 0, 0, 0 }, true, false },
  { "H", 1, { 1, 0, 0 }, false, false },
  { "Li", 3, { 1, 0, 0 }, false, false },
  { "B", 5, { 3, 0, 0 }, true, true },
  { "C", 6, { 4, 0, 0 }, true, true },
  { "N", 7, { 3, 0, 0 }, true, true },
  { "O", 8, { 2, 0, 0 }, true, true },
  { "F", 9, { 1, 0, 0 }, true, false },
  { "Na", 11, { 1, 0, 0 }, false, false },
  { "Mg", 12, { 2, 0, 0 }, false, false },
  { "Al", 13, { 3, 0, 0 }, false, false },
  { "Si", 14, { 4, 0, 0 }, false, false },
  { "P", 15, { 3, 5, 0 }, true, true },
  { "S", 16, { 2, 4, 6 }, true, true },
  { "Cl", 17, { 1, 0, 0 }, true, false },
  { "K", 19, { 1, 0, 0 }, false, false },
  { "Ca", 20, { 2, 0, 0 }, false, false },
  { "Fe", 26, { 2, 3, 0 }, false, false },
  { "Co", 27, { 2, 3, 0 }, false, false },
  { "Cu", 29, { 1, 2, 0 }, false, false },
  { "Zn", 30, { 2, 0, 0 }, false, false },
  { "Ge", 32, { 4, 0, 0 }, false, false },
  { "As", 33, { 3, 5, 0 }, false, true },
  { "Se", 34, { 2, 4, 6 }, false, true },
  { "Br", 35, { 1, 0, 0 }, true, false },
  { "Ag", 47, { 1, 0, 0 }, false, false },
  { "Sn", 50, { 2, 4, 0 }, false, false },
  { "Te", 52, { 2, 4, 6 }, false, true },
  { "I", 53, { 1, 0, 0 }, true, false },
  { "Pt", 78, { 2, 4, 0 }, false, false },
  { "Au", 79, { 1, 3, 0 }, false, false },
  { "Hg", 80, { 1, 2, 0 }, false, false },
} };

}  // namespace detail

inline const ElementInfo *find_element(int number) {
  for (const auto &e: detail::kElements)
    if (e.number == number)
      return &e;
  return nullptr;
}

inline const ElementInfo *find_element(std::string_view symbol) {
  for (const auto &e: detail::kElements)
    if (e.symbol == symbol)
      return &e;
  return nullptr;
}

inline std::string_view element_symbol(int number) {
  const ElementInfo *e = find_element(number);
  return e != nullptr ? e->symbol : std::string_view("?");
}

inline bool is_heteroatom(int number) {
  return number != 6 && number != 1 && number != kDummyElement;
}

// Lowest neutral valence; the implicit-hydrogen rules start from it.
inline int default_valence(int number) {
  const ElementInfo *e = find_element(number);
  return e != nullptr ? e->valences[0] : 0;
}

// Highest valence the element may carry at the given formal charge, or
// nullopt when the element is unconstrained (the '*' dummy).
inline std::optional<int> max_valence(int number, int charge) {
  if (number == kDummyElement)
    return std::nullopt;

  const ElementInfo *e = find_element(number);
  if (e == nullptr)
    return 0;

  const int top = *std::max_element(e->valences.begin(), e->valences.end());
  const int mag = std::abs(charge);
  int adjusted;
  switch (number) {
  case 5:  // B- is isoelectronic with C
    adjusted = top - charge;
    break;
  case 6:
  case 14:
  case 32:
  case 50:
    adjusted = top - mag;
    break;
  case 7:
  case 8:
  case 9:
  case 15:
  case 16:
  case 17:
  case 33:
  case 34:
  case 35:
  case 52:
  case 53:
    adjusted = top + charge;
    break;
  default:
    adjusted = top - mag;
    break;
  }
  return std::max(adjusted, 0);
}

}  // namespace molscale

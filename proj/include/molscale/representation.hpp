//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace molscale {

enum class Representation {
  kSmiles,
  kDeepSmiles,
  kSafe,
  kFragSeq,
  kFragLink,
};

inline constexpr std::array<Representation, 5> kAllRepresentations = {
  Representation::kDeepSmiles, Representation::kFragLink, Representation::kFragSeq,
  Representation::kSafe,       Representation::kSmiles,
};

inline std::string_view to_string(Representation r) {
  switch (r) {
  case Representation::kSmiles:
    return "SMILES";
  case Representation::kDeepSmiles:
    return "DeepSMILES";
  case Representation::kSafe:
    return "SAFE";
  case Representation::kFragSeq:
    return "FragSeq";
  case Representation::kFragLink:
    return "FragLink";
  }
  return "?";
}

// Case-insensitive lookup of a representation tag.
inline std::optional<Representation> parse_representation(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (char &c: out)
      if (c >= 'A' && c <= 'Z')
        c = static_cast<char>(c - 'A' + 'a');
    return out;
  };
  const std::string key = lower(name);
  for (Representation r: kAllRepresentations)
    if (lower(to_string(r)) == key)
      return r;
  return std::nullopt;
}

}  // namespace molscale

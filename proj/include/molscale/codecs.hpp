//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <string_view>

#include "molscale/deepsmiles.hpp"
#include "molscale/fragments.hpp"
#include "molscale/mol_graph.hpp"
#include "molscale/representation.hpp"
#include "molscale/safe.hpp"
#include "molscale/smiles.hpp"

namespace molscale {

/// Encodes a SMILES string in representation `r`. SMILES input is validated
/// and returned unchanged.
inline std::string encode(Representation r, std::string_view smiles) {
  switch (r) {
  case Representation::kSmiles:
    parse_smiles(smiles);
    return std::string(smiles);
  case Representation::kDeepSmiles:
    return to_deepsmiles(smiles);
  case Representation::kSafe:
    return encode_safe(parse_smiles(smiles));
  case Representation::kFragSeq:
    return encode_fragseq(fragment_molecule(parse_smiles(smiles)));
  case Representation::kFragLink:
    return encode_fraglink(parse_smiles(smiles));
  }
  return {};
}

/// Decodes text in representation `r` to a graph. Throws ParseError or
/// CodecError; FragSeq ambiguity is not an error here.
inline MolGraph decode_graph(Representation r, std::string_view text) {
  switch (r) {
  case Representation::kSmiles:
    return parse_smiles(text);
  case Representation::kDeepSmiles:
    return decode_deepsmiles(text);
  case Representation::kSafe:
    return decode_safe(text);
  case Representation::kFragSeq:
    return decode_fragseq(text).graph;
  case Representation::kFragLink:
    return decode_fraglink(text);
  }
  return {};
}

inline std::string decode(Representation r, std::string_view text) {
  return write_smiles(decode_graph(r, text));
}

}  // namespace molscale

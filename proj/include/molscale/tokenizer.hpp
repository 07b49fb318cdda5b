//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <openssl/evp.h>

#include "molscale/representation.hpp"

namespace molscale {

inline constexpr std::string_view kBosToken = "<bos>";
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kStarPlusToken = "[*+]";
inline constexpr std::string_view kStarMinusToken = "[*-]";

class TokenizeError: public std::runtime_error {
public:
  TokenizeError(std::size_t position, const std::string &msg)
      : std::runtime_error("unknown symbol at " + std::to_string(position) + ": " + msg),
        position_(position) { }

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Splits text into alphabet units: bracket atoms and markers "[...]",
/// SAFE super-tokens "{...}", ring labels "%nn" / "%(n)", Cl and Br; every
/// other character stands alone.
inline std::vector<std::string> pretokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    std::size_t len = 1;
    if (c == '[' || c == '{') {
      const std::size_t close = text.find(c == '[' ? ']' : '}', i);
      if (close == std::string_view::npos)
        throw TokenizeError(i, std::string("unterminated '") + c + "'");
      len = close - i + 1;
    } else if (c == '%') {
      if (i + 1 < text.size() && text[i + 1] == '(') {
        const std::size_t close = text.find(')', i);
        if (close == std::string_view::npos)
          throw TokenizeError(i, "unterminated '%('");
        len = close - i + 1;
      } else if (i + 2 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))
                 && std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
        len = 3;
      }
    } else if (i + 1 < text.size()
               && ((c == 'C' && text[i + 1] == 'l') || (c == 'B' && text[i + 1] == 'r'))) {
      len = 2;
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

/// Shared token table. Ids are dense and follow lexicographic token order.
class Vocabulary {
public:
  Vocabulary() = default;

  explicit Vocabulary(const std::set<std::string> &tokens) {
    std::set<std::string> all = tokens;
    for (std::string_view s: { kBosToken, kEosToken, kPadToken, kSepToken, kStarPlusToken,
                               kStarMinusToken })
      all.emplace(s);
    for (const std::string &t: all) {
      ids_.emplace(t, static_cast<int>(tokens_.size()));
      tokens_.push_back(t);
      max_len_ = std::max(max_len_, t.size());
    }
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  std::size_t max_token_length() const { return max_len_; }
  const std::vector<std::string> &tokens() const { return tokens_; }
  const std::string &token(int id) const { return tokens_.at(id); }

  std::optional<int> find(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end())
      return std::nullopt;
    return it->second;
  }

  int id(std::string_view token) const {
    if (std::optional<int> i = find(token))
      return *i;
    throw std::out_of_range("token not in vocabulary: " + std::string(token));
  }

  int bos() const { return id(kBosToken); }
  int eos() const { return id(kEosToken); }
  int pad() const { return id(kPadToken); }
  int sep() const { return id(kSepToken); }
  int star_plus() const { return id(kStarPlusToken); }
  int star_minus() const { return id(kStarMinusToken); }

private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tokens_;
  std::size_t max_len_ = 0;
};

/// Union of the pretokenized alphabets of every sample plus the special
/// tokens. Throws std::invalid_argument if any corpus (or all) is empty.
inline Vocabulary build_vocab(const std::map<Representation, std::vector<std::string>> &corpora) {
  if (corpora.empty())
    throw std::invalid_argument("no corpora supplied");
  std::set<std::string> tokens;
  for (const auto &[repr, lines]: corpora) {
    if (lines.empty())
      throw std::invalid_argument("empty corpus for " + std::string(to_string(repr)));
    for (const std::string &line: lines)
      for (std::string &t: pretokenize(line))
        tokens.insert(std::move(t));
  }
  return Vocabulary(tokens);
}

/// Greedy longest match against the vocabulary. Joining the returned
/// tokens reproduces `text`.
inline std::vector<int> tokenize(std::string_view text, const Vocabulary &vocab) {
  std::vector<int> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = std::min(vocab.max_token_length(), text.size() - i);
    std::optional<int> hit;
    for (; len > 0; --len) {
      hit = vocab.find(text.substr(i, len));
      if (hit)
        break;
    }
    if (!hit)
      throw TokenizeError(i, std::string("'") + text[i] + "' not in vocabulary");
    out.push_back(*hit);
    i += len;
  }
  return out;
}

inline std::vector<int> tokenize(std::string_view text, Representation, const Vocabulary &vocab) {
  return tokenize(text, vocab);
}

struct TokenFailure {
  std::size_t index;  // item index in the stream
  std::string message;
};

struct TokenCount {
  Representation representation = Representation::kSmiles;
  std::uint64_t molecules = 0;  // successfully tokenized items
  std::uint64_t tokens = 0;     // sequence tokens + one EOS per item
  std::vector<TokenFailure> failures;
};

/// Loss-contributing tokens: every sequence token plus one EOS per item;
/// BOS and padding are excluded.
inline TokenCount count_corpus_tokens(const std::vector<std::string> &items, Representation r,
                                      const Vocabulary &vocab) {
  TokenCount c;
  c.representation = r;
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      c.tokens += tokenize(items[i], vocab).size() + 1;
      ++c.molecules;
    } catch (const TokenizeError &e) {
      c.failures.push_back({ i, e.what() });
    }
  }
  return c;
}

struct BudgetSpec {
  std::uint64_t target_tokens = 0;
  Representation representation = Representation::kSmiles;
  std::optional<std::uint64_t> shuffle_seed;
};

struct BudgetManifest {
  Representation representation = Representation::kSmiles;
  std::uint64_t target_tokens = 0;
  std::uint64_t actual_tokens = 0;
  std::uint64_t molecule_count = 0;
  std::string source_digest;  // SHA-256 over the selected lines, '\n'-terminated
  std::vector<std::string> selected;
  std::uint64_t skipped = 0;  // items that failed to tokenize
};

class BudgetError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string sha256_hex(const std::vector<std::string> &lines) {
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  if (ctx == nullptr)
    throw std::runtime_error("EVP_MD_CTX_new failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (const std::string &l: lines) {
    EVP_DigestUpdate(ctx, l.data(), l.size());
    EVP_DigestUpdate(ctx, "\n", 1);
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

// Fisher-Yates with raw 64-bit draws; identical on every platform.
inline std::vector<std::string> seeded_shuffle(std::vector<std::string> items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
  return items;
}

}  // namespace detail

/// Shortest prefix of the stream (optionally shuffled first) whose
/// loss-contributing token count reaches the target.
inline BudgetManifest build_budget(const std::vector<std::string> &items, const BudgetSpec &spec,
                                   const Vocabulary &vocab) {
  if (spec.target_tokens == 0)
    throw std::invalid_argument("target_tokens must be positive");
  const std::vector<std::string> stream
      = spec.shuffle_seed ? detail::seeded_shuffle(items, *spec.shuffle_seed) : items;

  BudgetManifest m;
  m.representation = spec.representation;
  m.target_tokens = spec.target_tokens;
  for (const std::string &line: stream) {
    if (m.actual_tokens >= spec.target_tokens)
      break;
    try {
      m.actual_tokens += tokenize(line, vocab).size() + 1;
    } catch (const TokenizeError &) {
      ++m.skipped;
      continue;
    }
    ++m.molecule_count;
    m.selected.push_back(line);
  }
  if (m.actual_tokens < spec.target_tokens)
    throw BudgetError("stream holds only " + std::to_string(m.actual_tokens) + " tokens, target is "
                      + std::to_string(spec.target_tokens));
  m.source_digest = detail::sha256_hex(m.selected);
  return m;
}

/// Tokens consumed by replaying a budget for `epochs` passes.
inline std::uint64_t effective_tokens(const BudgetManifest &m, std::uint64_t epochs) {
  return epochs * m.actual_tokens;
}

}  // namespace molscale

//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "molscale/codecs.hpp"
#include "molscale/tokenizer.hpp"

namespace ms = molscale;
using ms::Representation;
using ms::testing::load_lines;

namespace {

std::map<Representation, std::vector<std::string>> single_sample(const std::string &s) {
  std::map<Representation, std::vector<std::string>> c;
  for (Representation r: ms::kAllRepresentations)
    c[r] = { s };
  return c;
}

std::map<Representation, std::vector<std::string>> encoded_corpus() {
  const auto corpus = load_lines("desk_corpus.smi");
  std::map<Representation, std::vector<std::string>> c;
  for (Representation r: ms::kAllRepresentations)
    for (const std::string &s: corpus)
      c[r].push_back(ms::encode(r, s));
  return c;
}

std::string join(const std::vector<int> &ids, const ms::Vocabulary &v) {
  std::string out;
  for (int id: ids)
    out += v.token(id);
  return out;
}

}  // namespace

TEST(Vocabulary, ContainsAlphabetAndSpecials) {
  const ms::Vocabulary v = ms::build_vocab(single_sample("CCO"));
  for (std::string t: { "C", "O", "<bos>", "<eos>", "<pad>", "[SEP]", "[*+]", "[*-]" })
    EXPECT_TRUE(v.find(t).has_value()) << t;
  for (int i = 0; i < v.size(); ++i)
    EXPECT_EQ(v.id(v.token(i)), i);
  for (int i = 1; i < v.size(); ++i)
    EXPECT_LT(v.token(i - 1), v.token(i));
}

TEST(Vocabulary, DeterministicAndRejectsEmpty) {
  const ms::Vocabulary a = ms::build_vocab(single_sample("CCO"));
  const ms::Vocabulary b = ms::build_vocab(single_sample("CCO"));
  EXPECT_EQ(a.tokens(), b.tokens());
  EXPECT_THROW(ms::build_vocab({}), std::invalid_argument);
  EXPECT_THROW(ms::build_vocab({ { Representation::kSmiles, {} } }), std::invalid_argument);
}

TEST(Tokenize, Examples) {
  const ms::Vocabulary v = ms::build_vocab(single_sample("ClC1CC1.C[*+]"));
  EXPECT_EQ(ms::tokenize("Cl", v).size(), 1U);
  EXPECT_EQ(ms::tokenize("C1CC1", v).size(), 5U);
  EXPECT_EQ(ms::tokenize("C[*+]", Representation::kFragLink, v).size(), 2U);
  try {
    ms::tokenize("CCN", v);
    FAIL() << "expected TokenizeError";
  } catch (const ms::TokenizeError &e) {
    EXPECT_EQ(e.position(), 2U);
  }
}

TEST(Tokenize, ConcatenationIdentityAndSharedVocabulary) {
  const auto corpora = encoded_corpus();
  const ms::Vocabulary v = ms::build_vocab(corpora);
  for (const auto &[r, lines]: corpora) {
    for (const std::string &line: lines) {
      const std::vector<int> ids = ms::tokenize(line, v);
      EXPECT_EQ(join(ids, v), line) << ms::to_string(r);
      for (int id: ids)
        EXPECT_TRUE(id >= 0 && id < v.size());
    }
  }
  // same corpus, same ids
  EXPECT_EQ(ms::build_vocab(corpora).tokens(), v.tokens());
}

TEST(CountTokens, Examples) {
  const ms::Vocabulary v = ms::build_vocab(single_sample("CCO"));
  const ms::TokenCount one = ms::count_corpus_tokens({ "CCO" }, Representation::kSmiles, v);
  EXPECT_EQ(one.tokens, 4U);
  EXPECT_EQ(one.molecules, 1U);
  const ms::TokenCount none = ms::count_corpus_tokens({}, Representation::kSmiles, v);
  EXPECT_EQ(none.tokens, 0U);
  EXPECT_EQ(none.molecules, 0U);
  const ms::TokenCount bad = ms::count_corpus_tokens({ "CCO", "CCN" }, Representation::kSmiles, v);
  EXPECT_EQ(bad.molecules, 1U);
  ASSERT_EQ(bad.failures.size(), 1U);
  EXPECT_EQ(bad.failures[0].index, 1U);
}

TEST(CountTokens, RepresentationsDifferAndPrefixMonotone) {
  const auto corpora = encoded_corpus();
  const ms::Vocabulary v = ms::build_vocab(corpora);
  const auto smiles = ms::count_corpus_tokens(corpora.at(Representation::kSmiles),
                                              Representation::kSmiles, v);
  const auto fraglink = ms::count_corpus_tokens(corpora.at(Representation::kFragLink),
                                                Representation::kFragLink, v);
  EXPECT_NE(smiles.tokens, fraglink.tokens);
  EXPECT_GE(smiles.tokens, smiles.molecules);

  const auto &lines = corpora.at(Representation::kSmiles);
  std::uint64_t prev = 0;
  for (std::size_t n = 0; n <= lines.size(); n += 97) {
    const std::vector<std::string> prefix(lines.begin(), lines.begin() + n);
    const auto c = ms::count_corpus_tokens(prefix, Representation::kSmiles, v);
    EXPECT_GE(c.tokens, prev);
    prev = c.tokens;
  }
}

TEST(Budget, ShortestPrefix) {
  const ms::Vocabulary v = ms::build_vocab(single_sample("CCO"));
  const std::vector<std::string> stream(10, "CCO");
  ms::BudgetSpec spec;
  spec.target_tokens = 10;
  const ms::BudgetManifest m = ms::build_budget(stream, spec, v);
  EXPECT_EQ(m.molecule_count, 3U);
  EXPECT_EQ(m.actual_tokens, 12U);
  EXPECT_EQ(m.source_digest.size(), 64U);
  EXPECT_EQ(ms::effective_tokens(m, 4), 48U);

  spec.target_tokens = 0;
  EXPECT_THROW(ms::build_budget(stream, spec, v), std::invalid_argument);
  spec.target_tokens = 41;
  EXPECT_THROW(ms::build_budget(stream, spec, v), ms::BudgetError);
}

TEST(Budget, DigestMatchesKnownSha256AndShuffleIsSeeded) {
  const ms::Vocabulary v = ms::build_vocab(single_sample("CCON"));
  ms::BudgetSpec spec;
  spec.target_tokens = 1;
  const ms::BudgetManifest m = ms::build_budget({ "CCO" }, spec, v);
  // sha256("CCO\n")
  EXPECT_EQ(m.source_digest, "5c9aa2a3024d56c903d547798cbd04ff743433ba0950dbfd8e19238e40651172");

  std::vector<std::string> stream;
  for (int i = 0; i < 50; ++i)
    stream.push_back(std::string(1 + i % 7, 'C') + (i % 2 ? "O" : "N"));
  spec.target_tokens = 60;
  spec.shuffle_seed = 7;
  const auto a = ms::build_budget(stream, spec, v);
  const auto b = ms::build_budget(stream, spec, v);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.source_digest, b.source_digest);
  spec.shuffle_seed.reset();
  EXPECT_NE(ms::build_budget(stream, spec, v).selected, a.selected);
}

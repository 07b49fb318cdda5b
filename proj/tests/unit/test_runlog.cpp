//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "molscale/runlog.hpp"

namespace ms = molscale;

namespace {

std::string record(const std::string &id, double P, double B, int epoch, double tokens, double loss,
                   std::optional<int> ck = std::nullopt) {
  nlohmann::json j = { { "schema", 1 },        { "run_id", id },          { "representation", "SMILES" },
                       { "P", P },             { "budget_tokens", B },    { "epoch", epoch },
                       { "tokens_consumed", tokens }, { "val_loss", loss } };
  if (ck)
    j["checkpoint_index"] = *ck;
  return j.dump() + "\n";
}

std::string grid_log() {
  std::string text;
  for (double P: ms::kModelSizes)
    for (double B: ms::kTokenBudgets)
      text += record("r-" + ms::format_number(P) + "-" + ms::format_number(B), P, B, 1, B,
                     ms::predict_loss({ 0.45, 3.2, 14, 0.06, 0.35 }, P, B));
  return text;
}

}  // namespace

TEST(RunLog, WellFormedGrid) {
  const ms::RunLog log = ms::parse_runs(grid_log(), false);
  EXPECT_EQ(log.records.size(), 32U);
  EXPECT_TRUE(log.diagnostics.empty());
  EXPECT_EQ(ms::select_fit_observations(log.observations(), false).size(), 32U);
  const ms::Coverage c = log.coverage(ms::Representation::kSmiles);
  EXPECT_EQ(c.d_min, 1e8);
  EXPECT_EQ(c.d_max, 3e9);
}

TEST(RunLog, InconsistentTokensFlagged) {
  std::string text = record("a", 1e6, 1e8, 2, 1e8, 0.9) + record("b", 1e6, 1e8, 1, 4e7, 0.9, 2)
                     + record("c", 1e6, 1e8, 2, 1.6e8, 0.9, 3);
  const ms::RunLog log = ms::parse_runs(text, false);
  ASSERT_EQ(log.records.size(), 3U);
  EXPECT_TRUE(log.records[0].inconsistent);
  EXPECT_FALSE(log.records[1].inconsistent);
  EXPECT_FALSE(log.records[2].inconsistent);
  EXPECT_TRUE(log.records[0].multi_epoch());
  ASSERT_EQ(log.diagnostics.size(), 1U);
  EXPECT_EQ(log.diagnostics[0].line, 1U);
  EXPECT_EQ(log.diagnostics[0].severity, "warning");
  EXPECT_NE(log.diagnostics[0].message.find("inconsistent"), std::string::npos);
}

TEST(RunLog, DuplicatesRejectedWithBothLines) {
  std::string text = record("a", 1e6, 1e8, 1, 1e8, 0.9) + "\n" + record("b", 1e6, 1e8, 1, 1e8, 0.8)
                     + record("a", 1e6, 1e8, 1, 1e8, 0.7);
  const ms::RunLog log = ms::parse_runs(text, false);
  EXPECT_EQ(log.records.size(), 2U);
  EXPECT_EQ(log.rejected, 1U);
  ASSERT_EQ(log.diagnostics.size(), 1U);
  EXPECT_EQ(log.diagnostics[0].line, 4U);
  EXPECT_NE(log.diagnostics[0].message.find("line 1"), std::string::npos);
}

TEST(RunLog, BadRecordsLocatedAndZeroValidFails) {
  const std::string text = "not json\n" + record("a", 1e6, 1e8, 1, 1e8, 0.9)
                           + R"({"schema":2,"run_id":"x"})" + "\n"
                           + R"({"schema":1,"run_id":"y","representation":"XYZ","P":1,"budget_tokens":1,"epoch":1,"tokens_consumed":1,"val_loss":1})"
                           + "\n" + record("z", -5, 1e8, 1, 1e8, 0.9)
                           + record("w", 1e6, 1e8, 1, 1e8, 0.9, 7);
  const ms::RunLog log = ms::parse_runs(text, false);
  EXPECT_EQ(log.records.size(), 1U);
  ASSERT_EQ(log.diagnostics.size(), 5U);
  const std::size_t lines[] = { 1, 3, 4, 5, 6 };
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(log.diagnostics[i].line, lines[i]);
    EXPECT_EQ(log.diagnostics[i].severity, "error");
  }
  try {
    ms::parse_runs("garbage\n{}\n", false);
    FAIL();
  } catch (const ms::RunLogError &e) {
    EXPECT_EQ(e.diagnostics().size(), 2U);
  }
}

TEST(RunLog, CsvMatchesJsonl) {
  const std::string csv = "run_id,representation,P,budget_tokens,epoch,tokens_consumed,val_loss,"
                          "checkpoint_index,schema,gpu\n"
                          "a,SAFE,1000000,100000000,1,20000000,0.9,1,1,a100\n"
                          "a,SAFE,1000000,100000000,1,100000000,0.8,,1,a100\n"
                          "\"b,c\",SAFE,4000000,100000000,1,100000000,0.7,,1,h100\n"
                          "short,row\n";
  const ms::RunLog log = ms::parse_runs(csv, true);
  ASSERT_EQ(log.records.size(), 3U);
  EXPECT_EQ(log.records[0].checkpoint_index, 1);
  EXPECT_FALSE(log.records[1].checkpoint_index);
  EXPECT_EQ(log.records[2].run_id, "b,c");
  EXPECT_EQ(log.records[2].wall_metadata.at("gpu"), "h100");
  EXPECT_EQ(log.records[0].representation, ms::Representation::kSafe);
  ASSERT_EQ(log.diagnostics.size(), 1U);
  EXPECT_EQ(log.diagnostics[0].line, 5U);
}

TEST(RunLog, SyntheticFixture) {
  const ms::RunLog log = ms::load_runs(ms::testing::fixture_path("synthetic_runs.jsonl"));
  EXPECT_EQ(log.records.size(), 340U);
  EXPECT_EQ(log.rejected, 0U);
  for (const ms::RunLogRecord &r: log.records)
    EXPECT_FALSE(r.inconsistent) << r.line;
  EXPECT_EQ(log.representations().size(), 5U);
  for (ms::Representation r: log.representations()) {
    const auto sel = ms::select_fit_observations(log.observations(r), false);
    EXPECT_EQ(sel.size(), 36U);
    const auto multi = ms::select_fit_observations(log.observations(r), true);
    EXPECT_EQ(multi.size(), 52U);
  }
}

TEST(RunLog, NeverCrashesOnNoise) {
  std::mt19937_64 rng(8);
  const std::string alphabet = "{}[]\":,0123456789.eE-+abcxyz \t\\";
  for (int t = 0; t < 2000; ++t) {
    std::string text;
    const int n = static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i)
      text += (rng() % 20 == 0) ? '\n' : alphabet[rng() % alphabet.size()];
    for (bool csv: { false, true }) {
      try {
        ms::parse_runs(text, csv);
      } catch (const ms::RunLogError &) {
      }
    }
  }
}

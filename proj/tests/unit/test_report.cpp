//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "molscale/report.hpp"

namespace ms = molscale;

namespace {

std::size_t count(const std::string &hay, const std::string &needle) {
  std::size_t n = 0;
  for (std::size_t at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1))
    ++n;
  return n;
}

}  // namespace

TEST(Plot, CsvAndSvgShapes) {
  const ms::PlotSeries one { "solo", { { 1e15, 0.7, true } } };
  const std::string csv = ms::plot_csv({ one });
  EXPECT_EQ(csv, "x,y,series,in_range\n1e+15,0.7,solo,1\n");
  const std::string svg = ms::plot_svg({ one }, { "t", "x", "y", true, {} });
  EXPECT_EQ(count(svg, "<circle"), 1U);
  EXPECT_EQ(count(svg, "<polyline"), 0U);
  EXPECT_EQ(svg.rfind("<svg", 0), 0U);
  EXPECT_EQ(count(svg, "<script"), 0U);

  const ms::PlotSeries mixed { "m", { { 1e14, 1.0, false }, { 1e15, 0.9, true }, { 1e16, 0.8, true },
                                      { 1e17, 0.7, false } } };
  const std::string s2 = ms::plot_svg({ mixed }, { "t", "x", "y", true, std::make_pair(1e15, 1e16) });
  EXPECT_EQ(count(s2, "<polyline"), 3U);
  EXPECT_EQ(count(s2, "stroke-dasharray"), 2U);
  EXPECT_EQ(count(s2, "fill-opacity"), 1U);
  EXPECT_EQ(s2, ms::plot_svg({ mixed }, { "t", "x", "y", true, std::make_pair(1e15, 1e16) }));
}

TEST(Report, FitArtifactRoundTrip) {
  ms::FitResult fit;
  fit.params = { 0.45, 3.2, 14, 0.06, 0.35 };
  fit.diagnostics.n = 32;
  const nlohmann::json j = ms::fit_json(ms::Representation::kSafe, fit, { 1e8, 3e9 }, {});
  const ms::FitArtifact a = ms::fit_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(a.representation, ms::Representation::kSafe);
  EXPECT_EQ(a.params.beta, 0.35);
  EXPECT_EQ(a.coverage.d_max, 3e9);
  EXPECT_THROW(ms::fit_from_json(nlohmann::json::object()), std::invalid_argument);

  ms::FrontierOptions opt;
  opt.verify = true;
  const ms::FrontierOutput fo = ms::frontier_output(a, opt);
  EXPECT_EQ(fo.points.size(), 12U);
  EXPECT_LE(fo.max_verify_error, 1e-4);
  EXPECT_EQ(fo.csv.substr(0, fo.csv.find('\n')), "C,P_opt,D_opt,rho_opt,L_opt,in_range,P_numeric,rel_error");

  opt.verify = false;
  opt.flops_per_token = 6;
  const ms::FrontierOutput f6 = ms::frontier_output(a, opt);
  EXPECT_NEAR(f6.points.front().C, 1e14 / 6, 1e-3);
}

TEST(Report, BundleIsDeterministicAndComplete) {
  const ms::RunLog log = ms::load_runs(ms::testing::fixture_path("synthetic_runs.jsonl"));
  ms::ReportOptions opt;
  opt.fit.threads = 1;
  const ms::ArtifactSet a = ms::build_report(log, opt);
  opt.fit.threads = 3;
  const ms::ArtifactSet b = ms::build_report(log, opt);
  EXPECT_EQ(a.files(), b.files());
  for (const char *f: { "table1.csv", "table2.csv", "rho_slopes.csv", "report.json", "frontiers.svg",
                        "fit_SMILES.json", "frontier_SAFE.csv", "frontier_SAFE.svg",
                        "envelope_FragLink.csv" })
    EXPECT_TRUE(a.files().count(f)) << f;
  EXPECT_EQ(count(a.files().at("table1.csv"), "\n"), 6U);
  EXPECT_EQ(a.files().at("rho_slopes.csv").substr(0, 50),
            "parameter,SMILES,DeepSMILES,SAFE,FragSeq,FragLink\n");
  const nlohmann::json rep = nlohmann::json::parse(a.files().at("report.json"));
  EXPECT_EQ(rep.at("ingest").at("records"), 340);
  EXPECT_FALSE(rep.at("reference_flags").empty());
  for (const auto &[name, e]: rep.at("representations").items()) {
    EXPECT_TRUE(e.contains("fit")) << name;
    EXPECT_NEAR(e.at("rho_fit").at("s").get<double>(), e.at("slope_closed_form").get<double>(), 1e-9);
  }
}

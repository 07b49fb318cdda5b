//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "molscale/frontier.hpp"

namespace ms = molscale;
using ms::testing::load_bundle;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

ms::FitParams unit(double alpha, double beta) { return { 0.5, 1, 1, alpha, beta }; }

ms::FitParams random_params(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> lf(0.2, 1.0), ex(0.01, 0.8), lk(std::log(0.5), std::log(100.0));
  return { lf(rng), std::exp(lk(rng)), std::exp(lk(rng)), ex(rng), ex(rng) };
}

std::vector<double> log_grid(double lo, double hi, int n) { return ms::log_space(lo, hi, n); }

}  // namespace

TEST(Frontier, NumericFixtures) {
  int seen = 0;
  for (const auto &e: load_bundle("scaling_fixtures.json")) {
    if (e.at("kind") != "frontier")
      continue;
    const auto &in = e.at("input");
    const ms::FitParams p { 0, in.at("k_P"), in.at("k_D"), in.at("alpha"), in.at("beta") };
    const double want = e.at("expected");
    EXPECT_LE(rel(ms::p_opt(p, in.at("C")), want), 1e-10) << in.dump();
    EXPECT_LE(rel(ms::numeric_frontier(p, in.at("C")), want), 1e-4) << in.dump();
    ++seen;
  }
  EXPECT_EQ(seen, 63);
}

TEST(Frontier, ClosedFormExamples) {
  const ms::FitParams sym { 0.5, 2, 2, 0.3, 0.3 };
  EXPECT_LE(rel(ms::p_opt(sym, 1e16), 1e8), 1e-12);
  EXPECT_LE(rel(ms::d_opt(sym, 1e16), 1e8), 1e-12);
  EXPECT_LE(rel(ms::numeric_frontier(sym, 1e16), 1e8), 1e-6);
  EXPECT_LE(rel(ms::rho_opt(sym, 1e12), ms::rho_opt(sym, 1e20)), 1e-12);

  const ms::FitParams deep = unit(0.0588, 0.3624);
  EXPECT_LE(rel(ms::p_opt(deep, 1e17) / ms::p_opt(deep, 1e16), std::pow(10.0, 0.3624 / 0.4212)),
            1e-12);
  EXPECT_LE(rel(ms::p_opt(deep, 1e16), ms::numeric_frontier(deep, 1e16)), 1e-3);

  EXPECT_THROW(ms::p_opt({ 0.5, 1, 1, 0, 0.3 }, 1e16), std::invalid_argument);
  EXPECT_THROW(ms::p_opt(deep, 0), std::invalid_argument);
  EXPECT_THROW(ms::rho_opt({ 0.5, -1, 1, 0.1, 0.3 }, 1e16), std::invalid_argument);
}

TEST(Frontier, ConstraintAndRatioIdentities) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lc(std::log(1e10), std::log(1e22));
  for (int i = 0; i < 100; ++i) {
    const ms::FitParams p = random_params(rng);
    const double C = std::exp(lc(rng));
    const ms::FrontierPoint f = ms::frontier_point(p, C);
    EXPECT_LE(rel(f.P_opt * f.D_opt, C), 1e-12);
    EXPECT_LE(rel(f.rho_opt, f.D_opt / f.P_opt), 1e-12);
  }
}

TEST(Frontier, SlopesFromReportedExponents) {
  auto slope = [](double a, double b) {
    const ms::FitParams p = unit(a, b);
    return std::log10(ms::rho_opt(p, 1e17) / ms::rho_opt(p, 1e16));
  };
  EXPECT_NEAR(slope(0.0588, 0.3624), -0.7208, 1e-4);
  EXPECT_NEAR(slope(0.0171, 0.4299), -0.9235, 1e-4);
  EXPECT_NEAR(slope(0.0200, 0.2001), -0.8183, 1e-4);
  EXPECT_NEAR(ms::rho_slope(0.0588, 0.3624), slope(0.0588, 0.3624), 1e-12);
}

TEST(Frontier, Stationarity) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const ms::FitParams p = random_params(rng);
    const double C = 1e16;
    const double P = ms::p_opt(p, C);
    const double away = std::abs(ms::isoflop_derivative(p, C, 10 * P));
    EXPECT_LE(std::abs(ms::isoflop_derivative(p, C, P)), 1e-8 * away);
  }
}

TEST(Frontier, LossAtOptimum) {
  EXPECT_EQ(ms::l_opt({ 0.7, 0, 0, 0.2, 0.3 }, 1e15), 0.7);
  EXPECT_EQ(ms::l_opt({ 0.7, 0, 0, 0.2, 0.3 }, 1e19), 0.7);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const ms::FitParams p = random_params(rng);
    double prev = ms::l_opt(p, 1e12);
    for (double C = 1e13; C <= 1e22; C *= 10) {
      const double cur = ms::l_opt(p, C);
      EXPECT_LT(cur, prev);
      EXPECT_GT(cur, p.L_inf);
      prev = cur;
    }
  }
}

TEST(Frontier, NumericAgreesWithClosedForm) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lc(std::log(1e14), std::log(1.95e18));
  for (int i = 0; i < 1000; ++i) {
    const ms::FitParams p = random_params(rng);
    const double C = std::exp(lc(rng));
    EXPECT_LE(rel(ms::numeric_frontier(p, C), ms::p_opt(p, C)), 1e-4);
  }
  const ms::FitParams extreme = unit(0.01, 0.8);
  for (double C: log_grid(1e14, 1.95e18, 12))
    EXPECT_LE(rel(ms::numeric_frontier(extreme, C), ms::p_opt(extreme, C)), 1e-3);
}

TEST(Frontier, BracketFailureReportsRange) {
  // P_opt far below 1 needs a wider window, which the scan finds
  const ms::FitParams tiny { 0, 1e-40, 1, 1, 1 };
  EXPECT_LE(rel(ms::numeric_frontier(tiny, 1.0), ms::p_opt(tiny, 1.0)), 1e-6);
  // C^-beta overflows, so the curve is not finite anywhere in the window
  const ms::FitParams steep { 0, 1, 1, 5, 5 };
  try {
    ms::numeric_frontier(steep, 1e-300);
    FAIL();
  } catch (const ms::BracketError &e) {
    EXPECT_EQ(e.lo(), -30.0);
    EXPECT_EQ(e.hi(), 30.0);
  }
}

TEST(IsoFlop, ShapeAndConsistency) {
  const ms::FitParams p { 0.45, 3.2, 14, 0.0588, 0.3624 };
  const double C = 1e16;
  const std::vector<double> grid = log_grid(1e3, 1e15, 241);
  const auto curve = ms::isoflop_curve(p, C, grid);
  ASSERT_EQ(curve.size(), grid.size());
  const auto arg = std::min_element(curve.begin(), curve.end(),
                                    [](const auto &a, const auto &b) { return a.loss < b.loss; });
  const double step = std::log(grid[1] / grid[0]);
  EXPECT_LE(std::abs(std::log(arg->P / ms::p_opt(p, C))), step);

  int sign_changes = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    sign_changes += (ms::isoflop_derivative(p, C, grid[i - 1]) < 0)
                    != (ms::isoflop_derivative(p, C, grid[i]) < 0);
  EXPECT_EQ(sign_changes, 1);

  const auto bigger = ms::isoflop_curve(p, 10 * C, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LT(bigger[i].loss, curve[i].loss);
    EXPECT_EQ(curve[i].loss, ms::predict_loss(p, grid[i], C / grid[i]));
  }

  const auto annotated = ms::isoflop_curve(p, C, { 1e6, 1e8, 1e10 }, { 1e8, 3e9 });
  EXPECT_FALSE(annotated[0].in_range);  // D = 1e10
  EXPECT_TRUE(annotated[1].in_range);
  EXPECT_FALSE(annotated[2].in_range);
  EXPECT_THROW(ms::isoflop_curve(p, C, { 0.0 }), std::invalid_argument);
}

TEST(IsoLoss, RoundTripAndFrontierContact) {
  const ms::FitParams p { 0.45, 3.2, 14, 0.0588, 0.3624 };
  EXPECT_THROW(ms::isoloss_curve(p, 0.45, { 1e6 }), ms::InfeasibleTarget);
  EXPECT_THROW(ms::isoloss_curve(p, 0.3, { 1e6 }), ms::InfeasibleTarget);

  const double target = 1.2;
  const std::vector<double> grid = log_grid(1e2, 1e14, 4001);
  const ms::IsoLossCurve c = ms::isoloss_curve(p, target, grid);
  ASSERT_FALSE(c.points.empty());
  ASSERT_FALSE(c.omitted.empty());
  EXPECT_EQ(c.points.size() + c.omitted.size(), grid.size());
  for (double P: c.omitted)
    EXPECT_LE(P, c.p_threshold);
  for (const ms::IsoLossPoint &pt: c.points) {
    EXPECT_GT(pt.P, c.p_threshold);
    EXPECT_NEAR(ms::predict_loss(p, pt.P, pt.C / pt.P), target, 1e-9);
  }
  const auto lowest = std::min_element(c.points.begin(), c.points.end(),
                                       [](const auto &a, const auto &b) { return a.C < b.C; });
  EXPECT_LE(rel(lowest->P, ms::p_opt(p, lowest->C)), 1e-2);
  EXPECT_NEAR(ms::l_opt(p, lowest->C), target, 1e-6);
}

TEST(RhoFit, Examples) {
  const ms::RhoFit hand = ms::fit_rho_powerlaw({ { 10, 100 }, { 1000, 1 } });
  EXPECT_NEAR(hand.s, -1, 1e-12);
  EXPECT_NEAR(hand.b, 3, 1e-12);
  EXPECT_NEAR(hand.a, 1000, 1e-9);
  EXPECT_NEAR(hand.factor, 0.1, 1e-12);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const ms::FitParams p = random_params(rng);
    const ms::RhoFit r = ms::fit_rho_frontier(ms::frontier(p, ms::log_space(1e14, 1.95e18, 12)));
    EXPECT_NEAR(r.s, ms::rho_slope(p.alpha, p.beta), 1e-9);
    EXPECT_EQ(r.s < 0, p.beta > p.alpha);
    EXPECT_GT(r.a, 0);
  }
  EXPECT_THROW(ms::fit_rho_powerlaw({ { 10, 1 }, { 10, 2 } }), std::invalid_argument);
  EXPECT_THROW(ms::fit_rho_powerlaw({ { 10, 1 }, { 100, 0 } }), std::invalid_argument);
}

TEST(AllocationTrend, SignsFollowExponents) {
  const ms::AllocationTrend t = ms::allocation_trend({ 0.45, 3.2, 14, 0.0588, 0.3624 });
  EXPECT_EQ(t.c_min, 1e14);
  EXPECT_EQ(t.c_max, 1.95e18);
  EXPECT_NEAR(t.corr_log_rho, -1.0, 1e-12);
  EXPECT_GT(t.rho_at_min, t.rho_at_max);
  EXPECT_LT(t.corr_loss, 0);
  EXPECT_GT(t.loss_at_min, t.loss_at_max);
}

TEST(Envelope, Examples) {
  const ms::Trajectory a { "a", { { 1e10, 3.0 }, { 1e12, 2.0 }, { 1e14, 1.0 } } };
  const ms::Trajectory b { "b", { { 1e10, 4.0 }, { 1e12, 3.0 }, { 1e14, 2.0 } } };
  const auto single = ms::min_loss_envelope({ a }, 3);
  ASSERT_EQ(single.size(), 3U);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(single[i].loss, a.points[i].second, 1e-12);
    EXPECT_EQ(single[i].run_id, "a");
  }
  for (const auto &e: ms::min_loss_envelope({ b, a }, 50))
    EXPECT_EQ(e.run_id, "a");

  // linear in ln C: x crosses y at C = 1e12
  const ms::Trajectory x { "x", { { 1e10, 2.0 }, { 1e14, 1.0 } } };
  const ms::Trajectory y { "y", { { 1e10, 2.5 }, { 1e14, 0.5 } } };
  const auto env = ms::min_loss_envelope({ x, y }, 41);
  const double step = std::log(env[1].C / env[0].C);
  std::size_t k = 0;
  while (k < env.size() && env[k].run_id == "x")
    ++k;
  ASSERT_LT(k, env.size());
  EXPECT_LE(std::abs(std::log(env[k].C / 1e12)), step);
  for (std::size_t i = k; i < env.size(); ++i)
    EXPECT_EQ(env[i].run_id, "y");

  const ms::Trajectory bumpy { "z", { { 1e10, 2.0 }, { 1e11, 1.0 }, { 1e12, 1.5 }, { 1e13, 0.8 } } };
  const auto raw = ms::min_loss_envelope({ bumpy }, 4);
  const auto iso = ms::min_loss_envelope({ bumpy }, 4, true);
  EXPECT_LT(raw[1].loss, raw[2].loss);
  for (std::size_t i = 1; i < iso.size(); ++i)
    EXPECT_LE(iso[i].loss, iso[i - 1].loss);
  EXPECT_THROW(ms::min_loss_envelope({}), std::invalid_argument);
}

TEST(ReferenceFlags, InconsistenciesAreRaised) {
  for (const ms::ReferenceFigures &f: ms::kReferenceFigures) {
    const auto flags = ms::reference_flags(f.representation, f.alpha, f.beta);
    auto has = [&](const char *kind) {
      return std::any_of(flags.begin(), flags.end(), [&](const auto &x) { return x.kind == kind; });
    };
    EXPECT_TRUE(has("slope_mismatch")) << ms::to_string(f.representation);
    EXPECT_EQ(has("trend_sign_mismatch"), f.representation == ms::Representation::kSafe);
    EXPECT_EQ(has("reference_unavailable"), f.representation == ms::Representation::kFragLink);
  }
  const auto smiles = ms::reference_flags(ms::Representation::kSmiles, 0.0171, 0.4299);
  EXPECT_NEAR(smiles.front().computed, -0.9235, 1e-4);
  EXPECT_EQ(smiles.front().reference, -0.2841);
  // exponents consistent with the reported SMILES slope raise no slope flag
  EXPECT_TRUE(ms::reference_flags(ms::Representation::kSmiles, 0.2795, 0.5015).empty());
}

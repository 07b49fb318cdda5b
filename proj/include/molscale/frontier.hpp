//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "molscale/grid.hpp"
#include "molscale/representation.hpp"
#include "molscale/scaling_fit.hpp"

namespace molscale {

// Compute is C = P * D; any per-token FLOP multiplier is applied by callers.

struct FrontierPoint {
  double C = 0;
  double P_opt = 0;
  double D_opt = 0;
  double rho_opt = 0;  // D_opt / P_opt
  double L_opt = 0;
};

/// Single-epoch token span of the training grid; points whose D falls
/// outside it are extrapolated.
struct Coverage {
  double d_min = 0;
  double d_max = std::numeric_limits<double>::infinity();

  bool contains(double D) const { return D >= d_min && D <= d_max; }
};

class InfeasibleTarget: public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class BracketError: public std::runtime_error {
public:
  BracketError(double lo, double hi, const std::string &msg)
      : std::runtime_error(msg), lo_(lo), hi_(hi) { }

  // scanned range in ln P
  double lo() const { return lo_; }
  double hi() const { return hi_; }

private:
  double lo_, hi_;
};

namespace detail {

inline void check_frontier_args(const FitParams &p, double C) {
  if (!(p.alpha > 0) || !(p.beta > 0) || !(p.k_P > 0) || !(p.k_D > 0))
    throw std::invalid_argument("frontier needs alpha, beta, k_P, k_D > 0");
  if (!(C > 0) || !std::isfinite(C))
    throw std::invalid_argument("compute must be positive and finite");
}

inline double log_p_opt(const FitParams &p, double C) {
  return (std::log(p.alpha * p.k_P / (p.beta * p.k_D)) + p.beta * std::log(C))
         / (p.alpha + p.beta);
}

}  // namespace detail

/// P_opt = (alpha k_P / beta k_D)^(1/(alpha+beta)) C^(beta/(alpha+beta))
inline double p_opt(const FitParams &p, double C) {
  detail::check_frontier_args(p, C);
  return std::exp(detail::log_p_opt(p, C));
}

inline double d_opt(const FitParams &p, double C) { return C / p_opt(p, C); }

/// rho = (beta k_D / alpha k_P)^(2/(alpha+beta)) C^((alpha-beta)/(alpha+beta))
inline double rho_opt(const FitParams &p, double C) {
  detail::check_frontier_args(p, C);
  return std::exp((2 * std::log(p.beta * p.k_D / (p.alpha * p.k_P))
                   + (p.alpha - p.beta) * std::log(C))
                  / (p.alpha + p.beta));
}

/// Loss at the optimum. With both coefficients zero the loss is L_inf.
inline double l_opt(const FitParams &p, double C) {
  if (p.k_P == 0 && p.k_D == 0) {
    if (!(C > 0))
      throw std::invalid_argument("compute must be positive");
    return p.L_inf;
  }
  const double P = p_opt(p, C);
  return predict_loss(p, P, C / P);
}

/// d ln rho_opt / d ln C
inline double rho_slope(double alpha, double beta) { return (alpha - beta) / (alpha + beta); }

inline FrontierPoint frontier_point(const FitParams &p, double C) {
  FrontierPoint f;
  f.C = C;
  f.P_opt = p_opt(p, C);
  f.D_opt = C / f.P_opt;
  f.rho_opt = rho_opt(p, C);
  f.L_opt = predict_loss(p, f.P_opt, f.D_opt);
  return f;
}

inline std::vector<FrontierPoint> frontier(const FitParams &p, const std::vector<double> &Cs) {
  std::vector<FrontierPoint> out;
  out.reserve(Cs.size());
  for (double C: Cs)
    out.push_back(frontier_point(p, C));
  return out;
}

/// 1-D golden-section minimization of L(P; C) over ln P. A coarse scan
/// starting at [-30, ln C + 30] brackets the minimum first; the window
/// doubles while the minimum sits on its edge. Resolution is limited by the
/// flatness of the curve to about sqrt(machine epsilon) in ln P.
inline double numeric_frontier(const FitParams &p, double C) {
  detail::check_frontier_args(p, C);
  const double lnC = std::log(C);
  // L_inf is constant along the curve and only costs precision.
  auto f = [&](double x) {
    return p.k_P * std::exp(-p.alpha * x) + p.k_D * std::exp(-p.beta * (lnC - x));
  };
  constexpr int kScan = 400;
  double lo = -30.0, hi = std::max(lnC, 0.0) + 30.0;
  int best = 0;
  for (int widen = 0;; ++widen) {
    best = 0;
    double best_f = f(lo);
    for (int i = 1; i <= kScan; ++i) {
      const double v = f(lo + (hi - lo) * i / kScan);
      if (v < best_f) {
        best_f = v;
        best = i;
      }
    }
    const bool edge = best == 0 || best == kScan;
    if (!edge)
      break;
    const double width = hi - lo;
    const double nlo = best == 0 ? lo - width : lo, nhi = best == kScan ? hi + width : hi;
    if (widen == 8 || !std::isfinite(f(best == 0 ? nlo : nhi)))
      throw BracketError(lo, hi,
                         "minimum not bracketed in ln P range [" + std::to_string(lo) + ", "
                             + std::to_string(hi) + "]");
    lo = nlo;
    hi = nhi;
  }
  double a = lo + (hi - lo) * (best - 1) / kScan;
  double b = lo + (hi - lo) * (best + 1) / kScan;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-10) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return std::exp((a + b) / 2);
}

/// dL/dP along the constraint P D = C.
inline double isoflop_derivative(const FitParams &p, double C, double P) {
  return -p.alpha * p.k_P * std::pow(P, -p.alpha - 1)
         + p.beta * p.k_D * std::pow(C, -p.beta) * std::pow(P, p.beta - 1);
}

struct IsoFlopPoint {
  double P = 0;
  double D = 0;
  double loss = 0;
  bool in_range = true;
};

inline std::vector<IsoFlopPoint> isoflop_curve(const FitParams &p, double C,
                                               const std::vector<double> &P_grid,
                                               const Coverage &coverage = {}) {
  if (!(C > 0))
    throw std::invalid_argument("compute must be positive");
  std::vector<IsoFlopPoint> out;
  out.reserve(P_grid.size());
  for (double P: P_grid) {
    if (!(P > 0))
      throw std::invalid_argument("model sizes must be positive");
    const double D = C / P;
    out.push_back({ P, D, predict_loss(p, P, D), coverage.contains(D) });
  }
  return out;
}

struct IsoLossPoint {
  double C = 0;
  double P = 0;
  double D = 0;
  bool in_range = true;
};

struct IsoLossCurve {
  double target = 0;
  double p_threshold = 0;  // P must exceed this for the target to be reachable
  std::vector<IsoLossPoint> points;
  std::vector<double> omitted;  // grid P values at or below the threshold
};

/// Level set L(P, D) = target mapped to (C, P):
///   D(P) = (k_D / (target - L_inf - k_P P^-alpha))^(1/beta),  C = P D
inline IsoLossCurve isoloss_curve(const FitParams &p, double target,
                                  const std::vector<double> &P_grid,
                                  const Coverage &coverage = {}) {
  if (!(target > p.L_inf))
    throw InfeasibleTarget("target loss " + std::to_string(target)
                           + " is not above the irreducible loss " + std::to_string(p.L_inf));
  if (!(p.alpha > 0) || !(p.beta > 0) || !(p.k_P >= 0) || !(p.k_D > 0))
    throw std::invalid_argument("isoloss needs alpha, beta, k_D > 0 and k_P >= 0");
  IsoLossCurve c;
  c.target = target;
  const double gap = target - p.L_inf;
  c.p_threshold = p.k_P > 0 ? std::pow(p.k_P / gap, 1.0 / p.alpha) : 0.0;
  for (double P: P_grid) {
    if (!(P > 0))
      throw std::invalid_argument("model sizes must be positive");
    const double room = gap - p.k_P * std::pow(P, -p.alpha);
    if (!(room > 0)) {
      c.omitted.push_back(P);
      continue;
    }
    const double D = std::pow(p.k_D / room, 1.0 / p.beta);
    c.points.push_back({ P * D, P, D, coverage.contains(D) });
  }
  return c;
}

struct RhoFit {
  double s = 0;       // slope of log10 rho against log10 C
  double b = 0;       // intercept, log10 units
  double a = 0;       // 10^b
  double factor = 0;  // 10^s: change in rho per decade of compute
};

/// Ordinary least squares of log10 rho on log10 C.
inline RhoFit fit_rho_powerlaw(const std::vector<std::pair<double, double>> &points) {
  std::set<double> xs;
  for (const auto &[C, rho]: points) {
    if (!(C > 0) || !(rho > 0))
      throw std::invalid_argument("rho fit needs positive C and rho");
    xs.insert(C);
  }
  if (xs.size() < 2)
    throw std::invalid_argument("rho fit needs at least two distinct compute values");
  const double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto &[C, rho]: points) {
    mx += std::log10(C) / n;
    my += std::log10(rho) / n;
  }
  double sxy = 0, sxx = 0;
  for (const auto &[C, rho]: points) {
    const double dx = std::log10(C) - mx;
    sxy += dx * (std::log10(rho) - my);
    sxx += dx * dx;
  }
  RhoFit r;
  r.s = sxy / sxx;
  r.b = my - r.s * mx;
  r.a = std::pow(10.0, r.b);
  r.factor = std::pow(10.0, r.s);
  return r;
}

inline RhoFit fit_rho_frontier(const std::vector<FrontierPoint> &points) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size());
  for (const FrontierPoint &f: points)
    xy.emplace_back(f.C, f.rho_opt);
  return fit_rho_powerlaw(xy);
}

/// Pearson correlation; 0 when either side is constant.
inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    return 0;
  return sxy / std::sqrt(sxx * syy);
}

/// Endpoints and trends of the frontier over a compute window.
struct AllocationTrend {
  double c_min = 0;
  double c_max = 0;
  double rho_at_min = 0;
  double rho_at_max = 0;
  double corr_log_rho = 0;  // corr(log C, log rho_opt)
  double loss_at_min = 0;
  double loss_at_max = 0;
  double corr_loss = 0;  // corr(log C, L_opt)
};

inline AllocationTrend allocation_trend(const FitParams &p, double c_min = kReportCMin,
                                        double c_max = kReportCMax, int levels = kReportLevels) {
  if (levels < 2 || !(c_max > c_min))
    throw std::invalid_argument("trend needs two or more levels over an increasing window");
  const std::vector<FrontierPoint> pts = frontier(p, log_space(c_min, c_max, levels));
  std::vector<double> lc, lr, lo;
  for (const FrontierPoint &f: pts) {
    lc.push_back(std::log10(f.C));
    lr.push_back(std::log10(f.rho_opt));
    lo.push_back(f.L_opt);
  }
  return { c_min,           c_max,           pts.front().rho_opt, pts.back().rho_opt,
           pearson(lc, lr), pts.front().L_opt, pts.back().L_opt,  pearson(lc, lo) };
}

struct Trajectory {
  std::string run_id;
  std::vector<std::pair<double, double>> points;  // (compute, loss)
};

struct EnvelopePoint {
  double C = 0;
  double loss = 0;
  std::string run_id;  // contributor of the raw minimum
};

namespace detail {

// Loss at compute C, linear in (ln C, loss); nullopt outside the run's span.
inline std::optional<double> interpolate(const std::vector<std::pair<double, double>> &pts,
                                         double C) {
  if (pts.empty() || C < pts.front().first || C > pts.back().first)
    return std::nullopt;
  auto it = std::lower_bound(pts.begin(), pts.end(), C,
                             [](const auto &p, double c) { return p.first < c; });
  if (it->first == C || it == pts.begin())
    return it->second;
  const auto &[c0, l0] = *(it - 1);
  const auto &[c1, l1] = *it;
  const double t = (std::log(C) - std::log(c0)) / (std::log(c1) - std::log(c0));
  return l0 + t * (l1 - l0);
}

// Pool-adjacent-violators fit of a non-increasing sequence.
inline std::vector<double> isotonic_decreasing(const std::vector<double> &y) {
  std::vector<std::pair<double, int>> blocks;  // (mean, size)
  for (double v: y) {
    blocks.emplace_back(v, 1);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].first < blocks.back().first) {
      auto [m2, n2] = blocks.back();
      blocks.pop_back();
      auto &[m1, n1] = blocks.back();
      m1 = (m1 * n1 + m2 * n2) / (n1 + n2);
      n1 += n2;
    }
  }
  std::vector<double> out;
  for (const auto &[m, n]: blocks)
    out.insert(out.end(), n, m);
  return out;
}

}  // namespace detail

/// Lower envelope of loss-vs-compute trajectories on a log-spaced grid over
/// the union of their spans. Runs contribute only inside their own span.
inline std::vector<EnvelopePoint> min_loss_envelope(std::vector<Trajectory> runs, int levels = 200,
                                                    bool isotonic = false) {
  if (runs.empty())
    throw std::invalid_argument("envelope needs at least one trajectory");
  if (levels < 2)
    throw std::invalid_argument("envelope needs at least two grid levels");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (Trajectory &t: runs) {
    std::erase_if(t.points, [](const auto &p) { return !(p.first > 0) || !std::isfinite(p.second); });
    std::stable_sort(t.points.begin(), t.points.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });
    if (!t.points.empty()) {
      lo = std::min(lo, t.points.front().first);
      hi = std::max(hi, t.points.back().first);
    }
  }
  if (!(hi > 0))
    throw std::invalid_argument("trajectories hold no positive-compute points");

  std::vector<EnvelopePoint> out;
  for (double C: hi > lo ? log_space(lo, hi, levels) : std::vector<double> { lo }) {
    std::optional<EnvelopePoint> best;
    for (const Trajectory &t: runs) {
      const std::optional<double> l = detail::interpolate(t.points, C);
      if (l && (!best || *l < best->loss))
        best = EnvelopePoint { C, *l, t.run_id };
    }
    if (best)
      out.push_back(*best);
  }
  if (isotonic) {
    std::vector<double> y;
    for (const EnvelopePoint &e: out)
      y.push_back(e.loss);
    y = detail::isotonic_decreasing(y);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i].loss = y[i];
  }
  return out;
}

// Reported figures for the five representations, kept for cross-checking.
// b for FragLink was printed as "512142" and is treated as unavailable.
struct ReferenceFigures {
  Representation representation;
  double alpha;
  double beta;
  double s;                  // reported log-log slope of rho_opt
  std::optional<double> b;   // reported intercept
  double rho_corr;           // reported corr(log C, log rho_opt)
};

inline constexpr std::array<ReferenceFigures, 5> kReferenceFigures = { {
    { Representation::kDeepSmiles, 0.0588, 0.3624, -0.2447, 5.1786, -1.0 },
    { Representation::kFragLink, 0.0282, 0.5214, -0.2417, std::nullopt, -1.0 },
    { Representation::kFragSeq, 0.0189, 0.5207, -0.1724, 4.1096, -1.0 },
    { Representation::kSafe, 0.0200, 0.2001, -0.2128, 4.5852, +1.0 },
    { Representation::kSmiles, 0.0171, 0.4299, -0.2841, 5.8078, -1.0 },
} };

inline const ReferenceFigures &reference_figures(Representation r) {
  for (const ReferenceFigures &f: kReferenceFigures)
    if (f.representation == r)
      return f;
  throw std::out_of_range("no reference figures");
}

struct ConsistencyFlag {
  Representation representation;
  std::string kind;  // "slope_mismatch", "trend_sign_mismatch", "reference_unavailable"
  double computed = 0;
  double reference = 0;
  std::string message;
};

inline constexpr double kSlopeFlagTolerance = 0.01;

/// Compares the slope implied by (alpha, beta) with the reported slope and
/// trend sign. The closed form fixes the slope at (alpha-beta)/(alpha+beta).
inline std::vector<ConsistencyFlag> reference_flags(Representation r, double alpha, double beta) {
  const ReferenceFigures &ref = reference_figures(r);
  const double s = rho_slope(alpha, beta);
  const std::string name(to_string(r));
  std::vector<ConsistencyFlag> out;
  if (std::abs(s - ref.s) > kSlopeFlagTolerance)
    out.push_back({ r, "slope_mismatch", s, ref.s,
                    name + ": closed-form slope " + std::to_string(s)
                        + " disagrees with reported slope " + std::to_string(ref.s) });
  if ((s > 0) != (ref.rho_corr > 0))
    out.push_back({ r, "trend_sign_mismatch", s, ref.rho_corr,
                    name + ": rho_opt trend sign follows sign(alpha - beta), reported correlation is "
                        + std::to_string(ref.rho_corr) });
  if (!ref.b)
    out.push_back({ r, "reference_unavailable", 0, 0,
                    name + ": reported intercept is malformed and not compared" });
  return out;
}

}  // namespace molscale

//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "molscale/representation.hpp"

namespace molscale {

/// L(P, D) = L_inf + k_P P^-alpha + k_D D^-beta
struct FitParams {
  double L_inf = 0;
  double k_P = 0;
  double k_D = 0;
  double alpha = 0;
  double beta = 0;
};

inline double predict_loss(const FitParams &p, double P, double D) {
  if (!(P > 0) || !(D > 0))
    throw std::invalid_argument("P and D must be positive");
  return p.L_inf + p.k_P * std::pow(P, -p.alpha) + p.k_D * std::pow(D, -p.beta);
}

struct RunObservation {
  Representation representation = Representation::kSmiles;
  double P = 0;
  double D = 0;
  double budget = 0;
  int epoch = 1;
  double loss = 0;
  std::string source_run_id;
  std::optional<int> checkpoint;

  bool multi_epoch() const { return epoch > 1; }
};

struct FitDiagnostics {
  int n = 0;
  double mae = 0;
  double rmse = 0;
  std::vector<double> residuals;  // observed - predicted
  bool converged = false;
  int restarts_used = 0;
  double objective = 0;  // sum of squared residuals
};

struct FitConfig {
  int restarts = 64;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  int max_iter = 500;
  bool include_multi_epoch = false;
  int threads = 0;  // 0 = hardware concurrency
};

struct FitResult {
  FitParams params;
  FitDiagnostics diagnostics;
};

enum class FitErrorKind {
  kInsufficientData,
  kRankDeficient,
  kNoScalingSignal,
  kNonConvergence,
};

class FitError: public std::runtime_error {
public:
  FitError(FitErrorKind kind, const std::string &msg): std::runtime_error(msg), kind_(kind) { }

  FitErrorKind kind() const { return kind_; }

private:
  FitErrorKind kind_;
};

/// Mean absolute and root-mean-square residual over `obs`.
inline std::pair<double, double> fit_errors(const FitParams &p,
                                            const std::vector<RunObservation> &obs) {
  if (obs.empty())
    throw std::invalid_argument("fit_errors needs at least one observation");
  double abs_sum = 0, sq_sum = 0;
  for (const RunObservation &o: obs) {
    const double r = o.loss - predict_loss(p, o.P, o.D);
    abs_sum += std::abs(r);
    sq_sum += r * r;
  }
  const double n = static_cast<double>(obs.size());
  return { abs_sum / n, std::sqrt(sq_sum / n) };
}

/// Observations used for fitting: the end-of-epoch value of each run
/// (records without a checkpoint, or checkpoint 5 when the run has no
/// such record), epoch 1 only unless multi-epoch data is requested.
inline std::vector<RunObservation> select_fit_observations(const std::vector<RunObservation> &obs,
                                                           bool include_multi_epoch) {
  std::map<std::pair<std::string, int>, std::size_t> chosen;
  std::vector<RunObservation> out;
  for (const RunObservation &o: obs) {
    if (!include_multi_epoch && o.epoch != 1)
      continue;
    if (o.checkpoint && *o.checkpoint != 5)
      continue;
    const auto key = std::make_pair(o.source_run_id, o.epoch);
    auto it = chosen.find(key);
    if (it == chosen.end()) {
      chosen.emplace(key, out.size());
      out.push_back(o);
    } else if (!o.checkpoint && out[it->second].checkpoint) {
      out[it->second] = o;
    }
  }
  return out;
}

namespace detail {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// theta = (L_inf, log c_P, log c_D, log alpha, log beta) with the power
// terms anchored at the geometric centre of the data:
//   L = L_inf + c_P exp(-alpha (ln P - mP)) + c_D exp(-beta (ln D - mD))
// so k_P = c_P exp(alpha mP). L_inf is projected onto [0, min loss].
struct Problem {
  std::vector<double> xp, xd, y;
  double mP = 0, mD = 0, floor = 0;

  FitParams params(const Vec5 &t) const {
    const double alpha = std::exp(t[3]), beta = std::exp(t[4]);
    return { t[0], std::exp(t[1] + alpha * mP), std::exp(t[2] + beta * mD), alpha, beta };
  }

  void clamp(Vec5 &t) const {
    t[0] = std::clamp(t[0], 0.0, floor);
    t[1] = std::clamp(t[1], -40.0, 40.0);
    t[2] = std::clamp(t[2], -40.0, 40.0);
    t[3] = std::clamp(t[3], std::log(1e-5), std::log(5.0));
    t[4] = std::clamp(t[4], std::log(1e-5), std::log(5.0));
  }

  double objective(const Vec5 &t) const {
    const double cp = std::exp(t[1]), cd = std::exp(t[2]);
    const double alpha = std::exp(t[3]), beta = std::exp(t[4]);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = t[0] + cp * std::exp(-alpha * xp[i]) + cd * std::exp(-beta * xd[i]) - y[i];
      s += r * r;
    }
    return s;
  }

  // Gauss-Newton pieces: J^T J and J^T r, plus the objective.
  double linearize(const Vec5 &t, Mat5 &jtj, Vec5 &jtr) const {
    const double cp = std::exp(t[1]), cd = std::exp(t[2]);
    const double alpha = std::exp(t[3]), beta = std::exp(t[4]);
    jtj.setZero();
    jtr.setZero();
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double tp = cp * std::exp(-alpha * xp[i]);
      const double td = cd * std::exp(-beta * xd[i]);
      const double r = t[0] + tp + td - y[i];
      Vec5 j;
      j << 1.0, tp, td, -tp * alpha * xp[i], -td * beta * xd[i];
      jtj.noalias() += j * j.transpose();
      jtr.noalias() += j * r;
      s += r * r;
    }
    return s;
  }
};

struct LmOutcome {
  Vec5 theta;
  double objective;
  bool converged;
};

inline LmOutcome levenberg_marquardt(const Problem &pb, Vec5 theta, const FitConfig &cfg) {
  pb.clamp(theta);
  Mat5 jtj;
  Vec5 jtr;
  double f = pb.linearize(theta, jtj, jtr);
  double lambda = 1e-3;
  double nu = 2;
  int small_steps = 0;

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (!std::isfinite(f))
      return { theta, f, false };
    if (f <= 1e-30 || jtr.lpNorm<Eigen::Infinity>() <= 1e-18)
      return { theta, f, true };

    Mat5 a = jtj;
    for (int k = 0; k < 5; ++k)
      a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
    const Vec5 step = a.ldlt().solve(-jtr);
    Vec5 next = theta + step;
    pb.clamp(next);
    const double fn = pb.objective(next);
    const Vec5 actual = next - theta;
    const double predicted = -(actual.dot(jtr) + 0.5 * actual.dot(jtj * actual));

    if (std::isfinite(fn) && fn < f) {
      const double rho = predicted > 0 ? (f - fn) / predicted : 0.5;
      const double rel = (f - fn) / f;
      theta = next;
      f = pb.linearize(theta, jtj, jtr);
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2 * rho - 1, 3));
      nu = 2;
      small_steps = rel < cfg.tol ? small_steps + 1 : 0;
      if (small_steps >= 3)
        return { theta, f, true };
    } else {
      lambda *= nu;
      nu *= 2;
      if (lambda > 1e16) {
        // no descent direction left at this scale
        return { theta, f, actual.norm() <= 1e-10 * (1 + theta.norm()) };
      }
    }
  }
  return { theta, f, false };
}

// Variable projection seeds: for each (alpha, beta) on a log grid the
// linear coefficients come from least squares; feasible points (positive
// terms, L_inf in range) are ranked by residual and the best `count` kept.
inline std::vector<Vec5> varpro_seeds(const Problem &pb, int count) {
  constexpr int kSteps = 32;
  const double lo = std::log(0.005), hi = std::log(1.5);
  const int n = static_cast<int>(pb.y.size());
  const Eigen::Map<const Eigen::VectorXd> y(pb.y.data(), n);
  std::vector<std::pair<double, Vec5>> found;
  Eigen::MatrixXd x(n, 3);
  for (int i = 0; i < kSteps; ++i) {
    for (int j = 0; j < kSteps; ++j) {
      const double la = lo + (hi - lo) * i / (kSteps - 1);
      const double lb = lo + (hi - lo) * j / (kSteps - 1);
      const double alpha = std::exp(la), beta = std::exp(lb);
      for (int r = 0; r < n; ++r) {
        x(r, 0) = 1.0;
        x(r, 1) = std::exp(-alpha * pb.xp[r]);
        x(r, 2) = std::exp(-beta * pb.xd[r]);
      }
      const Eigen::Vector3d c = x.colPivHouseholderQr().solve(y);
      if (!(c[1] > 0) || !(c[2] > 0) || c[0] < 0 || c[0] > pb.floor)
        continue;
      Vec5 t;
      t << c[0], std::log(c[1]), std::log(c[2]), la, lb;
      found.emplace_back((x * c - y).squaredNorm(), t);
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto &a, const auto &b) { return a.first < b.first; });
  std::vector<Vec5> out;
  for (int i = 0; i < count && i < static_cast<int>(found.size()); ++i)
    out.push_back(found[i].second);
  return out;
}

// Halton point `index` in base `base`.
inline double halton(std::uint64_t index, int base) {
  double f = 1, r = 0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

// Quasi-random starts (bases 2, 3, 5, 7, 11) with a seeded Cranley-Patterson shift.
inline std::vector<Vec5> start_points(int count, std::uint64_t seed, double floor) {
  static constexpr std::array<int, 5> kBases = { 2, 3, 5, 7, 11 };
  // (lo, hi) of each transformed coordinate
  const std::array<std::pair<double, double>, 5> box = { {
      { 0.0, floor },
      { std::log(1e-3), std::log(2.0) },
      { std::log(1e-3), std::log(2.0) },
      { std::log(0.005), std::log(1.0) },
      { std::log(0.005), std::log(1.0) },
  } };
  std::mt19937_64 rng(seed);
  std::array<double, 5> shift;
  for (double &s: shift)
    s = static_cast<double>(rng() >> 11) * 0x1.0p-53;

  std::vector<Vec5> out;
  for (int i = 0; i < count; ++i) {
    Vec5 t;
    for (int k = 0; k < 5; ++k) {
      double u = halton(static_cast<std::uint64_t>(i) + 1, kBases[k]) + shift[k];
      u -= std::floor(u);
      t[k] = box[k].first + u * (box[k].second - box[k].first);
    }
    out.push_back(t);
  }
  return out;
}

template <class Fn>
void parallel_for(int count, int threads, Fn &&fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<int> next { 0 };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < count;)
        fn(i);
    });
  for (std::thread &th: pool)
    th.join();
}

}  // namespace detail

/// Least-squares fit of the bivariate law in loss space. Multi-start
/// Levenberg-Marquardt from variable-projection seeds plus quasi-random
/// starts; L_inf is confined to [0, min loss]. The best restart by
/// (objective, restart index) wins, so the result does not depend on the
/// thread count.
inline FitResult fit_bivariate(const std::vector<RunObservation> &obs, const FitConfig &cfg = {}) {
  if (obs.size() < 8)
    throw FitError(FitErrorKind::kInsufficientData,
                   "need at least 8 observations, got " + std::to_string(obs.size()));
  std::set<double> ps, ds;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<double> logP, logD;
  detail::Problem pb;
  for (const RunObservation &o: obs) {
    if (!(o.P > 0) || !(o.D > 0) || !(o.loss > 0) || !std::isfinite(o.loss))
      throw std::invalid_argument("observations need positive P, D and loss");
    ps.insert(o.P);
    ds.insert(o.D);
    lo = std::min(lo, o.loss);
    hi = std::max(hi, o.loss);
    logP.push_back(std::log(o.P));
    logD.push_back(std::log(o.D));
    pb.y.push_back(o.loss);
  }
  if (ps.size() < 2 || ds.size() < 2)
    throw FitError(FitErrorKind::kRankDeficient,
                   "grid needs at least two distinct P and two distinct D values");
  if (hi - lo <= 1e-12 * hi)
    throw FitError(FitErrorKind::kNoScalingSignal, "no scaling signal: all losses are equal");
  pb.floor = lo;
  const double n = static_cast<double>(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    pb.mP += logP[i] / n;
    pb.mD += logD[i] / n;
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    pb.xp.push_back(logP[i] - pb.mP);
    pb.xd.push_back(logD[i] - pb.mD);
  }

  const int restarts = std::max(1, cfg.restarts);
  std::vector<detail::Vec5> starts = detail::varpro_seeds(pb, std::max(1, restarts / 4));
  for (const detail::Vec5 &t:
       detail::start_points(restarts - static_cast<int>(starts.size()), cfg.seed, lo))
    starts.push_back(t);
  std::vector<detail::LmOutcome> outcomes(restarts);
  detail::parallel_for(restarts, cfg.threads, [&](int i) {
    outcomes[i] = detail::levenberg_marquardt(pb, starts[i], cfg);
  });

  int best = -1;
  for (int i = 0; i < restarts; ++i) {
    if (!std::isfinite(outcomes[i].objective))
      continue;
    if (best < 0 || outcomes[i].objective < outcomes[best].objective)
      best = i;
  }
  const bool any_converged
      = std::any_of(outcomes.begin(), outcomes.end(), [](const auto &o) { return o.converged; });
  if (best < 0 || !any_converged)
    throw FitError(FitErrorKind::kNonConvergence,
                   "no restart converged within " + std::to_string(cfg.max_iter) + " iterations");

  FitResult res;
  res.params = pb.params(outcomes[best].theta);
  FitDiagnostics &d = res.diagnostics;
  d.n = static_cast<int>(obs.size());
  for (const RunObservation &o: obs)
    d.residuals.push_back(o.loss - predict_loss(res.params, o.P, o.D));
  std::tie(d.mae, d.rmse) = fit_errors(res.params, obs);
  d.converged = outcomes[best].converged;
  d.restarts_used = restarts;
  d.objective = outcomes[best].objective;
  return res;
}

/// Seed from MOLSCALE_SEED when set, else the configured one.
inline std::uint64_t resolve_seed(std::uint64_t configured) {
  if (const char *env = std::getenv("MOLSCALE_SEED")) {
    char *end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0')
      return v;
  }
  return configured;
}

}  // namespace molscale

//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "molscale/frontier.hpp"
#include "molscale/grid.hpp"
#include "molscale/io.hpp"
#include "molscale/plot.hpp"
#include "molscale/representation.hpp"
#include "molscale/runlog.hpp"
#include "molscale/scaling_fit.hpp"

namespace molscale {

inline constexpr int kArtifactSchema = 1;

/// A fitted law plus the token span it was fitted on.
struct FitArtifact {
  Representation representation = Representation::kSmiles;
  FitParams params;
  Coverage coverage;
};

inline nlohmann::json params_json(const FitParams &p) {
  return { { "L_inf", p.L_inf }, { "k_P", p.k_P }, { "k_D", p.k_D }, { "alpha", p.alpha },
           { "beta", p.beta } };
}

/// Fit artifact; the thread count is deliberately not recorded.
inline nlohmann::json fit_json(Representation r, const FitResult &fit, const Coverage &coverage,
                               const FitConfig &cfg) {
  const FitDiagnostics &d = fit.diagnostics;
  return {
    { "schema", kArtifactSchema },
    { "representation", std::string(to_string(r)) },
    { "params", params_json(fit.params) },
    { "diagnostics",
      { { "n", d.n },
        { "mae", d.mae },
        { "rmse", d.rmse },
        { "converged", d.converged },
        { "restarts_used", d.restarts_used },
        { "objective", d.objective },
        { "residuals", d.residuals } } },
    { "coverage", { { "d_min", coverage.d_min }, { "d_max", coverage.d_max } } },
    { "config",
      { { "seed", cfg.seed },
        { "restarts", cfg.restarts },
        { "include_multi_epoch", cfg.include_multi_epoch } } },
  };
}

inline FitArtifact fit_from_json(const nlohmann::json &j) {
  try {
    FitArtifact a;
    const std::optional<Representation> r
        = parse_representation(j.at("representation").get<std::string>());
    if (!r)
      throw std::invalid_argument("unknown representation in fit artifact");
    a.representation = *r;
    const nlohmann::json &p = j.at("params");
    a.params = { p.at("L_inf").get<double>(), p.at("k_P").get<double>(), p.at("k_D").get<double>(),
                 p.at("alpha").get<double>(), p.at("beta").get<double>() };
    if (j.contains("coverage"))
      a.coverage = { j.at("coverage").at("d_min").get<double>(),
                     j.at("coverage").at("d_max").get<double>() };
    return a;
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("malformed fit artifact: ") + e.what());
  }
}

/// Compute span of the single-epoch grid, min and max of P * D.
inline std::optional<std::pair<double, double>> grid_compute_span(const RunLog &log,
                                                                  Representation r) {
  std::optional<std::pair<double, double>> span;
  for (const RunLogRecord &x: log.records) {
    if (x.representation != r || x.epoch != 1 || x.checkpoint_index)
      continue;
    const double c = x.P * x.tokens_consumed;
    if (!span)
      span = std::make_pair(c, c);
    span->first = std::min(span->first, c);
    span->second = std::max(span->second, c);
  }
  return span;
}

struct FrontierOptions {
  double c_min = kReportCMin;
  double c_max = kReportCMax;
  int levels = kReportLevels;
  std::optional<double> flops_per_token;  // levels are given in FLOPs when set
  bool verify = false;
};

struct FrontierOutput {
  std::vector<FrontierPoint> points;
  std::vector<bool> in_range;
  std::string csv;
  double max_verify_error = 0;  // closed form vs numeric oracle, when verifying
};

inline FrontierOutput frontier_output(const FitArtifact &fit, const FrontierOptions &opt) {
  if (opt.levels < 1 || !(opt.c_min > 0) || !(opt.c_max >= opt.c_min))
    throw std::invalid_argument("frontier window needs 0 < cmin <= cmax and levels >= 1");
  const double m = opt.flops_per_token.value_or(1.0);
  if (!(m > 0))
    throw std::invalid_argument("flops per token must be positive");
  std::vector<double> cs;
  for (double c: log_space(opt.c_min, opt.c_max, opt.levels))
    cs.push_back(c / m);
  FrontierOutput out;
  out.points = frontier(fit.params, cs);
  out.csv = "C,P_opt,D_opt,rho_opt,L_opt,in_range";
  if (opt.flops_per_token)
    out.csv += ",flops";
  if (opt.verify)
    out.csv += ",P_numeric,rel_error";
  out.csv += '\n';
  for (const FrontierPoint &f: out.points) {
    const bool in = fit.coverage.contains(f.D_opt);
    out.in_range.push_back(in);
    out.csv += format_number(f.C) + ',' + format_number(f.P_opt) + ',' + format_number(f.D_opt) + ','
               + format_number(f.rho_opt) + ',' + format_number(f.L_opt) + ',' + (in ? "1" : "0");
    if (opt.flops_per_token)
      out.csv += ',' + format_number(f.C * m);
    if (opt.verify) {
      const double pn = numeric_frontier(fit.params, f.C);
      const double err = std::abs(pn - f.P_opt) / f.P_opt;
      out.max_verify_error = std::max(out.max_verify_error, err);
      out.csv += ',' + format_number(pn) + ',' + format_number(err);
    }
    out.csv += '\n';
  }
  return out;
}

inline PlotSeries frontier_series(const std::string &name, const FrontierOutput &f) {
  PlotSeries s { name, {} };
  for (std::size_t i = 0; i < f.points.size(); ++i)
    s.points.push_back({ f.points[i].C, f.points[i].L_opt, f.in_range[i] });
  return s;
}

/// Loss-vs-compute trajectory of every run: (P * tokens consumed, loss).
inline std::vector<Trajectory> run_trajectories(const RunLog &log, Representation r) {
  std::map<std::string, Trajectory> by_run;
  for (const RunLogRecord &x: log.records) {
    if (x.representation != r)
      continue;
    Trajectory &t = by_run[x.run_id];
    t.run_id = x.run_id;
    t.points.emplace_back(x.P * x.tokens_consumed, x.val_loss);
  }
  std::vector<Trajectory> out;
  for (auto &[id, t]: by_run)
    out.push_back(std::move(t));
  return out;
}

inline std::string envelope_csv(const std::vector<EnvelopePoint> &env) {
  std::string out = "C,loss,run_id\n";
  for (const EnvelopePoint &e: env)
    out += format_number(e.C) + ',' + format_number(e.loss) + ',' + e.run_id + '\n';
  return out;
}

namespace detail {

inline std::string sci(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

inline nlohmann::json flag_json(const ConsistencyFlag &f) {
  return { { "representation", std::string(to_string(f.representation)) },
           { "kind", f.kind },
           { "computed", f.computed },
           { "reference", f.reference },
           { "message", f.message } };
}

// Column order of the slope summary table.
inline constexpr std::array<Representation, 5> kSlopeTableOrder = {
  Representation::kSmiles, Representation::kDeepSmiles, Representation::kSafe,
  Representation::kFragSeq, Representation::kFragLink
};

}  // namespace detail

struct ReportOptions {
  FitConfig fit;
  FrontierOptions frontier;
};

/// The full bundle: per-representation fit, frontier and envelope files;
/// the exponent, allocation-trend and slope tables; report.json with
/// ingestion diagnostics and consistency flags. Byte-deterministic for a
/// given log and options.
inline ArtifactSet build_report(const RunLog &log, const ReportOptions &opt) {
  ArtifactSet files;
  nlohmann::json report = { { "schema", kArtifactSchema } };
  report["window"] = { { "c_min", opt.frontier.c_min },
                       { "c_max", opt.frontier.c_max },
                       { "levels", opt.frontier.levels } };
  nlohmann::json diags = nlohmann::json::array();
  for (const RunDiagnostic &d: log.diagnostics)
    diags.push_back({ { "line", d.line }, { "severity", d.severity }, { "message", d.message } });
  report["ingest"] = { { "records", log.records.size() },
                       { "rejected", log.rejected },
                       { "diagnostics", diags } };

  std::string table1 = "representation,alpha,beta,MAE,RMSE,L_inf,k_P,k_D,n\n";
  std::string table2 = "representation,C_min,C_max,rho_opt_C_min,rho_opt_C_max,corr_logC_logrho,"
                       "L_opt_C_min,L_opt_C_max,corr_logC_L\n";
  std::map<Representation, RhoFit> slopes;
  nlohmann::json reps = nlohmann::json::object();
  nlohmann::json flags = nlohmann::json::array();
  std::vector<PlotSeries> all_frontiers;

  for (Representation r: kAllRepresentations) {
    const std::string name(to_string(r));
    if (!log.representations().count(r))
      continue;
    nlohmann::json entry;
    const std::vector<RunObservation> obs
        = select_fit_observations(log.observations(r), opt.fit.include_multi_epoch);
    FitResult fit;
    try {
      fit = fit_bivariate(obs, opt.fit);
    } catch (const FitError &e) {
      entry["error"] = e.what();
      reps[name] = entry;
      continue;
    }
    const FitArtifact art { r, fit.params, log.coverage(r) };
    const nlohmann::json fj = fit_json(r, fit, art.coverage, opt.fit);
    files.add("fit_" + name + ".json", fj.dump(2) + "\n");
    entry["fit"] = fj;

    const FitParams &p = fit.params;
    table1 += name + ',' + format_fixed(p.alpha, 4) + ',' + format_fixed(p.beta, 4) + ','
              + format_fixed(fit.diagnostics.mae, 4) + ',' + format_fixed(fit.diagnostics.rmse, 4)
              + ',' + format_fixed(p.L_inf, 4) + ',' + detail::sci(p.k_P, 4) + ','
              + detail::sci(p.k_D, 4) + ',' + std::to_string(fit.diagnostics.n) + '\n';

    try {
      const FrontierOutput fo = frontier_output(art, opt.frontier);
      files.add("frontier_" + name + ".csv", fo.csv);
      PlotSpec spec { name + " compute-optimal loss", "compute C = P D", "loss", true,
                      grid_compute_span(log, r) };
      files.add("frontier_" + name + ".svg", plot_svg({ frontier_series(name, fo) }, spec));
      all_frontiers.push_back(frontier_series(name, fo));

      const RhoFit rf = fit_rho_frontier(fo.points);
      slopes[r] = rf;
      entry["rho_fit"] = { { "s", rf.s }, { "b", rf.b }, { "a", rf.a }, { "factor", rf.factor } };
      entry["slope_closed_form"] = rho_slope(p.alpha, p.beta);
      std::size_t extrapolated = 0;
      for (bool in: fo.in_range)
        extrapolated += !in;
      entry["frontier_points"] = { { "total", fo.points.size() }, { "extrapolated", extrapolated } };

      if (opt.frontier.levels >= 2) {
        const AllocationTrend t = allocation_trend(p, fo.points.front().C, fo.points.back().C,
                                                   opt.frontier.levels);
        table2 += name + ',' + detail::sci(t.c_min, 2) + ',' + detail::sci(t.c_max, 2) + ','
                  + detail::sci(t.rho_at_min, 3) + ',' + detail::sci(t.rho_at_max, 3) + ','
                  + format_fixed(t.corr_log_rho, 3) + ',' + format_fixed(t.loss_at_min, 6) + ','
                  + format_fixed(t.loss_at_max, 6) + ',' + format_fixed(t.corr_loss, 3) + '\n';
        entry["trend"] = { { "rho_at_min", t.rho_at_min }, { "rho_at_max", t.rho_at_max },
                           { "corr_log_rho", t.corr_log_rho }, { "loss_at_min", t.loss_at_min },
                           { "loss_at_max", t.loss_at_max }, { "corr_loss", t.corr_loss } };
      }
    } catch (const std::invalid_argument &e) {
      entry["frontier_error"] = e.what();
    }

    const std::vector<EnvelopePoint> env = min_loss_envelope(run_trajectories(log, r));
    files.add("envelope_" + name + ".csv", envelope_csv(env));

    nlohmann::json rflags = nlohmann::json::array();
    for (const ConsistencyFlag &f: reference_flags(r, p.alpha, p.beta)) {
      rflags.push_back(detail::flag_json(f));
      flags.push_back(detail::flag_json(f));
    }
    entry["flags"] = rflags;
    reps[name] = entry;
  }
  report["representations"] = reps;
  report["flags"] = flags;

  // Slopes implied by the reported exponents never match the reported slope table.
  nlohmann::json ref = nlohmann::json::array();
  for (const ReferenceFigures &f: kReferenceFigures)
    for (const ConsistencyFlag &x: reference_flags(f.representation, f.alpha, f.beta))
      ref.push_back(detail::flag_json(x));
  report["reference_flags"] = ref;

  std::string slope_csv = "parameter";
  std::string s_row = "s_repr", f_row = "10^s_repr", b_row = "b_repr";
  for (Representation r: detail::kSlopeTableOrder) {
    auto it = slopes.find(r);
    if (it == slopes.end())
      continue;
    slope_csv += ',' + std::string(to_string(r));
    s_row += ',' + format_fixed(it->second.s, 4);
    f_row += ',' + format_fixed(it->second.factor, 4);
    b_row += ',' + format_fixed(it->second.b, 4);
  }
  files.add("rho_slopes.csv", slope_csv + '\n' + s_row + '\n' + f_row + '\n' + b_row + '\n');
  files.add("table1.csv", table1);
  files.add("table2.csv", table2);
  if (!all_frontiers.empty())
    files.add("frontiers.svg",
              plot_svg(all_frontiers, { "Compute-optimal loss", "compute C = P D", "loss", true, {} }));
  files.add("report.json", report.dump(2) + "\n");
  return files;
}

}  // namespace molscale

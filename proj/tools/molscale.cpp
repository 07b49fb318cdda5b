//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

// molscale: scaling-law fitting, compute-optimal frontiers, molecular
// representation codecs and de novo metrics from the command line.
//
// Exit status: 0 success, 1 data error (JSON on stderr), 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "molscale/molscale.hpp"

namespace fs = std::filesystem;
namespace ms = molscale;

namespace {

// Raised for bad inputs discovered after argument parsing.
class DataError: public std::runtime_error {
public:
  DataError(std::string kind, const std::string &msg, nlohmann::json detail = nullptr)
      : std::runtime_error(msg), kind_(std::move(kind)), detail_(std::move(detail)) { }

  nlohmann::json to_json() const {
    nlohmann::json j = { { "error", kind_ }, { "message", what() } };
    if (!detail_.is_null())
      j["detail"] = detail_;
    return j;
  }

private:
  std::string kind_;
  nlohmann::json detail_;
};

ms::Representation repr_of(const std::string &s) {
  if (std::optional<ms::Representation> r = ms::parse_representation(s))
    return *r;
  throw CLI::ValidationError("--repr", "unknown representation '" + s + "'");
}

const CLI::Validator kReprCheck(
    [](std::string &s) -> std::string {
      return ms::parse_representation(s) ? std::string() : "unknown representation '" + s + "'";
    },
    "SMILES|DeepSMILES|SAFE|FragSeq|FragLink", "representation");

nlohmann::json diagnostics_json(const std::vector<ms::RunDiagnostic> &d) {
  nlohmann::json out = nlohmann::json::array();
  for (const ms::RunDiagnostic &x: d)
    out.push_back({ { "line", x.line }, { "severity", x.severity }, { "message", x.message } });
  return out;
}

ms::RunLog load_log(const std::string &path) {
  try {
    ms::RunLog log = ms::load_runs(path);
    for (const ms::RunDiagnostic &d: log.diagnostics)
      std::cerr << nlohmann::json({ { "line", d.line }, { "severity", d.severity },
                                    { "message", d.message } })
                       .dump()
                << "\n";
    return log;
  } catch (const ms::RunLogError &e) {
    throw DataError("no_valid_records", e.what(), diagnostics_json(e.diagnostics()));
  }
}

ms::FitArtifact load_fit(const std::string &path) {
  const nlohmann::json j = nlohmann::json::parse(ms::read_text_file(path), nullptr, false);
  if (j.is_discarded())
    throw DataError("bad_fit_artifact", path + " is not valid JSON");
  try {
    return ms::fit_from_json(j);
  } catch (const std::invalid_argument &e) {
    throw DataError("bad_fit_artifact", e.what());
  }
}

const char *fit_error_name(ms::FitErrorKind k) {
  switch (k) {
  case ms::FitErrorKind::kInsufficientData:
    return "insufficient_data";
  case ms::FitErrorKind::kRankDeficient:
    return "rank_deficient";
  case ms::FitErrorKind::kNoScalingSignal:
    return "no_scaling_signal";
  case ms::FitErrorKind::kNonConvergence:
    return "non_convergence";
  }
  return "fit_error";
}

std::vector<std::string> input_lines(const std::string &path, const std::vector<std::string> &inline_items) {
  if (!path.empty())
    return ms::read_lines(path);
  return inline_items;
}

// Writes the artifacts, or prints a lone file to stdout when no --out is given.
void publish(const ms::ArtifactSet &files, const std::string &out) {
  if (!out.empty()) {
    files.write(out);
    return;
  }
  for (const auto &[name, content]: files.files())
    std::cout << content;
}

std::vector<double> p_grid(double lo, double hi, int points) {
  if (!(lo > 0) || !(hi >= lo) || points < 1)
    throw CLI::ValidationError("--pmin/--pmax/--points", "need 0 < pmin <= pmax and points >= 1");
  return ms::log_space(lo, hi, points);
}

struct Options {
  std::string runs, fit, out, input, reference, frontier_csv, repr, group_by;
  std::vector<std::string> reprs, items;
  bool multi_epoch = false, verify = false, isotonic = false, skip_invalid = false;
  int restarts = 64, threads = 0, levels = ms::kReportLevels, points = 61, env_levels = 200;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> shuffle_seed;
  std::optional<double> flops;
  double cmin = ms::kReportCMin, cmax = ms::kReportCMax, pmin = 1e5, pmax = 1e11;
  std::vector<double> cs, targets;
  std::uint64_t tokens = 0;
};

ms::FitConfig fit_config(const Options &o) {
  ms::FitConfig c;
  c.restarts = o.restarts;
  c.seed = ms::resolve_seed(o.seed);
  c.threads = o.threads;
  c.include_multi_epoch = o.multi_epoch;
  return c;
}

ms::FrontierOptions frontier_options(const Options &o) {
  ms::FrontierOptions f;
  f.c_min = o.cmin;
  f.c_max = o.cmax;
  f.levels = o.levels;
  f.flops_per_token = o.flops;
  f.verify = o.verify;
  return f;
}

void cmd_fit(const Options &o) {
  const ms::Representation r = repr_of(o.repr);
  const ms::RunLog log = load_log(o.runs);
  const ms::FitConfig cfg = fit_config(o);
  const auto obs = ms::select_fit_observations(log.observations(r), cfg.include_multi_epoch);
  try {
    const ms::FitResult fit = ms::fit_bivariate(obs, cfg);
    ms::ArtifactSet files;
    const std::string name(ms::to_string(r));
    files.add("fit_" + name + ".json", ms::fit_json(r, fit, log.coverage(r), cfg).dump(2) + "\n");
    files.write(o.out);
  } catch (const ms::FitError &e) {
    throw DataError(fit_error_name(e.kind()), e.what());
  }
}

void cmd_frontier(const Options &o) {
  const ms::FitArtifact fit = load_fit(o.fit);
  ms::FrontierOutput fo;
  try {
    fo = ms::frontier_output(fit, frontier_options(o));
  } catch (const std::invalid_argument &e) {
    throw DataError("invalid_frontier", e.what());
  } catch (const ms::BracketError &e) {
    throw DataError("bracket_failure", e.what(), { { "lo", e.lo() }, { "hi", e.hi() } });
  }
  if (o.verify && fo.max_verify_error > 1e-4)
    throw DataError("verify_failed", "closed form and numeric oracle disagree",
                    { { "max_rel_error", fo.max_verify_error } });
  const std::string name(ms::to_string(fit.representation));
  ms::ArtifactSet files;
  files.add("frontier_" + name + ".csv", fo.csv);
  files.add("frontier_" + name + ".svg",
            ms::plot_svg({ ms::frontier_series(name, fo) },
                         { name + " compute-optimal loss", "compute C = P D", "loss", true, {} }));
  files.write(o.out);
  if (o.verify)
    std::cout << nlohmann::json({ { "verified", true }, { "max_rel_error", fo.max_verify_error } }).dump()
              << "\n";
}

void cmd_isoflop(const Options &o) {
  const ms::FitArtifact fit = load_fit(o.fit);
  const std::vector<double> grid = p_grid(o.pmin, o.pmax, o.points);
  std::vector<ms::PlotSeries> series;
  for (double c: o.cs) {
    if (!(c > 0))
      throw CLI::ValidationError("--c", "compute must be positive");
    ms::PlotSeries s { "C=" + ms::format_number(c), {} };
    for (const ms::IsoFlopPoint &p: ms::isoflop_curve(fit.params, c, grid, fit.coverage))
      s.points.push_back({ p.P, p.loss, p.in_range });
    series.push_back(std::move(s));
  }
  const std::string name(ms::to_string(fit.representation));
  ms::ArtifactSet files;
  files.add("isoflop_" + name + ".csv", ms::plot_csv(series));
  files.add("isoflop_" + name + ".svg",
            ms::plot_svg(series, { name + " IsoFLOP profiles", "parameters P", "loss", true, {} }));
  files.write(o.out);
}

void cmd_isoloss(const Options &o) {
  const ms::FitArtifact fit = load_fit(o.fit);
  const std::vector<double> grid = p_grid(o.pmin, o.pmax, o.points);
  std::vector<ms::PlotSeries> series;
  nlohmann::json summary = nlohmann::json::array();
  for (double t: o.targets) {
    ms::IsoLossCurve c;
    try {
      c = ms::isoloss_curve(fit.params, t, grid, fit.coverage);
    } catch (const ms::InfeasibleTarget &e) {
      throw DataError("infeasible_target", e.what(), { { "target", t }, { "L_inf", fit.params.L_inf } });
    } catch (const std::invalid_argument &e) {
      throw DataError("invalid_params", e.what());
    }
    ms::PlotSeries s { "L=" + ms::format_number(t), {} };
    for (const ms::IsoLossPoint &p: c.points)
      s.points.push_back({ p.C, p.P, p.in_range });
    series.push_back(std::move(s));
    summary.push_back({ { "target", t },
                        { "p_threshold", c.p_threshold },
                        { "points", c.points.size() },
                        { "omitted", c.omitted } });
  }
  const std::string name(ms::to_string(fit.representation));
  ms::ArtifactSet files;
  files.add("isoloss_" + name + ".csv", ms::plot_csv(series));
  files.add("isoloss_" + name + ".json", summary.dump(2) + "\n");
  bool any = false;
  for (const ms::PlotSeries &s: series)
    any = any || !s.points.empty();
  if (any)
    files.add("isoloss_" + name + ".svg",
              ms::plot_svg(series, { name + " IsoLoss contours", "compute C = P D", "parameters P", true, {} }));
  files.write(o.out);
}

void cmd_rho_fit(const Options &o) {
  if (o.fit.empty() && o.frontier_csv.empty())
    throw CLI::ValidationError("--fit/--frontier", "one of --fit or --frontier is required");
  nlohmann::json out;
  ms::RhoFit rf;
  try {
    if (!o.fit.empty()) {
      const ms::FitArtifact fit = load_fit(o.fit);
      rf = ms::fit_rho_frontier(ms::frontier_output(fit, frontier_options(o)).points);
      out["representation"] = std::string(ms::to_string(fit.representation));
      out["slope_closed_form"] = ms::rho_slope(fit.params.alpha, fit.params.beta);
      nlohmann::json flags = nlohmann::json::array();
      for (const ms::ConsistencyFlag &f:
           ms::reference_flags(fit.representation, fit.params.alpha, fit.params.beta))
        flags.push_back({ { "kind", f.kind }, { "computed", f.computed }, { "reference", f.reference },
                          { "message", f.message } });
      out["flags"] = flags;
    } else {
      const std::vector<std::string> lines = ms::read_lines(o.frontier_csv);
      if (lines.empty())
        throw DataError("bad_frontier_csv", "empty frontier CSV");
      const std::vector<std::string> head = ms::split_csv(lines[0]);
      const auto col = [&](const std::string &n) {
        const auto it = std::find(head.begin(), head.end(), n);
        if (it == head.end())
          throw DataError("bad_frontier_csv", "missing column " + n);
        return static_cast<std::size_t>(it - head.begin());
      };
      const std::size_t ci = col("C"), ri = col("rho_opt");
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> cells = ms::split_csv(lines[i]);
        const auto c = cells.size() > ci ? ms::parse_number(cells[ci]) : std::nullopt;
        const auto r = cells.size() > ri ? ms::parse_number(cells[ri]) : std::nullopt;
        if (!c || !r)
          throw DataError("bad_frontier_csv", "unreadable row " + std::to_string(i + 1));
        pts.emplace_back(*c, *r);
      }
      rf = ms::fit_rho_powerlaw(pts);
    }
  } catch (const std::invalid_argument &e) {
    throw DataError("rho_fit_failed", e.what());
  }
  out["s"] = rf.s;
  out["b"] = rf.b;
  out["a"] = rf.a;
  out["factor"] = rf.factor;
  ms::ArtifactSet files;
  files.add("rho_fit.json", out.dump(2) + "\n");
  files.write(o.out);
}

void cmd_envelope(const Options &o) {
  const ms::RunLog log = load_log(o.runs);
  std::set<ms::Representation> reps = log.representations();
  if (!o.repr.empty())
    reps = { repr_of(o.repr) };
  ms::ArtifactSet files;
  for (ms::Representation r: reps) {
    const std::vector<ms::Trajectory> traj = ms::run_trajectories(log, r);
    if (traj.empty())
      throw DataError("no_runs", "no runs for " + std::string(ms::to_string(r)));
    const auto env = ms::min_loss_envelope(traj, o.env_levels, o.isotonic);
    const std::string name(ms::to_string(r));
    files.add("envelope_" + name + ".csv", ms::envelope_csv(env));
    ms::PlotSeries s { name + " envelope", {} };
    for (const ms::EnvelopePoint &e: env)
      s.points.push_back({ e.C, e.loss, true });
    files.add("envelope_" + name + ".svg",
              ms::plot_svg({ s }, { name + " minimum loss envelope", "compute C = P D", "loss", true,
                                    ms::grid_compute_span(log, r) }));
  }
  files.write(o.out);
}

// Applies `fn` to every line; failures are collected with 1-based line numbers.
template <class Fn>
std::vector<std::string> convert_lines(const std::vector<std::string> &lines, bool skip_invalid, Fn &&fn,
                                       const char *kind) {
  std::vector<std::string> out;
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(fn(lines[i]));
    } catch (const std::exception &e) {
      failures.push_back({ { "line", i + 1 }, { "input", lines[i] }, { "message", e.what() } });
    }
  }
  if (!failures.empty() && !skip_invalid)
    throw DataError(kind, std::to_string(failures.size()) + " line(s) failed", failures);
  for (const auto &f: failures)
    std::cerr << nlohmann::json({ { "skipped", f } }).dump() << "\n";
  return out;
}

std::string joined(const std::vector<std::string> &lines) {
  std::string s;
  for (const std::string &l: lines)
    s += l + "\n";
  return s;
}

void cmd_encode(const Options &o, bool decode) {
  const ms::Representation r = repr_of(o.repr);
  const std::vector<std::string> lines = input_lines(o.input, o.items);
  const std::vector<std::string> out = decode
      ? convert_lines(lines, o.skip_invalid, [&](const std::string &l) { return ms::decode(r, l); },
                      "decode_failed")
      : convert_lines(lines, o.skip_invalid, [&](const std::string &l) { return ms::encode(r, l); },
                      "encode_failed");
  ms::ArtifactSet files;
  files.add(std::string(decode ? "decoded_" : "encoded_") + std::string(ms::to_string(r)) + ".txt",
            joined(out));
  publish(files, o.out);
}

std::map<ms::Representation, std::vector<std::string>> encode_corpora(
    const std::vector<std::string> &smiles, const std::vector<ms::Representation> &reps, bool skip_invalid) {
  std::map<ms::Representation, std::vector<std::string>> corpora;
  for (ms::Representation r: reps)
    corpora[r] = convert_lines(smiles, skip_invalid, [&](const std::string &l) { return ms::encode(r, l); },
                               "encode_failed");
  return corpora;
}

std::vector<ms::Representation> requested(const Options &o) {
  std::vector<ms::Representation> reps;
  for (const std::string &s: o.reprs)
    reps.push_back(repr_of(s));
  if (!o.repr.empty())
    reps.push_back(repr_of(o.repr));
  if (reps.empty())
    reps.assign(ms::kAllRepresentations.begin(), ms::kAllRepresentations.end());
  return reps;
}

void cmd_count_tokens(const Options &o) {
  const std::vector<ms::Representation> reps = requested(o);
  const auto corpora = encode_corpora(input_lines(o.input, o.items), reps, o.skip_invalid);
  ms::Vocabulary vocab;
  try {
    vocab = ms::build_vocab(corpora);
  } catch (const std::invalid_argument &e) {
    throw DataError("empty_corpus", e.what());
  }
  std::string csv = "representation,molecules,tokens,failures\n";
  for (const auto &[r, lines]: corpora) {
    const ms::TokenCount c = ms::count_corpus_tokens(lines, r, vocab);
    csv += std::string(ms::to_string(r)) + ',' + std::to_string(c.molecules) + ','
           + std::to_string(c.tokens) + ',' + std::to_string(c.failures.size()) + '\n';
  }
  ms::ArtifactSet files;
  files.add("token_counts.csv", csv);
  if (!o.out.empty())
    files.add("vocab.json", nlohmann::json(vocab.tokens()).dump(2) + "\n");
  publish(files, o.out);
}

void cmd_build_budget(const Options &o) {
  const ms::Representation r = repr_of(o.repr);
  const auto corpora = encode_corpora(ms::read_lines(o.input), { r }, o.skip_invalid);
  ms::Vocabulary vocab;
  try {
    vocab = ms::build_vocab(corpora);
  } catch (const std::invalid_argument &e) {
    throw DataError("empty_corpus", e.what());
  }
  ms::BudgetSpec spec { o.tokens, r, std::nullopt };
  if (o.shuffle_seed)
    spec.shuffle_seed = ms::resolve_seed(*o.shuffle_seed);
  ms::BudgetManifest m;
  try {
    m = ms::build_budget(corpora.at(r), spec, vocab);
  } catch (const ms::BudgetError &e) {
    throw DataError("insufficient_tokens", e.what());
  } catch (const std::invalid_argument &e) {
    throw CLI::ValidationError("--tokens", e.what());
  }
  const std::string name(ms::to_string(r));
  nlohmann::json j = { { "schema", ms::kArtifactSchema },
                       { "representation", name },
                       { "target_tokens", m.target_tokens },
                       { "actual_tokens", m.actual_tokens },
                       { "molecule_count", m.molecule_count },
                       { "skipped", m.skipped },
                       { "source_digest", m.source_digest },
                       { "shuffle_seed", spec.shuffle_seed ? nlohmann::json(*spec.shuffle_seed) : nlohmann::json() } };
  ms::ArtifactSet files;
  files.add("budget_" + name + ".txt", joined(m.selected));
  files.add("budget_" + name + ".json", j.dump(2) + "\n");
  files.write(o.out);
}

void cmd_metrics(const Options &o) {
  const ms::Representation r = o.repr.empty() ? ms::Representation::kSmiles : repr_of(o.repr);
  std::vector<ms::SampledLine> lines;
  const bool jsonl = fs::path(o.input).extension() == ".jsonl";
  const std::vector<std::string> raw = ms::read_lines(o.input);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!jsonl) {
      lines.push_back({ raw[i], 1.0, std::nullopt, "" });
      continue;
    }
    const nlohmann::json j = nlohmann::json::parse(raw[i], nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("line") || !j.at("line").is_string())
      throw DataError("bad_sample_record", "line " + std::to_string(i + 1) + " needs a string 'line'");
    ms::SampledLine s { j.at("line").get<std::string>(), 1.0, std::nullopt, "" };
    if (j.contains("temperature") && j.at("temperature").is_number())
      s.temperature = j.at("temperature").get<double>();
    if (j.contains("top_k") && j.at("top_k").is_number_integer())
      s.top_k = j.at("top_k").get<int>();
    if (j.contains("checkpoint") && j.at("checkpoint").is_string())
      s.checkpoint = j.at("checkpoint").get<std::string>();
    lines.push_back(std::move(s));
  }
  if (lines.empty())
    throw DataError("empty_sample", "no generated lines in " + o.input);
  std::set<std::string> reference;
  std::size_t rejected = 0;
  if (!o.reference.empty())
    reference = ms::load_reference(ms::read_lines(o.reference), &rejected);
  ms::MetricConfig cfg { ms::resolve_seed(o.seed), o.threads <= 0 ? 1 : o.threads };

  std::vector<ms::MetricReport> rows;
  if (o.group_by == "sampling") {
    for (const ms::GenerationSample &g: ms::group_by_setting(lines, r)) {
      ms::MetricReport m = ms::metric_report(g, reference, cfg);
      m.setting = ms::setting_label(g.temperature, g.top_k, g.source_checkpoint);
      rows.push_back(std::move(m));
    }
  } else {
    ms::GenerationSample g;
    g.representation = r;
    for (const ms::SampledLine &l: lines)
      g.lines.push_back(l.line);
    ms::MetricReport m = ms::metric_report(g, reference, cfg);
    m.setting = "all";
    rows.push_back(std::move(m));
  }
  if (rejected > 0)
    for (ms::MetricReport &m: rows)
      m.notes.push_back(std::to_string(rejected) + " unparsable reference line(s) ignored");
  ms::ArtifactSet files;
  files.add("metrics.csv", ms::metrics_csv(rows));
  publish(files, o.out);
}

void cmd_report(const Options &o) {
  const ms::RunLog log = load_log(o.runs);
  ms::ReportOptions opt;
  opt.fit = fit_config(o);
  opt.frontier = frontier_options(o);
  opt.frontier.verify = false;
  try {
    ms::build_report(log, opt).write(o.out);
  } catch (const std::invalid_argument &e) {
    throw DataError("report_failed", e.what());
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "molscale: scaling laws, frontiers, molecular codecs and de novo metrics" };
  app.require_subcommand(1);
  Options o;

  auto runs = [&](CLI::App *c) { c->add_option("--runs", o.runs, "run log (.jsonl or .csv)")->required()->check(CLI::ExistingFile); };
  auto out = [&](CLI::App *c, bool required) {
    CLI::Option *opt = c->add_option("--out", o.out, "output directory");
    if (required)
      opt->required();
  };
  auto fit_file = [&](CLI::App *c) { c->add_option("--fit", o.fit, "fit artifact (fit_<repr>.json)")->required()->check(CLI::ExistingFile); };
  auto window = [&](CLI::App *c) {
    c->add_option("--cmin", o.cmin, "smallest compute level");
    c->add_option("--cmax", o.cmax, "largest compute level");
    c->add_option("--levels", o.levels, "log-spaced compute levels");
    c->add_option("--flops-per-token", o.flops, "interpret levels as FLOPs with this multiplier");
  };
  auto fitting = [&](CLI::App *c) {
    c->add_flag("--include-multi-epoch", o.multi_epoch, "also fit epoch > 1 records");
    c->add_option("--restarts", o.restarts, "multi-start count")->check(CLI::PositiveNumber);
    c->add_option("--seed", o.seed, "seed (MOLSCALE_SEED overrides)");
    c->add_option("--threads", o.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  };
  auto grid = [&](CLI::App *c) {
    c->add_option("--pmin", o.pmin, "smallest model size");
    c->add_option("--pmax", o.pmax, "largest model size");
    c->add_option("--points", o.points, "log-spaced model sizes");
  };

  CLI::App *fit = app.add_subcommand("fit", "fit the bivariate law for one representation");
  runs(fit);
  fit->add_option("--repr", o.repr, "representation")->required()->check(kReprCheck);
  fitting(fit);
  out(fit, true);

  CLI::App *frontier = app.add_subcommand("frontier", "compute-optimal frontier from a fit");
  fit_file(frontier);
  window(frontier);
  frontier->add_flag("--verify", o.verify, "check against the numeric minimizer");
  out(frontier, true);

  CLI::App *isoflop = app.add_subcommand("isoflop", "loss along P D = C");
  fit_file(isoflop);
  isoflop->add_option("--c", o.cs, "compute level(s)")->required();
  grid(isoflop);
  out(isoflop, true);

  CLI::App *isoloss = app.add_subcommand("isoloss", "level sets of the loss in (C, P)");
  fit_file(isoloss);
  isoloss->add_option("--target", o.targets, "target loss(es)")->required();
  grid(isoloss);
  out(isoloss, true);

  CLI::App *rho = app.add_subcommand("rho-fit", "log-linear fit of rho_opt against compute");
  auto *rf_fit = rho->add_option("--fit", o.fit, "fit artifact")->check(CLI::ExistingFile);
  auto *rf_csv = rho->add_option("--frontier", o.frontier_csv, "frontier CSV with C and rho_opt")
                     ->check(CLI::ExistingFile);
  rf_fit->excludes(rf_csv);
  window(rho);
  out(rho, true);

  CLI::App *envelope = app.add_subcommand("envelope", "minimum loss envelope of the runs");
  runs(envelope);
  envelope->add_option("--repr", o.repr, "restrict to one representation")->check(kReprCheck);
  envelope->add_option("--levels", o.env_levels, "grid levels")->check(CLI::Range(2, 100000));
  envelope->add_flag("--isotonic", o.isotonic, "non-increasing cleanup");
  out(envelope, true);

  for (const char *name: { "encode", "decode" }) {
    CLI::App *c = app.add_subcommand(name, std::string(name) == "encode" ? "SMILES to a representation"
                                                                   : "a representation to SMILES");
    c->add_option("--repr", o.repr, "representation")->required()->check(kReprCheck);
    c->add_option("--input", o.input, "one item per line")->check(CLI::ExistingFile);
    c->add_option("items", o.items, "items given inline");
    c->add_flag("--skip-invalid", o.skip_invalid, "drop failing lines instead of failing");
    out(c, false);
  }

  CLI::App *count = app.add_subcommand("count-tokens", "loss-contributing tokens per representation");
  count->add_option("--input", o.input, "SMILES, one per line")->check(CLI::ExistingFile);
  count->add_option("items", o.items, "SMILES given inline");
  count->add_option("--repr", o.reprs, "representation(s), default all")->check(kReprCheck);
  count->add_flag("--skip-invalid", o.skip_invalid, "drop molecules that fail to encode");
  out(count, false);

  CLI::App *budget = app.add_subcommand("build-budget", "shortest prefix reaching a token budget");
  budget->add_option("--input", o.input, "SMILES, one per line")->required()->check(CLI::ExistingFile);
  budget->add_option("--repr", o.repr, "representation")->required()->check(kReprCheck);
  budget->add_option("--tokens", o.tokens, "target token count")->required();
  budget->add_option("--seed", o.shuffle_seed, "shuffle with this seed first (MOLSCALE_SEED overrides)");
  budget->add_flag("--skip-invalid", o.skip_invalid, "drop molecules that fail to encode");
  out(budget, true);

  CLI::App *metrics = app.add_subcommand("metrics", "validity, uniqueness, diversity, novelty");
  metrics->add_option("--input", o.input, "generated lines (.txt) or sample records (.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--repr", o.repr, "representation of the generated lines, default SMILES")->check(kReprCheck);
  metrics->add_option("--reference", o.reference, "training set, one SMILES per line")->check(CLI::ExistingFile);
  metrics->add_option("--group-by", o.group_by, "'sampling' for one row per (T, top_k, checkpoint)")
      ->check(CLI::IsMember({ "sampling" }));
  metrics->add_option("--seed", o.seed, "diversity subsample seed (MOLSCALE_SEED overrides)");
  metrics->add_option("--threads", o.threads, "worker threads")->check(CLI::NonNegativeNumber);
  out(metrics, false);

  CLI::App *report = app.add_subcommand("report", "fit, frontier, slopes and tables for every representation");
  runs(report);
  window(report);
  fitting(report);
  out(report, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "fit")
      cmd_fit(o);
    else if (name == "frontier")
      cmd_frontier(o);
    else if (name == "isoflop")
      cmd_isoflop(o);
    else if (name == "isoloss")
      cmd_isoloss(o);
    else if (name == "rho-fit")
      cmd_rho_fit(o);
    else if (name == "envelope")
      cmd_envelope(o);
    else if (name == "encode" || name == "decode")
      cmd_encode(o, name == "decode");
    else if (name == "count-tokens")
      cmd_count_tokens(o);
    else if (name == "build-budget")
      cmd_build_budget(o);
    else if (name == "metrics")
      cmd_metrics(o);
    else if (name == "report")
      cmd_report(o);
  } catch (const CLI::ValidationError &e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  } catch (const DataError &e) {
    std::cerr << e.to_json().dump() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << nlohmann::json({ { "error", "data_error" }, { "message", e.what() } }).dump() << "\n";
    return 1;
  }
  return 0;
}

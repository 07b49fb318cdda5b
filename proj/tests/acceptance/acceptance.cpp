//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero when any criterion fails. Tolerances are pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../unit/fixtures.hpp"
#include "molscale/molscale.hpp"

namespace fs = std::filesystem;
namespace ms = molscale;
using ms::testing::load_bundle;
using ms::testing::load_lines;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ms::FitParams unit(double a, double b) { return { 0.0, 1.0, 1.0, a, b }; }

constexpr std::array<ms::Representation, 5> kTable1Order = {
  ms::Representation::kDeepSmiles, ms::Representation::kFragLink, ms::Representation::kFragSeq,
  ms::Representation::kSafe,       ms::Representation::kSmiles,
};

// Closed-form P_opt against the numeric minimizer, 0.01% relative, < 10 s.
Outcome closed_form_frontier() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> lf(0.2, 1.0), ex(0.01, 0.8), lk(std::log(0.5), std::log(100.0));
  std::uniform_real_distribution<double> lc(std::log(ms::kReportCMin), std::log(ms::kReportCMax));
  double worst = 0;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const ms::FitParams p { lf(rng), std::exp(lk(rng)), std::exp(lk(rng)), ex(rng), ex(rng) };
    for (double C: { ms::kReportCMin, std::exp(lc(rng)), ms::kReportCMax }) {
      worst = std::max(worst, rel(ms::p_opt(p, C), ms::numeric_frontier(p, C)));
      ++checked;
    }
  }
  for (ms::Representation r: kTable1Order) {
    const ms::ReferenceFigures &f = ms::reference_figures(r);
    for (double C: ms::log_space(ms::kReportCMin, ms::kReportCMax, 200)) {
      worst = std::max(worst, rel(ms::p_opt(unit(f.alpha, f.beta), C), ms::numeric_frontier(unit(f.alpha, f.beta), C)));
      ++checked;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return { worst <= 1e-4 && secs < 10,
           std::to_string(checked) + " cases, max rel error " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs)
               + " s" };
}

// Slope of ln rho_opt against ln C; exact law, DeepSMILES value, reference flag.
Outcome slope_law() {
  double worst = 0;
  for (ms::Representation r: kTable1Order) {
    const ms::ReferenceFigures &f = ms::reference_figures(r);
    const ms::FitParams p { 0.5, 2.0, 7.0, f.alpha, f.beta };
    const auto pts = ms::frontier(p, ms::log_space(ms::kReportCMin, ms::kReportCMax, ms::kReportLevels));
    worst = std::max(worst, std::abs(ms::fit_rho_frontier(pts).s - ms::rho_slope(f.alpha, f.beta)));
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ex(0.01, 0.8);
  for (int i = 0; i < 200; ++i) {
    const ms::FitParams p { 0.4, 3.0, 11.0, ex(rng), ex(rng) };
    const auto pts = ms::frontier(p, ms::log_space(ms::kReportCMin, ms::kReportCMax, ms::kReportLevels));
    worst = std::max(worst, std::abs(ms::fit_rho_frontier(pts).s - ms::rho_slope(p.alpha, p.beta)));
  }

  const ms::ReferenceFigures &deep = ms::reference_figures(ms::Representation::kDeepSmiles);
  const double s_deep = ms::rho_slope(deep.alpha, deep.beta);
  // central difference of ln rho_opt in ln C
  const ms::FitParams dp = unit(deep.alpha, deep.beta);
  const double h = 1e-3, lc = std::log(1e16);
  const double fd = (std::log(ms::rho_opt(dp, std::exp(lc + h))) - std::log(ms::rho_opt(dp, std::exp(lc - h))))
                    / (2 * h);

  bool flagged = false;
  std::string flag_text;
  for (const ms::ConsistencyFlag &fl: ms::reference_flags(ms::Representation::kDeepSmiles, deep.alpha, deep.beta))
    if (fl.kind == "slope_mismatch") {
      flagged = true;
      flag_text = fmt("computed %.4f", fl.computed) + fmt(" vs reported %.4f", fl.reference);
    }

  const bool pass = worst <= 1e-9 && std::abs(s_deep - -0.7208) <= 1e-4 && std::abs(fd - s_deep) <= 1e-6 && flagged;
  return { pass, "max |s - (a-b)/(a+b)| " + fmt("%.3g", worst) + ", DeepSMILES s " + fmt("%.6f", s_deep)
                     + " (finite difference " + fmt("%.6f", fd) + "), slope flag "
                     + (flagged ? "raised: " + flag_text : std::string("not raised")) };
}

std::vector<ms::RunObservation> grid_observations(const ms::FitParams &p, double sigma, std::mt19937_64 *rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<ms::RunObservation> out;
  for (double P: ms::kModelSizes)
    for (double D: ms::kTokenBudgets) {
      ms::RunObservation o;
      o.P = P;
      o.D = o.budget = D;
      o.loss = ms::predict_loss(p, P, D) + (rng != nullptr ? noise(*rng) : 0.0);
      out.push_back(o);
    }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Noiseless recovery within 1e-3, noisy alpha and beta within 15% median, < 60 s.
Outcome fit_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const ms::FitParams truth { 0.45, 3.2, 14.0, 0.06, 0.35 };
  std::vector<ms::FitParams> cases = { truth };
  for (ms::Representation r: kTable1Order) {
    const ms::ReferenceFigures &f = ms::reference_figures(r);
    cases.push_back({ 0.5, 4.0, 20.0, f.alpha, f.beta });
  }
  double worst = 0;
  for (const ms::FitParams &p: cases) {
    const ms::FitParams got = ms::fit_bivariate(grid_observations(p, 0, nullptr)).params;
    for (double e: { rel(got.L_inf, p.L_inf), rel(got.k_P, p.k_P), rel(got.k_D, p.k_D), rel(got.alpha, p.alpha),
                     rel(got.beta, p.beta) })
      worst = std::max(worst, e);
  }
  std::vector<double> ea, eb;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const ms::FitParams got = ms::fit_bivariate(grid_observations(truth, 0.005, &rng)).params;
    ea.push_back(rel(got.alpha, truth.alpha));
    eb.push_back(rel(got.beta, truth.beta));
  }
  const double ma = median(ea), mb = median(eb);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return { worst <= 1e-3 && ma <= 0.15 && mb <= 0.15 && secs < 60,
           "noiseless max rel error " + fmt("%.3g", worst) + "; sigma 0.005 median rel error alpha "
               + fmt("%.3f", ma) + ", beta " + fmt("%.3f", mb) + " (limit 0.15); " + fmt("%.2f", secs) + " s" };
}

// MAE <= RMSE on random residuals and exact hand cases, identical on repeat.
Outcome residual_identities() {
  const ms::FitParams p { 1.0, 0, 0, 1, 1 };
  auto obs = [](std::vector<double> losses) {
    std::vector<ms::RunObservation> out;
    for (double l: losses) {
      ms::RunObservation o;
      o.P = o.D = 1;
      o.loss = l;
      out.push_back(o);
    }
    return out;
  };
  bool ok = true;
  ok = ok && ms::fit_errors(p, obs({ 1.0, 1.0 })) == std::make_pair(0.0, 0.0);
  ok = ok && ms::fit_errors(p, obs({ 1.5, 0.5 })) == std::make_pair(0.5, 0.5);
  ok = ok && ms::fit_errors(p, obs({ 1.0, 1.5 })) == std::make_pair(0.25, std::sqrt(0.125));
  ok = ok && ms::fit_errors(p, obs({ 1.25, 0.75, 1.25, 0.75 })) == std::make_pair(0.25, 0.25);
  ok = ok && ms::fit_errors(p, obs({ 4.0 })) == std::make_pair(3.0, 3.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(1.0, 0.3);
  std::uniform_int_distribution<int> len(1, 40);
  int violations = 0, unstable = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> l(static_cast<std::size_t>(len(rng)));
    for (double &x: l)
      x = nd(rng);
    const auto a = ms::fit_errors(p, obs(l));
    const auto b = ms::fit_errors(p, obs(l));
    violations += a.first > a.second;
    unstable += a != b;
  }
  return { ok && violations == 0 && unstable == 0,
           std::string("hand cases ") + (ok ? "exact" : "WRONG") + ", 10000 random vectors: "
               + std::to_string(violations) + " MAE > RMSE, " + std::to_string(unstable) + " unstable repeats" };
}

// Corpus round-trips, FragLink success rate, DeepSMILES reference outputs, < 30 s.
Outcome codec_round_trips() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = load_lines("desk_corpus.smi");
  std::size_t failures = 0, fraglink_ok = 0, fragseq_checked = 0;
  for (const std::string &s: corpus) {
    const ms::MolGraph g = ms::parse_smiles(s);
    for (ms::Representation r: ms::kAllRepresentations) {
      try {
        const std::string e = ms::encode(r, s);
        if (r == ms::Representation::kFragSeq) {
          const ms::FragSeqDecode d = ms::decode_fragseq(e);
          if (d.ambiguous)
            continue;
          ++fragseq_checked;
          failures += !ms::isomorphic(d.graph, g);
          continue;
        }
        const bool ok = ms::isomorphic(ms::decode_graph(r, e), g);
        failures += !ok;
        if (r == ms::Representation::kFragLink)
          fraglink_ok += ok;
      } catch (const std::exception &) {
        ++failures;
      }
    }
  }
  std::size_t deep_checked = 0, deep_mismatch = 0;
  for (const auto &e: load_bundle("deepsmiles_fixtures.json")) {
    ++deep_checked;
    deep_mismatch += ms::to_deepsmiles(e.at("input").get<std::string>()) != e.at("expected").get<std::string>();
  }
  const double rate = static_cast<double>(fraglink_ok) / static_cast<double>(corpus.size());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return { corpus.size() == 1000 && failures == 0 && rate >= 0.9995 && deep_mismatch == 0 && secs < 30,
           std::to_string(corpus.size()) + " molecules, " + std::to_string(failures) + " round-trip failures, FragLink "
               + fmt("%.4f", rate) + ", FragSeq unambiguous " + std::to_string(fragseq_checked) + ", DeepSMILES "
               + std::to_string(deep_checked - deep_mismatch) + "/" + std::to_string(deep_checked)
               + " match reference, " + fmt("%.2f", secs) + " s" };
}

// Every emitted IsoLoss point re-evaluates to the target; infeasible targets throw.
Outcome isoloss_round_trip() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lf(0.2, 1.0), ex(0.01, 0.8), lk(std::log(0.5), std::log(100.0)),
      gap(0.01, 2.0);
  const std::vector<double> grid = ms::log_space(1e5, 1e12, 80);
  double worst = 0;
  std::size_t points = 0;
  int rejected = 0, trials = 0;
  for (int i = 0; i < 500; ++i) {
    const ms::FitParams p { lf(rng), std::exp(lk(rng)), std::exp(lk(rng)), ex(rng), ex(rng) };
    const double target = p.L_inf + gap(rng);
    for (const ms::IsoLossPoint &q: ms::isoloss_curve(p, target, grid).points) {
      worst = std::max(worst, rel(ms::predict_loss(p, q.P, q.C / q.P), target));
      ++points;
    }
    for (double bad: { p.L_inf, p.L_inf - 0.1, p.L_inf - 1e-12 }) {
      ++trials;
      try {
        ms::isoloss_curve(p, bad, grid);
      } catch (const ms::InfeasibleTarget &) {
        ++rejected;
      }
    }
  }
  return { worst <= 1e-9 && rejected == trials && points > 0,
           std::to_string(points) + " points, max rel error " + fmt("%.3g", worst) + ", infeasible rejected "
               + std::to_string(rejected) + "/" + std::to_string(trials) };
}

ms::GenerationSample sample(std::vector<std::string> lines) {
  ms::GenerationSample s;
  s.lines = std::move(lines);
  return s;
}

// Hand-checkable metric values, Tanimoto oracle agreement and CSV column order.
Outcome metrics() {
  int wrong = 0;
  auto check = [&](double got, double want) { wrong += got != want; };
  check(ms::validity(sample({ "CCO", "C1CC" })), 0.5);
  check(ms::validity(sample({ "CCO", "c1ccccc1", "CC(=O)O" })), 1.0);
  check(ms::uniqueness(sample({ "CCO", "OCC" })), 0.5);
  check(ms::uniqueness(sample({ "C", "CC", "CCC" })), 1.0);
  check(ms::uniqueness(sample({ "CCO", "OCC", "C(O)C", "c1ccccc1", "c1ccccc1", "C", "CC", "CCC", "CN", "CCl" })),
        0.7);
  const auto s = sample({ "CCO", "c1ccccc1", "CC", "CN" });
  check(ms::novelty(s, ms::load_reference({ "OCC", "c1ccccc1", "CC", "NC" })), 0.0);
  check(ms::novelty(s, ms::load_reference({ "CCCl" })), 1.0);
  check(ms::novelty(s, ms::load_reference({ "OCC" })), 0.75);
  check(ms::diversity(sample({ "C", "C#N" })), 1.0);
  const ms::Fingerprint a = ms::fingerprint(ms::parse_smiles("CCO"));
  check(ms::tanimoto(a, a), 1.0);

  int validity_wrong = 0;
  for (const auto &e: load_bundle("validity_fixtures.json"))
    validity_wrong += ms::validate(e.at("input").get<std::string>()).valid != e.at("expected").at("valid").get<bool>();

  double worst = 0;
  int compared = 0;
  auto fp = [](const std::string &m) { return ms::fingerprint(ms::parse_smiles(m)); };
  for (const auto &e: load_bundle("tanimoto_fixtures.json")) {
    if (e.at("kind") == "tanimoto") {
      const auto &in = e.at("input");
      worst = std::max(worst, std::abs(ms::tanimoto(fp(in[0]), fp(in[1])) - e.at("expected").get<double>()));
      ++compared;
    } else if (e.at("kind") == "diversity") {
      worst = std::max(worst, std::abs(ms::diversity(sample(e.at("input").get<std::vector<std::string>>()))
                                       - e.at("expected").get<double>()));
      ++compared;
    }
  }

  ms::MetricReport row = ms::metric_report(sample({ "CCO", "c1ccccc1" }), {}, {});
  row.setting = "all";
  const std::string csv = ms::metrics_csv({ row });
  const std::string header = csv.substr(0, csv.find('\n'));
  const auto pos = [&](const char *c) { return header.find(c); };
  const bool order = pos("Validity") != std::string::npos && pos("Validity") < pos("Uniqueness")
                     && pos("Uniqueness") < pos("Diversity") && pos("Diversity") < pos("Novelty")
                     && pos("Novelty") != std::string::npos;
  return { wrong == 0 && validity_wrong == 0 && worst <= 1e-6 && compared > 0 && order,
           std::to_string(wrong) + " trivial mismatches, " + std::to_string(validity_wrong)
               + " validity fixture mismatches, Tanimoto/diversity max abs error " + fmt("%.3g", worst) + " over "
               + std::to_string(compared) + ", header \"" + header + "\"" };
}

std::string dir_digest(const fs::path &dir) {
  std::vector<fs::path> files;
  for (const auto &e: fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const fs::path &f: files)
    all += fs::relative(f, dir).string() + '\0' + ms::testing::read_file(f.string()) + '\0';
  return all;
}

// The CLI report is byte-identical across runs and thread counts.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("molscale_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string runs = ms::testing::fixture_path("synthetic_runs.jsonl");
  std::vector<std::string> digests;
  std::vector<std::string> labels = { "default", "default", "threads=1", "threads=4" };
  std::vector<std::string> extra = { "", "", " --threads 1", " --threads 4" };
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const fs::path out = root / std::to_string(i);
    const std::string cmd = std::string("\"") + MOLSCALE_CLI_PATH + "\" report --runs \"" + runs + "\" --out \""
                            + out.string() + "\"" + extra[i] + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) {
      fs::remove_all(root);
      return { false, "report run " + labels[i] + " failed" };
    }
    digests.push_back(dir_digest(out));
  }
  std::size_t files = 0;
  for (const auto &e: fs::directory_iterator(root / "0"))
    files += e.is_regular_file();
  fs::remove_all(root);
  bool same = true;
  for (const std::string &d: digests)
    same = same && d == digests[0];
  return { same && files > 0, std::to_string(digests.size()) + " runs (twice default, threads 1 and 4), "
                                  + std::to_string(files) + " files each, "
                                  + (same ? "byte-identical" : "OUTPUTS DIFFER") };
}

// 1e6 random strings through validate and every decoder; only the typed
// rejections ParseError and CodecError are allowed.
Outcome fuzz() {
  const auto t0 = std::chrono::steady_clock::now();
  static const std::string alphabet = "CcNnOoSsPpFIBrl()[]=#$:/\\@+-.%*{}0123456789H<>>_ ";
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<int> len(0, 48), byte(0, 255), pick(0, static_cast<int>(alphabet.size()) - 1);
  std::size_t unexpected = 0, accepted = 0;
  std::string example;
  const std::vector<std::function<void(const std::string &)>> targets = {
    [&](const std::string &s) { accepted += ms::validate(s).valid; },
    [](const std::string &s) { ms::decode_deepsmiles(s); },
    [](const std::string &s) { ms::decode_fraglink(s); },
    [](const std::string &s) { ms::decode_fragseq(s); },
    [](const std::string &s) { ms::decode_safe(s); },
  };
  constexpr int kStrings = 1000000;
  for (int i = 0; i < kStrings; ++i) {
    std::string s(static_cast<std::size_t>(len(rng)), '\0');
    const bool raw = i % 2 == 0;  // half raw bytes, half drawn from the notation alphabet
    for (char &c: s)
      c = raw ? static_cast<char>(byte(rng)) : alphabet[static_cast<std::size_t>(pick(rng))];
    for (const auto &t: targets) {
      try {
        t(s);
      } catch (const ms::ParseError &) {
      } catch (const ms::CodecError &) {
      } catch (const std::exception &e) {
        if (unexpected++ == 0)
          example = e.what();
      } catch (...) {
        if (unexpected++ == 0)
          example = "non-standard exception";
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return { unexpected == 0 && secs < 60,
           std::to_string(kStrings) + " strings x " + std::to_string(targets.size()) + " entry points, "
               + std::to_string(unexpected) + " untyped exceptions" + (example.empty() ? "" : " (" + example + ")")
               + ", " + std::to_string(accepted) + " valid SMILES, " + fmt("%.2f", secs) + " s" };
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
    { "closed-form frontier vs numeric minimizer", closed_form_frontier },
    { "rho slope law", slope_law },
    { "fit recovery", fit_recovery },
    { "MAE <= RMSE and hand residuals", residual_identities },
    { "codec round-trips", codec_round_trips },
    { "IsoLoss round-trip", isoloss_round_trip },
    { "de novo metrics", metrics },
    { "report determinism", determinism },
    { "decoder fuzz", fuzz },
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = { false, std::string("threw: ") + e.what() };
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

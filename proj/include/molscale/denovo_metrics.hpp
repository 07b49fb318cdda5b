//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <bitset>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "molscale/canonical.hpp"
#include "molscale/codecs.hpp"
#include "molscale/mol_graph.hpp"
#include "molscale/representation.hpp"
#include "molscale/scaling_fit.hpp"

namespace molscale {

inline constexpr int kFingerprintBits = 2048;
inline constexpr int kFingerprintRadius = 2;
inline constexpr std::size_t kDiversityExactLimit = 2000;

struct Fingerprint {
  std::bitset<kFingerprintBits> bits;
  int radius = kFingerprintRadius;

  std::vector<int> on_bits() const {
    std::vector<int> out;
    for (int i = 0; i < kFingerprintBits; ++i)
      if (bits[i])
        out.push_back(i);
    return out;
  }
};

namespace detail {

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::int64_t v) {
  return splitmix(h ^ static_cast<std::uint64_t>(v));
}

inline constexpr std::uint64_t kFingerprintSeed = 0xCBF29CE484222325ULL;

inline int fingerprint_bond_code(BondOrder o) {
  switch (o) {
  case BondOrder::kSingle:
    return 1;
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  case BondOrder::kAromatic:
    return 4;
  }
  return 0;
}

}  // namespace detail

/// Circular fingerprint. Atom identifiers start from local invariants and
/// are rehashed with the sorted (bond code, neighbour id) environment once
/// per radius; every identifier of every layer sets bit id % 2048. Only
/// invariants enter the hash, so isomorphic graphs share fingerprints.
inline Fingerprint fingerprint(const MolGraph &g, int radius = kFingerprintRadius) {
  const int n = g.num_atoms();
  std::vector<std::uint64_t> ids(n);
  Fingerprint fp;
  fp.radius = radius;
  for (int i = 0; i < n; ++i) {
    const Atom &a = g.atom(i);
    std::uint64_t h = detail::kFingerprintSeed;
    for (std::int64_t v: { static_cast<std::int64_t>(a.element),
                           static_cast<std::int64_t>(g.degree(i)),
                           static_cast<std::int64_t>(a.total_h()),
                           static_cast<std::int64_t>(a.formal_charge),
                           static_cast<std::int64_t>(a.isotope.value_or(0)),
                           static_cast<std::int64_t>(a.aromatic),
                           static_cast<std::int64_t>(a.ring_member) })
      h = detail::hash_combine(h, v);
    ids[i] = h;
    fp.bits.set(h % kFingerprintBits);
  }
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> env;
      for (const Neighbor &nb: g.neighbors(i))
        env.emplace_back(detail::fingerprint_bond_code(g.bond(nb.bond).order), ids[nb.atom]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = detail::hash_combine(ids[i], r);
      for (const auto &[code, id]: env) {
        h = detail::hash_combine(h, code);
        h = detail::hash_combine(h, static_cast<std::int64_t>(id));
      }
      next[i] = h;
    }
    ids = std::move(next);
    for (std::uint64_t h: ids)
      fp.bits.set(h % kFingerprintBits);
  }
  return fp;
}

/// |a & b| / |a | b|; two empty fingerprints count as identical.
inline double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  const std::size_t u = (a.bits | b.bits).count();
  if (u == 0)
    return 1.0;
  return static_cast<double>((a.bits & b.bits).count()) / static_cast<double>(u);
}

struct GenerationSample {
  std::vector<std::string> lines;
  Representation representation = Representation::kSmiles;
  double temperature = 1.0;
  std::optional<int> top_k;
  std::string source_checkpoint;
};

class MetricError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per-line outcome: valid lines carry their graph and canonical form.
struct LineAnalysis {
  std::vector<bool> valid;
  std::vector<std::string> canonical;  // empty for invalid lines
  std::vector<MolGraph> graphs;        // valid lines only, in line order
};

inline LineAnalysis analyze_lines(const GenerationSample &s) {
  LineAnalysis out;
  for (const std::string &line: s.lines) {
    try {
      MolGraph g = decode_graph(s.representation, line);
      if (g.empty())
        throw MetricError("empty molecule");
      out.canonical.push_back(canonical_form(g));
      out.graphs.push_back(std::move(g));
      out.valid.push_back(true);
    } catch (const std::exception &) {
      out.valid.push_back(false);
      out.canonical.emplace_back();
    }
  }
  return out;
}

inline bool line_valid(Representation r, const std::string &line) {
  return analyze_lines({ { line }, r, 1.0, std::nullopt, {} }).valid.front();
}

inline double validity(const GenerationSample &s) {
  if (s.lines.empty())
    throw MetricError("validity needs a non-empty sample");
  const LineAnalysis a = analyze_lines(s);
  return static_cast<double>(std::count(a.valid.begin(), a.valid.end(), true))
         / static_cast<double>(s.lines.size());
}

namespace detail {

inline std::vector<std::string> valid_canonicals(const LineAnalysis &a) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.valid.size(); ++i)
    if (a.valid[i])
      out.push_back(a.canonical[i]);
  return out;
}

inline double uniqueness_of(const LineAnalysis &a) {
  const std::vector<std::string> v = valid_canonicals(a);
  if (v.empty())
    throw MetricError("uniqueness is undefined without valid lines");
  return static_cast<double>(std::set<std::string>(v.begin(), v.end()).size())
         / static_cast<double>(v.size());
}

inline double novelty_of(const LineAnalysis &a, const std::set<std::string> &reference) {
  const std::vector<std::string> v = valid_canonicals(a);
  const std::set<std::string> distinct(v.begin(), v.end());
  if (distinct.empty())
    throw MetricError("novelty is undefined without valid lines");
  if (reference.empty())
    return 1.0;
  std::size_t fresh = 0;
  for (const std::string &c: distinct)
    fresh += reference.count(c) == 0;
  return static_cast<double>(fresh) / static_cast<double>(distinct.size());
}

// One graph per distinct canonical form, in canonical-string order.
inline std::vector<const MolGraph *> distinct_graphs(const LineAnalysis &a) {
  std::map<std::string, const MolGraph *> by_form;
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.valid.size(); ++i)
    if (a.valid[i])
      by_form.emplace(a.canonical[i], &a.graphs[k++]);
  std::vector<const MolGraph *> out;
  for (const auto &[form, g]: by_form)
    out.push_back(g);
  return out;
}

inline double diversity_of(const LineAnalysis &a, std::uint64_t seed, int threads) {
  std::vector<const MolGraph *> mols = distinct_graphs(a);
  if (mols.size() < 2)
    throw MetricError("diversity needs at least two distinct valid molecules");
  if (mols.size() > kDiversityExactLimit) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = mols.size(); i > 1; --i)
      std::swap(mols[i - 1], mols[static_cast<std::size_t>(rng() % i)]);
    mols.resize(kDiversityExactLimit);
  }
  std::vector<Fingerprint> fps(mols.size());
  parallel_for(static_cast<int>(mols.size()), threads,
               [&](int i) { fps[i] = fingerprint(*mols[i]); });
  // row sums in fixed order keep the total independent of thread count
  std::vector<double> rows(fps.size(), 0.0);
  parallel_for(static_cast<int>(fps.size()), threads, [&](int i) {
    for (std::size_t j = i + 1; j < fps.size(); ++j)
      rows[i] += tanimoto(fps[i], fps[j]);
  });
  double total = 0;
  for (double r: rows)
    total += r;
  const double pairs = static_cast<double>(fps.size()) * static_cast<double>(fps.size() - 1) / 2;
  return 1.0 - total / pairs;
}

}  // namespace detail

inline double uniqueness(const GenerationSample &s) {
  return detail::uniqueness_of(analyze_lines(s));
}

/// Fraction of distinct valid canonical forms absent from `reference`
/// (canonical forms). An empty reference makes every molecule novel.
inline double novelty(const GenerationSample &s, const std::set<std::string> &reference) {
  return detail::novelty_of(analyze_lines(s), reference);
}

/// 1 - mean pairwise Tanimoto over distinct valid molecules; exact up to
/// 2000 molecules, a seeded subsample of 2000 above that.
inline double diversity(const GenerationSample &s, std::uint64_t seed = 0, int threads = 1) {
  return detail::diversity_of(analyze_lines(s), seed, threads);
}

/// Canonicalizes reference lines; unparsable lines are counted, not fatal.
inline std::set<std::string> load_reference(const std::vector<std::string> &lines,
                                            std::size_t *rejected = nullptr) {
  std::set<std::string> out;
  std::size_t bad = 0;
  for (const std::string &l: lines) {
    try {
      out.insert(canonicalize(l));
    } catch (const std::exception &) {
      ++bad;
    }
  }
  if (rejected != nullptr)
    *rejected = bad;
  return out;
}

/// A value or the reason it is missing.
struct MetricValue {
  std::optional<double> value;
  std::string reason;
};

struct MetricReport {
  std::string setting;
  MetricValue validity, uniqueness, diversity, novelty;
  std::size_t total = 0;
  std::size_t valid = 0;
  std::size_t unique = 0;
  std::vector<std::string> notes;
};

struct MetricConfig {
  std::uint64_t seed = 0;
  int threads = 1;
};

inline MetricReport metric_report(const GenerationSample &s, const std::set<std::string> &reference,
                                  const MetricConfig &cfg = {}) {
  if (s.lines.empty())
    throw MetricError("metric report needs a non-empty sample");
  const LineAnalysis a = analyze_lines(s);
  MetricReport r;
  r.total = s.lines.size();
  const std::vector<std::string> v = detail::valid_canonicals(a);
  r.valid = v.size();
  r.unique = std::set<std::string>(v.begin(), v.end()).size();
  r.validity.value = static_cast<double>(r.valid) / static_cast<double>(r.total);

  auto attempt = [](MetricValue &m, auto &&fn) {
    try {
      m.value = fn();
    } catch (const MetricError &e) {
      m.reason = e.what();
    }
  };
  attempt(r.uniqueness, [&] { return detail::uniqueness_of(a); });
  attempt(r.diversity, [&] { return detail::diversity_of(a, cfg.seed, cfg.threads); });
  attempt(r.novelty, [&] { return detail::novelty_of(a, reference); });
  if (reference.empty())
    r.notes.push_back("empty reference set: novelty is 1 by definition");
  if (r.unique > kDiversityExactLimit)
    r.notes.push_back("diversity estimated on a seeded subsample of "
                      + std::to_string(kDiversityExactLimit));
  return r;
}

/// One line of generated output with its sampling settings.
struct SampledLine {
  std::string line;
  double temperature = 1.0;
  std::optional<int> top_k;
  std::string checkpoint;
};

inline std::string setting_label(double temperature, std::optional<int> top_k,
                                 const std::string &checkpoint) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "T=%g", temperature);
  std::string s = buf;
  s += top_k ? ";k=" + std::to_string(*top_k) : std::string(";k=none");
  if (!checkpoint.empty())
    s += ";ckpt=" + checkpoint;
  return s;
}

/// Groups lines by (temperature, top_k, checkpoint) in ascending key order;
/// an absent top_k sorts first.
inline std::vector<GenerationSample> group_by_setting(const std::vector<SampledLine> &lines,
                                                      Representation r) {
  std::map<std::tuple<double, std::optional<int>, std::string>, GenerationSample> groups;
  for (const SampledLine &l: lines) {
    GenerationSample &g = groups[{ l.temperature, l.top_k, l.checkpoint }];
    g.representation = r;
    g.temperature = l.temperature;
    g.top_k = l.top_k;
    g.source_checkpoint = l.checkpoint;
    g.lines.push_back(l.line);
  }
  std::vector<GenerationSample> out;
  for (auto &[key, g]: groups)
    out.push_back(std::move(g));
  return out;
}

inline constexpr const char *kMetricCsvHeader
    = "setting,Validity,Uniqueness,Diversity,Novelty,total,valid,unique,notes";

namespace detail {

inline std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c: s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

/// Metric columns in table order; missing values are empty cells whose
/// reasons join the notes column.
inline std::string metrics_csv(const std::vector<MetricReport> &rows) {
  std::string out = std::string(kMetricCsvHeader) + "\n";
  for (const MetricReport &r: rows) {
    std::vector<std::string> notes = r.notes;
    std::string line = detail::csv_field(r.setting);
    const std::pair<const char *, const MetricValue *> cols[] = {
      { "Validity", &r.validity },
      { "Uniqueness", &r.uniqueness },
      { "Diversity", &r.diversity },
      { "Novelty", &r.novelty },
    };
    for (const auto &[name, m]: cols) {
      line += ',';
      if (m->value) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", *m->value);
        line += buf;
      } else {
        notes.push_back(std::string(name) + ": " + m->reason);
      }
    }
    line += ',' + std::to_string(r.total) + ',' + std::to_string(r.valid) + ','
            + std::to_string(r.unique) + ',';
    std::string joined;
    for (const std::string &n: notes)
      joined += (joined.empty() ? "" : "; ") + n;
    out += line + detail::csv_field(joined) + "\n";
  }
  return out;
}

}  // namespace molscale

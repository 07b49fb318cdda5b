//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "molscale/frontier.hpp"
#include "molscale/io.hpp"
#include "molscale/representation.hpp"
#include "molscale/scaling_fit.hpp"

namespace molscale {

inline constexpr int kRunLogSchema = 1;

struct RunLogRecord {
  std::string run_id;
  Representation representation = Representation::kSmiles;
  double P = 0;
  double budget_tokens = 0;
  int epoch = 1;
  double tokens_consumed = 0;
  double val_loss = 0;
  std::optional<int> checkpoint_index;
  nlohmann::json wall_metadata = nlohmann::json::object();
  std::size_t line = 0;       // 1-based source line
  bool inconsistent = false;  // tokens_consumed disagrees with epoch, budget and checkpoint

  bool multi_epoch() const { return epoch > 1; }

  /// ((epoch - 1) + i/5) * budget for checkpoint i, epoch * budget otherwise.
  double expected_tokens() const {
    if (checkpoint_index)
      return (epoch - 1 + *checkpoint_index / static_cast<double>(kCheckpointsPerEpoch))
             * budget_tokens;
    return epoch * budget_tokens;
  }

  RunObservation observation() const {
    RunObservation o;
    o.representation = representation;
    o.P = P;
    o.D = tokens_consumed;
    o.budget = budget_tokens;
    o.epoch = epoch;
    o.loss = val_loss;
    o.source_run_id = run_id;
    o.checkpoint = checkpoint_index;
    return o;
  }
};

struct RunDiagnostic {
  std::size_t line = 0;
  std::string severity;  // "error" rejects the record; "warning" keeps it
  std::string message;
};

struct RunLog {
  std::vector<RunLogRecord> records;
  std::vector<RunDiagnostic> diagnostics;
  std::size_t rejected = 0;

  std::vector<RunObservation> observations(std::optional<Representation> only = {}) const {
    std::vector<RunObservation> out;
    for (const RunLogRecord &r: records)
      if (!only || r.representation == *only)
        out.push_back(r.observation());
    return out;
  }

  std::set<Representation> representations() const {
    std::set<Representation> out;
    for (const RunLogRecord &r: records)
      out.insert(r.representation);
    return out;
  }

  /// Single-epoch token span of `r`'s end-of-epoch records.
  Coverage coverage(Representation r) const {
    Coverage c { std::numeric_limits<double>::infinity(), 0 };
    for (const RunLogRecord &x: records) {
      if (x.representation != r || x.epoch != 1
          || (x.checkpoint_index && *x.checkpoint_index != kCheckpointsPerEpoch))
        continue;
      c.d_min = std::min(c.d_min, x.tokens_consumed);
      c.d_max = std::max(c.d_max, x.tokens_consumed);
    }
    if (c.d_min > c.d_max)
      return { 0, 0 };
    return c;
  }
};

class RunLogError: public std::runtime_error {
public:
  RunLogError(const std::string &msg, std::vector<RunDiagnostic> diagnostics)
      : std::runtime_error(msg), diagnostics_(std::move(diagnostics)) { }

  const std::vector<RunDiagnostic> &diagnostics() const { return diagnostics_; }

private:
  std::vector<RunDiagnostic> diagnostics_;
};

namespace detail {

// Field access shared by the JSONL and CSV readers.
struct FieldSource {
  std::function<std::optional<std::string>(const std::string &)> text;
  std::function<std::optional<double>(const std::string &)> number;
  std::function<bool(const std::string &)> present;
};

// Fills `r`; returns the rejection reason, empty on success.
inline std::string read_record(const FieldSource &src, RunLogRecord &r,
                               std::vector<std::string> &warnings) {
  if (src.present("schema")) {
    const std::optional<double> s = src.number("schema");
    if (!s || *s != kRunLogSchema)
      return "unsupported schema (expected " + std::to_string(kRunLogSchema) + ")";
  } else {
    warnings.push_back("missing schema field, assuming " + std::to_string(kRunLogSchema));
  }
  const std::optional<std::string> id = src.text("run_id");
  if (!id || id->empty())
    return "run_id must be a non-empty string";
  r.run_id = *id;

  const std::optional<std::string> rep = src.text("representation");
  if (!rep)
    return "representation must be a string";
  const std::optional<Representation> parsed = parse_representation(*rep);
  if (!parsed)
    return "unknown representation '" + *rep + "'";
  r.representation = *parsed;

  auto positive = [&](const char *name, double &out, bool integral) -> std::string {
    const std::optional<double> v = src.number(name);
    if (!v || !std::isfinite(*v) || !(*v > 0) || (integral && *v != std::floor(*v)))
      return std::string(name) + " must be a positive " + (integral ? "integer" : "number");
    out = *v;
    return {};
  };
  double epoch = 0, ck = 0;
  for (std::string err: { positive("P", r.P, true), positive("budget_tokens", r.budget_tokens, true),
                          positive("epoch", epoch, true),
                          positive("tokens_consumed", r.tokens_consumed, true),
                          positive("val_loss", r.val_loss, false) })
    if (!err.empty())
      return err;
  if (epoch > 1e6)
    return "epoch out of range";
  r.epoch = static_cast<int>(epoch);
  if (src.present("checkpoint_index")) {
    if (std::string err = positive("checkpoint_index", ck, true); !err.empty() || ck > 5)
      return "checkpoint_index must be an integer in 1..5";
    r.checkpoint_index = static_cast<int>(ck);
  }
  const double want = r.expected_tokens();
  if (std::abs(r.tokens_consumed - want) > 1e-9 * want + 0.5) {
    r.inconsistent = true;
    warnings.push_back("inconsistent: tokens_consumed " + format_number(r.tokens_consumed)
                       + " but epoch, budget and checkpoint imply " + format_number(want));
  }
  return {};
}

inline const std::set<std::string> &known_fields() {
  static const std::set<std::string> k = { "schema",          "run_id",   "representation", "P",
                                           "budget_tokens",   "epoch",    "tokens_consumed",
                                           "val_loss",        "checkpoint_index", "wall_metadata" };
  return k;
}

}  // namespace detail

/// Parses a run log (JSONL, or CSV with a header row). Rejected records are
/// reported with their line numbers; the call fails only when no record
/// survives.
inline RunLog parse_runs(std::string_view text, bool csv) {
  RunLog log;
  std::map<std::tuple<std::string, int, int>, std::size_t> seen;
  const std::vector<std::string> lines = split_lines(text);
  std::vector<std::string> header;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string &line = lines[i];
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    RunLogRecord r;
    r.line = lineno;
    std::vector<std::string> warnings;
    std::string err;

    if (csv) {
      if (header.empty()) {
        header = split_csv(line);
        for (std::string &h: header) {
          h.erase(0, h.find_first_not_of(" \t"));
          h.erase(h.find_last_not_of(" \t\r") + 1);
        }
        continue;
      }
      const std::vector<std::string> cells = split_csv(line);
      if (cells.size() != header.size()) {
        err = "expected " + std::to_string(header.size()) + " cells, found "
              + std::to_string(cells.size());
      } else {
        std::map<std::string, std::string> row;
        for (std::size_t c = 0; c < header.size(); ++c)
          if (!cells[c].empty())
            row[header[c]] = cells[c];
        detail::FieldSource src {
          [&](const std::string &k) -> std::optional<std::string> {
            auto it = row.find(k);
            return it == row.end() ? std::nullopt : std::optional<std::string>(it->second);
          },
          [&](const std::string &k) -> std::optional<double> {
            auto it = row.find(k);
            return it == row.end() ? std::nullopt : parse_number(it->second);
          },
          [&](const std::string &k) { return row.count(k) > 0; },
        };
        err = detail::read_record(src, r, warnings);
        for (const auto &[k, v]: row)
          if (!detail::known_fields().count(k))
            r.wall_metadata[k] = v;
      }
    } else {
      const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        err = "not a JSON object";
      } else {
        detail::FieldSource src {
          [&](const std::string &k) -> std::optional<std::string> {
            auto it = j.find(k);
            if (it == j.end() || !it->is_string())
              return std::nullopt;
            return it->get<std::string>();
          },
          [&](const std::string &k) -> std::optional<double> {
            auto it = j.find(k);
            if (it == j.end() || !it->is_number())
              return std::nullopt;
            return it->get<double>();
          },
          [&](const std::string &k) { return j.contains(k) && !j.at(k).is_null(); },
        };
        err = detail::read_record(src, r, warnings);
        if (err.empty()) {
          if (j.contains("wall_metadata")) {
            if (j.at("wall_metadata").is_object())
              r.wall_metadata = j.at("wall_metadata");
            else
              warnings.push_back("wall_metadata is not an object, ignored");
          }
          for (const auto &[k, v]: j.items())
            if (!detail::known_fields().count(k))
              r.wall_metadata[k] = v;
        }
      }
    }

    if (err.empty()) {
      const auto key = std::make_tuple(r.run_id, r.epoch, r.checkpoint_index.value_or(0));
      auto [it, fresh] = seen.emplace(key, lineno);
      if (!fresh)
        err = "duplicate of line " + std::to_string(it->second) + " (run_id " + r.run_id
              + ", epoch " + std::to_string(r.epoch) + ", checkpoint "
              + (r.checkpoint_index ? std::to_string(*r.checkpoint_index) : std::string("none"))
              + ")";
    }
    if (!err.empty()) {
      log.diagnostics.push_back({ lineno, "error", err });
      ++log.rejected;
      continue;
    }
    for (std::string &w: warnings)
      log.diagnostics.push_back({ lineno, "warning", std::move(w) });
    log.records.push_back(std::move(r));
  }
  if (log.records.empty())
    throw RunLogError("no valid run records", log.diagnostics);
  return log;
}

/// CSV when the extension is .csv, JSONL otherwise.
inline RunLog load_runs(const std::filesystem::path &path) {
  std::string ext = path.extension().string();
  for (char &c: ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return parse_runs(read_text_file(path), ext == ".csv");
}

}  // namespace molscale

//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace molscale {

/// Shortest decimal text that round-trips to `v`.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed-point text with `digits` decimals.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  return v;
}

inline std::string read_text_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Lines without trailing '\r'; a final empty line is dropped.
inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

/// Non-empty lines of a text file, whitespace-trimmed at both ends.
inline std::vector<std::string> read_lines(const std::filesystem::path &p) {
  std::vector<std::string> out;
  for (std::string &l: split_lines(read_text_file(p))) {
    const std::size_t a = l.find_first_not_of(" \t");
    if (a == std::string::npos)
      continue;
    const std::size_t b = l.find_last_not_of(" \t");
    out.push_back(l.substr(a, b - a + 1));
  }
  return out;
}

/// Splits one CSV record; double quotes escape commas and "" is a quote.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

/// Files staged in memory and published together: each is written to a
/// temporary sibling and renamed into place only after all are staged.
class ArtifactSet {
public:
  void add(const std::string &name, std::string content) { files_[name] = std::move(content); }

  const std::map<std::string, std::string> &files() const { return files_; }

  void write(const std::filesystem::path &dir) const {
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged;
    for (const auto &[name, content]: files_) {
      const std::filesystem::path target = dir / name;
      std::filesystem::create_directories(target.parent_path());
      std::filesystem::path tmp = target;
      tmp += ".tmp";
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      if (!out)
        throw std::runtime_error("cannot write " + tmp.string());
      staged.emplace_back(tmp, target);
    }
    for (const auto &[tmp, target]: staged)
      std::filesystem::rename(tmp, target);
  }

private:
  std::map<std::string, std::string> files_;
};

}  // namespace molscale

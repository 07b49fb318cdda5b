//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace molscale::testing {

inline std::string fixture_path(const std::string &name) {
  return std::string(MOLSCALE_FIXTURE_DIR) + "/" + name;
}

// Loads a fixture bundle and returns its entries; the bundle version must be 1.
inline nlohmann::json load_bundle(const std::string &name) {
  std::ifstream in(fixture_path(name));
  if (!in)
    throw std::runtime_error("missing fixture " + name);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.at("version").get<int>() != 1)
    throw std::runtime_error("unsupported fixture version in " + name);
  for (const auto &e: doc.at("entries"))
    if (!e.contains("tool_provenance"))
      throw std::runtime_error("fixture entry without provenance in " + name);
  return doc.at("entries");
}

inline std::vector<std::string> load_lines(const std::string &name) {
  std::ifstream in(fixture_path(name));
  if (!in)
    throw std::runtime_error("missing fixture " + name);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty())
      out.push_back(line);
  return out;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace molscale::testing

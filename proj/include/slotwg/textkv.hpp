// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Minimal sectioned key/value reader shared by the run-config and the
// material database. Format:
//
//   # comment
//   [section]            or   [section "label"]
//   key = value
//
// Keys may repeat within a section (the material database uses repeated
// `term` lines); consumers decide whether repetition is legal.

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slotwg/errors.hpp"

namespace slotwg::textkv {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::string label;  // optional, from [name "label"]
  std::vector<Entry> entries;

  const std::string* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e.value;
    return nullptr;
  }
  std::vector<std::string> find_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (e.key == key) out.push_back(e.value);
    return out;
  }
};

struct Document {
  std::vector<Section> sections;

  const Section* find(std::string_view name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
};

inline std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline Document parse(std::istream& in, const std::string& origin) {
  Document doc;
  Section* cur = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header: " + t);
      std::string inner = trim(t.substr(1, t.size() - 2));
      Section s;
      auto q = inner.find('"');
      if (q == std::string::npos) {
        s.name = inner;
      } else {
        s.name = trim(inner.substr(0, q));
        auto q2 = inner.rfind('"');
        if (q2 == q)
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": unterminated label in section header");
        s.label = inner.substr(q + 1, q2 - q - 1);
      }
      if (s.name.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty section name");
      doc.sections.push_back(std::move(s));
      cur = &doc.sections.back();
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected `key = value`, got: " + t);
    if (!cur)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside of any [section]");
    Entry e;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cur->entries.push_back(std::move(e));
  }
  return doc;
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  return parse(in, path);
}

inline Document parse_string(const std::string& text,
                             const std::string& origin = "<string>") {
  std::istringstream in(text);
  return parse(in, origin);
}

// Numeric conversions with location-free but key-named diagnostics.
inline double to_double(const std::string& v, std::string_view key) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("value of `" + std::string(key) +
                      "` is not a number: " + v);
  }
}

inline long to_long(const std::string& v, std::string_view key) {
  try {
    size_t pos = 0;
    long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("value of `" + std::string(key) +
                      "` is not an integer: " + v);
  }
}

inline bool to_bool(const std::string& v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("value of `" + std::string(key) +
                    "` is not a boolean: " + v);
}

inline std::vector<double> to_double_list(const std::string& v,
                                          std::string_view key) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (ss >> tok) out.push_back(to_double(tok, key));
  return out;
}

inline std::vector<std::string> to_string_list(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream ss(v);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace slotwg::textkv

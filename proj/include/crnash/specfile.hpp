#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crnash/errors.hpp"

namespace crnash {

/// Line-based key=value file. Blank lines and '#' comments are skipped;
/// values may be double-quoted (quotes stripped). Order is preserved so
/// callers can reject unknown keys with a line number.
struct SpecEntry {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<SpecEntry> read_keyvalue_text(const std::string& text) {
  std::vector<SpecEntry> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw SpecError("spec file line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw SpecError("spec file line " + std::to_string(lineno) + ": empty key");
    }
    entries.push_back({key, value, lineno});
  }
  return entries;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (...) {
  }
  throw SpecError("invalid number for " + what + ": '" + s + "'");
}

inline int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (...) {
  }
  throw SpecError("invalid integer for " + what + ": '" + s + "'");
}

}  // namespace crnash

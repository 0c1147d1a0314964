#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace crnash {

// Deterministic JSON serialization for CLI reports: keys sorted (nlohmann's
// std::map object type), floats printed with 17 significant digits so that
// identical runs produce byte-identical output.

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline void emit_json(const nlohmann::json& j, std::ostream& os, int indent = 0) {
  auto pad = [&os](int n) {
    for (int k = 0; k < n; ++k) os << ' ';
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        pad(indent + 2);
        os << nlohmann::json(it.key()).dump() << ": ";
        emit_json(it.value(), os, indent + 2);
      }
      os << "\n";
      pad(indent);
      os << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ",\n";
        first = false;
        pad(indent + 2);
        emit_json(v, os, indent + 2);
      }
      os << "\n";
      pad(indent);
      os << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: os << format_double(j.get<double>()); return;
    default: os << j.dump(); return;
  }
}

inline std::string dump_report(const nlohmann::json& j) {
  std::ostringstream os;
  emit_json(j, os);
  os << "\n";
  return os.str();
}

/// FNV-1a 64-bit content hash, hex encoded.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace crnash

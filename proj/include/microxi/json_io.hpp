#pragma once

// Canonical JSON text: keys sorted (nlohmann's object map already is), floats
// written with 17 significant digits so every value round-trips exactly.

#include <cmath>
#include <cstdio>
#include <string>

#include "json.hpp"

#include "microxi/errors.hpp"
#include "microxi/rng.hpp"

namespace microxi {

inline void canonical_dump(const nlohmann::json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(it.key()).dump();
        out += ':';
        canonical_dump(it.value(), out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canonical_dump(j[i], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

inline std::string canonical_dump(const nlohmann::json& j) {
  std::string out;
  canonical_dump(j, out);
  return out;
}

inline nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

// Accepts [re, im], {"re": .., "im": ..} or a plain number.
inline cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re") && j.contains("im")) return {j.at("re").get<double>(), j.at("im").get<double>()};
  fail(ErrorKind::ParseError, "expected a complex number as [re, im]");
}

}  // namespace microxi

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "btp/forms.hpp"

namespace btp {

// JSON serialization of structure equations.  One document per
// structure:
//   {"name": "...", "n": 3, "terms": [{"k":3,"type":"pm","i":1,"j":1,
//    "re":1,"im":0}, ...]}
// with 1-based labels, "pp"/"pm"/"mm" for the three term species, i < j
// on the antisymmetric species, and duplicate keys summed.

namespace detail {

inline int json_line(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t p = 0; p < byte && p < text.size(); ++p)
    if (text[p] == '\n') ++line;
  return line;
}

inline int require_int(const nlohmann::ordered_json& o, const char* field) {
  if (!o.contains(field) || !o[field].is_number_integer())
    fail(ErrorCode::ParseError, std::string("field '") + field + "' missing or not an integer");
  return o[field].get<int>();
}

inline double require_real(const nlohmann::ordered_json& o, const char* field) {
  if (!o.contains(field) || !o[field].is_number())
    fail(ErrorCode::ParseError, std::string("field '") + field + "' missing or not a number");
  return o[field].get<double>();
}

}  // namespace detail

inline StructureEquations parse_document(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(detail::json_line(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::ParseError, "document is not a JSON object");

  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail(ErrorCode::ParseError, "field 'name' not a string");
    name = doc["name"].get<std::string>();
  }
  const int n = detail::require_int(doc, "n");
  if (n < 2 || n > kMaxDim)
    fail(ErrorCode::SchemaError, "n out of range 2..8");
  if (!doc.contains("terms") || !doc["terms"].is_array())
    fail(ErrorCode::ParseError, "field 'terms' missing or not an array");

  StructureEquations S(n, name);
  for (const auto& t : doc["terms"]) {
    if (!t.is_object()) fail(ErrorCode::ParseError, "term is not an object");
    if (!t.contains("type") || !t["type"].is_string())
      fail(ErrorCode::ParseError, "field 'type' missing or not a string");
    const std::string type = t["type"].get<std::string>();
    const int k = detail::require_int(t, "k");
    const int i = detail::require_int(t, "i");
    const int j = detail::require_int(t, "j");
    const Cx c(detail::require_real(t, "re"), detail::require_real(t, "im"));
    if (k < 1 || k > n || i < 1 || i > n || j < 1 || j > n)
      fail(ErrorCode::SchemaError, "term index out of range 1..n");
    if (type == "pp") {
      if (i >= j) fail(ErrorCode::SchemaError, "'pp' terms require i < j");
      S.add_pp(k, i, j, c);
    } else if (type == "pm") {
      S.add_pm(k, i, j, c);
    } else if (type == "mm") {
      if (i >= j) fail(ErrorCode::SchemaError, "'mm' terms require i < j");
      S.add_mm(k, i, j, c);
    } else {
      fail(ErrorCode::SchemaError, "term type must be \"pp\", \"pm\" or \"mm\"");
    }
  }
  S.validate();
  return S;
}

/// Canonical form: terms sorted by (k, species, i, j), zero coefficients
/// dropped, shortest round-trip float formatting.
inline std::string emit_document(const StructureEquations& S) {
  nlohmann::ordered_json doc;
  doc["name"] = S.name();
  doc["n"] = S.n();
  doc["terms"] = nlohmann::ordered_json::array();
  const int n = S.n();
  auto push = [&doc](int k, const char* type, int i, int j, Cx c) {
    if (c == Cx(0, 0)) return;
    nlohmann::ordered_json t;
    t["k"] = k + 1;
    t["type"] = type;
    t["i"] = i + 1;
    t["j"] = j + 1;
    t["re"] = c.real();
    t["im"] = c.imag();
    doc["terms"].push_back(std::move(t));
  };
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) push(k, "pp", i, j, S.E(k, i, j));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) push(k, "pm", i, j, S.F(k, i, j));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) push(k, "mm", i, j, S.G(k, i, j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace btp

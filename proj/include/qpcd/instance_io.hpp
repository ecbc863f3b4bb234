#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qpcd/model.hpp"

namespace qpcd {

namespace detail {

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Vector json_vector(const nlohmann::json& j, const char* key, Index expected) {
  if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' missing or not an array");
  const auto& a = j[key];
  if (static_cast<Index>(a.size()) != expected)
    throw Error(ErrorCode::DimensionMismatch, std::string("field '") + key + "' has length " + std::to_string(a.size()) +
                                                  ", expected " + std::to_string(expected));
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) {
    if (!a[i].is_number()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' entry " + std::to_string(i) + " is not a number");
    v(i) = a[i].get<double>();
  }
  return v;
}

inline Matrix json_matrix(const nlohmann::json& j, const char* key, Index rows, Index cols) {
  if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' missing or not an array");
  const auto& a = j[key];
  if (static_cast<Index>(a.size()) != rows)
    throw Error(ErrorCode::DimensionMismatch, std::string("field '") + key + "' has " + std::to_string(a.size()) + " rows, expected " + std::to_string(rows));
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = a[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error(ErrorCode::DimensionMismatch, std::string("field '") + key + "' row " + std::to_string(i) + " has wrong length");
    for (Index k = 0; k < cols; ++k) {
      if (!row[k].is_number()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a number");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

inline void write_vector(std::ostream& os, const Vector& v) {
  os << '[';
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_number(v(i));
  os << ']';
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  os << "[\n";
  for (Index i = 0; i < m.rows(); ++i) {
    os << "    ";
    write_vector(os, m.row(i).transpose());
    os << (i + 1 < m.rows() ? ",\n" : "\n");
  }
  os << "  ]";
}

}  // namespace detail

inline QpInstance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "top level is not an object");
  for (const char* key : {"n", "m"})
    if (!j.contains(key) || !j[key].is_number_integer()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' missing or not an integer");
  const Index n = j["n"].get<Index>();
  const Index m = j["m"].get<Index>();
  if (n < 1 || m < 0) throw Error(ErrorCode::DimensionMismatch, "n must be positive and m nonnegative");
  QpInstance inst;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw Error(ErrorCode::ParseError, "field 'name' is not a string");
    inst.name = j["name"].get<std::string>();
  }
  inst.A = m > 0 ? detail::json_matrix(j, "A", m, n) : Matrix(0, n);
  inst.b = detail::json_vector(j, "b", m);
  inst.H = detail::json_matrix(j, "H", n, n);
  inst.p = detail::json_vector(j, "p", n);
  if (j.contains("vR") && !j["vR"].is_null()) {
    if (!j["vR"].is_number()) throw Error(ErrorCode::ParseError, "field 'vR' is not a number");
    inst.vR = j["vR"].get<double>();
  }
  return inst;
}

inline QpInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_instance(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

inline std::string format_instance(const QpInstance& inst) {
  check_dimensions(inst);
  std::ostringstream os;
  nlohmann::json name = inst.name;
  os << "{\n  \"name\": " << name.dump() << ",\n";
  os << "  \"n\": " << inst.n() << ",\n  \"m\": " << inst.m() << ",\n";
  os << "  \"A\": ";
  detail::write_matrix(os, inst.A);
  os << ",\n  \"b\": ";
  detail::write_vector(os, inst.b);
  os << ",\n  \"H\": ";
  detail::write_matrix(os, inst.H);
  os << ",\n  \"p\": ";
  detail::write_vector(os, inst.p);
  if (inst.vR) os << ",\n  \"vR\": " << detail::format_number(*inst.vR);
  os << "\n}\n";
  return os.str();
}

inline void write_instance(const QpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << format_instance(inst);
}

}  // namespace qpcd

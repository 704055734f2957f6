#pragma once

#include <json.hpp>

#include "seqtest/convex_body.hpp"
#include "seqtest/errors.hpp"

namespace seqtest::detail {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

inline Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector row = vector_from_json(j[i]);
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError("ragged matrix rows");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

inline Json body_to_json(const ConvexBody& b) {
  Json out;
  if (b.is_box()) {
    out["box"] = {{"lower", to_json(b.lower())}, {"upper", to_json(b.upper())}};
  } else {
    Json p;
    p["A"] = to_json(b.user_A());
    p["b"] = to_json(b.user_b());
    if (b.simplex_restricted()) {
      p["simplex_restricted"] = true;
      p["margin"] = b.margin();
    }
    out["polytope"] = p;
  }
  return out;
}

inline ConvexBody body_from_json(const Json& j) {
  try {
    if (j.contains("box")) {
      const Json& b = j.at("box");
      return ConvexBody::box(vector_from_json(b.at("lower")), vector_from_json(b.at("upper")));
    }
    if (j.contains("polytope")) {
      const Json& p = j.at("polytope");
      const bool simplex = p.value("simplex_restricted", false);
      const double margin = p.value("margin", 1e-9);
      return ConvexBody::polytope(matrix_from_json(p.at("A")), vector_from_json(p.at("b")),
                                  simplex, margin);
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("invalid parameter set: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed parameter set: ") + e.what());
  }
  throw ConfigError("a parameter set must be {\"box\": ...} or {\"polytope\": ...}");
}

}  // namespace seqtest::detail

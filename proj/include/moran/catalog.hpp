#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "moran/dynamics.hpp"
#include "moran/errors.hpp"

namespace moran {

using Rows = std::vector<std::vector<double>>;

namespace landscape {

struct Neutral {
  std::size_t n = 2;
};
/// Type 1 has constant fitness r, type 2 has fitness 1.
struct MoranR {
  double r = 1.0;
};
struct HawkDove {};
struct ZeroDiag {};
/// Generalized rock-paper-scissors: win payoff a, loss payoff -b.
struct RSP {
  double a = 1.0;
  double b = 1.0;
};

}  // namespace landscape

using LandscapeId =
    std::variant<landscape::Neutral, landscape::MoranR, landscape::HawkDove, landscape::ZeroDiag, landscape::RSP>;

inline GameMatrix landscape_matrix(const LandscapeId& id) {
  return std::visit(
      [](const auto& l) -> GameMatrix {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, landscape::Neutral>) {
          if (l.n < 2) throw error(errc::invalid_dimension, "neutral landscape needs n >= 2");
          return GameMatrix(SquareMatrix(l.n, 1.0));
        } else if constexpr (std::is_same_v<T, landscape::MoranR>) {
          if (!(l.r > 0.0) || !std::isfinite(l.r)) throw error(errc::parameter, "Moran landscape needs r > 0");
          return GameMatrix(Rows{{l.r, l.r}, {1.0, 1.0}});
        } else if constexpr (std::is_same_v<T, landscape::HawkDove>) {
          return GameMatrix(Rows{{1.0, 2.0}, {2.0, 1.0}});
        } else if constexpr (std::is_same_v<T, landscape::ZeroDiag>) {
          return GameMatrix(Rows{{0.0, 1.0}, {1.0, 0.0}});
        } else {
          return GameMatrix(Rows{{0.0, -l.b, l.a}, {l.a, 0.0, -l.b}, {-l.b, l.a, 0.0}});
        }
      },
      id);
}

inline std::string landscape_name(const LandscapeId& id) {
  return std::visit(
      [](const auto& l) -> std::string {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, landscape::Neutral>) return "neutral";
        else if constexpr (std::is_same_v<T, landscape::MoranR>) return "moran";
        else if constexpr (std::is_same_v<T, landscape::HawkDove>) return "hawk_dove";
        else if constexpr (std::is_same_v<T, landscape::ZeroDiag>) return "zero_diag";
        else return "rsp";
      },
      id);
}

/// Parses {"n": k, "matrix": [[...], ...]} (row-major, k x k, numeric).
inline GameMatrix load_game_matrix(const nlohmann::json& doc) {
  if (!doc.is_object()) throw error(errc::schema, "/: expected an object with \"n\" and \"matrix\"");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw error(errc::schema, "/n: expected an integer");
  }
  const long long n = doc["n"].get<long long>();
  if (n < 1) throw error(errc::schema, "/n: must be positive");
  if (!doc.contains("matrix") || !doc["matrix"].is_array()) {
    throw error(errc::schema, "/matrix: expected an array of rows");
  }
  const auto& rows = doc["matrix"];
  if (static_cast<long long>(rows.size()) != n) {
    throw error(errc::schema, "/matrix: expected " + std::to_string(n) + " rows, found " +
                                  std::to_string(rows.size()));
  }
  std::vector<std::vector<double>> values(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = "/matrix/" + std::to_string(i);
    if (!rows[i].is_array() || static_cast<long long>(rows[i].size()) != n) {
      throw error(errc::schema, where + ": expected an array of " + std::to_string(n) + " numbers");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!rows[i][j].is_number()) {
        throw error(errc::schema, where + "/" + std::to_string(j) + ": expected a number");
      }
      values[i].push_back(rows[i][j].get<double>());
    }
  }
  try {
    return GameMatrix(values);
  } catch (const error& e) {
    throw error(errc::schema, std::string("/matrix: ") + e.what());
  }
}

inline GameMatrix parse_game_matrix(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw error(errc::schema, std::string("invalid JSON: ") + e.what());
  }
  return load_game_matrix(doc);
}

inline GameMatrix load_game_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_game_matrix(buffer.str());
}

inline nlohmann::json to_json(const GameMatrix& A) {
  return nlohmann::json{{"n", A.size()}, {"matrix", A.to_rows()}};
}

}  // namespace moran

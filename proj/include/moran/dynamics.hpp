#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "moran/errors.hpp"
#include "moran/simplex_lattice.hpp"

namespace moran {

/// Dense row-major square matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}

  explicit SquareMatrix(const std::vector<std::vector<double>>& rows) : n_(rows.size()) {
    values_.reserve(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (rows[i].size() != n_) {
        throw error(errc::invalid_dimension, "row " + std::to_string(i) + " has " +
                                                 std::to_string(rows[i].size()) +
                                                 " entries, expected " + std::to_string(n_));
      }
      values_.insert(values_.end(), rows[i].begin(), rows[i].end());
    }
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * n_, n_);
  }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) rows[i].assign(row(i).begin(), row(i).end());
    return rows;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Payoff matrix A of a linear fitness landscape f(abar) = A abar.
class GameMatrix : public SquareMatrix {
 public:
  GameMatrix() = default;
  explicit GameMatrix(const std::vector<std::vector<double>>& rows) : SquareMatrix(rows) {
    validate();
  }
  explicit GameMatrix(SquareMatrix m) : SquareMatrix(std::move(m)) { validate(); }

  /// All rows equal: every type has the same fitness at every state.
  bool is_constant_fitness() const noexcept {
    for (std::size_t i = 1; i < size(); ++i) {
      for (std::size_t j = 0; j < size(); ++j) {
        if ((*this)(i, j) != (*this)(0, j)) return false;
      }
    }
    return true;
  }

 private:
  void validate() const {
    if (size() < 1) throw error(errc::invalid_dimension, "empty game matrix");
    for (std::size_t i = 0; i < size(); ++i) {
      for (double v : row(i)) {
        if (!std::isfinite(v)) throw error(errc::validation, "non-finite game matrix entry");
      }
    }
  }
};

/// Row-stochastic mutation matrix: entry (i, j) is the probability that the
/// offspring of a type-i parent is of type j.
class MutationMatrix : public SquareMatrix {
 public:
  MutationMatrix() = default;
  explicit MutationMatrix(SquareMatrix m) : SquareMatrix(std::move(m)) {
    for (std::size_t i = 0; i < size(); ++i) {
      double sum = 0.0;
      for (double v : row(i)) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw error(errc::validation, "mutation entry outside [0,1] in row " + std::to_string(i));
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw error(errc::validation, "mutation row " + std::to_string(i) + " sums to " +
                                          std::to_string(sum));
      }
    }
  }

  bool is_symmetric() const noexcept {
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) {
        if ((*this)(i, j) != (*this)(j, i)) return false;
      }
    }
    return true;
  }
};

// Incentive variants.
struct QReplicator {
  double q = 1.0;
};
struct QFermi {
  double q = 1.0;
  double beta = 1.0;
};
struct BestReply {};
struct Neutral {};

using IncentiveSpec = std::variant<QReplicator, QFermi, BestReply, Neutral>;

struct UniformMutation {
  double mu = 0.0;
};
struct ExplicitMutation {
  MutationMatrix matrix;
};

using MutationModel = std::variant<UniformMutation, ExplicitMutation>;

inline void validate(const IncentiveSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, QReplicator>) {
          if (!(s.q >= 0.0) || !std::isfinite(s.q)) throw error(errc::parameter, "q must be >= 0");
        } else if constexpr (std::is_same_v<T, QFermi>) {
          if (!(s.q >= 0.0) || !std::isfinite(s.q)) throw error(errc::parameter, "q must be >= 0");
          if (!(s.beta >= 0.0) || !std::isfinite(s.beta)) {
            throw error(errc::parameter, "beta must be >= 0");
          }
        }
      },
      spec);
}

inline std::string describe(const IncentiveSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, QReplicator>) return "replicator(q=" + std::to_string(s.q) + ")";
        else if constexpr (std::is_same_v<T, QFermi>)
          return "fermi(q=" + std::to_string(s.q) + ",beta=" + std::to_string(s.beta) + ")";
        else if constexpr (std::is_same_v<T, BestReply>) return "best_reply";
        else return "neutral";
      },
      spec);
}

inline std::vector<double> fitness(const GameMatrix& A, std::span<const double> abar) {
  if (abar.size() != A.size()) {
    throw error(errc::invalid_dimension, "game matrix is " + std::to_string(A.size()) +
                                             "x" + std::to_string(A.size()) + " but state has " +
                                             std::to_string(abar.size()) + " types");
  }
  double total = 0.0;
  for (double x : abar) {
    if (x < 0.0) throw error(errc::validation, "negative population share");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw error(errc::validation, "population shares do not sum to 1");
  std::vector<double> f(A.size(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < A.size(); ++j) f[i] += A(i, j) * abar[j];
  }
  return f;
}

namespace detail {

// 0^0 = 1, so q = 0 incentives give weight to absent types.
inline double share_power(double share, double q) { return std::pow(share, q); }

inline std::vector<double> incentive_at(const IncentiveSpec& spec, const GameMatrix& A,
                                        std::span<const double> abar) {
  const std::size_t n = abar.size();
  std::vector<double> phi(n, 0.0);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Neutral>) {
          phi.assign(abar.begin(), abar.end());
        } else if constexpr (std::is_same_v<T, QReplicator>) {
          std::vector<double> f = fitness(A, abar);
          for (std::size_t i = 0; i < n; ++i) {
            double w = share_power(abar[i], s.q);
            if (w > 0.0 && f[i] < 0.0) {
              throw error(errc::ill_defined_incentive,
                          "negative fitness for type " + std::to_string(i) + " under the replicator incentive");
            }
            phi[i] = w * f[i];
          }
        } else if constexpr (std::is_same_v<T, QFermi>) {
          std::vector<double> f = fitness(A, abar);
          double shift = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < n; ++i) {
            if (share_power(abar[i], s.q) > 0.0) shift = std::max(shift, s.beta * f[i]);
          }
          double total = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            double w = share_power(abar[i], s.q);
            phi[i] = w > 0.0 ? w * std::exp(s.beta * f[i] - shift) : 0.0;
            total += phi[i];
          }
          if (total > 0.0) {
            for (double& v : phi) v /= total;
          }
        } else {
          if (n != 2) {
            throw error(errc::unsupported, "best-reply incentive is only defined for two types");
          }
          std::vector<double> f = fitness(A, abar);
          // The fitter type among those present reproduces; exact ties split by share.
          if (abar[0] > 0.0 && (abar[1] == 0.0 || f[0] > f[1])) {
            phi[0] = abar[0];
          } else if (abar[1] > 0.0 && (abar[0] == 0.0 || f[1] > f[0])) {
            phi[1] = abar[1];
          } else {
            phi[0] = abar[0];
            phi[1] = abar[1];
          }
        }
      },
      spec);
  double total = 0.0;
  for (double v : phi) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw error(errc::ill_defined_incentive, "incentive value is negative or non-finite");
    }
    total += v;
  }
  if (!(total > 0.0)) throw error(errc::ill_defined_incentive, "incentive sums to zero");
  return phi;
}

}  // namespace detail

/// phi(abar) for the given incentive. Throws ill_defined_incentive when the
/// values cannot be normalized.
inline std::vector<double> incentive_values(const IncentiveSpec& spec, const GameMatrix& A,
                                            const PopulationState& a) {
  validate(spec);
  if (!std::holds_alternative<Neutral>(spec) && A.size() != a.types()) {
    throw error(errc::invalid_dimension, "game matrix does not match the number of types");
  }
  try {
    return detail::incentive_at(spec, A, a.distribution());
  } catch (const error& e) {
    if (e.code() != errc::ill_defined_incentive) throw;
    throw error(errc::ill_defined_incentive, std::string(e.what()) + " at state " + a.to_string());
  }
}

inline MutationMatrix mutation_matrix(const MutationModel& model, std::size_t n) {
  return std::visit(
      [n](const auto& m) -> MutationMatrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformMutation>) {
          if (n < 2) throw error(errc::invalid_dimension, "need at least two types");
          if (!(m.mu >= 0.0 && m.mu <= 1.0)) {
            throw error(errc::parameter, "mutation probability must lie in [0,1]");
          }
          SquareMatrix out(n, m.mu / static_cast<double>(n - 1));
          for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0 - m.mu;
          return MutationMatrix(std::move(out));
        } else {
          if (m.matrix.size() != n) {
            throw error(errc::invalid_dimension, "mutation matrix does not match the number of types");
          }
          return m.matrix;
        }
      },
      model);
}

/// p_i = sum_k phi_k M(k, i) / sum_k phi_k: the probability that the next
/// offspring is of type i.
inline std::vector<double> reproduction_probabilities(std::span<const double> phi,
                                                      const MutationMatrix& M) {
  if (phi.size() != M.size()) {
    throw error(errc::invalid_dimension, "incentive and mutation matrix sizes differ");
  }
  double total = 0.0;
  for (double v : phi) {
    if (v < 0.0 || !std::isfinite(v)) throw error(errc::ill_defined_incentive, "negative incentive");
    total += v;
  }
  if (!(total > 0.0)) throw error(errc::ill_defined_incentive, "incentive sums to zero");
  const std::size_t n = phi.size();
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (phi[k] == 0.0) continue;
    const double w = phi[k] / total;
    for (std::size_t i = 0; i < n; ++i) p[i] += w * M(k, i);
  }
  return p;
}

}  // namespace moran

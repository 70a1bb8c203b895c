#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "moran/errors.hpp"
#include "moran/format.hpp"
#include "moran/kernel.hpp"
#include "moran/simplex_lattice.hpp"

namespace moran {

enum class StationaryMethod { closed_form, reversible_exact, iterative };

inline const char* to_string(StationaryMethod m) {
  switch (m) {
    case StationaryMethod::closed_form: return "closed_form";
    case StationaryMethod::reversible_exact: return "reversible_exact";
    case StationaryMethod::iterative: return "iterative";
  }
  return "unknown";
}

struct StationaryDistribution {
  std::vector<double> probabilities;
  /// Sup-norm of sT - s against the kernel it was checked with; 0 until checked
  /// for closed forms.
  double residual = 0.0;
  StationaryMethod method = StationaryMethod::iterative;
  std::size_t iterations = 0;
};

struct SolverOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

/// x (x+1) ... (x+y-1); 1 for y = 0.
inline double rising_factorial(double x, int y) {
  if (y < 0) throw error(errc::parameter, "rising factorial needs a non-negative count");
  double out = 1.0;
  for (int j = 0; j < y; ++j) out *= x + j;
  return out;
}

/// Concentration parameter of the neutral stationary distribution,
/// N mu / (n - 1 - n mu). Undefined at mu = (n-1)/n.
struct Alpha {
  double value = 0.0;

  static Alpha of(std::size_t n, int N, double mu) {
    const double denom = static_cast<double>(n - 1) - static_cast<double>(n) * mu;
    if (denom == 0.0) throw error(errc::parameter, "alpha is undefined at mu = (n-1)/n");
    return Alpha{N * mu / denom};
  }
};

/// sup_j |(sT)_j - s_j|.
inline double stationary_residual(const TransitionKernel& k, std::span<const double> s) {
  if (s.size() != k.size()) throw error(errc::invalid_dimension, "distribution length differs from kernel");
  std::vector<double> next(s.size(), 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (const KernelEntry& e : k.row(i)) next[e.col] += s[i] * e.prob;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) worst = std::max(worst, std::abs(next[j] - s[j]));
  return worst;
}

namespace detail {

// Exponentiates log-weights after subtracting their maximum and normalizes.
inline std::vector<double> normalize_logs(std::span<const double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> out(logs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out[i] = std::exp(logs[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

// log|(x)_y| and sign for y = 0..max_y, accumulated term by term.
struct SignedLogRising {
  std::vector<double> log_abs;
  std::vector<int> sign;

  SignedLogRising(double x, int max_y) : log_abs(max_y + 1, 0.0), sign(max_y + 1, 1) {
    for (int y = 1; y <= max_y; ++y) {
      const double term = x + (y - 1);
      log_abs[y] = log_abs[y - 1] + std::log(std::abs(term));
      sign[y] = term > 0.0 ? sign[y - 1] : (term < 0.0 ? -sign[y - 1] : 0);
    }
  }
};

}  // namespace detail

/// Dirichlet-multinomial stationary distribution of the neutral incentive
/// process with uniform mutation probability mu, evaluated in log space.
/// At mu = (n-1)/n it is the multinomial with equal cell probabilities.
/// For mu > (n-1)/n alpha is negative; the same formula is used when every
/// signed term is positive, otherwise closed_form_unavailable is thrown.
inline StationaryDistribution neutral_stationary(std::size_t n, int N, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw error(errc::parameter, "mu must lie in (0,1)");
  SimplexLattice lattice(n, N);
  const double uniform_mu = static_cast<double>(n - 1) / static_cast<double>(n);
  const bool multinomial = std::abs(mu - uniform_mu) <= 1e-15;

  std::vector<double> log_factorial(N + 1, 0.0);
  for (int i = 1; i <= N; ++i) log_factorial[i] = log_factorial[i - 1] + std::log(static_cast<double>(i));

  std::vector<double> logs;
  logs.reserve(lattice.size());
  std::vector<int> counts(n, 0);
  counts[0] = N;
  if (multinomial) {
    do {
      double l = log_factorial[N];
      for (int c : counts) l -= log_factorial[c];
      logs.push_back(l);
    } while (SimplexLattice::next_composition(counts));
  } else {
    const double alpha = Alpha::of(n, N, mu).value;
    const detail::SignedLogRising part(alpha, N);
    const detail::SignedLogRising whole(static_cast<double>(n) * alpha, N);
    if (whole.sign[N] == 0) {
      throw error(errc::closed_form_unavailable, "normalizing rising factorial vanishes");
    }
    do {
      double l = log_factorial[N] - whole.log_abs[N];
      int sign = whole.sign[N];
      for (int c : counts) {
        l += part.log_abs[c] - log_factorial[c];
        sign *= part.sign[c];
      }
      if (sign <= 0) {
        throw error(errc::closed_form_unavailable,
                    "Dirichlet-multinomial weight is not positive for mu=" + format_double(mu));
      }
      logs.push_back(l);
    } while (SimplexLattice::next_composition(counts));
  }
  return StationaryDistribution{detail::normalize_logs(logs), 0.0, StationaryMethod::closed_form, 0};
}

/// Power iteration s <- sT from the uniform vector until ||sT - s||_inf <= tol.
/// The kernel must be irreducible.
inline StationaryDistribution solve_stationary(const TransitionKernel& k, SolverOptions options = {}) {
  if (!(options.tolerance > 0.0)) throw error(errc::parameter, "tolerance must be positive");
  if (!is_irreducible(k)) {
    throw error(errc::reducible,
                "kernel is reducible; restrict it to a recurrent class before solving");
  }
  const std::size_t m = k.size();
  const TransitionKernel incoming = k.transposed_structure();
  std::vector<double> s(m, 1.0 / static_cast<double>(m));
  std::vector<double> next(m, 0.0);
  double residual = 0.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    residual = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      for (const KernelEntry& e : incoming.row(j)) v += s[e.col] * e.prob;
      next[j] = v;
      total += v;
      residual = std::max(residual, std::abs(v - s[j]));
    }
    if (residual <= options.tolerance) {
      return StationaryDistribution{std::move(s), residual, StationaryMethod::iterative, it};
    }
    for (std::size_t j = 0; j < m; ++j) s[j] = next[j] / total;
  }
  throw error(errc::convergence, "power iteration did not reach tolerance " +
                                     format_double(options.tolerance) + " in " +
                                     std::to_string(options.max_iterations) +
                                     " iterations; residual " + format_double(residual));
}

/// Stationary distribution supported on one closed class, lifted back to
/// the full state space (zero off the class).
inline StationaryDistribution solve_stationary_on_class(const TransitionKernel& k,
                                                        std::span<const std::size_t> members,
                                                        SolverOptions options = {}) {
  const TransitionKernel sub = restrict_to_class(k, members);
  StationaryDistribution local = solve_stationary(sub, options);
  std::vector<double> full(k.size(), 0.0);
  for (std::size_t i = 0; i < members.size(); ++i) full[members[i]] = local.probabilities[i];
  local.probabilities = std::move(full);
  local.residual = stationary_residual(k, local.probabilities);
  return local;
}

struct DetailedBalance {
  bool holds = false;
  double max_violation = 0.0;
};

/// Largest |s_a T_a^b - s_b T_b^a| over pairs connected in either direction.
inline DetailedBalance check_detailed_balance(const TransitionKernel& k, std::span<const double> s,
                                              double tol) {
  if (s.size() != k.size()) throw error(errc::invalid_dimension, "distribution length differs from kernel");
  double worst = 0.0;
  for (std::size_t a = 0; a < k.size(); ++a) {
    for (const KernelEntry& e : k.row(a)) {
      if (e.col == a) continue;
      worst = std::max(worst, std::abs(s[a] * e.prob - s[e.col] * k.probability(e.col, a)));
    }
  }
  return DetailedBalance{worst <= tol, worst};
}

/// Exact stationary distribution of a reversible chain: products of
/// forward/backward ratios along a breadth-first spanning tree from state 0.
/// For a two-type process the tree is the birth-death path itself. The result
/// is then checked against detailed balance on every edge.
inline StationaryDistribution reversible_stationary(const TransitionKernel& k,
                                                    double balance_tol = 1e-10) {
  const std::size_t m = k.size();
  if (m == 0) throw error(errc::invalid_dimension, "empty kernel");
  std::vector<double> logs(m, 0.0);
  std::vector<bool> seen(m, false);
  std::vector<std::size_t> queue{0};
  seen[0] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t a = queue[head];
    for (const KernelEntry& e : k.row(a)) {
      if (e.col == a || seen[e.col]) continue;
      const double back = k.probability(e.col, a);
      if (back == 0.0) {
        throw error(errc::not_reversible, "transition " + std::to_string(a) + " -> " +
                                              std::to_string(e.col) +
                                              " has no reverse; no reversible product exists");
      }
      logs[e.col] = logs[a] + std::log(e.prob) - std::log(back);
      seen[e.col] = true;
      queue.push_back(e.col);
    }
  }
  if (queue.size() != m) {
    throw error(errc::not_reversible, "state graph is not connected from state 0");
  }
  StationaryDistribution out{detail::normalize_logs(logs), 0.0, StationaryMethod::reversible_exact, 0};
  const DetailedBalance balance = check_detailed_balance(k, out.probabilities, balance_tol);
  if (!balance.holds) {
    throw error(errc::not_reversible,
                "detailed balance fails by " + format_double(balance.max_violation));
  }
  out.residual = stationary_residual(k, out.probabilities);
  return out;
}

/// CSV with header "rank,a1,...,an,probability" (just "rank,probability" for
/// kernels without a lattice).
inline void write_stationary_csv(std::ostream& os, const TransitionKernel& k,
                                 const StationaryDistribution& s) {
  const auto lattice = k.lattice();
  os << "rank";
  if (lattice) {
    for (std::size_t i = 0; i < lattice->types(); ++i) os << ",a" << (i + 1);
  }
  os << ",probability\n";
  std::vector<int> counts(lattice ? lattice->types() : 0);
  for (std::size_t r = 0; r < s.probabilities.size(); ++r) {
    os << r;
    if (lattice) {
      lattice->unrank_into(r, counts);
      for (int c : counts) os << ',' << c;
    }
    os << ',' << format_double(s.probabilities[r]) << '\n';
  }
}

}  // namespace moran

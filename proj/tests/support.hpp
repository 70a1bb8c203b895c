#pragma once

// Independent reference implementations and random generators used by the
// tests. Nothing here calls into the library's numerical code: the dense
// kernel is rebuilt from the transition formula directly, stationary vectors
// come from Gaussian elimination, and the neutral closed form uses lgamma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;
using Counts = std::vector<int>;

/// Compositions of N into n parts, first part descending, recursively.
inline std::vector<Counts> compositions(int n, int N) {
  std::vector<Counts> out;
  Counts cur(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      cur[static_cast<std::size_t>(i)] = left;
      out.push_back(cur);
      return;
    }
    for (int c = left; c >= 0; --c) {
      cur[static_cast<std::size_t>(i)] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, N);
  return out;
}

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

enum class Incentive { neutral, replicator, fermi };

struct Process {
  int n = 2;
  int N = 10;
  Incentive incentive = Incentive::neutral;
  double q = 1.0;
  double beta = 1.0;
  Dense A;  // empty means all-ones
  double mu = 0.1;
};

/// Dense transition matrix straight from p_j * abar_k for the uniform mutation
/// model. Fermi is evaluated without any overflow protection, so keep beta*f small.
inline Dense dense_kernel(const Process& P) {
  const auto states = compositions(P.n, P.N);
  std::map<Counts, std::size_t> index;
  for (std::size_t i = 0; i < states.size(); ++i) index[states[i]] = i;
  const std::size_t n = static_cast<std::size_t>(P.n);
  Dense T(states.size(), std::vector<double>(states.size(), 0.0));
  for (std::size_t s = 0; s < states.size(); ++s) {
    const Counts& a = states[s];
    std::vector<double> x(n), f(n, 1.0), phi(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(a[i]) / P.N;
    if (!P.A.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        f[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) f[i] += P.A[i][j] * x[j];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::pow(x[i], P.q);
      switch (P.incentive) {
        case Incentive::neutral: phi[i] = x[i]; break;
        case Incentive::replicator: phi[i] = w * f[i]; break;
        case Incentive::fermi: phi[i] = w * std::exp(P.beta * f[i]); break;
      }
    }
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double m = i == k ? 1.0 - P.mu : P.mu / (P.n - 1);
        p[i] += phi[k] / total * m;
      }
    }
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (j == k || a[k] == 0) continue;
        Counts b = a;
        ++b[j];
        --b[k];
        const double t = p[j] * x[k];
        T[s][index.at(b)] += t;
        off += t;
      }
    }
    T[s][s] = 1.0 - off;
  }
  return T;
}

/// Solves s T = s, sum(s) = 1 by Gaussian elimination with partial pivoting.
inline std::vector<double> dense_stationary(const Dense& T) {
  const std::size_t m = T.size();
  // Rows of the system: (T^t - I) s = 0 with the last equation replaced by sum = 1.
  Dense M(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) M[i][j] = T[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < m; ++j) M[m - 1][j] = 1.0;
  M[m - 1][m] = 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
    }
    std::swap(M[c], M[piv]);
    const double d = M[c][c];
    if (d == 0.0) throw std::runtime_error("singular system");
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c || M[r][c] == 0.0) continue;
      const double factor = M[r][c] / d;
      for (std::size_t j = c; j <= m; ++j) M[r][j] -= factor * M[c][j];
    }
  }
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = M[i][m] / M[i][i];
  return s;
}

inline double entropy_rate(const Dense& T, const std::vector<double>& s) {
  double h = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) h += s[i] * entropy(T[i]);
  return h;
}

/// Dirichlet-multinomial weight of one state, 0 < mu < (n-1)/n.
inline double dirichlet_multinomial(const Counts& a, double mu) {
  const int n = static_cast<int>(a.size());
  const int N = std::accumulate(a.begin(), a.end(), 0);
  const double alpha = N * mu / (n - 1 - n * mu);
  double lg = std::lgamma(N + 1.0) + std::lgamma(n * alpha) - std::lgamma(n * alpha + N);
  for (int c : a) lg += std::lgamma(alpha + c) - std::lgamma(alpha) - std::lgamma(c + 1.0);
  return std::exp(lg);
}

/// Multinomial(N; a) / n^N.
inline double uniform_multinomial(const Counts& a) {
  const int n = static_cast<int>(a.size());
  const int N = std::accumulate(a.begin(), a.end(), 0);
  double lg = std::lgamma(N + 1.0) - N * std::log(static_cast<double>(n));
  for (int c : a) lg -= std::lgamma(c + 1.0);
  return std::exp(lg);
}

inline double sup_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace oracle

namespace gen {

/// Small hand-rolled generator for property tests; seeded per test.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(integer(0, static_cast<int>(xs.size()) - 1))];
  }

  std::vector<std::vector<double>> matrix(int n, double lo, double hi) {
    std::vector<std::vector<double>> m(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (auto& row : m)
      for (double& v : row) v = uniform(lo, hi);
    return m;
  }

  std::vector<double> simplex_point(int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& v : x) total += v = -std::log(uniform(1e-12, 1.0));
    for (double& v : x) v /= total;
    return x;
  }

  std::vector<std::vector<double>> stochastic(int n) {
    std::vector<std::vector<double>> m;
    for (int i = 0; i < n; ++i) m.push_back(simplex_point(n));
    return m;
  }
};

}  // namespace gen

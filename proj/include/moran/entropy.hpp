#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "moran/errors.hpp"
#include "moran/kernel.hpp"
#include "moran/simplex_lattice.hpp"
#include "moran/stationary.hpp"

namespace moran {

namespace detail {

inline double entropy_unchecked(std::span<const KernelEntry> row) noexcept {
  double h = 0.0;
  for (const KernelEntry& e : row) {
    if (e.prob > 0.0) h -= e.prob * std::log(e.prob);
  }
  return h;
}

}  // namespace detail

/// -sum p_i ln p_i in nats, with 0 ln 0 = 0.
inline double shannon_entropy(std::span<const double> p) {
  double total = 0.0;
  double h = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) throw error(errc::validation, "negative or non-finite probability");
    total += v;
    if (v > 0.0) h -= v * std::log(v);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw error(errc::validation, "probabilities sum to " + format_double(total));
  }
  return h;
}

/// Entropy of the full outgoing row of state `a`, self-loop included.
inline double transition_entropy(const TransitionKernel& k, StateIndex a) {
  if (a.value >= k.size()) throw error(errc::index_out_of_range, "state index outside the kernel");
  return detail::entropy_unchecked(k.row(a.value));
}

inline std::vector<double> transition_entropies(const TransitionKernel& k) {
  std::vector<double> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = detail::entropy_unchecked(k.row(i));
  return out;
}

/// (2n - 1)/n ln n: the largest entropy any incentive-process transition row
/// on n types can reach.
inline double entropy_rate_bound(std::size_t n) {
  if (n < 2) throw error(errc::invalid_dimension, "bound needs n >= 2");
  const double nn = static_cast<double>(n);
  return (2.0 * nn - 1.0) / nn * std::log(nn);
}

/// The bound as a fraction of ln(n(n-1)+1), the entropy of a uniform row of
/// the same length.
inline double bound_fraction(std::size_t n) {
  const double nn = static_cast<double>(n);
  return entropy_rate_bound(n) / std::log(nn * (nn - 1.0) + 1.0);
}

struct EntropyReport {
  double entropy_rate = 0.0;
  std::vector<double> per_state_transition_entropy;
  /// Present when the kernel comes from an n-type lattice.
  std::optional<double> bound;
  std::size_t types = 0;
  int population = 0;
  double residual = 0.0;
  StationaryMethod method = StationaryMethod::iterative;
};

/// sum_a s_a H(T_a).
inline EntropyReport entropy_rate(const TransitionKernel& k, const StationaryDistribution& s) {
  if (s.probabilities.size() != k.size()) {
    throw error(errc::invalid_dimension, "stationary distribution has " +
                                             std::to_string(s.probabilities.size()) +
                                             " entries but the kernel has " + std::to_string(k.size()));
  }
  EntropyReport report;
  report.per_state_transition_entropy = transition_entropies(k);
  double rate = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    rate += s.probabilities[i] * report.per_state_transition_entropy[i];
  }
  report.entropy_rate = rate;
  if (k.has_lattice()) report.bound = entropy_rate_bound(k.types());
  report.types = k.types();
  report.population = k.population();
  report.residual = s.residual;
  report.method = s.method;
  return report;
}

/// States whose transition entropy is within `rel_tol` (relative) of the
/// maximum, in rank order.
inline std::vector<StateIndex> max_transition_entropy_states(const TransitionKernel& k,
                                                             double rel_tol = 1e-12) {
  const std::vector<double> h = transition_entropies(k);
  if (h.empty()) return {};
  const double top = *std::max_element(h.begin(), h.end());
  std::vector<StateIndex> out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (top - h[i] <= rel_tol * std::max(1.0, top)) out.push_back(StateIndex{i});
  }
  return out;
}

/// Plug-in estimate from consecutive pairs: empirical occupancy of each
/// origin state times the entropy of its empirical transition row.
inline double plug_in_entropy_rate(std::span<const StateIndex> trajectory) {
  if (trajectory.size() < 2) throw error(errc::parameter, "trajectory needs at least two states");
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
  std::map<std::size_t, std::size_t> origins;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    ++pairs[{trajectory[t].value, trajectory[t + 1].value}];
    ++origins[trajectory[t].value];
  }
  const double transitions = static_cast<double>(trajectory.size() - 1);
  double rate = 0.0;
  for (const auto& [key, count] : pairs) {
    const double c = static_cast<double>(count);
    rate -= c / transitions * std::log(c / static_cast<double>(origins[key.first]));
  }
  return rate;
}

/// {"entropy_rate", "bound", "n", "N", "residual"}; bound is null for raw kernels.
inline nlohmann::json to_json(const EntropyReport& r) {
  nlohmann::json j;
  j["entropy_rate"] = r.entropy_rate;
  j["bound"] = r.bound ? nlohmann::json(*r.bound) : nlohmann::json(nullptr);
  j["n"] = r.types;
  j["N"] = r.population;
  j["residual"] = r.residual;
  return j;
}

}  // namespace moran

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>

#include "moran/dynamics.hpp"
#include "moran/entropy.hpp"
#include "moran/errors.hpp"
#include "moran/kernel.hpp"
#include "moran/stationary.hpp"

namespace moran {

/// Everything needed to build one incentive process.
struct ProcessConfig {
  std::size_t n = 2;
  int N = 10;
  IncentiveSpec incentive = QReplicator{1.0};
  MutationModel mutation = UniformMutation{0.1};
  GameMatrix landscape;
};

struct PipelineOptions {
  SolverOptions solver;
  unsigned threads = 1;
};

struct ProcessResult {
  TransitionKernel kernel;
  StationaryDistribution stationary;
  EntropyReport report;
};

namespace detail {

inline bool is_uniformizing(const MutationModel& m, std::size_t n) {
  const auto* u = std::get_if<UniformMutation>(&m);
  return u && std::abs(u->mu - static_cast<double>(n - 1) / static_cast<double>(n)) <= 1e-15;
}

// Incentive reduces to phi = abar (up to scale) at every state.
inline bool acts_neutrally(const IncentiveSpec& spec, const GameMatrix& A) {
  if (std::holds_alternative<Neutral>(spec)) return true;
  if (const auto* r = std::get_if<QReplicator>(&spec)) return r->q == 1.0 && A.is_constant_fitness();
  if (const auto* f = std::get_if<QFermi>(&spec)) return f->q == 1.0 && A.is_constant_fitness();
  return false;
}

}  // namespace detail

/// Chooses the stationary method for a built kernel:
///   - mu = (n-1)/n: every offspring type is equally likely, so the
///     multinomial closed form holds for any landscape;
///   - neutral incentive with uniform mutation: Dirichlet-multinomial;
///   - two types: exact birth-death product;
///   - otherwise power iteration.
/// A reducible kernel is solved on its recurrent class when there is exactly one.
inline StationaryDistribution stationary_for(const ProcessConfig& config, const TransitionKernel& kernel,
                                             const SolverOptions& solver = {}) {
  const auto* uniform = std::get_if<UniformMutation>(&config.mutation);
  if (uniform && uniform->mu > 0.0 && uniform->mu < 1.0 &&
      (detail::is_uniformizing(config.mutation, config.n) ||
       detail::acts_neutrally(config.incentive, config.landscape))) {
    try {
      StationaryDistribution s = neutral_stationary(config.n, config.N, uniform->mu);
      s.residual = stationary_residual(kernel, s.probabilities);
      return s;
    } catch (const error& e) {
      if (e.code() != errc::closed_form_unavailable) throw;
    }
  }
  if (!is_irreducible(kernel)) {
    const auto classes = recurrent_classes(kernel);
    if (classes.size() != 1) {
      throw error(errc::reducible, "kernel has " + std::to_string(classes.size()) +
                                       " recurrent classes; the stationary distribution is not unique");
    }
    return solve_stationary_on_class(kernel, classes.front(), solver);
  }
  if (config.n == 2) return reversible_stationary(kernel);
  return solve_stationary(kernel, solver);
}

/// Kernel, stationary distribution and entropy report for one configuration.
inline ProcessResult analyze(const ProcessConfig& config, const PipelineOptions& options = {}) {
  ProcessResult out;
  out.kernel = build_kernel(config.n, config.N, config.incentive, config.landscape, config.mutation,
                            options.threads);
  out.stationary = stationary_for(config, out.kernel, options.solver);
  out.report = entropy_rate(out.kernel, out.stationary);
  return out;
}

}  // namespace moran

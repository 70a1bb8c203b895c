#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "moran/dynamics.hpp"
#include "moran/errors.hpp"
#include "moran/format.hpp"
#include "moran/simplex_lattice.hpp"

namespace moran {

struct KernelEntry {
  std::size_t col = 0;
  double prob = 0.0;

  friend bool operator==(const KernelEntry&, const KernelEntry&) = default;
};

/// Sparse row-stochastic matrix in compressed-row layout. Entries within a
/// row are sorted by column and exact zeros are not stored. Kernels built
/// from an incentive process remember their (n, N); kernels assembled from
/// raw rows report types() == 0.
class TransitionKernel {
 public:
  static constexpr double row_tolerance = 1e-12;

  TransitionKernel() = default;

  static TransitionKernel from_rows(const std::vector<std::vector<KernelEntry>>& rows,
                                    std::size_t types = 0, int population = 0) {
    TransitionKernel k;
    k.types_ = types;
    k.population_ = population;
    k.offsets_.reserve(rows.size() + 1);
    k.offsets_.push_back(0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<KernelEntry> row = rows[i];
      std::sort(row.begin(), row.end(),
                [](const KernelEntry& a, const KernelEntry& b) { return a.col < b.col; });
      double sum = 0.0;
      for (std::size_t e = 0; e < row.size(); ++e) {
        const KernelEntry& entry = row[e];
        if (entry.col >= rows.size()) {
          throw error(errc::validation, "row " + std::to_string(i) + " references column " +
                                            std::to_string(entry.col) + " outside the kernel");
        }
        if (e > 0 && row[e - 1].col == entry.col) {
          throw error(errc::validation, "duplicate column in row " + std::to_string(i));
        }
        if (!(entry.prob >= 0.0 && entry.prob <= 1.0)) {
          throw error(errc::validation, "probability outside [0,1] in row " + std::to_string(i));
        }
        sum += entry.prob;
        if (entry.prob > 0.0) k.entries_.push_back(entry);
      }
      if (std::abs(sum - 1.0) > row_tolerance) {
        throw error(errc::validation,
                    "row " + std::to_string(i) + " sums to " + format_double(sum));
      }
      k.offsets_.push_back(k.entries_.size());
    }
    return k;
  }

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  std::size_t types() const noexcept { return types_; }
  int population() const noexcept { return population_; }
  bool has_lattice() const noexcept { return types_ >= 2; }

  std::optional<SimplexLattice> lattice() const {
    if (!has_lattice()) return std::nullopt;
    return SimplexLattice(types_, population_);
  }

  std::span<const KernelEntry> row(std::size_t i) const {
    return std::span<const KernelEntry>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  double probability(std::size_t from, std::size_t to) const {
    auto r = row(from);
    auto it = std::lower_bound(r.begin(), r.end(), to,
                               [](const KernelEntry& e, std::size_t c) { return e.col < c; });
    return (it != r.end() && it->col == to) ? it->prob : 0.0;
  }

  /// Transposed structure: for each column, the (row, prob) pairs feeding it.
  TransitionKernel transposed_structure() const {
    TransitionKernel t;
    t.types_ = types_;
    t.population_ = population_;
    const std::size_t m = size();
    t.offsets_.assign(m + 1, 0);
    for (const KernelEntry& e : entries_) ++t.offsets_[e.col + 1];
    for (std::size_t i = 0; i < m; ++i) t.offsets_[i + 1] += t.offsets_[i];
    t.entries_.resize(entries_.size());
    std::vector<std::size_t> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (const KernelEntry& e : row(i)) t.entries_[cursor[e.col]++] = KernelEntry{i, e.prob};
    }
    return t;
  }

 private:
  friend TransitionKernel build_kernel(std::size_t, int, const IncentiveSpec&, const GameMatrix&,
                                       const MutationModel&, unsigned);

  std::size_t types_ = 0;
  int population_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<KernelEntry> entries_;
};

namespace detail {

/// Appends the row of state `counts` (rank `self`) to `out`, sorted by column.
inline void append_row(const SimplexLattice& lattice, std::span<int> counts, std::size_t self,
                       const IncentiveSpec& spec, const GameMatrix& A, const MutationMatrix& M,
                       std::vector<KernelEntry>& out) {
  const std::size_t n = lattice.types();
  const double N = lattice.population();
  std::vector<double> abar(n);
  for (std::size_t i = 0; i < n; ++i) abar[i] = counts[i] / N;

  std::vector<double> phi;
  try {
    phi = incentive_at(spec, A, abar);
  } catch (const error& e) {
    if (e.code() != errc::ill_defined_incentive) throw;
    std::vector<int> copy(counts.begin(), counts.end());
    throw error(errc::ill_defined_incentive,
                std::string(e.what()) + " at state " + PopulationState(copy).to_string());
  }
  const std::vector<double> p = reproduction_probabilities(phi, M);

  const std::size_t begin = out.size();
  double outflow = 0.0;
  lattice.for_each_neighbor(counts, [&](StepVector step, std::size_t target) {
    const double t = p[step.gain] * abar[step.lose];
    if (t > 0.0) {
      out.push_back(KernelEntry{target, t});
      outflow += t;
    }
  });
  double stay = 1.0 - outflow;
  if (stay < 0.0) {
    if (-stay > TransitionKernel::row_tolerance) {
      std::vector<int> copy(counts.begin(), counts.end());
      throw error(errc::numerical_consistency,
                  "outflow exceeds one at state " + PopulationState(copy).to_string());
    }
    for (std::size_t e = begin; e < out.size(); ++e) out[e].prob /= outflow;
    stay = 0.0;
  }
  if (stay > 0.0) out.push_back(KernelEntry{self, stay});
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(begin), out.end(),
            [](const KernelEntry& a, const KernelEntry& b) { return a.col < b.col; });
}

}  // namespace detail

/// Transition probabilities out of `a`: the self-loop plus every reachable
/// neighbor a + i_{jk}, ordered by neighbor rank. Zero-probability moves are
/// omitted.
inline std::vector<std::pair<PopulationState, double>> transition_row(const PopulationState& a,
                                                                      const IncentiveSpec& spec,
                                                                      const GameMatrix& A,
                                                                      const MutationModel& model) {
  validate(spec);
  SimplexLattice lattice(a.types(), a.population());
  const MutationMatrix M = mutation_matrix(model, a.types());
  std::vector<int> counts(a.counts().begin(), a.counts().end());
  std::vector<KernelEntry> entries;
  detail::append_row(lattice, counts, lattice.rank_unchecked(counts), spec, A, M, entries);
  std::vector<std::pair<PopulationState, double>> out;
  out.reserve(entries.size());
  for (const KernelEntry& e : entries) out.emplace_back(lattice.unrank(StateIndex{e.col}), e.prob);
  return out;
}

/// Builds the full kernel, one row per lattice state in canonical order.
/// Rows are independent; with threads > 1 contiguous blocks of rows are
/// built concurrently and concatenated in order, so the result does not
/// depend on the thread count.
inline TransitionKernel build_kernel(std::size_t n, int N, const IncentiveSpec& spec,
                                     const GameMatrix& A, const MutationModel& model,
                                     unsigned threads = 1) {
  validate(spec);
  SimplexLattice lattice(n, N);
  if (!std::holds_alternative<Neutral>(spec) && A.size() != n) {
    throw error(errc::invalid_dimension, "game matrix is " + std::to_string(A.size()) + "x" +
                                             std::to_string(A.size()) + " but n=" +
                                             std::to_string(n));
  }
  const MutationMatrix M = mutation_matrix(model, n);
  const std::size_t m = lattice.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(m / 1024 + 1)));

  struct Block {
    std::vector<std::size_t> lengths;
    std::vector<KernelEntry> entries;
    std::exception_ptr failure;
  };
  std::vector<Block> blocks(threads);
  auto work = [&](unsigned b) {
    const std::size_t first = m * b / threads;
    const std::size_t last = m * (b + 1) / threads;
    Block& block = blocks[b];
    try {
      std::vector<int> counts(n);
      lattice.unrank_into(first, counts);
      block.lengths.reserve(last - first);
      block.entries.reserve((last - first) * (n * (n - 1) + 1));
      for (std::size_t r = first; r < last; ++r) {
        const std::size_t before = block.entries.size();
        detail::append_row(lattice, counts, r, spec, A, M, block.entries);
        block.lengths.push_back(block.entries.size() - before);
        SimplexLattice::next_composition(counts);
      }
    } catch (...) {
      block.failure = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned b = 0; b < threads; ++b) pool.emplace_back(work, b);
  }

  TransitionKernel k;
  k.types_ = n;
  k.population_ = N;
  k.offsets_.reserve(m + 1);
  k.offsets_.push_back(0);
  for (Block& block : blocks) {
    if (block.failure) std::rethrow_exception(block.failure);
    for (std::size_t len : block.lengths) k.offsets_.push_back(k.offsets_.back() + len);
    k.entries_.insert(k.entries_.end(), block.entries.begin(), block.entries.end());
  }
  return k;
}

namespace detail {

inline std::vector<bool> reachable(const TransitionKernel& k, std::size_t start) {
  std::vector<bool> seen(k.size(), false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (const KernelEntry& e : k.row(v)) {
      if (!seen[e.col]) {
        seen[e.col] = true;
        stack.push_back(e.col);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// True iff the support graph is strongly connected.
inline bool is_irreducible(const TransitionKernel& k) {
  if (k.size() == 0) return false;
  auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
  return all(detail::reachable(k, 0)) && all(detail::reachable(k.transposed_structure(), 0));
}

/// Closed communicating classes (strongly connected components with no
/// outgoing edge), each sorted, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> recurrent_classes(const TransitionKernel& k) {
  const std::size_t m = k.size();
  // Kosaraju: finishing order on k, then components on the transpose.
  std::vector<std::size_t> order;
  order.reserve(m);
  std::vector<bool> seen(m, false);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t s = 0; s < m; ++s) {
    if (seen[s]) continue;
    seen[s] = true;
    stack.emplace_back(s, 0);
    while (!stack.empty()) {
      auto& [v, pos] = stack.back();
      auto r = k.row(v);
      if (pos < r.size()) {
        std::size_t w = r[pos++].col;
        if (!seen[w]) {
          seen[w] = true;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  const TransitionKernel t = k.transposed_structure();
  constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> component(m, unassigned);
  std::size_t count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (component[*it] != unassigned) continue;
    std::vector<std::size_t> todo{*it};
    component[*it] = count;
    while (!todo.empty()) {
      std::size_t v = todo.back();
      todo.pop_back();
      for (const KernelEntry& e : t.row(v)) {
        if (component[e.col] == unassigned) {
          component[e.col] = count;
          todo.push_back(e.col);
        }
      }
    }
    ++count;
  }
  std::vector<bool> closed(count, true);
  for (std::size_t v = 0; v < m; ++v) {
    for (const KernelEntry& e : k.row(v)) {
      if (component[e.col] != component[v]) closed[component[v]] = false;
    }
  }
  std::vector<std::vector<std::size_t>> members(count);
  for (std::size_t v = 0; v < m; ++v) {
    if (closed[component[v]]) members[component[v]].push_back(v);
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto& c : members) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

/// The sub-kernel on a closed class; state i of the result is members[i].
inline TransitionKernel restrict_to_class(const TransitionKernel& k,
                                          std::span<const std::size_t> members) {
  std::vector<std::size_t> local(k.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = i;
  std::vector<std::vector<KernelEntry>> rows(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (const KernelEntry& e : k.row(members[i])) {
      if (local[e.col] == static_cast<std::size_t>(-1)) {
        throw error(errc::validation, "state " + std::to_string(members[i]) +
                                          " leaves the class; it is not closed");
      }
      rows[i].push_back(KernelEntry{local[e.col], e.prob});
    }
  }
  return TransitionKernel::from_rows(rows);
}

/// ASCII triplet dump: header "n N state_count", then "row col prob" lines.
inline void write_kernel(std::ostream& os, const TransitionKernel& k) {
  os << k.types() << ' ' << k.population() << ' ' << k.size() << '\n';
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (const KernelEntry& e : k.row(i)) {
      os << i << ' ' << e.col << ' ' << format_double(e.prob) << '\n';
    }
  }
}

inline TransitionKernel read_kernel(std::istream& is) {
  std::size_t n = 0, count = 0;
  int N = 0;
  if (!(is >> n >> N >> count)) throw error(errc::schema, "missing kernel header");
  std::vector<std::vector<KernelEntry>> rows(count);
  std::size_t r = 0, c = 0;
  std::string prob;
  while (is >> r >> c >> prob) {
    if (r >= count) throw error(errc::schema, "row index out of range in kernel dump");
    rows[r].push_back(KernelEntry{c, parse_double(prob)});
  }
  if (!is.eof()) throw error(errc::schema, "malformed kernel triplet");
  return TransitionKernel::from_rows(rows, n, N);
}

}  // namespace moran

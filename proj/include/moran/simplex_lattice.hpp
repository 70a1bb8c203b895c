#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "moran/errors.hpp"

namespace moran {

/// Dense position of a population state in the canonical enumeration.
struct StateIndex {
  std::size_t value = 0;

  friend auto operator<=>(const StateIndex&, const StateIndex&) = default;
};

/// One birth (type `gain`) paired with one death (type `lose`). gain == lose
/// is the zero step.
struct StepVector {
  std::size_t gain = 0;
  std::size_t lose = 0;

  bool is_zero() const noexcept { return gain == lose; }
  friend bool operator==(const StepVector&, const StepVector&) = default;
};

/// Counts of individuals per type. The number of types is counts.size() and
/// the population size is their sum.
class PopulationState {
 public:
  PopulationState() = default;

  explicit PopulationState(std::vector<int> counts) : counts_(std::move(counts)) {
    if (counts_.size() < 2) {
      throw error(errc::invalid_dimension, "a population state needs at least two types");
    }
    for (int c : counts_) {
      if (c < 0) throw error(errc::invalid_state, "negative count in " + to_string());
    }
    population_ = std::accumulate(counts_.begin(), counts_.end(), 0);
  }

  std::span<const int> counts() const noexcept { return counts_; }
  std::size_t types() const noexcept { return counts_.size(); }
  int population() const noexcept { return population_; }
  int operator[](std::size_t i) const { return counts_[i]; }

  /// The population distribution a / N.
  std::vector<double> distribution() const {
    std::vector<double> abar(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      abar[i] = static_cast<double>(counts_[i]) / population_;
    }
    return abar;
  }

  bool is_interior() const noexcept {
    for (int c : counts_) {
      if (c == 0) return false;
    }
    return true;
  }

  PopulationState step(StepVector s) const {
    if (s.is_zero()) return *this;
    if (counts_.at(s.lose) < 1) {
      throw error(errc::invalid_state, "cannot remove an absent type from " + to_string());
    }
    PopulationState next = *this;
    ++next.counts_[s.gain];
    --next.counts_[s.lose];
    return next;
  }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(counts_[i]);
    }
    return out + ")";
  }

  friend bool operator==(const PopulationState& a, const PopulationState& b) {
    return a.counts_ == b.counts_;
  }
  friend auto operator<=>(const PopulationState& a, const PopulationState& b) {
    return a.counts_ <=> b.counts_;
  }

 private:
  std::vector<int> counts_;
  int population_ = 0;
};

struct Neighbor {
  StepVector step;
  PopulationState state;
};

/// The lattice of compositions of N into n non-negative parts, ordered
/// reverse-lexicographically: (N,0,...,0) has rank 0 and (0,...,0,N) is last.
/// Ranking uses the combinatorial number system over a precomputed binomial
/// table, so rank/unrank cost O(n) and O(n + N) respectively.
class SimplexLattice {
 public:
  SimplexLattice(std::size_t types, int population) : types_(types), population_(population) {
    if (types < 2 || population < 1) {
      throw error(errc::invalid_dimension,
                  "need n >= 2 and N >= 1, got n=" + std::to_string(types) +
                      " N=" + std::to_string(population));
    }
    rows_ = static_cast<std::size_t>(population) + types;
    binom_.assign(rows_ * types_, 0);
    constexpr std::uint64_t limit = std::uint64_t{1} << 40;
    for (std::size_t m = 0; m < rows_; ++m) {
      binom_[m * types_] = 1;
      for (std::size_t k = 1; k < types_ && k <= m; ++k) {
        std::uint64_t v = binom_[(m - 1) * types_ + k - 1] +
                          (k <= m - 1 ? binom_[(m - 1) * types_ + k] : 0);
        // Saturate; only an overflowing total state count is an error.
        binom_[m * types_ + k] = v > limit ? limit : v;
      }
    }
    std::uint64_t total = choose(static_cast<std::size_t>(population) + types - 1, types - 1);
    if (total >= limit) {
      throw error(errc::invalid_dimension, "state space too large for n=" + std::to_string(types) +
                                               " N=" + std::to_string(population));
    }
    size_ = static_cast<std::size_t>(total);
  }

  std::size_t types() const noexcept { return types_; }
  int population() const noexcept { return population_; }
  /// C(N + n - 1, n - 1).
  std::size_t size() const noexcept { return size_; }

  /// Rank of a raw count vector. The caller guarantees validity; use
  /// rank(const PopulationState&) for checked input.
  std::size_t rank_unchecked(std::span<const int> counts) const noexcept {
    std::size_t r = 0;
    std::size_t remaining = static_cast<std::size_t>(population_);
    for (std::size_t i = 0; i + 1 < types_; ++i) {
      std::size_t c = static_cast<std::size_t>(counts[i]);
      std::size_t slack = remaining - c;
      if (slack > 0) r += choose(slack + types_ - i - 2, types_ - i - 1);
      remaining -= c;
    }
    return r;
  }

  StateIndex rank(const PopulationState& a) const {
    check(a);
    return StateIndex{rank_unchecked(a.counts())};
  }

  void unrank_into(std::size_t r, std::span<int> out) const {
    if (r >= size_) {
      throw error(errc::index_out_of_range,
                  "rank " + std::to_string(r) + " outside [0, " + std::to_string(size_) + ")");
    }
    std::size_t remaining = static_cast<std::size_t>(population_);
    for (std::size_t i = 0; i + 1 < types_; ++i) {
      std::size_t parts_after = types_ - i - 1;
      std::size_t v = remaining;
      for (;; --v) {
        std::size_t block = choose(remaining - v + parts_after - 1, parts_after - 1);
        if (r < block) break;
        r -= block;
      }
      out[i] = static_cast<int>(v);
      remaining -= v;
    }
    out[types_ - 1] = static_cast<int>(remaining);
  }

  PopulationState unrank(StateIndex r) const {
    std::vector<int> counts(types_);
    unrank_into(r.value, counts);
    return PopulationState(std::move(counts));
  }

  /// Advances `counts` to the next composition in canonical order. Returns
  /// false after the last one.
  static bool next_composition(std::span<int> counts) noexcept {
    const std::size_t n = counts.size();
    std::size_t i = n - 1;
    while (i-- > 0) {
      if (counts[i] > 0) {
        int tail = 0;
        for (std::size_t j = i + 1; j < n; ++j) {
          tail += counts[j];
          counts[j] = 0;
        }
        --counts[i];
        counts[i + 1] = tail + 1;
        return true;
      }
    }
    return false;
  }

  std::vector<PopulationState> states() const {
    std::vector<PopulationState> out;
    out.reserve(size_);
    std::vector<int> counts(types_, 0);
    counts[0] = population_;
    do {
      out.emplace_back(counts);
    } while (next_composition(counts));
    return out;
  }

  /// Calls fn(step, neighbor_rank) for every a + i_{jk}, j != k, a_k >= 1,
  /// in (j, k) row-major order. `counts` is modified in place and restored.
  template <class Fn>
  void for_each_neighbor(std::span<int> counts, Fn&& fn) const {
    for (std::size_t j = 0; j < types_; ++j) {
      for (std::size_t k = 0; k < types_; ++k) {
        if (j == k || counts[k] < 1) continue;
        ++counts[j];
        --counts[k];
        fn(StepVector{j, k}, rank_unchecked(counts));
        --counts[j];
        ++counts[k];
      }
    }
  }

  std::vector<Neighbor> adjacent(const PopulationState& a) const {
    check(a);
    std::vector<Neighbor> out;
    for (std::size_t j = 0; j < types_; ++j) {
      for (std::size_t k = 0; k < types_; ++k) {
        if (j == k || a[k] < 1) continue;
        StepVector s{j, k};
        out.push_back(Neighbor{s, a.step(s)});
      }
    }
    return out;
  }

  /// All permutations of the most balanced composition (parts differ by at
  /// most one), in canonical order.
  std::vector<StateIndex> central_states() const {
    const int base = population_ / static_cast<int>(types_);
    const std::size_t extra = static_cast<std::size_t>(population_) % types_;
    std::vector<StateIndex> out;
    std::vector<int> counts(types_, 0);
    counts[0] = population_;
    std::size_t r = 0;
    do {
      std::size_t above = 0;
      bool balanced = true;
      for (int c : counts) {
        if (c == base + 1) {
          ++above;
        } else if (c != base) {
          balanced = false;
          break;
        }
      }
      if (balanced && above == extra) out.push_back(StateIndex{r});
      ++r;
    } while (next_composition(counts));
    return out;
  }

  void check(const PopulationState& a) const {
    if (a.types() != types_ || a.population() != population_) {
      throw error(errc::invalid_state, "state " + a.to_string() + " does not belong to n=" +
                                           std::to_string(types_) +
                                           " N=" + std::to_string(population_));
    }
  }

 private:
  std::uint64_t choose(std::size_t m, std::size_t k) const noexcept {
    if (k > m) return 0;
    return binom_[m * types_ + k];
  }

  std::size_t types_;
  int population_;
  std::size_t rows_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> binom_;
};

inline std::vector<PopulationState> enumerate_states(std::size_t n, int N) {
  return SimplexLattice(n, N).states();
}

inline StateIndex rank_state(const PopulationState& a) {
  if (a.population() < 1) throw error(errc::invalid_state, "empty population " + a.to_string());
  return SimplexLattice(a.types(), a.population()).rank(a);
}

inline PopulationState unrank_state(StateIndex r, std::size_t n, int N) {
  return SimplexLattice(n, N).unrank(r);
}

inline std::vector<Neighbor> adjacent_states(const PopulationState& a) {
  std::vector<Neighbor> out;
  for (std::size_t j = 0; j < a.types(); ++j) {
    for (std::size_t k = 0; k < a.types(); ++k) {
      if (j == k || a[k] < 1) continue;
      StepVector s{j, k};
      out.push_back(Neighbor{s, a.step(s)});
    }
  }
  return out;
}

}  // namespace moran

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "moran/catalog.hpp"
#include "moran/entropy.hpp"
#include "moran/process.hpp"
#include "support.hpp"

using namespace moran;

namespace {

const double ln2 = std::log(2.0);

ProcessConfig neutral_config(std::size_t n, int N, double mu) {
  return ProcessConfig{n, N, Neutral{}, UniformMutation{mu}, landscape_matrix(landscape::Neutral{n})};
}

double rate_of(const ProcessConfig& c) { return analyze(c).report.entropy_rate; }

double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

}  // namespace

TEST(Shannon, Examples) {
  EXPECT_EQ(shannon_entropy(std::vector<double>{1, 0, 0}), 0.0);
  EXPECT_NEAR(shannon_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5 * ln2, 1e-15);
  for (int k = 1; k <= 9; ++k) {
    EXPECT_NEAR(shannon_entropy(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k)), std::log(k), 1e-14);
  }
  EXPECT_THROW(shannon_entropy(std::vector<double>{0.5, 0.6}), error);
  EXPECT_THROW(shannon_entropy(std::vector<double>{1.5, -0.5}), error);
}

TEST(TransitionEntropy, Corners) {
  const auto absorbing = build_kernel(3, 6, Neutral{}, landscape_matrix(landscape::Neutral{3}), UniformMutation{0});
  EXPECT_EQ(transition_entropy(absorbing, StateIndex{0}), 0.0);

  for (std::size_t n : {2u, 3u, 4u}) {
    for (double mu : {0.1, 0.37}) {
      const auto k = build_kernel(n, 8, QFermi{1, 2}, GameMatrix(gen::Gen(n).matrix(static_cast<int>(n), -1, 1)),
                                  UniformMutation{mu});
      std::vector<double> expected{1 - mu};
      for (std::size_t i = 1; i < n; ++i) expected.push_back(mu / static_cast<double>(n - 1));
      EXPECT_NEAR(transition_entropy(k, StateIndex{0}), oracle::entropy(expected), 1e-14);
    }
  }
  const auto k2 = build_kernel(2, 10, QReplicator{1}, landscape_matrix(landscape::MoranR{2}), UniformMutation{0.1});
  EXPECT_NEAR(transition_entropy(k2, StateIndex{0}), 0.3251, 5e-5);
}

TEST(TransitionEntropy, NeutralCentre) {
  for (double mu : {0.01, 0.2, 0.5, 0.8}) {
    const auto k = build_kernel(2, 10, Neutral{}, landscape_matrix(landscape::Neutral{2}), UniformMutation{mu});
    EXPECT_NEAR(transition_entropy(k, StateIndex{5}), 1.5 * ln2, 1e-14);
  }
}

TEST(EntropyRate, ReferenceValues) {
  EXPECT_NEAR(rate_of(neutral_config(3, 30, 1.0 / 30)), 1.155, 0.005);
  const ProcessConfig rsp{3, 30, QFermi{1, 1}, UniformMutation{1.0 / 30}, landscape_matrix(landscape::RSP{1, 1})};
  EXPECT_NEAR(rate_of(rsp), 1.152, 0.005);
}

TEST(EntropyRate, TwoStateChain) {
  const auto k = TransitionKernel::from_rows({{{0, 0.9}, {1, 0.1}}, {{0, 0.1}, {1, 0.9}}});
  const auto report = entropy_rate(k, solve_stationary(k));
  EXPECT_NEAR(report.entropy_rate, binary_entropy(0.1), 1e-12);
  EXPECT_FALSE(report.bound.has_value());
  EXPECT_TRUE(to_json(report)["bound"].is_null());
}

TEST(EntropyRate, DimensionMismatch) {
  const auto k = TransitionKernel::from_rows({{{0, 1.0}}});
  EXPECT_THROW(entropy_rate(k, StationaryDistribution{{0.5, 0.5}, 0, StationaryMethod::iterative, 0}), error);
}

TEST(EntropyRate, MatchesDenseOracle) {
  gen::Gen g(41);
  for (int trial = 0; trial < 8; ++trial) {
    oracle::Process P;
    P.n = g.integer(2, 3);
    P.N = g.integer(3, 9);
    P.mu = g.uniform(0.01, 0.6);
    P.incentive = oracle::Incentive::fermi;
    P.beta = g.uniform(0, 2);
    P.A = g.matrix(P.n, -1, 1);
    const ProcessConfig c{static_cast<std::size_t>(P.n), P.N, QFermi{1, P.beta}, UniformMutation{P.mu}, GameMatrix(P.A)};
    const auto T = oracle::dense_kernel(P);
    EXPECT_NEAR(rate_of(c), oracle::entropy_rate(T, oracle::dense_stationary(T)), 1e-9);
  }
}

TEST(Bound, Values) {
  EXPECT_NEAR(entropy_rate_bound(2), 1.5 * ln2, 1e-16);
  EXPECT_NEAR(entropy_rate_bound(3), 5.0 / 3 * std::log(3.0), 1e-15);
  EXPECT_NEAR(entropy_rate_bound(3), 1.8310, 5e-5);
  EXPECT_NEAR(bound_fraction(2), 1.5 * ln2 / std::log(3.0), 1e-15);
  EXPECT_NEAR(bound_fraction(2), 0.9464, 5e-5);
  EXPECT_THROW(entropy_rate_bound(1), error);
  for (std::size_t n = 2; n < 10; ++n) {
    EXPECT_LT(entropy_rate_bound(n), std::log(static_cast<double>(n * (n - 1) + 1)));
  }
}

TEST(Bound, RowEntropiesBelowBound) {
  // Every single transition row obeys the bound, not just the average.
  gen::Gen g(43);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 4));
    const auto k = build_kernel(n, g.integer(2, 10), QFermi{static_cast<double>(g.integer(0, 2)), g.uniform(0, 5)},
                                GameMatrix(g.matrix(static_cast<int>(n), -2, 2)), UniformMutation{g.uniform(0, 1)});
    for (double h : transition_entropies(k)) {
      EXPECT_LE(h, entropy_rate_bound(n) + 1e-12);
      EXPECT_GE(h, 0.0);
    }
  }
}

TEST(Properties, BoundPositivityAndSandwichFuzz) {
  gen::Gen g(47);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 4));
    const int N = g.integer(2, n == 4 ? 10 : 16);
    const double q = static_cast<double>(g.integer(0, 2));
    ProcessConfig c{n, N, QFermi{q, g.uniform(0, 5)}, UniformMutation{g.uniform(1e-3, 0.999)},
                    GameMatrix(g.matrix(static_cast<int>(n), -2, 2))};
    if (trial % 4 == 1) {
      c.incentive = QReplicator{q};
      c.landscape = GameMatrix(g.matrix(static_cast<int>(n), 0.05, 2));
    }
    const ProcessResult r = analyze(c);
    const auto& s = r.stationary.probabilities;
    const double rate = r.report.entropy_rate;
    EXPECT_LE(rate, entropy_rate_bound(n) + 1e-9);

    SimplexLattice lat(n, N);
    bool interior_mass = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] > 0 && lat.unrank(StateIndex{i}).is_interior()) interior_mass = true;
    }
    if (interior_mass) { EXPECT_GT(rate, 0.0); }

    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Properties, ModeBoundsRateOnNeutral) {
  for (std::size_t n : {2, 3}) {
    for (int N : {6, 9, 12}) {
      for (double mu : {0.05, 0.2, 0.5, 0.8}) {
        const auto r = analyze({n, N, Neutral{}, UniformMutation{mu}, landscape_matrix(landscape::Neutral{n})});
        const auto& s = r.stationary.probabilities;
        const auto& h = r.report.per_state_transition_entropy;
        const double rate = r.report.entropy_rate;
        const auto hi = std::max_element(s.begin(), s.end());
        const auto ties = [&](double x) { return std::count_if(s.begin(), s.end(), [&](double v) { return std::abs(v - x) < 1e-14; }); };
        if (ties(*hi) == 1) { EXPECT_GE(h[static_cast<std::size_t>(hi - s.begin())] + 1e-12, rate); }
      }
    }
  }
}

TEST(Properties, SandwichFailsInGeneral) {
  // Mode at a corner with low transition entropy; the average is larger.
  oracle::Process P;
  P.n = 2;
  P.N = 3;
  P.mu = 0.05;
  P.incentive = oracle::Incentive::replicator;
  P.A = {{0.5, 0.5}, {1, 1}};
  const auto T = oracle::dense_kernel(P);
  const auto s = oracle::dense_stationary(T);
  const double rate = oracle::entropy_rate(T, s);
  const std::size_t mode = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  EXPECT_EQ(mode, 3u);
  EXPECT_LT(oracle::entropy(T[mode]), rate);

  const auto r = analyze({2, 3, QReplicator{1}, UniformMutation{0.05}, landscape_matrix(landscape::MoranR{0.5})});
  EXPECT_NEAR(r.report.entropy_rate, rate, 1e-10);
  EXPECT_NEAR(r.report.entropy_rate, 0.336739, 1e-6);
  EXPECT_NEAR(r.report.per_state_transition_entropy[3], 0.198515, 1e-6);

  // Neutral with small mu: the least likely state is the centre, which has the largest transition entropy.
  const auto neutral = analyze({2, 6, Neutral{}, UniformMutation{0.05}, landscape_matrix(landscape::Neutral{2})});
  const auto& sn = neutral.stationary.probabilities;
  const std::size_t least = static_cast<std::size_t>(std::min_element(sn.begin(), sn.end()) - sn.begin());
  EXPECT_EQ(least, 3u);
  EXPECT_GT(neutral.report.per_state_transition_entropy[least], neutral.report.entropy_rate);
}

TEST(Properties, MonotoneInMu) {
  for (auto [n, N] : {std::pair<std::size_t, int>{2, 20}, {3, 15}}) {
    double previous = -1;
    for (int i = 1; i <= 12; ++i) {
      const double rate = rate_of(neutral_config(n, N, 0.05 * i));
      EXPECT_GT(rate, previous) << n << " " << N << " mu=" << 0.05 * i;
      previous = rate;
    }
  }
}

TEST(Properties, SmallMutationLimit) {
  double previous = INFINITY;
  for (double mu : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const ProcessConfig c{2, 10, QReplicator{1}, UniformMutation{mu}, landscape_matrix(landscape::MoranR{2})};
    const double rate = rate_of(c);
    EXPECT_LT(rate, previous);
    previous = rate;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(Properties, LargePopulationLimit) {
  double previous = 0, gap = INFINITY;
  for (int N : {10, 20, 40, 80, 160}) {
    const double rate = rate_of(neutral_config(2, N, 0.1));
    EXPECT_GT(rate, previous);
    EXPECT_LT(1.5 * ln2 - rate, gap);
    previous = rate;
    gap = 1.5 * ln2 - rate;
  }
}

TEST(Properties, CentralStatesMaximizeTransitionEntropy) {
  for (std::size_t n : {2u, 3u}) {
    for (int N : {9, 10, 12}) {
      const auto k = build_kernel(n, N, Neutral{}, landscape_matrix(landscape::Neutral{n}), UniformMutation{0.1});
      EXPECT_EQ(max_transition_entropy_states(k), SimplexLattice(n, N).central_states()) << n << " " << N;
    }
  }
  const auto k11 = build_kernel(2, 11, Neutral{}, landscape_matrix(landscape::Neutral{2}), UniformMutation{0.1});
  EXPECT_EQ(max_transition_entropy_states(k11), (std::vector<StateIndex>{{5}, {6}}));
}

TEST(Properties, TransitionEntropyDecreasesOutward) {
  // Along a ray from the centre (3,3,3): move individuals from type 3 to type 1.
  const auto k = build_kernel(3, 9, Neutral{}, landscape_matrix(landscape::Neutral{3}), UniformMutation{0.1});
  SimplexLattice lat(3, 9);
  double previous = INFINITY;
  for (int step = 0; step <= 3; ++step) {
    const double h = transition_entropy(k, lat.rank(PopulationState({3 + step, 3, 3 - step})));
    EXPECT_LT(h, previous);
    previous = h;
  }
  previous = INFINITY;
  for (int a = 5; a <= 10; ++a) {
    const auto k2 = build_kernel(2, 10, Neutral{}, landscape_matrix(landscape::Neutral{2}), UniformMutation{0.1});
    const double h = transition_entropy(k2, SimplexLattice(2, 10).rank(PopulationState({a, 10 - a})));
    EXPECT_LT(h, previous);
    previous = h;
  }
}

TEST(PlugIn, Examples) {
  EXPECT_EQ(plug_in_entropy_rate(std::vector<StateIndex>(10, StateIndex{0})), 0.0);
  std::vector<StateIndex> cycle;
  for (int i = 0; i < 20; ++i) cycle.push_back(StateIndex{static_cast<std::size_t>(i % 2)});
  EXPECT_EQ(plug_in_entropy_rate(cycle), 0.0);
  EXPECT_THROW(plug_in_entropy_rate(std::vector<StateIndex>{StateIndex{0}}), error);
  // 0->0, 0->1, 1->0: occupancy 2/3 at state 0 with entropy ln 2.
  EXPECT_NEAR(plug_in_entropy_rate(std::vector<StateIndex>{{0}, {0}, {1}, {0}}), 2.0 / 3 * ln2, 1e-15);
}

TEST(Report, Json) {
  const auto r = analyze(neutral_config(2, 4, 0.2)).report;
  const auto j = to_json(r);
  EXPECT_EQ(j["n"], 2);
  EXPECT_EQ(j["N"], 4);
  EXPECT_DOUBLE_EQ(j["bound"].get<double>(), 1.5 * ln2);
  EXPECT_DOUBLE_EQ(j["entropy_rate"].get<double>(), r.entropy_rate);
  EXPECT_TRUE(j.contains("residual"));
}

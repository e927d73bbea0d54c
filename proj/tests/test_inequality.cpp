#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kcbslab/inequality.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <random>

using namespace kcbs;

namespace {
constexpr double kSqrt5 = 2.2360679774997896;
constexpr double kKappa = -3.9442719099991588;
constexpr double kEdge = -0.7888543819998317;
constexpr double kWrightOnV0 = 1.7639320225002103;  // 1 + 2*(golden ratio - 1)^2

// Independent re-check of every assignment by sets instead of bitmasks.
int oracle_wright_count(std::uint32_t mask) {
  bool yes[5];
  for (int i = 0; i < 5; ++i) yes[i] = mask & (1u << i);
  for (int i = 0; i < 5; ++i) {
    if (yes[i] && yes[(i + 1) % 5]) return -1;  // infeasible
  }
  int count = 0;
  for (bool y : yes) count += y ? 1 : 0;
  return count;
}

int oracle_kcbs_sum(std::uint32_t mask) {
  int a[5];
  for (int i = 0; i < 5; ++i) a[i] = (mask & (1u << i)) ? 1 : -1;
  int sum = 0;
  for (int i = 0; i < 5; ++i) sum += a[i] * a[(i + 1) % 5];
  return sum;
}

ClassicalStrategy random_strategy(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> mask(0, 31);
  ClassicalStrategy s;
  for (int i = 0; i < 5; ++i) {
    s.answer_sets[i] = static_cast<std::uint8_t>(mask(rng));
  }
  // clear adjacency violations deterministically
  for (int i = 0; i < 5; ++i) {
    s.answer_sets[(i + 1) % 5] &= static_cast<std::uint8_t>(~s.answer_sets[i]);
  }
  std::exponential_distribution<double> expo(1.0);
  double total = 0.0;
  for (double& w : s.state_weights) {
    w = expo(rng) + 1e-12;
    total += w;
  }
  for (double& w : s.state_weights) w /= total;
  // renormalise exactly
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += s.state_weights[i];
  s.state_weights[4] = 1.0 - sum;
  return s;
}
}  // namespace

TEST_CASE("classical wright bound: exhaustive enumeration") {
  const BoundReport r = classical_wright_bound();
  CHECK(r.bound_value == 2.0);
  CHECK(r.search_space_size == 32);
  CHECK(r.attaining_mask == 0b00101u);  // yes at {0, 2}
  CHECK(r.attaining_assignment == "yes at {0, 2}");

  // agreement with the independent per-assignment oracle
  int best = -1;
  for (std::uint32_t m = 0; m < 32; ++m) {
    best = std::max(best, oracle_wright_count(m));
  }
  CHECK(best == 2);
}

TEST_CASE("classical kcbs bound: exhaustive enumeration") {
  const BoundReport r = classical_kcbs_bound();
  CHECK(r.bound_value == -3.0);
  CHECK(r.search_space_size == 32);
  CHECK(r.attaining_mask == 0b00101u);  // (+1,-1,+1,-1,-1)
  CHECK(r.attaining_assignment == "(+1, -1, +1, -1, -1)");
  CHECK(oracle_kcbs_sum(r.attaining_mask) == -3);

  int best = 6;
  for (std::uint32_t m = 0; m < 32; ++m) {
    best = std::min(best, oracle_kcbs_sum(m));
  }
  CHECK(best == -3);
  // the all-agree assignment sits at the other extreme
  CHECK(oracle_kcbs_sum(0) == 5);
  CHECK(oracle_kcbs_sum(31) == 5);
}

TEST_CASE("five-state strategy: uniform mixture values") {
  const ClassicalStrategy s = ClassicalStrategy::optimal_five_state();
  const StrategyWrightValue w = classical_strategy_wright(s);
  for (double p : w.yes_probability) CHECK(p == doctest::Approx(0.4));
  CHECK(w.value == doctest::Approx(2.0));

  const StrategyKcbsValue k = classical_strategy_kcbs(s);
  for (double c : k.edge_correlation) CHECK(c == doctest::Approx(-0.6));
  CHECK(k.kappa == doctest::Approx(-3.0));
}

TEST_CASE("all-no strategy answers agree on every edge") {
  ClassicalStrategy s;
  s.answer_sets = {0, 0, 0, 0, 0};
  s.state_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
  const StrategyKcbsValue k = classical_strategy_kcbs(s);
  for (double c : k.edge_correlation) CHECK(c == doctest::Approx(1.0));
  CHECK(k.kappa == doctest::Approx(5.0));
  CHECK(classical_strategy_wright(s).value == doctest::Approx(0.0));
}

TEST_CASE("deterministic hidden state 0 saturates the classical minimum") {
  // membership tests: Q0 yes, Q1 no, Q2 yes, Q3 no, Q4 no
  ClassicalStrategy s = ClassicalStrategy::optimal_five_state();
  s.state_weights = {1.0, 0.0, 0.0, 0.0, 0.0};
  const StrategyKcbsValue k = classical_strategy_kcbs(s);
  const std::array<double, 5> expected = {-1.0, -1.0, -1.0, 1.0, -1.0};
  for (int e = 0; e < 5; ++e) {
    CHECK(k.edge_correlation[e] == doctest::Approx(expected[e]));
  }
  CHECK(k.kappa == doctest::Approx(-3.0));
}

TEST_CASE("strategy validation") {
  ClassicalStrategy bad = ClassicalStrategy::optimal_five_state();
  bad.answer_sets[1] = bad.answer_sets[0];  // adjacent overlap
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(classical_strategy_kcbs(bad), std::invalid_argument);

  ClassicalStrategy negw = ClassicalStrategy::optimal_five_state();
  negw.state_weights = {0.5, 0.7, -0.2, 0.0, 0.0};
  CHECK_THROWS_AS(negw.validate(), std::invalid_argument);
}

TEST_CASE("wright value on quantum states") {
  const Pentagram pent = make_pentagram();
  CHECK(wright_value(pent.test_state, pent) ==
        doctest::Approx(kSqrt5).epsilon(1e-12));
  CHECK(wright_value(pent.questions[0].eigenvector(), pent) ==
        doctest::Approx(kWrightOnV0).epsilon(1e-12));
  CHECK(wright_value(DensityMatrix::pure(pent.test_state), pent) ==
        doctest::Approx(kSqrt5).epsilon(1e-12));
}

TEST_CASE("kcbs value and per-edge terms") {
  const Pentagram pent = make_pentagram();
  const KcbsValue v = kcbs_value(pent.test_state, pent);
  CHECK(v.value == doctest::Approx(kKappa).epsilon(1e-12));
  CHECK(v.value + 4 * std::sqrt(5.0) - 5.0 ==
        doctest::Approx(0.0).epsilon(1e-9));
  for (double term : v.edge_terms) {
    CHECK(term == doctest::Approx(kEdge).epsilon(1e-12));
  }
  CHECK_FALSE(v.exclusivity_warning);

  // eigenstate input: first outcome deterministic yes, second deterministic no
  const KcbsValue von = kcbs_value(pent.questions[0].eigenvector(), pent);
  CHECK(von.edge_terms[0] == doctest::Approx(-1.0));
}

TEST_CASE("kcbs value annotates leaky pentagrams instead of rejecting") {
  const Pentagram pent = make_pentagram();
  std::array<std::optional<Question>, 5> qs;
  const double eps = 0.03;
  for (int i = 0; i < 5; ++i) {
    const Vec3 mixed =
        std::cos(eps) * pent.questions[i].eigenvector().amplitudes() +
        std::sin(eps) *
            pent.questions[next_mod5(i)].eigenvector().amplitudes();
    qs[i] = Question(StateVector::normalized(mixed), i);
  }
  const Pentagram leaky{{*qs[0], *qs[1], *qs[2], *qs[3], *qs[4]},
                        pent.test_state};
  const KcbsValue v = kcbs_value(pent.test_state, leaky);
  CHECK(v.exclusivity_warning);
  CHECK(v.max_adjacent_overlap > tol::kPhysics);
  CHECK(std::isfinite(v.value));
}

TEST_CASE("property: random strategies never beat either classical bound") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 10000; ++trial) {
    const ClassicalStrategy s = random_strategy(rng);
    const double w = classical_strategy_wright(s).value;
    const double kappa = classical_strategy_kcbs(s).kappa;
    REQUIRE(w <= 2.0 + 1e-12);
    REQUIRE(kappa >= -3.0 - 1e-12);
  }
}

TEST_CASE("property: no qutrit state exceeds the spectral wright bound") {
  std::mt19937_64 rng(103);
  const Pentagram pent = make_pentagram();
  for (int trial = 0; trial < 10000; ++trial) {
    const StateVector s = testing::random_state(rng);
    REQUIRE(wright_value(s, pent) <= kSqrt5 + 1e-9);
  }
}

TEST_CASE("optimizer recovers both optima with a reduced budget") {
  OptimizerOptions opts;
  opts.seed = 5;
  opts.restarts = 8;
  opts.evaluations_per_restart = 4000;

  const OptimizationResult w = maximize_violation(Target::wright, opts);
  CHECK(w.best_value >= kSqrt5 - 1e-6);
  CHECK(w.residual <= 1e-8);
  CHECK(w.converged);

  const OptimizationResult k = maximize_violation(Target::kcbs, opts);
  CHECK(k.best_value <= kKappa + 1e-5);
  CHECK(k.residual <= 1e-8);
  CHECK(k.converged);
}

TEST_CASE("optimizer is deterministic for a fixed seed") {
  OptimizerOptions opts;
  opts.seed = 12;
  opts.restarts = 4;
  opts.evaluations_per_restart = 1500;
  opts.threads = 4;
  const OptimizationResult a = maximize_violation(Target::wright, opts);
  opts.threads = 1;
  const OptimizationResult b = maximize_violation(Target::wright, opts);
  CHECK(a.best_value == b.best_value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("optimizer with a single restart stays at the warm start optimum") {
  OptimizerOptions opts;
  opts.seed = 999;
  opts.restarts = 1;
  opts.evaluations_per_restart = 50;
  const OptimizationResult r = maximize_violation(Target::wright, opts);
  CHECK(r.best_value >= 2.0);  // never below the classical optimum
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("optimizer validates its options") {
  OptimizerOptions opts;
  opts.dimension = 5;
  CHECK_THROWS_AS(maximize_violation(Target::wright, opts),
                  std::invalid_argument);
  opts.dimension = 3;
  opts.restarts = 0;
  CHECK_THROWS_AS(maximize_violation(Target::wright, opts),
                  std::invalid_argument);
}

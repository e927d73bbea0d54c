// Analytic evaluation of the two pentagon inequalities, exhaustive classical
// bounds, classical strategies, and numerical maximization of the quantum
// violation.

#pragma once

#include "kcbslab/core.hpp"
#include "kcbslab/sequential.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace kcbs {

inline constexpr double kWrightClassicalBound = 2.0;
inline constexpr double kKcbsClassicalBound = -3.0;

inline const double kWrightQuantumValue = std::sqrt(5.0);
inline const double kKcbsQuantumValue = 5.0 - 4.0 * std::sqrt(5.0);

// Five yes-sets over hidden states {0..4} with adjacent sets disjoint,
// mixed with weights. answer_sets[i] bit k set means hidden state k answers
// yes to question i.
struct ClassicalStrategy {
  std::array<std::uint8_t, 5> answer_sets;
  std::array<double, 5> state_weights;

  void validate() const;  // throws std::invalid_argument
  bool answers_yes(int question, int hidden_state) const;

  // The optimal textbook strategy: yes-sets {0,1},{2,3},{0,4},{1,2},{3,4}
  // under the uniform mixture. Every single-question yes probability is 2/5
  // and every edge correlation is -3/5.
  static ClassicalStrategy optimal_five_state();
};

struct BoundReport {
  double bound_value;
  std::uint32_t attaining_mask;      // bit i set: question i answers yes/+1
  std::string attaining_assignment;  // human-readable
  std::size_t search_space_size;     // always 32
};

// Exhaustive oracle over the 32 yes/no assignments that respect adjacent
// exclusivity; the bound is the maximum number of simultaneous yes answers.
BoundReport classical_wright_bound();

// Exhaustive oracle over all 32 sign assignments (noncontextual value
// assignments carry no exclusivity constraint); the bound is the minimum of
// the cyclic correlation sum.
BoundReport classical_kcbs_bound();

struct StrategyWrightValue {
  std::array<double, 5> yes_probability;
  double value;
};

struct StrategyKcbsValue {
  std::array<double, 5> edge_correlation;
  double kappa;
};

StrategyWrightValue classical_strategy_wright(const ClassicalStrategy& s);
StrategyKcbsValue classical_strategy_kcbs(const ClassicalStrategy& s);

double wright_value(const StateVector& state, const Pentagram& pent);
double wright_value(const DensityMatrix& state, const Pentagram& pent);

// kappa from the ideal sequential joint distributions, so the identical code
// path serves ideal and perturbed pentagrams. A pentagram whose adjacent
// overlaps exceed tolerance is annotated, never rejected.
struct KcbsValue {
  std::array<double, 5> edge_terms;
  double value;
  bool exclusivity_warning;
  double max_adjacent_overlap;
};

KcbsValue kcbs_value(const StateVector& state, const Pentagram& pent);
KcbsValue kcbs_value(const DensityMatrix& state, const Pentagram& pent);

// --- numerical maximization -------------------------------------------

enum class Target { wright, kcbs };

inline constexpr double kWrightConvergenceTol = 1e-6;
inline constexpr double kKcbsConvergenceTol = 1e-5;

struct OptimizerOptions {
  int dimension = 3;  // 3 or 4
  std::uint64_t seed = 0;
  int restarts = 64;
  int evaluations_per_restart = 5000;
  int threads = 0;  // 0 = hardware; the result never depends on this
};

struct OptimizationResult {
  Target target;
  double best_value;  // W for wright (max), kappa for kcbs (min)
  std::vector<Eigen::VectorXcd> vectors;
  Eigen::VectorXcd state;
  long iterations;  // objective evaluations across all restarts
  double residual;  // worst cyclic-orthogonality violation of the output
  bool converged;
};

// Derivative-free simplex search with multi-start. Vectors are feasible by
// construction for the four chained orthogonality constraints; the closing
// constraint <v4|v0> = 0 is a quadratic penalty whose weight escalates
// across restarts, and the final configuration is projected onto the exact
// constraint before the value is re-evaluated. Restart 0 starts from the
// known optimal configuration; the remaining restarts are random with
// counter-derived sub-seeds, so a fixed seed gives a fixed result whatever
// the thread count.
OptimizationResult maximize_violation(Target target,
                                      const OptimizerOptions& opts = {});

}  // namespace kcbs

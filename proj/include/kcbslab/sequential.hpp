// Exact joint outcome distributions for ordered pairs of questions, their
// correlations, order-swap runs and the arrival-time slot encoding.

#pragma once

#include "kcbslab/core.hpp"

#include <array>
#include <utility>

namespace kcbs {

// Joint distribution of an ordered pair; the first letter is the first
// measurement. Computed by explicit branch enumeration (four paths through
// two Lueders updates), so non-commuting perturbed questions are handled by
// the same code as exactly exclusive ones.
struct JointDistribution {
  double p_yy = 0, p_yn = 0, p_ny = 0, p_nn = 0;
  int first_index = -1, second_index = -1;

  double probability(Outcome first, Outcome second) const;
  double correlation() const { return p_yy + p_nn - p_yn - p_ny; }
  double total() const { return p_yy + p_yn + p_ny + p_nn; }
  double first_marginal_yes() const { return p_yy + p_yn; }
  double second_marginal_yes() const { return p_yy + p_ny; }
};

JointDistribution joint_distribution(const StateVector& state,
                                     const Question& first,
                                     const Question& second);
JointDistribution joint_distribution(const DensityMatrix& state,
                                     const Question& first,
                                     const Question& second);

double correlation(const JointDistribution& jd);

enum class Order { forward, reverse };

// One pass over the five edges: forward measures (Q_i, Q_{i+1}), reverse
// measures (Q_{i+1}, Q_i).
struct KcbsRun {
  Order order;
  std::array<JointDistribution, 5> joints;
  std::array<double, 5> correlations;
  double kappa;
};

KcbsRun kcbs_run(const StateVector& state, const Pentagram& pent, Order order);
KcbsRun kcbs_run(const DensityMatrix& state, const Pentagram& pent,
                 Order order);

// Time-multiplexed readout: the first device delays its yes branch by one
// slot, the second by two, so the four answer pairs land in four slots.
inline constexpr double kSlotSpacingNs = 50.0;

enum class Slot : int { t0 = 0, t1 = 1, t2 = 2, t3 = 3 };

struct TimeSlot {
  Slot slot;
  double delay_ns;
};

// (no,no) -> t0, (yes,no) -> t1, (no,yes) -> t2, (yes,yes) -> t3.
TimeSlot outcome_to_timeslot(Outcome first, Outcome second);
std::pair<Outcome, Outcome> timeslot_to_outcomes(Slot slot);

// Compatibility, operationalised: the yes probability of question
// edge_index+1 measured alone, as the opener of a sequence, and as the
// follower of question edge_index.
struct MarginalReport {
  int edge_index;
  double alone;
  double as_first;
  double as_second;
  double max_discrepancy;
};

MarginalReport marginal_consistency(const StateVector& state,
                                    const Pentagram& pent, int edge_index);

}  // namespace kcbs

#include "kcbslab/sequential.hpp"

#include <cmath>
#include <stdexcept>

namespace kcbs {

namespace {

// Four-path enumeration over a generic state kind. Zero-probability branches
// contribute zero without attempting the conditional update.
template <typename State>
JointDistribution enumerate_joint(const State& state, const Question& first,
                                  const Question& second) {
  JointDistribution jd;
  jd.first_index = first.index();
  jd.second_index = second.index();

  const double p1 = born_probability(state, first);
  const double branch_p[2] = {p1, 1.0 - p1};
  const Outcome outcomes[2] = {Outcome::yes, Outcome::no};

  double cells[2][2] = {{0, 0}, {0, 0}};
  for (int b = 0; b < 2; ++b) {
    if (branch_p[b] <= tol::kNullBranch) continue;
    const auto post = luders_update(state, first, outcomes[b]);
    const double p2 = born_probability(post, second);
    cells[b][0] = branch_p[b] * p2;
    cells[b][1] = branch_p[b] * (1.0 - p2);
  }
  jd.p_yy = cells[0][0];
  jd.p_yn = cells[0][1];
  jd.p_ny = cells[1][0];
  jd.p_nn = cells[1][1];
  return jd;
}

}  // namespace

double JointDistribution::probability(Outcome first, Outcome second) const {
  if (first == Outcome::yes) {
    return second == Outcome::yes ? p_yy : p_yn;
  }
  return second == Outcome::yes ? p_ny : p_nn;
}

JointDistribution joint_distribution(const StateVector& state,
                                     const Question& first,
                                     const Question& second) {
  return enumerate_joint(state, first, second);
}

JointDistribution joint_distribution(const DensityMatrix& state,
                                     const Question& first,
                                     const Question& second) {
  return enumerate_joint(state, first, second);
}

double correlation(const JointDistribution& jd) { return jd.correlation(); }

namespace {

template <typename State>
KcbsRun run_edges(const State& state, const Pentagram& pent, Order order) {
  KcbsRun run;
  run.order = order;
  run.kappa = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Question& a = pent.questions[i];
    const Question& b = pent.questions[next_mod5(i)];
    run.joints[i] = order == Order::forward ? joint_distribution(state, a, b)
                                            : joint_distribution(state, b, a);
    run.correlations[i] = run.joints[i].correlation();
    run.kappa += run.correlations[i];
  }
  return run;
}

}  // namespace

KcbsRun kcbs_run(const StateVector& state, const Pentagram& pent,
                 Order order) {
  return run_edges(state, pent, order);
}

KcbsRun kcbs_run(const DensityMatrix& state, const Pentagram& pent,
                 Order order) {
  return run_edges(state, pent, order);
}

TimeSlot outcome_to_timeslot(Outcome first, Outcome second) {
  // yes on the first device adds one slot of delay, yes on the second two.
  const int steps = (first == Outcome::yes ? 1 : 0) +
                    (second == Outcome::yes ? 2 : 0);
  return {static_cast<Slot>(steps), steps * kSlotSpacingNs};
}

std::pair<Outcome, Outcome> timeslot_to_outcomes(Slot slot) {
  const int steps = static_cast<int>(slot);
  return {(steps & 1) ? Outcome::yes : Outcome::no,
          (steps & 2) ? Outcome::yes : Outcome::no};
}

MarginalReport marginal_consistency(const StateVector& state,
                                    const Pentagram& pent, int edge_index) {
  if (edge_index < 0 || edge_index > 4) {
    throw std::invalid_argument("marginal_consistency: edge index in 0..4");
  }
  const Question& opener = pent.questions[edge_index];
  const Question& partner = pent.questions[next_mod5(edge_index)];

  MarginalReport report;
  report.edge_index = edge_index;
  report.alone = born_probability(state, partner);
  report.as_first =
      joint_distribution(state, partner, opener).first_marginal_yes();
  report.as_second =
      joint_distribution(state, opener, partner).second_marginal_yes();
  report.max_discrepancy =
      std::max({std::abs(report.alone - report.as_first),
                std::abs(report.alone - report.as_second),
                std::abs(report.as_first - report.as_second)});
  return report;
}

}  // namespace kcbs

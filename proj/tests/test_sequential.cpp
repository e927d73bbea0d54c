#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kcbslab/inequality.hpp"
#include "kcbslab/sequential.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <optional>

using namespace kcbs;

namespace {
constexpr double kInvSqrt5 = 0.4472135954999579;
constexpr double kPnn = 0.1055728090000841;       // 1 - 2/sqrt(5)
constexpr double kEdge = -0.7888543819998317;     // 1 - 4/sqrt(5)
constexpr double kPyyNonAdjacent = 0.1708203932499369;
constexpr double kKappa = -3.9442719099991588;    // 5 - 4*sqrt(5)

// Brute-force oracle: 3x3 matrix products only, independent of the
// luders_update code path.
JointDistribution oracle_joint(const StateVector& state, const Question& a,
                               const Question& b) {
  const Mat3 id = Mat3::Identity();
  const Mat3 p1[2] = {a.projector(), id - a.projector()};
  const Mat3 p2[2] = {b.projector(), id - b.projector()};
  const Vec3& psi = state.amplitudes();
  JointDistribution jd;
  jd.first_index = a.index();
  jd.second_index = b.index();
  double cells[2][2];
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cells[i][j] = (p2[j] * p1[i] * psi).squaredNorm();
    }
  }
  jd.p_yy = cells[0][0];
  jd.p_yn = cells[0][1];
  jd.p_ny = cells[1][0];
  jd.p_nn = cells[1][1];
  return jd;
}
}  // namespace

TEST_CASE("adjacent joint distribution on the test state") {
  const Pentagram pent = make_pentagram();
  const JointDistribution jd = joint_distribution(
      pent.test_state, pent.questions[0], pent.questions[1]);
  CHECK(jd.p_yy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(jd.p_yn == doctest::Approx(kInvSqrt5).epsilon(1e-12));
  CHECK(jd.p_ny == doctest::Approx(kInvSqrt5).epsilon(1e-12));
  CHECK(jd.p_nn == doctest::Approx(kPnn).epsilon(1e-12));
  CHECK(jd.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(jd.correlation() == doctest::Approx(kEdge).epsilon(1e-12));
}

TEST_CASE("deterministic joint on an eigenstate") {
  const Pentagram pent = make_pentagram();
  const JointDistribution jd =
      joint_distribution(pent.questions[0].eigenvector(), pent.questions[0],
                         pent.questions[1]);
  CHECK(jd.p_yy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(jd.p_yn == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(jd.p_ny == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(jd.p_nn == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("non-adjacent pairs: order matters, p_yy is the product") {
  const Pentagram pent = make_pentagram();
  const JointDistribution jd = joint_distribution(
      pent.test_state, pent.questions[0], pent.questions[2]);
  CHECK(jd.p_yy == doctest::Approx(kPyyNonAdjacent).epsilon(1e-12));
}

TEST_CASE("joint distribution matches the brute-force oracle") {
  std::mt19937_64 rng(23);
  const Pentagram pent = make_pentagram();
  for (int trial = 0; trial < 2000; ++trial) {
    const StateVector s = testing::random_state(rng);
    const Question& a = pent.questions[trial % 5];
    const Question& b = pent.questions[(trial + 1 + trial / 5) % 5];
    const JointDistribution got = joint_distribution(s, a, b);
    const JointDistribution want = oracle_joint(s, a, b);
    CHECK(got.p_yy == doctest::Approx(want.p_yy).epsilon(1e-11));
    CHECK(got.p_yn == doctest::Approx(want.p_yn).epsilon(1e-11));
    CHECK(got.p_ny == doctest::Approx(want.p_ny).epsilon(1e-11));
    CHECK(got.p_nn == doctest::Approx(want.p_nn).epsilon(1e-11));
  }
}

TEST_CASE("correlation formula on fixed tables") {
  JointDistribution all_yy;
  all_yy.p_yy = 1.0;
  CHECK(correlation(all_yy) == doctest::Approx(1.0));

  JointDistribution split;
  split.p_yn = 0.5;
  split.p_ny = 0.5;
  CHECK(correlation(split) == doctest::Approx(-1.0));
}

TEST_CASE("kcbs_run forward and reverse coincide for the ideal pentagram") {
  const Pentagram pent = make_pentagram();
  const KcbsRun fwd = kcbs_run(pent.test_state, pent, Order::forward);
  const KcbsRun rev = kcbs_run(pent.test_state, pent, Order::reverse);
  CHECK(fwd.kappa == doctest::Approx(kKappa).epsilon(1e-12));
  CHECK(rev.kappa == doctest::Approx(kKappa).epsilon(1e-12));
  for (int e = 0; e < 5; ++e) {
    CHECK(fwd.correlations[e] == doctest::Approx(kEdge).epsilon(1e-12));
    CHECK(fwd.correlations[e] ==
          doctest::Approx(rev.correlations[e]).epsilon(1e-12));
  }
}

TEST_CASE("eigenstate makes both incident edges perfectly anticorrelated") {
  const Pentagram pent = make_pentagram();
  const KcbsRun run =
      kcbs_run(pent.questions[2].eigenvector(), pent, Order::forward);
  CHECK(run.correlations[1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(run.correlations[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("time slot mapping") {
  const TimeSlot nn = outcome_to_timeslot(Outcome::no, Outcome::no);
  CHECK(nn.slot == Slot::t0);
  CHECK(nn.delay_ns == doctest::Approx(0.0));

  const TimeSlot yn = outcome_to_timeslot(Outcome::yes, Outcome::no);
  CHECK(yn.slot == Slot::t1);
  CHECK(yn.delay_ns == doctest::Approx(50.0));

  const TimeSlot ny = outcome_to_timeslot(Outcome::no, Outcome::yes);
  CHECK(ny.slot == Slot::t2);
  CHECK(ny.delay_ns == doctest::Approx(100.0));

  const TimeSlot yy = outcome_to_timeslot(Outcome::yes, Outcome::yes);
  CHECK(yy.slot == Slot::t3);
  CHECK(yy.delay_ns == doctest::Approx(150.0));

  for (Slot s : {Slot::t0, Slot::t1, Slot::t2, Slot::t3}) {
    const auto [first, second] = timeslot_to_outcomes(s);
    CHECK(outcome_to_timeslot(first, second).slot == s);
  }
}

TEST_CASE("marginal consistency: ideal, perturbed and deterministic cases") {
  const Pentagram pent = make_pentagram();
  for (int edge = 0; edge < 5; ++edge) {
    const MarginalReport r =
        marginal_consistency(pent.test_state, pent, edge);
    CHECK(r.max_discrepancy <= 1e-12);
  }

  // exclusivity leakage produces a visible discrepancy
  // (the perturbation helper lives in the noise module; emulate it here)
  const double eps = 0.05;
  std::array<std::optional<Question>, 5> qs;
  for (int i = 0; i < 5; ++i) {
    const Vec3 mixed =
        std::cos(eps) * pent.questions[i].eigenvector().amplitudes() +
        std::sin(eps) *
            pent.questions[next_mod5(i)].eigenvector().amplitudes();
    qs[i] = Question(StateVector::normalized(mixed), i);
  }
  const Pentagram leaky{{*qs[0], *qs[1], *qs[2], *qs[3], *qs[4]},
                        pent.test_state};
  const MarginalReport r = marginal_consistency(pent.test_state, leaky, 0);
  CHECK(r.max_discrepancy > 1e-6);

  // all outcomes deterministic: no discrepancy
  const MarginalReport det =
      marginal_consistency(pent.questions[0].eigenvector(), pent, 0);
  CHECK(det.max_discrepancy <= 1e-12);
}

TEST_CASE("property: joints sum to one and adjacents have p_yy = 0") {
  std::mt19937_64 rng(31);
  const Pentagram pent = make_pentagram();
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const StateVector s = testing::random_state(rng);
    const int i = trial % 5;
    const JointDistribution jd =
        joint_distribution(s, pent.questions[i], pent.questions[next_mod5(i)]);
    REQUIRE(jd.total() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(jd.p_yy <= 1e-12);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("property: order symmetry for exactly orthogonal pairs") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto [a, b] = testing::random_orthogonal_pair(rng);
    const StateVector s = testing::random_state(rng);
    const JointDistribution ab = joint_distribution(s, a, b);
    const JointDistribution ba = joint_distribution(s, b, a);
    REQUIRE(ab.p_yy == doctest::Approx(ba.p_yy).epsilon(1e-12));
    REQUIRE(ab.p_nn == doctest::Approx(ba.p_nn).epsilon(1e-12));
    REQUIRE(ab.p_yn == doctest::Approx(ba.p_ny).epsilon(1e-12));
    REQUIRE(ab.p_ny == doctest::Approx(ba.p_yn).epsilon(1e-12));
  }
}

TEST_CASE("property: chained luders updates reproduce branch probabilities") {
  std::mt19937_64 rng(41);
  const Pentagram pent = make_pentagram();
  for (int trial = 0; trial < 2000; ++trial) {
    const StateVector s = testing::random_state(rng);
    const int i = trial % 5;
    const Question& a = pent.questions[i];
    const Question& b = pent.questions[(i + 2) % 5];
    const JointDistribution jd = joint_distribution(s, a, b);
    const double p1 = born_probability(s, a);
    if (p1 > 1e-9 && p1 < 1.0 - 1e-9) {
      const StateVector yes = luders_update(s, a, Outcome::yes);
      const StateVector no = luders_update(s, a, Outcome::no);
      REQUIRE(jd.p_yy ==
              doctest::Approx(p1 * born_probability(yes, b)).epsilon(1e-12));
      REQUIRE(jd.p_ny == doctest::Approx((1 - p1) * born_probability(no, b))
                             .epsilon(1e-12));
    }
  }
}

TEST_CASE("kcbs_run is consistent with kcbs_value") {
  const Pentagram pent = make_pentagram();
  const KcbsRun run = kcbs_run(pent.test_state, pent, Order::forward);
  const KcbsValue value = kcbs_value(pent.test_state, pent);
  CHECK(run.kappa == doctest::Approx(value.value).epsilon(1e-12));
}

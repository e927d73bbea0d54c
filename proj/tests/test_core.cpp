#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kcbslab/core.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace kcbs;

// Frozen with a 40-digit evaluation of the defining constants.
namespace {
constexpr double kInvSqrt5 = 0.4472135954999579;
constexpr double kSqrt5 = 2.2360679774997896;
constexpr double kV0x = 0.7434960689203690;
constexpr double kV0z = 0.6687403049764220;
constexpr double kSkipOverlap = 0.6180339887498949;  // |<v0|v2>|
}  // namespace

TEST_CASE("pentagram vectors match the frozen constants") {
  const Pentagram pent = make_pentagram();
  const Vec3& v0 = pent.questions[0].eigenvector().amplitudes();
  CHECK(v0(0).real() == doctest::Approx(kV0x).epsilon(1e-12));
  CHECK(std::abs(v0(1)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v0(2).real() == doctest::Approx(kV0z).epsilon(1e-12));

  // r = sqrt(cos(pi/5)): third component is N*r for every vector
  for (const Question& q : pent.questions) {
    CHECK(q.eigenvector().amplitudes()(2).real() ==
          doctest::Approx(kV0z).epsilon(1e-12));
    CHECK(q.eigenvector().amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("pentagram cyclic orthogonality holds exactly") {
  const Pentagram pent = make_pentagram();
  CHECK(pent.max_adjacent_overlap() <= tol::kPhysics);
  CHECK(pent.cyclically_exclusive());
  // closure of the cycle: the neighbour of 4 is 0
  const auto report =
      check_exclusive(pent.questions[4], pent.questions[0]);
  CHECK(report.exclusive);
}

TEST_CASE("born probabilities on the test state") {
  const Pentagram pent = make_pentagram();
  double sum = 0.0;
  for (const Question& q : pent.questions) {
    const double p = born_probability(pent.test_state, q);
    CHECK(p == doctest::Approx(kInvSqrt5).epsilon(1e-12));
    sum += p;
  }
  CHECK(sum == doctest::Approx(kSqrt5).epsilon(1e-9));

  // projector onto itself and onto an exclusive partner
  const StateVector& v0 = pent.questions[0].eigenvector();
  CHECK(born_probability(v0, pent.questions[0]) == doctest::Approx(1.0));
  CHECK(born_probability(v0, pent.questions[1]) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("born probability agrees between pure and mixed representations") {
  std::mt19937_64 rng(7);
  const Pentagram pent = make_pentagram();
  for (int trial = 0; trial < 200; ++trial) {
    const StateVector s = testing::random_state(rng);
    const DensityMatrix rho = DensityMatrix::pure(s);
    for (const Question& q : pent.questions) {
      CHECK(born_probability(s, q) ==
            doctest::Approx(born_probability(rho, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("state and density validation rejects bad input") {
  CHECK_THROWS_AS(StateVector(Vec3(1.0, 1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix(Mat3::Identity()), std::invalid_argument);
  Mat3 nonherm = Mat3::Zero();
  nonherm(0, 1) = Complex(0.3, 0.1);
  nonherm(0, 0) = 1.0;
  CHECK_THROWS_AS(DensityMatrix(nonherm), std::invalid_argument);
  CHECK_THROWS_AS(Question(StateVector(Vec3(1.0, 0.0, 0.0)), 9),
                  std::invalid_argument);
}

TEST_CASE("luders update: projection, repeatability, null conditioning") {
  const Pentagram pent = make_pentagram();
  const Question& q0 = pent.questions[0];

  const StateVector after = luders_update(pent.test_state, q0, Outcome::yes);
  CHECK(after.fidelity(q0.eigenvector()) == doctest::Approx(1.0).epsilon(1e-12));

  // repeatability: idempotent on its own eigenstate
  const StateVector again = luders_update(after, q0, Outcome::yes);
  CHECK(again.fidelity(after) == doctest::Approx(1.0).epsilon(1e-10));

  // conditioning on an impossible outcome
  CHECK_THROWS_AS(
      luders_update(q0.eigenvector(), pent.questions[1], Outcome::yes),
      std::domain_error);
  CHECK_THROWS_AS(luders_update(q0.eigenvector(), q0, Outcome::no),
                  std::domain_error);
}

TEST_CASE("luders update keeps the no-branch orthogonal to the eigenvector") {
  const Pentagram pent = make_pentagram();
  const Question& q0 = pent.questions[0];
  const StateVector rest = luders_update(pent.test_state, q0, Outcome::no);
  CHECK(std::abs(rest.inner(q0.eigenvector())) <= 1e-12);
  // yes afterwards on the successor has the full derived weight
  CHECK(born_probability(rest, pent.questions[1]) ==
        doctest::Approx(kInvSqrt5 / (1.0 - kInvSqrt5)).epsilon(1e-12));
}

TEST_CASE("luders update on density matrices matches the pure path") {
  std::mt19937_64 rng(11);
  const Pentagram pent = make_pentagram();
  for (int trial = 0; trial < 100; ++trial) {
    const StateVector s = testing::random_state(rng);
    const Question& q = pent.questions[trial % 5];
    const double p = born_probability(s, q);
    for (Outcome o : {Outcome::yes, Outcome::no}) {
      const double branch = o == Outcome::yes ? p : 1.0 - p;
      if (branch < 1e-12) continue;
      const StateVector pure = luders_update(s, q, o);
      const DensityMatrix mixed =
          luders_update(DensityMatrix::pure(s), q, o);
      CHECK(mixed.overlap(pure) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("expectation values") {
  const Pentagram pent = make_pentagram();
  CHECK(expectation(pent.test_state, pent.questions[2]) ==
        doctest::Approx(2.0 * kInvSqrt5 - 1.0).epsilon(1e-12));
  const StateVector& v0 = pent.questions[0].eigenvector();
  const StateVector& v1 = pent.questions[1].eigenvector();
  CHECK(expectation(v0, pent.questions[0]) == doctest::Approx(1.0));
  CHECK(expectation(v1, pent.questions[0]) == doctest::Approx(-1.0));
}

TEST_CASE("check_exclusive reports overlap magnitudes") {
  const Pentagram pent = make_pentagram();
  const auto adjacent = check_exclusive(pent.questions[0], pent.questions[1]);
  CHECK(adjacent.exclusive);
  CHECK(adjacent.overlap <= 1e-12);

  const auto self = check_exclusive(pent.questions[0], pent.questions[0]);
  CHECK_FALSE(self.exclusive);
  CHECK(self.overlap == doctest::Approx(1.0));

  const auto skip = check_exclusive(pent.questions[0], pent.questions[2]);
  CHECK_FALSE(skip.exclusive);
  CHECK(skip.overlap == doctest::Approx(kSkipOverlap).epsilon(1e-12));
}

TEST_CASE("question observables have spectrum {+1,-1,-1}") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Question q = testing::random_question(rng);
    Eigen::SelfAdjointEigenSolver<Mat3> es(q.observable());
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(es.eigenvalues()(1) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(es.eigenvalues()(2) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("complement probabilities sum to one for random states") {
  std::mt19937_64 rng(17);
  const Pentagram pent = make_pentagram();
  for (int trial = 0; trial < 10000; ++trial) {
    const StateVector s = testing::random_state(rng);
    const Question& q = pent.questions[trial % 5];
    const double p = born_probability(s, q);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    // complement question realised through the observable
    const double p_no = 1.0 - p;
    CHECK(p + p_no == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expectation(s, q) == doctest::Approx(2 * p - 1).epsilon(1e-12));
  }
}

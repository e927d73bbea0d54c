// Exact complex linear algebra for qutrit states, rank-1 projective
// questions, Born-rule probabilities and Lueders state updates.
//
// Conventions: listed components are ket amplitudes; states are compared
// through |<a|b>| (global phase is never significant); question indices are
// cyclic mod 5, so the neighbour of 4 is 0.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>

namespace kcbs {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3cd;

// Tolerance constants shared by the library and every test suite.
namespace tol {
inline constexpr double kConstruction = 1e-12;  // norms, traces, hermiticity
inline constexpr double kPhysics = 1e-10;       // orthogonality, spectra
inline constexpr double kAggregate = 1e-9;      // summed identities
inline constexpr double kNullBranch = 1e-15;    // conditioning cutoff
}  // namespace tol

// Outcome labels, fixed at the type level: +1 <-> yes <-> successful
// projection (blue lamp), -1 <-> no (red lamp).
enum class Outcome : int { no = -1, yes = +1 };

constexpr int sign(Outcome o) { return static_cast<int>(o); }
constexpr Outcome flipped(Outcome o) {
  return o == Outcome::yes ? Outcome::no : Outcome::yes;
}

constexpr int next_mod5(int i) { return (i + 1) % 5; }
constexpr int prev_mod5(int i) { return (i + 4) % 5; }

// Unit-norm qutrit ket.
class StateVector {
 public:
  explicit StateVector(const Vec3& amplitudes);

  // Rescales to unit norm; rejects the zero vector.
  static StateVector normalized(const Vec3& amplitudes);

  const Vec3& amplitudes() const { return amp_; }
  Complex operator[](int i) const { return amp_(i); }

  Complex inner(const StateVector& rhs) const;    // <this|rhs>
  double fidelity(const StateVector& rhs) const;  // |<this|rhs>|^2

 private:
  Vec3 amp_;
};

// Hermitian, unit-trace, positive-semidefinite 3x3 matrix. Mixed states are
// first-class citizens: classical strategies and noise channels produce them.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Mat3& entries);

  static DensityMatrix pure(const StateVector& state);

  const Mat3& entries() const { return rho_; }
  double overlap(const StateVector& v) const;  // <v|rho|v>, real
  double purity() const;

 private:
  Mat3 rho_;
};

// A yes-no question: rank-1 projector |v><v| with dichotomic observable
// 2|v><v| - 1 (spectrum {+1, -1, -1}).
class Question {
 public:
  Question(StateVector eigenvector, int index);

  const StateVector& eigenvector() const { return v_; }
  int index() const { return index_; }
  Mat3 projector() const;
  Mat3 observable() const;

 private:
  StateVector v_;
  int index_;
};

// The cyclically exclusive five-tuple of questions plus the test state that
// maximises both pentagon inequalities. Perturbed (leaky) pentagrams are
// valid objects; exclusivity is a reported property, not a constructor
// invariant.
struct Pentagram {
  std::array<Question, 5> questions;
  StateVector test_state;

  double max_adjacent_overlap() const;
  bool cyclically_exclusive(double tolerance = tol::kPhysics) const;
};

// The canonical pentagram: v0 = N(1,0,r), v1/v4 = N(c,+-s,r),
// v2/v3 = N(C,-+S,r) with r = sqrt(cos pi/5), c,s = cos,sin(4pi/5),
// C,S = cos,sin(2pi/5), N = 1/sqrt(1+r^2); test state (0,0,1). Adjacent
// orthogonality is the identity cos(4pi/5) + cos(pi/5) = 0.
Pentagram make_pentagram();

double born_probability(const StateVector& state, const Question& q);
double born_probability(const DensityMatrix& state, const Question& q);

// Projects onto the outcome branch and renormalises. Throws
// std::domain_error when the branch probability is below tol::kNullBranch.
StateVector luders_update(const StateVector& state, const Question& q,
                          Outcome outcome);
DensityMatrix luders_update(const DensityMatrix& state, const Question& q,
                            Outcome outcome);

double expectation(const StateVector& state, const Question& q);
double expectation(const DensityMatrix& state, const Question& q);

struct ExclusivityReport {
  bool exclusive;
  double overlap;  // |<v_a|v_b>|
};

ExclusivityReport check_exclusive(const Question& a, const Question& b);

}  // namespace kcbs

#include "kcbslab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kcbs {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

StateVector::StateVector(const Vec3& amplitudes) : amp_(amplitudes) {
  const double norm = amp_.norm();
  if (std::abs(norm - 1.0) > tol::kConstruction) {
    throw std::invalid_argument("StateVector: norm " + std::to_string(norm) +
                                " is not 1 within 1e-12");
  }
}

StateVector StateVector::normalized(const Vec3& amplitudes) {
  const double norm = amplitudes.norm();
  if (norm < tol::kNullBranch) {
    throw std::invalid_argument("StateVector: cannot normalise zero vector");
  }
  return StateVector(Vec3(amplitudes / norm));
}

Complex StateVector::inner(const StateVector& rhs) const {
  return amp_.dot(rhs.amp_);  // Eigen dot conjugates the left factor
}

double StateVector::fidelity(const StateVector& rhs) const {
  return std::norm(inner(rhs));
}

DensityMatrix::DensityMatrix(const Mat3& entries) : rho_(entries) {
  const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol::kConstruction) {
    throw std::invalid_argument("DensityMatrix: not hermitian within 1e-12");
  }
  rho_ = 0.5 * (rho_ + rho_.adjoint().eval());  // exact hermitisation
  const double trace = rho_.trace().real();
  if (std::abs(trace - 1.0) > tol::kConstruction) {
    throw std::invalid_argument("DensityMatrix: trace " +
                                std::to_string(trace) +
                                " is not 1 within 1e-12");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& state) {
  const Vec3& a = state.amplitudes();
  return DensityMatrix(a * a.adjoint());
}

double DensityMatrix::overlap(const StateVector& v) const {
  const Vec3& a = v.amplitudes();
  return (a.adjoint() * rho_ * a)(0, 0).real();
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

Question::Question(StateVector eigenvector, int index)
    : v_(std::move(eigenvector)), index_(index) {
  if (index < 0 || index > 4) {
    throw std::invalid_argument("Question: index must be in 0..4");
  }
}

Mat3 Question::projector() const {
  const Vec3& a = v_.amplitudes();
  return a * a.adjoint();
}

Mat3 Question::observable() const {
  return 2.0 * projector() - Mat3::Identity();
}

double Pentagram::max_adjacent_overlap() const {
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, std::abs(questions[i].eigenvector().inner(
                                questions[next_mod5(i)].eigenvector())));
  }
  return worst;
}

bool Pentagram::cyclically_exclusive(double tolerance) const {
  return max_adjacent_overlap() <= tolerance;
}

Pentagram make_pentagram() {
  using std::numbers::pi;
  const double r = std::sqrt(std::cos(pi / 5));
  const double c = std::cos(4 * pi / 5);
  const double s = std::sin(4 * pi / 5);
  const double C = std::cos(2 * pi / 5);
  const double S = std::sin(2 * pi / 5);
  const double N = 1.0 / std::sqrt(1.0 + r * r);

  // every in-plane part (x, y) below is a unit 2-vector, so N(x, y, r) has
  // unit norm by construction
  const auto make = [N, r](double x, double y) {
    return StateVector(Vec3(Complex(N * x), Complex(N * y), Complex(N * r)));
  };

  std::array<StateVector, 5> v = {
      make(1.0, 0.0), make(c, s), make(C, -S), make(C, S), make(c, -s)};

  return Pentagram{
      {Question(v[0], 0), Question(v[1], 1), Question(v[2], 2),
       Question(v[3], 3), Question(v[4], 4)},
      StateVector(Vec3(0.0, 0.0, 1.0))};
}

double born_probability(const StateVector& state, const Question& q) {
  return clamp01(q.eigenvector().fidelity(state));
}

double born_probability(const DensityMatrix& state, const Question& q) {
  return clamp01(state.overlap(q.eigenvector()));
}

StateVector luders_update(const StateVector& state, const Question& q,
                          Outcome outcome) {
  const Vec3& v = q.eigenvector().amplitudes();
  const Complex amp = v.dot(state.amplitudes());
  if (outcome == Outcome::yes) {
    if (std::norm(amp) <= tol::kNullBranch) {
      throw std::domain_error("luders_update: conditioning on null outcome");
    }
    return StateVector::normalized(v * amp);
  }
  const Vec3 rest = state.amplitudes() - v * amp;
  if (rest.squaredNorm() <= tol::kNullBranch) {
    throw std::domain_error("luders_update: conditioning on null outcome");
  }
  return StateVector::normalized(rest);
}

DensityMatrix luders_update(const DensityMatrix& state, const Question& q,
                            Outcome outcome) {
  const Mat3 proj = outcome == Outcome::yes
                        ? q.projector()
                        : Mat3(Mat3::Identity() - q.projector());
  const Mat3 branch = proj * state.entries() * proj;
  const double p = branch.trace().real();
  if (p <= tol::kNullBranch) {
    throw std::domain_error("luders_update: conditioning on null outcome");
  }
  return DensityMatrix(branch / p);
}

double expectation(const StateVector& state, const Question& q) {
  return 2.0 * born_probability(state, q) - 1.0;
}

double expectation(const DensityMatrix& state, const Question& q) {
  return 2.0 * born_probability(state, q) - 1.0;
}

ExclusivityReport check_exclusive(const Question& a, const Question& b) {
  const double overlap = std::abs(a.eigenvector().inner(b.eigenvector()));
  return {overlap <= tol::kPhysics, overlap};
}

}  // namespace kcbs

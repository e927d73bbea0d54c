#pragma once

#include "kcbslab/core.hpp"

#include <random>

namespace kcbs::testing {

// Haar-ish random qutrit ket: iid complex normal components, normalized.
inline StateVector random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 amp;
  for (int i = 0; i < 3; ++i) amp(i) = Complex(normal(rng), normal(rng));
  return StateVector::normalized(amp);
}

inline Question random_question(std::mt19937_64& rng, int index = 0) {
  return Question(random_state(rng), index);
}

// A pair of exactly orthogonal questions.
inline std::pair<Question, Question> random_orthogonal_pair(
    std::mt19937_64& rng) {
  const StateVector a = random_state(rng);
  StateVector b = random_state(rng);
  Vec3 rest = b.amplitudes() -
              a.amplitudes() * a.amplitudes().dot(b.amplitudes());
  while (rest.norm() < 1e-6) {
    b = random_state(rng);
    rest = b.amplitudes() - a.amplitudes() * a.amplitudes().dot(b.amplitudes());
  }
  return {Question(a, 0), Question(StateVector::normalized(rest), 1)};
}

}  // namespace kcbs::testing

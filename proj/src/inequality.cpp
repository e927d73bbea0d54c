#include "kcbslab/inequality.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace kcbs {

void ClassicalStrategy::validate() const {
  for (int i = 0; i < 5; ++i) {
    if (answer_sets[i] & ~0x1Fu) {
      throw std::invalid_argument("ClassicalStrategy: hidden states are 0..4");
    }
    if (answer_sets[i] & answer_sets[next_mod5(i)]) {
      throw std::invalid_argument(
          "ClassicalStrategy: adjacent answer sets must be disjoint");
    }
  }
  double sum = 0.0;
  for (double w : state_weights) {
    if (w < 0.0) {
      throw std::invalid_argument("ClassicalStrategy: negative weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol::kConstruction) {
    throw std::invalid_argument("ClassicalStrategy: weights must sum to 1");
  }
}

bool ClassicalStrategy::answers_yes(int question, int hidden_state) const {
  return answer_sets[question] & (1u << hidden_state);
}

ClassicalStrategy ClassicalStrategy::optimal_five_state() {
  ClassicalStrategy s;
  const auto set = [](int a, int b) {
    return static_cast<std::uint8_t>((1u << a) | (1u << b));
  };
  s.answer_sets = {set(0, 1), set(2, 3), set(0, 4), set(1, 2), set(3, 4)};
  s.state_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
  s.validate();
  return s;
}

namespace {

std::string yes_set_string(std::uint32_t mask) {
  std::ostringstream os;
  os << "yes at {";
  bool first = true;
  for (int i = 0; i < 5; ++i) {
    if (mask & (1u << i)) {
      os << (first ? "" : ", ") << i;
      first = false;
    }
  }
  os << "}";
  return os.str();
}

std::string sign_string(std::uint32_t mask) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < 5; ++i) {
    os << ((mask & (1u << i)) ? "+1" : "-1") << (i < 4 ? ", " : ")");
  }
  return os.str();
}

bool respects_adjacent_exclusivity(std::uint32_t mask) {
  for (int i = 0; i < 5; ++i) {
    if ((mask & (1u << i)) && (mask & (1u << next_mod5(i)))) return false;
  }
  return true;
}

int cyclic_sign_sum(std::uint32_t mask) {
  int sum = 0;
  for (int i = 0; i < 5; ++i) {
    const int a = (mask & (1u << i)) ? 1 : -1;
    const int b = (mask & (1u << next_mod5(i))) ? 1 : -1;
    sum += a * b;
  }
  return sum;
}

}  // namespace

BoundReport classical_wright_bound() {
  int best = -1;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < 32; ++mask) {
    if (!respects_adjacent_exclusivity(mask)) continue;
    const int yes = std::popcount(mask);
    if (yes > best) {
      best = yes;
      best_mask = mask;
    }
  }
  return {static_cast<double>(best), best_mask, yes_set_string(best_mask), 32};
}

BoundReport classical_kcbs_bound() {
  int best = 6;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < 32; ++mask) {
    const int value = cyclic_sign_sum(mask);
    if (value < best) {
      best = value;
      best_mask = mask;
    }
  }
  return {static_cast<double>(best), best_mask, sign_string(best_mask), 32};
}

StrategyWrightValue classical_strategy_wright(const ClassicalStrategy& s) {
  s.validate();
  StrategyWrightValue out{};
  out.value = 0.0;
  for (int i = 0; i < 5; ++i) {
    double p = 0.0;
    for (int k = 0; k < 5; ++k) {
      if (s.answers_yes(i, k)) p += s.state_weights[k];
    }
    out.yes_probability[i] = p;
    out.value += p;
  }
  return out;
}

StrategyKcbsValue classical_strategy_kcbs(const ClassicalStrategy& s) {
  s.validate();
  StrategyKcbsValue out{};
  out.kappa = 0.0;
  for (int i = 0; i < 5; ++i) {
    double corr = 0.0;
    for (int k = 0; k < 5; ++k) {
      const int a = s.answers_yes(i, k) ? 1 : -1;
      const int b = s.answers_yes(next_mod5(i), k) ? 1 : -1;
      corr += s.state_weights[k] * a * b;
    }
    out.edge_correlation[i] = corr;
    out.kappa += corr;
  }
  return out;
}

namespace {

template <typename State>
double wright_sum(const State& state, const Pentagram& pent) {
  double sum = 0.0;
  for (const Question& q : pent.questions) sum += born_probability(state, q);
  return sum;
}

template <typename State>
KcbsValue kcbs_sum(const State& state, const Pentagram& pent) {
  KcbsValue out{};
  const KcbsRun run = kcbs_run(state, pent, Order::forward);
  out.edge_terms = run.correlations;
  out.value = run.kappa;
  out.max_adjacent_overlap = pent.max_adjacent_overlap();
  out.exclusivity_warning = out.max_adjacent_overlap > tol::kPhysics;
  return out;
}

}  // namespace

double wright_value(const StateVector& state, const Pentagram& pent) {
  return wright_sum(state, pent);
}

double wright_value(const DensityMatrix& state, const Pentagram& pent) {
  return wright_sum(state, pent);
}

KcbsValue kcbs_value(const StateVector& state, const Pentagram& pent) {
  return kcbs_sum(state, pent);
}

KcbsValue kcbs_value(const DensityMatrix& state, const Pentagram& pent) {
  return kcbs_sum(state, pent);
}

}  // namespace kcbs

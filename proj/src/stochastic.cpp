#include "kcbslab/stochastic.hpp"

#include "kcbslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kcbs {

namespace {

// substream tags
constexpr std::uint64_t kTagDrift = 0xD51F7ULL;
constexpr std::uint64_t kTagCounts = 0xC0147ULL;

constexpr int order_tag(Order order) {
  return order == Order::forward ? 0 : 1;
}

}  // namespace

NoiseModel NoiseModel::uniform(double v, double leakage_rad,
                               double drift_sigma) {
  NoiseModel n;
  n.visibility = {v, v, v, v, v};
  n.exclusivity_leakage_rad = leakage_rad;
  n.drift_sigma_rad = drift_sigma;
  n.validate();
  return n;
}

void NoiseModel::validate() const {
  for (double v : visibility) {
    if (v < 0.0 || v > 1.0) {
      throw std::invalid_argument("NoiseModel: visibility must be in [0,1]");
    }
  }
  if (exclusivity_leakage_rad < 0.0) {
    throw std::invalid_argument("NoiseModel: leakage must be >= 0");
  }
  if (drift_sigma_rad < 0.0) {
    throw std::invalid_argument("NoiseModel: drift sigma must be >= 0");
  }
  if (contrast_curvature < 0.0) {
    throw std::invalid_argument("NoiseModel: curvature must be >= 0");
  }
}

double NoiseModel::path_coherence(int device) const {
  const double miss = 1.0 - visibility[device];
  return std::clamp(1.0 - contrast_curvature * miss * miss, 0.0, 1.0);
}

bool NoiseModel::is_ideal() const {
  for (double v : visibility) {
    if (v != 1.0) return false;
  }
  return exclusivity_leakage_rad == 0.0 && drift_sigma_rad == 0.0;
}

void ShotPlan::validate() const {
  if (shots_per_setting < 1) {
    throw std::invalid_argument("ShotPlan: shots must be >= 1");
  }
  if (samples < 1) {
    throw std::invalid_argument("ShotPlan: samples must be >= 1");
  }
}

std::array<long, 4> CountTable::Setting::totals() const {
  std::array<long, 4> t = {0, 0, 0, 0};
  for (const auto& s : samples) {
    for (int k = 0; k < 4; ++k) t[k] += s[k];
  }
  return t;
}

long CountTable::Setting::total() const {
  const auto t = totals();
  return t[0] + t[1] + t[2] + t[3];
}

// --- noise channel -------------------------------------------------------

Pentagram perturbed_pentagram(const Pentagram& ideal,
                              const std::array<double, 5>& rotation_rad) {
  std::array<std::optional<Question>, 5> rotated;
  for (int i = 0; i < 5; ++i) {
    const Vec3& v = ideal.questions[i].eigenvector().amplitudes();
    const Vec3& succ = ideal.questions[next_mod5(i)].eigenvector().amplitudes();
    const Vec3 mixed =
        std::cos(rotation_rad[i]) * v + std::sin(rotation_rad[i]) * succ;
    rotated[i] = Question(StateVector::normalized(mixed), i);
  }
  return Pentagram{{*rotated[0], *rotated[1], *rotated[2], *rotated[3],
                    *rotated[4]},
                   ideal.test_state};
}

Mat3 dephase_path_coherence(const Mat3& rho, double lambda) {
  Mat3 out = rho;
  out(0, 2) *= lambda;
  out(2, 0) *= lambda;
  out(1, 2) *= lambda;
  out(2, 1) *= lambda;
  return out;
}

namespace {

std::array<double, 5> total_angles(const NoiseModel& noise,
                                   const std::array<double, 5>& drift_rad) {
  std::array<double, 5> angles;
  for (int i = 0; i < 5; ++i) {
    angles[i] = noise.exclusivity_leakage_rad + drift_rad[i];
  }
  return angles;
}

}  // namespace

double noisy_yes_probability(const DensityMatrix& state,
                             const Pentagram& ideal, int question,
                             const NoiseModel& noise,
                             const std::array<double, 5>& drift_rad) {
  noise.validate();
  const Pentagram pert =
      perturbed_pentagram(ideal, total_angles(noise, drift_rad));
  const Mat3 rho =
      dephase_path_coherence(state.entries(), noise.path_coherence(question));
  const Vec3& v = pert.questions[question].eigenvector().amplitudes();
  const double p = (v.adjoint() * rho * v)(0, 0).real();
  return std::clamp(p, 0.0, 1.0);
}

JointDistribution noisy_joint(const DensityMatrix& state,
                              const Pentagram& ideal, int edge, Order order,
                              const NoiseModel& noise,
                              const std::array<double, 5>& drift_rad) {
  noise.validate();
  const Pentagram pert =
      perturbed_pentagram(ideal, total_angles(noise, drift_rad));
  const int first_q = order == Order::forward ? edge : next_mod5(edge);
  const int second_q = order == Order::forward ? next_mod5(edge) : edge;
  const Mat3 p1 = pert.questions[first_q].projector();
  const Mat3 p2 = pert.questions[second_q].projector();
  const Mat3 id = Mat3::Identity();

  const Mat3 rho0 =
      dephase_path_coherence(state.entries(), noise.path_coherence(first_q));

  JointDistribution jd;
  jd.first_index = first_q;
  jd.second_index = second_q;
  double cells[2][2];
  const Mat3 firsts[2] = {p1, id - p1};
  const Mat3 seconds[2] = {p2, id - p2};
  for (int a = 0; a < 2; ++a) {
    const Mat3 branch = firsts[a] * rho0 * firsts[a];
    const Mat3 handed =
        dephase_path_coherence(branch, noise.path_coherence(second_q));
    for (int b = 0; b < 2; ++b) {
      cells[a][b] = std::max(0.0, (seconds[b] * handed).trace().real());
    }
  }
  jd.p_yy = cells[0][0];
  jd.p_yn = cells[0][1];
  jd.p_ny = cells[1][0];
  jd.p_nn = cells[1][1];
  return jd;
}

double noisy_wright_value(const StateVector& state, const Pentagram& ideal,
                          const NoiseModel& noise) {
  const DensityMatrix rho = DensityMatrix::pure(state);
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    sum += noisy_yes_probability(rho, ideal, i, noise);
  }
  return sum;
}

double noisy_kappa(const StateVector& state, const Pentagram& ideal,
                   const NoiseModel& noise, Order order) {
  const DensityMatrix rho = DensityMatrix::pure(state);
  double kappa = 0.0;
  for (int edge = 0; edge < 5; ++edge) {
    kappa += noisy_joint(rho, ideal, edge, order, noise).correlation();
  }
  return kappa;
}

double fit_exclusivity_leakage(double target_w) {
  const Pentagram pent = make_pentagram();
  const auto w_of = [&](double eps) {
    NoiseModel n;
    n.exclusivity_leakage_rad = eps;
    return noisy_wright_value(pent.test_state, pent, n);
  };
  double lo = 0.0, hi = 0.3;
  if (target_w <= w_of(lo)) return 0.0;
  if (target_w >= w_of(hi)) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (w_of(mid) < target_w ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// --- sampling ------------------------------------------------------------

std::array<long, 4> sample_multinomial(const std::array<double, 4>& p,
                                       int classes, long shots,
                                       std::mt19937_64& rng) {
  std::array<long, 4> counts = {0, 0, 0, 0};
  long remaining = shots;
  double mass_left = 0.0;
  for (int k = 0; k < classes; ++k) mass_left += p[k];
  for (int k = 0; k + 1 < classes && remaining > 0; ++k) {
    const double cond =
        mass_left > 0.0 ? std::clamp(p[k] / mass_left, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long> bin(remaining, cond);
    counts[k] = bin(rng);
    remaining -= counts[k];
    mass_left -= p[k];
  }
  counts[classes - 1] = remaining;
  return counts;
}

namespace {

std::array<double, 5> draw_drift(const NoiseModel& noise, std::uint64_t seed,
                                 int sample, int stream) {
  std::array<double, 5> drift = {0, 0, 0, 0, 0};
  if (noise.drift_sigma_rad <= 0.0) return drift;
  auto rng = substream(seed, kTagDrift, sample, stream);
  std::normal_distribution<double> jitter(0.0, noise.drift_sigma_rad);
  for (double& d : drift) d = jitter(rng);
  return drift;
}

}  // namespace

CountTable sample_wright_counts(const StateVector& state,
                                const Pentagram& ideal,
                                const NoiseModel& noise,
                                const ShotPlan& plan) {
  noise.validate();
  plan.validate();
  const DensityMatrix rho = DensityMatrix::pure(state);

  CountTable table;
  table.shots_per_sample = plan.shots_per_setting;
  table.settings.resize(5);
  for (int i = 0; i < 5; ++i) {
    table.settings[i].label = "Q" + std::to_string(i);
    table.settings[i].outcome_classes = 2;
    table.settings[i].samples.resize(plan.samples);
  }
  for (int s = 0; s < plan.samples; ++s) {
    const auto drift = draw_drift(noise, plan.seed, s, 0);
    for (int i = 0; i < 5; ++i) {
      const double p = noisy_yes_probability(rho, ideal, i, noise, drift);
      auto rng = substream(plan.seed, kTagCounts, i, s);
      table.settings[i].samples[s] = sample_multinomial(
          {p, 1.0 - p, 0.0, 0.0}, 2, plan.shots_per_setting, rng);
    }
  }
  return table;
}

CountTable sample_kcbs_counts(const StateVector& state, const Pentagram& ideal,
                              const NoiseModel& noise, const ShotPlan& plan,
                              Order order) {
  noise.validate();
  plan.validate();
  const DensityMatrix rho = DensityMatrix::pure(state);

  CountTable table;
  table.shots_per_sample = plan.shots_per_setting;
  table.settings.resize(5);
  for (int edge = 0; edge < 5; ++edge) {
    const int a = order == Order::forward ? edge : next_mod5(edge);
    const int b = order == Order::forward ? next_mod5(edge) : edge;
    table.settings[edge].label =
        "Q" + std::to_string(a) + "Q" + std::to_string(b);
    table.settings[edge].outcome_classes = 4;
    table.settings[edge].samples.resize(plan.samples);
  }
  for (int s = 0; s < plan.samples; ++s) {
    const auto drift = draw_drift(noise, plan.seed, s, 1 + order_tag(order));
    for (int edge = 0; edge < 5; ++edge) {
      const JointDistribution jd =
          noisy_joint(rho, ideal, edge, order, noise, drift);
      auto rng =
          substream(plan.seed, kTagCounts, 8 + edge, 2 * s + order_tag(order));
      table.settings[edge].samples[s] =
          sample_multinomial({jd.p_yy, jd.p_yn, jd.p_ny, jd.p_nn}, 4,
                             plan.shots_per_setting, rng);
    }
  }
  return table;
}

namespace {

// Hidden-state occupation numbers for one setting: the first four weights go
// through the chained-binomial multinomial with states 3 and 4 merged, then
// the merged cell is split by its conditional weight.
std::array<long, 5> sample_occupation(const std::array<double, 5>& weights,
                                      long shots, std::mt19937_64& rng) {
  const std::array<double, 4> merged = {weights[0], weights[1], weights[2],
                                        weights[3] + weights[4]};
  const std::array<long, 4> head = sample_multinomial(merged, 4, shots, rng);
  long n3 = head[3];
  if (weights[3] + weights[4] > 0.0) {
    std::binomial_distribution<long> split(
        head[3],
        std::clamp(weights[3] / (weights[3] + weights[4]), 0.0, 1.0));
    n3 = split(rng);
  }
  return {head[0], head[1], head[2], n3, head[3] - n3};
}

}  // namespace

CountTable sample_wright_classical(const ClassicalStrategy& strategy,
                                   const ShotPlan& plan) {
  strategy.validate();
  plan.validate();

  CountTable table;
  table.shots_per_sample = plan.shots_per_setting;
  table.settings.resize(5);
  for (int i = 0; i < 5; ++i) {
    table.settings[i].label = "Q" + std::to_string(i);
    table.settings[i].outcome_classes = 2;
    table.settings[i].samples.resize(plan.samples);
  }
  for (int s = 0; s < plan.samples; ++s) {
    for (int i = 0; i < 5; ++i) {
      auto rng = substream(plan.seed, kTagCounts, 16 + i, s);
      const auto occupation =
          sample_occupation(strategy.state_weights, plan.shots_per_setting, rng);
      std::array<long, 4> counts = {0, 0, 0, 0};
      for (int k = 0; k < 5; ++k) {
        counts[strategy.answers_yes(i, k) ? 0 : 1] += occupation[k];
      }
      table.settings[i].samples[s] = counts;
    }
  }
  return table;
}

CountTable sample_kcbs_classical(const ClassicalStrategy& strategy,
                                 const ShotPlan& plan) {
  strategy.validate();
  plan.validate();

  CountTable table;
  table.shots_per_sample = plan.shots_per_setting;
  table.settings.resize(5);
  for (int edge = 0; edge < 5; ++edge) {
    table.settings[edge].label =
        "Q" + std::to_string(edge) + "Q" + std::to_string(next_mod5(edge));
    table.settings[edge].outcome_classes = 4;
    table.settings[edge].samples.resize(plan.samples);
  }
  for (int s = 0; s < plan.samples; ++s) {
    for (int edge = 0; edge < 5; ++edge) {
      auto rng = substream(plan.seed, kTagCounts, 24 + edge, s);
      const auto occupation =
          sample_occupation(strategy.state_weights, plan.shots_per_setting, rng);
      std::array<long, 4> counts = {0, 0, 0, 0};
      for (int k = 0; k < 5; ++k) {
        const bool a = strategy.answers_yes(edge, k);
        const bool b = strategy.answers_yes(next_mod5(edge), k);
        const int cell = a ? (b ? 0 : 1) : (b ? 2 : 3);  // yy,yn,ny,nn
        counts[cell] += occupation[k];
      }
      table.settings[edge].samples[s] = counts;
    }
  }
  return table;
}

// --- estimators ----------------------------------------------------------

namespace {

Estimate combine(double value, double sigma_poisson,
                 const std::vector<double>& sample_values) {
  Estimate e;
  e.value = value;
  e.sigma_poisson = sigma_poisson;
  if (sample_values.size() > 1) {
    const double n = static_cast<double>(sample_values.size());
    const double mean =
        std::accumulate(sample_values.begin(), sample_values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : sample_values) ss += (v - mean) * (v - mean);
    e.sigma_sample = std::sqrt(ss / (n - 1.0) / n);  // std error of the mean
    e.method = ErrorMethod::combined;
    e.sigma = std::hypot(e.sigma_poisson, e.sigma_sample);
  } else {
    e.sigma_sample = 0.0;
    e.method = ErrorMethod::poisson;
    e.sigma = e.sigma_poisson;
  }
  return e;
}

void require_counts(const CountTable::Setting& setting) {
  if (setting.total() <= 0) {
    throw std::domain_error("estimate: zero total counts for setting " +
                            setting.label);
  }
}

}  // namespace

WrightEstimate estimate_wright(const CountTable& counts) {
  if (counts.settings.size() != 5) {
    throw std::invalid_argument("estimate_wright: need 5 settings");
  }
  WrightEstimate out;
  double w = 0.0, var_poisson = 0.0;
  std::vector<std::vector<double>> sample_p(5);
  for (int i = 0; i < 5; ++i) {
    const auto& setting = counts.settings[i];
    require_counts(setting);
    const auto totals = setting.totals();
    const double yes = static_cast<double>(totals[0]);
    const double no = static_cast<double>(totals[1]);
    const double n = yes + no;
    const double p = yes / n;
    // independent Poisson counts: var = yes*no / n^3
    const double sigma = std::sqrt(yes * no / (n * n * n));
    for (const auto& s : setting.samples) {
      const long ns = s[0] + s[1];
      if (ns > 0) sample_p[i].push_back(static_cast<double>(s[0]) / ns);
    }
    out.yes_probability[i] = combine(p, sigma, sample_p[i]);
    w += p;
    var_poisson += sigma * sigma;
  }
  // per-sample W values for the drift term
  std::vector<double> sample_w;
  const std::size_t samples = counts.settings[0].samples.size();
  for (std::size_t s = 0; s < samples; ++s) {
    double ws = 0.0;
    bool complete = true;
    for (int i = 0; i < 5; ++i) {
      const auto& cell = counts.settings[i].samples[s];
      const long ns = cell[0] + cell[1];
      if (ns <= 0) {
        complete = false;
        break;
      }
      ws += static_cast<double>(cell[0]) / ns;
    }
    if (complete) sample_w.push_back(ws);
  }
  out.w = combine(w, std::sqrt(var_poisson), sample_w);
  return out;
}

KcbsEstimate estimate_kcbs(const CountTable& counts) {
  if (counts.settings.size() != 5) {
    throw std::invalid_argument("estimate_kcbs: need 5 settings");
  }
  KcbsEstimate out;
  double kappa = 0.0, var_poisson = 0.0;
  for (int e = 0; e < 5; ++e) {
    const auto& setting = counts.settings[e];
    require_counts(setting);
    const auto t = setting.totals();
    const double agree = static_cast<double>(t[0] + t[3]);
    const double differ = static_cast<double>(t[1] + t[2]);
    const double n = agree + differ;
    const double corr = (agree - differ) / n;
    const double sigma = 2.0 * std::sqrt(agree * differ / (n * n * n));
    std::vector<double> sample_c;
    for (const auto& s : setting.samples) {
      const long ns = s[0] + s[1] + s[2] + s[3];
      if (ns > 0) {
        sample_c.push_back(
            static_cast<double>(s[0] + s[3] - s[1] - s[2]) / ns);
      }
    }
    out.edge_correlation[e] = combine(corr, sigma, sample_c);
    kappa += corr;
    var_poisson += sigma * sigma;
  }
  std::vector<double> sample_k;
  const std::size_t samples = counts.settings[0].samples.size();
  for (std::size_t s = 0; s < samples; ++s) {
    double ks = 0.0;
    bool complete = true;
    for (int e = 0; e < 5; ++e) {
      const auto& cell = counts.settings[e].samples[s];
      const long ns = cell[0] + cell[1] + cell[2] + cell[3];
      if (ns <= 0) {
        complete = false;
        break;
      }
      ks += static_cast<double>(cell[0] + cell[3] - cell[1] - cell[2]) / ns;
    }
    if (complete) sample_k.push_back(ks);
  }
  out.kappa = combine(kappa, std::sqrt(var_poisson), sample_k);
  return out;
}

// --- experiment drivers ----------------------------------------------------

WrightExperimentReport run_wright_experiment(const StateVector& state,
                                             const Pentagram& ideal,
                                             const NoiseModel& noise,
                                             const ShotPlan& plan) {
  WrightExperimentReport report;
  report.noise = noise;
  report.plan = plan;
  report.counts = sample_wright_counts(state, ideal, noise, plan);
  report.estimate = estimate_wright(report.counts);
  report.quantum_value = kWrightQuantumValue;
  const Estimate& w = report.estimate.w;
  report.significance =
      w.sigma > 0.0 ? (w.value - kWrightClassicalBound) / w.sigma : 0.0;
  report.violated = w.value > kWrightClassicalBound;
  return report;
}

KcbsExperimentReport run_kcbs_experiment(const StateVector& state,
                                         const Pentagram& ideal,
                                         const NoiseModel& noise,
                                         const ShotPlan& plan, bool forward,
                                         bool reverse) {
  KcbsExperimentReport report;
  report.noise = noise;
  report.plan = plan;
  report.quantum_value = kKcbsQuantumValue;
  const auto run_order = [&](Order order) {
    KcbsOrderResult r;
    r.order = order;
    r.counts = sample_kcbs_counts(state, ideal, noise, plan, order);
    r.estimate = estimate_kcbs(r.counts);
    const Estimate& k = r.estimate.kappa;
    r.significance =
        k.sigma > 0.0 ? (kKcbsClassicalBound - k.value) / k.sigma : 0.0;
    r.violated = k.value < kKcbsClassicalBound;
    return r;
  };
  if (forward) report.orders.push_back(run_order(Order::forward));
  if (reverse) report.orders.push_back(run_order(Order::reverse));
  return report;
}

WrightExperimentReport run_wright_classical(const ClassicalStrategy& strategy,
                                            const ShotPlan& plan) {
  WrightExperimentReport report;
  report.noise = NoiseModel::ideal();
  report.plan = plan;
  report.counts = sample_wright_classical(strategy, plan);
  report.estimate = estimate_wright(report.counts);
  report.quantum_value = kWrightQuantumValue;
  const Estimate& w = report.estimate.w;
  report.significance =
      w.sigma > 0.0 ? (w.value - kWrightClassicalBound) / w.sigma : 0.0;
  report.violated = w.value > kWrightClassicalBound;
  return report;
}

KcbsExperimentReport run_kcbs_classical(const ClassicalStrategy& strategy,
                                        const ShotPlan& plan, bool forward,
                                        bool reverse) {
  KcbsExperimentReport report;
  report.noise = NoiseModel::ideal();
  report.plan = plan;
  report.quantum_value = kKcbsQuantumValue;
  const auto run_order = [&](Order order) {
    KcbsOrderResult r;
    r.order = order;
    r.counts = sample_kcbs_classical(strategy, plan);
    r.estimate = estimate_kcbs(r.counts);
    const Estimate& k = r.estimate.kappa;
    r.significance =
        k.sigma > 0.0 ? (kKcbsClassicalBound - k.value) / k.sigma : 0.0;
    r.violated = k.value < kKcbsClassicalBound;
    return r;
  };
  if (forward) report.orders.push_back(run_order(Order::forward));
  if (reverse) report.orders.push_back(run_order(Order::reverse));
  return report;
}

}  // namespace kcbs

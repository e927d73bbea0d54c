#include "kcbslab/inequality.hpp"
#include "kcbslab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace kcbs {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Unit vector with k complex components from 2k-2 real parameters:
// k-1 chained magnitude angles, k-1 phases on components 1..k-1 (the first
// component is real, absorbing the global phase).
VectorXcd unit_from_params(const double* p, int k) {
  VectorXcd v(k);
  double radial = 1.0;
  for (int j = 0; j < k; ++j) {
    const double mag = j + 1 < k ? radial * std::cos(p[j]) : radial;
    if (j + 1 < k) radial *= std::sin(p[j]);
    if (j == 0) {
      v(j) = Complex(mag, 0.0);
    } else {
      const double phase = p[(k - 1) + (j - 1)];
      v(j) = mag * Complex(std::cos(phase), std::sin(phase));
    }
  }
  return v;
}

// Inverse of unit_from_params up to global phase; used for warm starts.
std::vector<double> params_for_unit(VectorXcd v) {
  const int k = static_cast<int>(v.size());
  // rotate so the leading non-negligible component is real non-negative
  Complex lead = v(0);
  if (std::abs(lead) < 1e-14) {
    for (int j = 1; j < k; ++j) {
      if (std::abs(v(j)) > std::abs(lead)) lead = v(j);
    }
  }
  if (std::abs(lead) > 1e-14) v *= std::conj(lead) / std::abs(lead);

  std::vector<double> p(2 * (k - 1), 0.0);
  double radial = 1.0;
  for (int j = 0; j + 1 < k; ++j) {
    const double mag = std::min(1.0, j == 0 ? std::max(0.0, v(0).real())
                                            : std::abs(v(j)));
    const double ratio = radial > 1e-14 ? std::clamp(mag / radial, -1.0, 1.0)
                                        : 1.0;
    p[j] = std::acos(ratio);
    radial *= std::sin(p[j]);
  }
  for (int j = 1; j < k; ++j) {
    p[(k - 1) + (j - 1)] = std::arg(v(j));
  }
  return p;
}

// Deterministic orthonormal basis of the orthogonal complement of v.
MatrixXcd complement_basis(const VectorXcd& v) {
  const int d = static_cast<int>(v.size());
  int skip = 0;
  for (int j = 1; j < d; ++j) {
    if (std::abs(v(j)) > std::abs(v(skip))) skip = j;
  }
  MatrixXcd basis(d, d - 1);
  int col = 0;
  for (int j = 0; j < d; ++j) {
    if (j == skip) continue;
    VectorXcd w = VectorXcd::Zero(d);
    w(j) = 1.0;
    w -= v * v.dot(w);
    for (int prev = 0; prev < col; ++prev) {
      w -= basis.col(prev) * basis.col(prev).dot(w);
    }
    basis.col(col++) = w.normalized();
  }
  return basis;
}

struct Configuration {
  std::vector<VectorXcd> vectors;  // five unit vectors
};

// Parameter layout: 2(d-1) entries for v0, then 2(d-2) per chained vector.
int parameter_count(int d) { return 2 * (d - 1) + 4 * 2 * (d - 2); }

Configuration configuration_from_params(const std::vector<double>& p, int d) {
  Configuration cfg;
  cfg.vectors.reserve(5);
  int off = 0;
  cfg.vectors.push_back(unit_from_params(p.data(), d));
  off += 2 * (d - 1);
  for (int i = 1; i < 5; ++i) {
    const MatrixXcd basis = complement_basis(cfg.vectors.back());
    const VectorXcd coeff = unit_from_params(p.data() + off, d - 1);
    off += 2 * (d - 2);
    cfg.vectors.push_back(basis * coeff);
  }
  return cfg;
}

std::vector<double> params_for_configuration(
    const std::vector<VectorXcd>& vectors, int d) {
  std::vector<double> p;
  p.reserve(parameter_count(d));
  const auto v0 = params_for_unit(vectors[0]);
  p.insert(p.end(), v0.begin(), v0.end());
  for (int i = 1; i < 5; ++i) {
    const MatrixXcd basis = complement_basis(vectors[i - 1]);
    const VectorXcd coeff = basis.adjoint() * vectors[i];
    const auto pi = params_for_unit(coeff.normalized());
    p.insert(p.end(), pi.begin(), pi.end());
  }
  return p;
}

MatrixXcd projector(const VectorXcd& v) { return v * v.adjoint(); }

// Sum of the five rank-1 projectors; its top eigenvalue is the best
// achievable probability sum over all states.
double wright_score(const Configuration& cfg, VectorXcd* state) {
  const int d = static_cast<int>(cfg.vectors[0].size());
  MatrixXcd sum = MatrixXcd::Zero(d, d);
  for (const auto& v : cfg.vectors) sum += projector(v);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sum);
  if (state) *state = es.eigenvectors().col(d - 1);
  return es.eigenvalues()(d - 1);
}

// Sequential correlation operator: each ordered edge contributes
// P1 Q2 P1 - (1-P1) Q2 (1-P1); kappa for a state is its expectation, so the
// best kappa is the bottom eigenvalue. Reduces to Q1 Q2 for commuting pairs.
double kcbs_score(const Configuration& cfg, VectorXcd* state) {
  const int d = static_cast<int>(cfg.vectors[0].size());
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  MatrixXcd K = MatrixXcd::Zero(d, d);
  for (int i = 0; i < 5; ++i) {
    const MatrixXcd p1 = projector(cfg.vectors[i]);
    const MatrixXcd q2 = 2.0 * projector(cfg.vectors[next_mod5(i)]) - id;
    const MatrixXcd p1c = id - p1;
    K += p1 * q2 * p1 - p1c * q2 * p1c;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(K);
  if (state) *state = es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

double closing_violation(const Configuration& cfg) {
  return std::norm(cfg.vectors[4].dot(cfg.vectors[0]));
}

double max_cyclic_overlap(const std::vector<VectorXcd>& vectors) {
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst,
                     std::abs(vectors[i].dot(vectors[next_mod5(i)])));
  }
  return worst;
}

// Replace v4 by an exact unit normal of span{v3, v0}, phase-aligned with the
// search result. In d = 3 this is the unique closing vector; in higher
// dimensions it is the nearest one.
void project_closing_constraint(Configuration& cfg) {
  const int d = static_cast<int>(cfg.vectors[0].size());
  VectorXcd w = cfg.vectors[4];
  for (int pass = 0; pass < 2; ++pass) {
    w -= cfg.vectors[3] * cfg.vectors[3].dot(w);
    w -= cfg.vectors[0] * cfg.vectors[0].dot(w);
  }
  if (w.norm() < 1e-8 && d == 3) {
    // search ended far from feasibility: take the kernel of [v3 v0]^dag
    MatrixXcd m(2, d);
    m.row(0) = cfg.vectors[3].adjoint();
    m.row(1) = cfg.vectors[0].adjoint();
    Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeFullV);
    w = svd.matrixV().col(d - 1);
    const Complex align = w.dot(cfg.vectors[4]);
    if (std::abs(align) > 1e-14) w *= align / std::abs(align);
  }
  if (w.norm() > 1e-14) cfg.vectors[4] = w.normalized();
}

// --- Nelder-Mead ---------------------------------------------------------

struct SimplexResult {
  std::vector<double> best_point;
  double best_value;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, double scale,
                          long max_evals, long* evals) {
  const int n = static_cast<int>(start.size());
  std::vector<std::vector<double>> x(n + 1, start);
  std::vector<double> fx(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1][i] += scale;
  for (int i = 0; i <= n; ++i) {
    fx[i] = f(x[i]);
    ++*evals;
  }

  const auto order = [&] {
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> nx(n + 1);
    std::vector<double> nf(n + 1);
    for (int i = 0; i <= n; ++i) {
      nx[i] = x[idx[i]];
      nf[i] = fx[idx[i]];
    }
    x = std::move(nx);
    fx = std::move(nf);
  };

  order();
  while (*evals < max_evals) {
    // centroid of all but the worst
    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) centroid[j] += x[i][j];
    }
    for (double& c : centroid) c /= n;

    const auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (int j = 0; j < n; ++j) {
        p[j] = centroid[j] + coef * (x[n][j] - centroid[j]);
      }
      return p;
    };

    const std::vector<double> refl = blend(-1.0);
    const double f_refl = f(refl);
    ++*evals;
    if (f_refl < fx[0]) {
      const std::vector<double> expd = blend(-2.0);
      const double f_expd = f(expd);
      ++*evals;
      if (f_expd < f_refl) {
        x[n] = expd;
        fx[n] = f_expd;
      } else {
        x[n] = refl;
        fx[n] = f_refl;
      }
    } else if (f_refl < fx[n - 1]) {
      x[n] = refl;
      fx[n] = f_refl;
    } else {
      const bool outside = f_refl < fx[n];
      const std::vector<double> ctr = blend(outside ? -0.5 : 0.5);
      const double f_ctr = f(ctr);
      ++*evals;
      if (f_ctr < std::min(f_refl, fx[n])) {
        x[n] = ctr;
        fx[n] = f_ctr;
      } else {
        for (int i = 1; i <= n && *evals < max_evals; ++i) {
          for (int j = 0; j < n; ++j) x[i][j] = x[0][j] + 0.5 * (x[i][j] - x[0][j]);
          fx[i] = f(x[i]);
          ++*evals;
        }
      }
    }
    order();
    double spread = 0.0;
    for (int j = 0; j < n; ++j) spread += std::abs(x[n][j] - x[0][j]);
    if (spread < 1e-13 && fx[n] - fx[0] < 1e-15) break;
  }
  return {x[0], fx[0]};
}

struct RestartOutcome {
  double exact_value;  // feasible, penalty-free (W or -kappa)
  Configuration config;
  long evals;
};

RestartOutcome run_restart(Target target, int d, int restart,
                           const OptimizerOptions& opts,
                           const std::vector<double>& warm) {
  const int n = parameter_count(d);
  std::vector<double> start;
  double scale;
  if (restart == 0) {
    start = warm;
    scale = 0.02;
  } else {
    auto rng = substream(opts.seed, 0x6f70746dULL, restart);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
    start.resize(n);
    // magnitude angles first, then phases, per vector block
    int off = 0;
    for (int block = 0; block < 5; ++block) {
      const int k = block == 0 ? d : d - 1;
      for (int j = 0; j < k - 1; ++j) start[off++] = angle(rng);
      for (int j = 0; j < k - 1; ++j) start[off++] = phase(rng);
    }
    scale = 0.3;
  }

  // escalate the closing-constraint weight across restarts
  const int total = std::max(opts.restarts, 2);
  const double weight =
      100.0 * std::pow(10.0, 3.0 * std::min(restart, total - 1) / (total - 1));

  long evals = 0;
  const auto objective = [&](const std::vector<double>& p) {
    const Configuration cfg = configuration_from_params(p, d);
    const double raw = target == Target::wright ? wright_score(cfg, nullptr)
                                                : -kcbs_score(cfg, nullptr);
    return -(raw - weight * closing_violation(cfg));
  };

  const SimplexResult best =
      nelder_mead(objective, start, scale, opts.evaluations_per_restart,
                  &evals);

  Configuration cfg = configuration_from_params(best.best_point, d);
  project_closing_constraint(cfg);
  const double exact = target == Target::wright ? wright_score(cfg, nullptr)
                                                : -kcbs_score(cfg, nullptr);
  return {exact, std::move(cfg), evals};
}

}  // namespace

OptimizationResult maximize_violation(Target target,
                                      const OptimizerOptions& opts) {
  if (opts.dimension != 3 && opts.dimension != 4) {
    throw std::invalid_argument("maximize_violation: dimension must be 3 or 4");
  }
  if (opts.restarts < 1 || opts.evaluations_per_restart < 1) {
    throw std::invalid_argument("maximize_violation: budget must be >= 1");
  }
  const int d = opts.dimension;

  // warm start: the known optimal configuration, zero-padded above d = 3
  const Pentagram pent = make_pentagram();
  std::vector<VectorXcd> known(5, VectorXcd::Zero(d));
  for (int i = 0; i < 5; ++i) {
    known[i].head(3) = pent.questions[i].eigenvector().amplitudes();
  }
  const std::vector<double> warm = params_for_configuration(known, d);

  std::vector<RestartOutcome> outcomes(opts.restarts);
  const int threads =
      opts.threads > 0
          ? opts.threads
          : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int r = next.fetch_add(1); r < opts.restarts; r = next.fetch_add(1)) {
      outcomes[r] = run_restart(target, d, r, opts, warm);
    }
  };
  if (threads <= 1 || opts.restarts == 1) {
    worker();
  } else {
    std::vector<std::future<void>> pool;
    for (int t = 0; t < std::min(threads, opts.restarts); ++t) {
      pool.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : pool) f.get();
  }

  // deterministic reduction: best exact value, ties to the lowest restart
  int best = 0;
  long total_evals = 0;
  for (int r = 0; r < opts.restarts; ++r) {
    total_evals += outcomes[r].evals;
    if (outcomes[r].exact_value > outcomes[best].exact_value + 0.0) {
      best = r;
    }
  }

  Configuration cfg = std::move(outcomes[best].config);
  VectorXcd state;
  const double value = target == Target::wright ? wright_score(cfg, &state)
                                                : kcbs_score(cfg, &state);

  OptimizationResult result;
  result.target = target;
  result.best_value = value;
  result.vectors = std::move(cfg.vectors);
  result.state = std::move(state);
  result.iterations = total_evals;
  result.residual = max_cyclic_overlap(result.vectors);
  result.converged =
      target == Target::wright
          ? value >= kWrightQuantumValue - kWrightConvergenceTol
          : value <= kKcbsQuantumValue + kKcbsConvergenceTol;
  return result;
}

}  // namespace kcbs

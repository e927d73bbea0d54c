#include "kcbslab/photonic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kcbs::photonic {

namespace {

constexpr double kBinToleranceNs = 1e-6;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

ModeState ModeState::single(const Vec4& amplitudes, double delay_ns) {
  ModeState s;
  s.add(delay_ns, amplitudes);
  return s;
}

void ModeState::add(double delay_ns, const Vec4& amplitudes) {
  if (amplitudes.squaredNorm() == 0.0) return;
  auto it = std::lower_bound(
      bins_.begin(), bins_.end(), delay_ns - kBinToleranceNs,
      [](const TimeBin& bin, double d) { return bin.delay_ns < d; });
  if (it != bins_.end() && std::abs(it->delay_ns - delay_ns) <= kBinToleranceNs) {
    it->amplitudes += amplitudes;
  } else {
    bins_.insert(it, TimeBin{delay_ns, amplitudes});
  }
}

double ModeState::total_norm_squared() const {
  double sum = 0.0;
  for (const TimeBin& bin : bins_) sum += bin.amplitudes.squaredNorm();
  return sum;
}

double ModeState::norm_squared_at(double delay_ns) const {
  return amplitudes_at(delay_ns).squaredNorm();
}

Vec4 ModeState::amplitudes_at(double delay_ns) const {
  for (const TimeBin& bin : bins_) {
    if (std::abs(bin.delay_ns - delay_ns) <= kBinToleranceNs) {
      return bin.amplitudes;
    }
  }
  return Vec4::Zero();
}

ModeState encode(const StateVector& state) {
  Vec4 amp;
  amp << state[0], state[1], state[2], Complex(0.0);
  return ModeState::single(amp);
}

Eigen::Matrix2d hwp_transfer(double theta_deg) {
  const double c = std::cos(2.0 * deg2rad(theta_deg));
  const double s = std::sin(2.0 * deg2rad(theta_deg));
  Eigen::Matrix2d m;
  m << c, s, s, -c;
  return m;
}

Eigen::Matrix2cd qwp_transfer(double theta_deg) {
  const double t = deg2rad(theta_deg);
  Eigen::Matrix2d rot;
  rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  Eigen::Matrix2cd retard = Eigen::Matrix2cd::Zero();
  retard(0, 0) = Complex(1.0, 0.0);
  retard(1, 1) = Complex(0.0, 1.0);
  return rot.cast<Complex>() * retard * rot.transpose().cast<Complex>();
}

OpticalElement OpticalElement::hwp(double angle_deg, Path path, bool inv) {
  OpticalElement e;
  e.kind = Kind::hwp;
  e.angle_deg = angle_deg;
  e.path = path;
  e.inverted = inv;
  return e;
}

OpticalElement OpticalElement::qwp(double angle_deg, Path path, bool inv) {
  OpticalElement e;
  e.kind = Kind::qwp;
  e.angle_deg = angle_deg;
  e.path = path;
  e.inverted = inv;
  return e;
}

OpticalElement OpticalElement::pbs() {
  OpticalElement e;
  e.kind = Kind::pbs;
  return e;
}

OpticalElement OpticalElement::mirror() {
  OpticalElement e;
  e.kind = Kind::mirror;
  return e;
}

OpticalElement OpticalElement::mode_transfer(bool inv) {
  OpticalElement e;
  e.kind = Kind::mode_transfer;
  e.inverted = inv;
  return e;
}

OpticalElement OpticalElement::delay(double delay_ns, Mode mode) {
  OpticalElement e;
  e.kind = Kind::delay;
  e.delay_ns = delay_ns;
  e.delayed_mode = mode;
  return e;
}

Mat4 OpticalElement::transfer() const {
  Mat4 m = Mat4::Identity();
  switch (kind) {
    case Kind::hwp: {
      const Eigen::Matrix2d block = hwp_transfer(angle_deg);
      const int o = path == Path::b ? 0 : 2;
      m.block<2, 2>(o, o) = block.cast<Complex>();
      break;
    }
    case Kind::qwp: {
      const Eigen::Matrix2cd block = qwp_transfer(angle_deg);
      const int o = path == Path::b ? 0 : 2;
      m.block<2, 2>(o, o) = block;
      break;
    }
    case Kind::pbs:
      // transmit H, reflect V across the two paths
      m.setZero();
      m(kHb, kHb) = 1.0;
      m(kHa, kHa) = 1.0;
      m(kVa, kVb) = 1.0;
      m(kVb, kVa) = 1.0;
      break;
    case Kind::mirror:
      m.setZero();
      m(kHa, kHb) = 1.0;
      m(kHb, kHa) = 1.0;
      m(kVa, kVb) = 1.0;
      m(kVb, kVa) = 1.0;
      break;
    case Kind::mode_transfer:
      // mirror + PBS composite: (V,b) -> (H,b), (H,a) -> (V,b) with the
      // polarization flip, (H,b) -> (H,a); the loss sink maps to itself
      m.setZero();
      m(kHb, kVb) = 1.0;
      m(kVb, kHa) = 1.0;
      m(kHa, kHb) = 1.0;
      m(kVa, kVa) = 1.0;
      break;
    case Kind::delay:
      break;  // identity on amplitudes; apply() shifts the time bin
  }
  return inverted ? Mat4(m.adjoint()) : m;
}

ModeState OpticalElement::apply(const ModeState& in) const {
  ModeState out;
  if (kind == Kind::delay) {
    for (const TimeBin& bin : in.bins()) {
      Vec4 stay = bin.amplitudes;
      Vec4 moved = Vec4::Zero();
      moved(delayed_mode) = stay(delayed_mode);
      stay(delayed_mode) = 0.0;
      out.add(bin.delay_ns, stay);
      out.add(bin.delay_ns + delay_ns, moved);
    }
    return out;
  }
  const Mat4 m = transfer();
  for (const TimeBin& bin : in.bins()) {
    out.add(bin.delay_ns, m * bin.amplitudes);
  }
  return out;
}

namespace {

std::vector<OpticalElement> standard_pipeline(double theta_deg,
                                              double delay_ns,
                                              const InternalSettings& s) {
  using E = OpticalElement;
  return {
      E::hwp(theta_deg, Path::b),
      E::mode_transfer(),
      E::hwp(s.fold_hwp_deg, Path::b),
      E::qwp(s.comp_qwp_deg, Path::b),
      E::delay(delay_ns, kHb),
      E::qwp(s.comp_qwp_deg, Path::b, /*inv=*/true),
      E::hwp(s.fold_hwp_deg, Path::b, /*inv=*/true),
      E::mode_transfer(/*inv=*/true),
      E::hwp(theta_deg, Path::b, /*inv=*/true),
  };
}

Vec3 effective_qutrit_vector(double theta_deg, double fold_deg,
                             double qwp_deg) {
  Mat4 u = Mat4::Identity();
  u = OpticalElement::hwp(theta_deg, Path::b).transfer() * u;
  u = OpticalElement::mode_transfer().transfer() * u;
  u = OpticalElement::hwp(fold_deg, Path::b).transfer() * u;
  u = OpticalElement::qwp(qwp_deg, Path::b).transfer() * u;
  const Vec4 v = u.adjoint() * Vec4::Unit(kHb);
  Vec3 q = v.head<3>();
  return q.normalized();
}

// orthonormal basis of the plane orthogonal to v
Eigen::Matrix<Complex, 3, 2> orthogonal_plane(const Vec3& v) {
  Eigen::Matrix<Complex, 3, 2> basis;
  int skip = 0;
  for (int j = 1; j < 3; ++j) {
    if (std::abs(v(j)) > std::abs(v(skip))) skip = j;
  }
  int col = 0;
  for (int j = 0; j < 3; ++j) {
    if (j == skip) continue;
    Vec3 w = Vec3::Zero();
    w(j) = 1.0;
    w -= v * v.dot(w);
    for (int prev = 0; prev < col; ++prev) {
      w -= basis.col(prev) * basis.col(prev).dot(w);
    }
    basis.col(col++) = w.normalized();
  }
  return basis;
}

}  // namespace

InternalSettings solve_internal_settings() {
  const Pentagram pent = make_pentagram();
  std::array<Vec3, 5> targets;
  for (int i = 0; i < 5; ++i) {
    targets[i] = pent.questions[i].eigenvector().amplitudes();
  }

  const auto infidelity = [&](double fold, double qwp) {
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vec3 eff =
          effective_qutrit_vector(kPlateAnglesDeg[i], fold, qwp);
      sum += 1.0 - std::norm(targets[i].dot(eff));
    }
    return sum;
  };

  // coarse grid over one period of each plate
  double fold = 0.0, qwp = 0.0, best = infidelity(0.0, 0.0);
  for (double f = 0.0; f < 90.0; f += 1.5) {
    for (double q = 0.0; q < 90.0; q += 7.5) {
      const double val = infidelity(f, q);
      if (val < best) {
        best = val;
        fold = f;
        qwp = q;
      }
    }
  }

  // pattern-search refinement
  {
    double step = 1.0;
    for (int round = 0; round < 200 && step > 1e-9; ++round) {
      bool improved = false;
      const double candidates[4][2] = {
          {fold + step, qwp}, {fold - step, qwp},
          {fold, qwp + step}, {fold, qwp - step}};
      for (const auto& cand : candidates) {
        const double val = infidelity(cand[0], cand[1]);
        if (val < best) {
          best = val;
          fold = cand[0];
          qwp = cand[1];
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  // Gauss-Newton on the orthogonality residuals. The fidelity objective is
  // quadratic around its zero and floats out near 1e-16; the residuals are
  // linear in the parameter error, so they polish to machine precision.
  const auto residuals = [&](double f, double q, Eigen::VectorXd& r) {
    r.resize(20);
    int k = 0;
    for (int i = 0; i < 5; ++i) {
      const Vec3 eff = effective_qutrit_vector(kPlateAnglesDeg[i], f, q);
      const auto plane = orthogonal_plane(targets[i]);
      for (int c = 0; c < 2; ++c) {
        const Complex z = plane.col(c).dot(eff);
        r(k++) = z.real();
        r(k++) = z.imag();
      }
    }
  };

  Eigen::VectorXd r;
  residuals(fold, qwp, r);
  for (int iter = 0; iter < 40 && r.norm() > 1e-14; ++iter) {
    const double h = 1e-5;
    Eigen::VectorXd rp, rm;
    Eigen::MatrixXd jac(20, 2);
    residuals(fold + h, qwp, rp);
    residuals(fold - h, qwp, rm);
    jac.col(0) = (rp - rm) / (2 * h);
    residuals(fold, qwp + h, rp);
    residuals(fold, qwp - h, rm);
    jac.col(1) = (rp - rm) / (2 * h);

    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r;
    const Eigen::Vector2d step = jtj.ldlt().solve(jtr);
    double damping = 1.0;
    Eigen::VectorXd r_next;
    for (int tries = 0; tries < 12; ++tries) {
      residuals(fold - damping * step(0), qwp - damping * step(1), r_next);
      if (r_next.norm() < r.norm()) break;
      damping *= 0.5;
    }
    if (r_next.norm() >= r.norm()) break;
    fold -= damping * step(0);
    qwp -= damping * step(1);
    r = r_next;
  }

  return InternalSettings{fold, qwp, infidelity(fold, qwp)};
}

const InternalSettings& internal_settings() {
  static const InternalSettings settings = solve_internal_settings();
  return settings;
}

MeasurementDevice::MeasurementDevice(double plate_angle_deg, double delay_ns,
                                     std::vector<OpticalElement> pipeline)
    : plate_angle_deg_(plate_angle_deg),
      delay_ns_(delay_ns),
      pipeline_(std::move(pipeline)) {
  if (delay_ns_ <= 0.0) {
    throw std::invalid_argument("MeasurementDevice: delay must be positive");
  }
}

Mat4 MeasurementDevice::forward_unitary() const {
  Mat4 u = Mat4::Identity();
  for (const OpticalElement& e : pipeline_) {
    if (e.kind == OpticalElement::Kind::delay) break;
    u = e.transfer() * u;
  }
  return u;
}

StateVector MeasurementDevice::effective_eigenvector() const {
  const Vec4 v = forward_unitary().adjoint() * Vec4::Unit(kHb);
  Vec3 q = v.head<3>();
  return StateVector::normalized(q);
}

ModeState MeasurementDevice::apply(const ModeState& in) const {
  ModeState state = in;
  for (const OpticalElement& e : pipeline_) {
    state = e.apply(state);
  }
  return state;
}

MeasurementDevice build_device(double theta_deg, double delay_ns) {
  return build_device(theta_deg, delay_ns, internal_settings());
}

MeasurementDevice build_device(double theta_deg, double delay_ns,
                               const InternalSettings& settings) {
  if (settings.objective > 1e-6) {
    throw DeviceConfigError(
        "build_device: internal settings solve left infidelity " +
            std::to_string(settings.objective),
        1.0 - settings.objective);
  }
  return MeasurementDevice(theta_deg, delay_ns,
                           standard_pipeline(theta_deg, delay_ns, settings));
}

double verify_device(const MeasurementDevice& device, const Question& target) {
  return device.effective_eigenvector().fidelity(target.eigenvector());
}

FidelityTable verify_all_devices(const Pentagram& pent) {
  FidelityTable table{};
  table.settings = internal_settings();
  for (int i = 0; i < 5; ++i) {
    const MeasurementDevice device =
        build_device(kPlateAnglesDeg[i], kSlotSpacingNs, table.settings);
    table.fidelity[i] = verify_device(device, pent.questions[i]);
  }
  return table;
}

ArrivalTable cascade(const MeasurementDevice& first,
                     const MeasurementDevice& second, const ModeState& input) {
  if (std::abs(second.delay_ns() - 2.0 * first.delay_ns()) > kBinToleranceNs) {
    throw std::invalid_argument(
        "cascade: second device must delay twice as long as the first");
  }
  const double in_norm = input.total_norm_squared();
  const ModeState out = second.apply(first.apply(input));

  ArrivalTable table{};
  double collected = 0.0;
  for (int s = 0; s < 4; ++s) {
    const double p = out.norm_squared_at(s * first.delay_ns());
    table.probability[s] = p;
    collected += p;
  }
  table.loss = in_norm - collected;
  return table;
}

}  // namespace kcbs::photonic

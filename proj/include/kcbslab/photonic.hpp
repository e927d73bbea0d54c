// Jones-calculus simulation of the optical bench: polarization+path mode
// encoding, wave plates and beam-splitter composites, the time-multiplexed
// measurement device, and the two-device cascade.

#pragma once

#include "kcbslab/core.hpp"
#include "kcbslab/sequential.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace kcbs::photonic {

using Vec4 = Eigen::Vector4cd;
using Mat4 = Eigen::Matrix4cd;

// Mode basis order. The qutrit lives on the first three modes; a (V,a)
// component never belongs to a valid encoding and acts as the loss sink.
enum Mode : int { kHb = 0, kVb = 1, kHa = 2, kVa = 3 };

enum class Path : int { b = 0, a = 1 };

// Amplitudes per accumulated delay. Components in different bins arrive at
// different times and never interfere.
struct TimeBin {
  double delay_ns;
  Vec4 amplitudes;
};

class ModeState {
 public:
  ModeState() = default;  // vacuum

  static ModeState single(const Vec4& amplitudes, double delay_ns = 0.0);

  const std::vector<TimeBin>& bins() const { return bins_; }
  void add(double delay_ns, const Vec4& amplitudes);

  double total_norm_squared() const;
  double norm_squared_at(double delay_ns) const;
  Vec4 amplitudes_at(double delay_ns) const;

 private:
  std::vector<TimeBin> bins_;  // sorted by delay
};

// Qutrit encoding |0> = (H,b), |1> = (V,b), |2> = (H,a).
ModeState encode(const StateVector& state);

// Half-wave plate at angle theta from the horizontal fast axis:
// [[cos 2t, sin 2t], [sin 2t, -cos 2t]] on (H, V) of one path.
Eigen::Matrix2d hwp_transfer(double theta_deg);

// Quarter-wave plate: R(t) diag(1, i) R(-t) on (H, V) of one path.
Eigen::Matrix2cd qwp_transfer(double theta_deg);

struct OpticalElement {
  enum class Kind { hwp, qwp, pbs, mirror, mode_transfer, delay };

  Kind kind;
  Path path = Path::b;     // wave plates act on one path
  double angle_deg = 0.0;  // wave plates
  double delay_ns = 0.0;   // delay line
  Mode delayed_mode = kHb;
  bool inverted = false;   // traversed during the re-preparation pass

  static OpticalElement hwp(double angle_deg, Path path, bool inv = false);
  static OpticalElement qwp(double angle_deg, Path path, bool inv = false);
  static OpticalElement pbs();
  static OpticalElement mirror();
  static OpticalElement mode_transfer(bool inv = false);
  static OpticalElement delay(double delay_ns, Mode mode);

  // Unitary transfer on the four modes; identity for the delay element,
  // whose action is the time-bin shift handled by apply().
  Mat4 transfer() const;
  ModeState apply(const ModeState& in) const;
};

// Fixed internal settings shared by all five devices: the fold plate maps
// the merged component onto (H,b), the quarter-wave plate compensates
// residual phase. Solved numerically, jointly over the five plate angles.
struct InternalSettings {
  double fold_hwp_deg;
  double comp_qwp_deg;
  double objective;  // joint infidelity residual at the solution
};

InternalSettings solve_internal_settings();

// Memoized solve; runs at most once per process.
const InternalSettings& internal_settings();

// Plate angles realizing questions 0..4 on the shared device template.
inline constexpr std::array<double, 5> kPlateAnglesDeg = {45.0, 117.0, 9.0,
                                                          81.0, 153.0};

class MeasurementDevice {
 public:
  MeasurementDevice(double plate_angle_deg, double delay_ns,
                    std::vector<OpticalElement> pipeline);

  double plate_angle_deg() const { return plate_angle_deg_; }
  double delay_ns() const { return delay_ns_; }
  const std::vector<OpticalElement>& pipeline() const { return pipeline_; }

  // Composition of the forward stages (up to the delay split).
  Mat4 forward_unitary() const;

  // Eigenvector of the delayed (+1) branch, read off the assembled optics.
  StateVector effective_eigenvector() const;

  // Full pass: forward stages, time-bin split at the delay line, inverse
  // stages. Branches are re-prepared Lueders states in separate bins.
  ModeState apply(const ModeState& in) const;

 private:
  double plate_angle_deg_;
  double delay_ns_;
  std::vector<OpticalElement> pipeline_;
};

struct DeviceConfigError : std::runtime_error {
  explicit DeviceConfigError(const std::string& what, double fidelity)
      : std::runtime_error(what), best_fidelity(fidelity) {}
  double best_fidelity;
};

// Assembles the standard pipeline with the solved internal settings.
// Throws DeviceConfigError if the internal solve left any of the five
// reference plate angles below fidelity 1 - 1e-6.
MeasurementDevice build_device(double theta_deg, double delay_ns);
MeasurementDevice build_device(double theta_deg, double delay_ns,
                               const InternalSettings& settings);

// |<v_target|v_effective>|^2 for the device's delayed branch.
double verify_device(const MeasurementDevice& device, const Question& target);

struct FidelityTable {
  std::array<double, 5> fidelity;
  InternalSettings settings;
};

FidelityTable verify_all_devices(const Pentagram& pent);

// Probabilities collected at the four arrival slots after two devices with
// delays of one and two slot spacings.
struct ArrivalTable {
  std::array<double, 4> probability;  // indexed by Slot
  double loss;

  double at(Slot s) const { return probability[static_cast<int>(s)]; }
};

ArrivalTable cascade(const MeasurementDevice& first,
                     const MeasurementDevice& second, const ModeState& input);

}  // namespace kcbs::photonic

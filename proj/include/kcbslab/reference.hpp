// Published reference measurements the simulator is benchmarked against.
// Values are embedded with their table citation so reports can show
// provenance next to simulated bands.

#pragma once

#include <array>

namespace kcbs::reference {

struct ValueWithError {
  double value;
  double error;
};

inline constexpr const char* kTableICitation = "reference Table I";
inline constexpr const char* kTableIICitation = "reference Table II";

// Single-question yes probabilities and their sum.
inline constexpr std::array<ValueWithError, 5> kTableIProbabilities = {{
    {0.4600, 0.012},
    {0.4544, 0.012},
    {0.4603, 0.016},
    {0.4610, 0.011},
    {0.4566, 0.010},
}};
inline constexpr ValueWithError kTableIW = {2.292, 0.028};

// Edge correlations, first column (Q_i then Q_{i+1}).
inline constexpr std::array<ValueWithError, 5> kTableIIForward = {{
    {-0.712, 0.002},
    {-0.706, 0.002},
    {-0.704, 0.002},
    {-0.708, 0.002},
    {-0.706, 0.002},
}};
inline constexpr ValueWithError kTableIIForwardKappa = {-3.536, 0.005};

// Second column (Q_{i+1} then Q_i), taken in a separate calibration run.
inline constexpr std::array<ValueWithError, 5> kTableIIReverse = {{
    {-0.785, 0.003},
    {-0.781, 0.003},
    {-0.774, 0.003},
    {-0.774, 0.003},
    {-0.782, 0.003},
}};
inline constexpr ValueWithError kTableIIReverseKappa = {-3.896, 0.006};

// Visibility settings that reproduce the two correlation columns at band
// level, and the acceptance bands themselves.
inline constexpr double kTableIIColumn1Visibility = 0.80;
inline constexpr double kTableIIColumn2VisibilityLow = 0.87;
inline constexpr double kTableIIColumn2VisibilityHigh = 0.90;
inline constexpr ValueWithError kTableIIColumn1Band = {-3.55, 0.15};  // [-3.70,-3.40]
inline constexpr ValueWithError kTableIIColumn2Band = {-3.88, 0.08};  // [-3.96,-3.80]
inline constexpr double kTableIWBandLow = 2.2;
inline constexpr double kTableIWBandHigh = 2.4;

}  // namespace kcbs::reference

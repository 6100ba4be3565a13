#pragma once

#include <numbers>

namespace ccpt {

inline constexpr double kHbar = 1.054571817e-34;  // J*s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double hz_to_angular(double f_hz) { return kTwoPi * f_hz; }
constexpr double angular_to_hz(double omega) { return omega / kTwoPi; }

}  // namespace ccpt

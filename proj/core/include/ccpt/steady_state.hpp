#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "ccpt/model.hpp"

namespace ccpt {

enum class Branch { low, unstable, high };

std::string_view to_string(Branch branch);

/// One steady state of the driven Kerr oscillator.
struct BranchSolution {
  double n = 0.0;                 ///< mean intracavity photon number
  std::complex<double> alpha;     ///< intracavity amplitude, |alpha|^2 == n
  std::complex<double> s11;       ///< reflection coefficient at this state
  bool stable = true;
  Branch label = Branch::low;
  /// Set when the drive sits on a bifurcation edge (double root); the merged root is dropped.
  bool boundary = false;
};

/// Steady states of the cubic
///   K^2 n^3 - 2 K Delta n^2 + (Delta^2 + kappa^2/4) n = kappa_ext n_in,
/// sorted by ascending n. One or three entries.
///
/// Single roots are labelled high when their effective detuning
/// (Delta - K n) sgn(K) lies below kappa / (2 sqrt 3), its value at the critical point.
std::vector<BranchSolution> photon_number_roots(const CavityConfig& config, const Drive& drive);

/// Linear stability of a steady state with photon number n:
/// unstable iff K^2 n^2 - (Delta - 2 K n)^2 > kappa^2 / 4.
bool is_stable(double n, const CavityConfig& config, const Drive& drive);
bool classify_stability(const BranchSolution& root, const CavityConfig& config, const Drive& drive);

/// S11 = [(Delta - K n) - i(kappa_int - kappa_ext)/2] / [(Delta - K n) - i(kappa_int + kappa_ext)/2].
std::complex<double> reflection_coefficient(const CavityConfig& config, const Drive& drive,
                                            double n);

/// Argument in degrees, mapped to (-180, 180]. Throws UndefinedPhase for z == 0.
double phase_deg(std::complex<double> z);

/// Wraps an angle in degrees into (-180, 180].
double wrap_deg(double degrees);

struct CriticalPoint {
  double delta_c = 0.0;  ///< rad/s
  double p_c = 0.0;      ///< W
  double n_in_c = 0.0;   ///< photons/s
};

/// Onset of bistability. Throws NoCriticalPoint when K == 0.
CriticalPoint critical_point(const CavityConfig& config);

/// Detuning interval (rad/s) with three steady states.
struct BistableRegion {
  double delta_lower = 0.0;
  double delta_upper = 0.0;
  bool exists = false;

  double width() const { return exists ? delta_upper - delta_lower : 0.0; }
  bool contains(double delta) const {
    return exists && delta > delta_lower && delta < delta_upper;
  }
};

/// Bistable interval at input flux n_in. Each edge is a double root of the cubic; the edges
/// are located by bisection on the fold condition (vanishing discriminant) parametrised by
/// the photon number of the merging pair.
BistableRegion bistable_region(const CavityConfig& config, double n_in);

struct ResponsePoint {
  double delta = 0.0;
  std::vector<BranchSolution> branches;
};

/// Steady-state response on a sorted detuning grid at fixed input flux.
std::vector<ResponsePoint> response_curve(const CavityConfig& config, double n_in,
                                          std::span<const double> delta_grid);

}  // namespace ccpt

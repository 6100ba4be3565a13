#include "ccpt/steady_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/units.hpp"

namespace ccpt {
namespace {

// All root finding works in units of kappa_tot:
//   f(n) = n ((k n - d)^2 + 1/4) - r,  k = K/kappa, d = Delta/kappa, r = kappa_ext n_in / kappa^2.
struct ScaledCubic {
  double k = 0.0;
  double d = 0.0;
  double r = 0.0;

  double value(double n) const {
    const double x = k * n - d;
    return n * (x * x + 0.25) - r;
  }
  double slope(double n) const { return 3.0 * k * k * n * n - 4.0 * k * d * n + d * d + 0.25; }
};

ScaledCubic scale(const CavityConfig& config, const Drive& drive) {
  const double kappa = config.kappa_tot();
  return ScaledCubic{config.kerr / kappa, drive.detuning(config) / kappa,
                     config.kappa_ext * drive.n_in / (kappa * kappa)};
}

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

// Real roots of the monic cubic n^3 + a n^2 + b n + c, trigonometric form when all three
// are real and Cardano otherwise.
std::vector<double> closed_form_roots(double a, double b, double c) {
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> roots;
  if (disc < 0.0 && p < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int j = 0; j < 3; ++j) {
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * j / 3.0) + shift);
    }
  } else {
    const double sq = std::sqrt(std::max(disc, 0.0));
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) + shift);
  }
  return roots;
}

// Newton iteration safeguarded by the sign-change bracket [lo, hi].
double polish(const ScaledCubic& cubic, Bracket br, double guess) {
  double lo = br.lo;
  double hi = br.hi;
  double f_lo = cubic.value(lo);
  if (f_lo == 0.0) return lo;
  if (cubic.value(hi) == 0.0) return hi;
  const bool rising = f_lo < 0.0;

  double n = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = cubic.value(n);
    if (f == 0.0) return n;
    if ((f < 0.0) == rising) {
      lo = n;
    } else {
      hi = n;
    }
    const double df = cubic.slope(n);
    double next = (df != 0.0) ? n - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - n) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(n) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) {
      return next;
    }
    n = next;
  }
  return n;
}

// Finds an upper bound with f > 0: from f(n) >= n/4 - r any n > 4r works.
double upper_bound(const ScaledCubic& cubic, double from) {
  double hi = std::max(from, 4.0 * cubic.r);
  hi = std::max(hi * (1.0 + 1e-12), std::numeric_limits<double>::min());
  while (cubic.value(hi) <= 0.0) hi *= 2.0;
  return hi;
}

struct RootLayout {
  std::vector<Bracket> brackets;
  bool boundary = false;
};

RootLayout locate_roots(const ScaledCubic& cubic) {
  RootLayout layout;
  const double k = cubic.k;
  const double d = cubic.d;
  const double disc = d * d - 0.75;
  if (k != 0.0 && disc > 0.0 && d / k > 0.0) {
    const double root = std::sqrt(disc);
    double n_a = (2.0 * d - std::copysign(root, d)) / (3.0 * k);
    double n_b = (2.0 * d + std::copysign(root, d)) / (3.0 * k);
    if (n_a > n_b) std::swap(n_a, n_b);
    const double f_a = cubic.value(n_a);
    const double f_b = cubic.value(n_b);
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(cubic.r, 1e-300);
    const double hi = upper_bound(cubic, n_b);
    if (f_a > tol && f_b < -tol) {
      layout.brackets = {{0.0, n_a}, {n_a, n_b}, {n_b, hi}};
      return layout;
    }
    if (std::abs(f_a) <= tol) {
      layout.boundary = true;
      layout.brackets = {{n_b, hi}};
      return layout;
    }
    if (std::abs(f_b) <= tol) {
      layout.boundary = true;
      layout.brackets = {{0.0, n_a}};
      return layout;
    }
    layout.brackets = {f_a < 0.0 ? Bracket{n_b, hi} : Bracket{0.0, n_a}};
    return layout;
  }
  layout.brackets = {{0.0, upper_bound(cubic, 0.0)}};
  return layout;
}

BranchSolution make_solution(const CavityConfig& config, const Drive& drive, double n) {
  BranchSolution sol;
  sol.n = n;
  const double kappa = config.kappa_tot();
  const double x = drive.detuning(config) - config.kerr * n;
  if (n > 0.0) {
    const std::complex<double> raw =
        std::sqrt(config.kappa_ext * drive.n_in) / std::complex<double>(0.5 * kappa, -x);
    sol.alpha = std::sqrt(n) * (raw / std::abs(raw));
  }
  sol.s11 = reflection_coefficient(config, drive, n);
  return sol;
}

}  // namespace

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::low:
      return "low";
    case Branch::unstable:
      return "unstable";
    case Branch::high:
      return "high";
  }
  return "unknown";
}

std::vector<BranchSolution> photon_number_roots(const CavityConfig& config, const Drive& drive) {
  config.validate();
  drive.validate();
  const ScaledCubic cubic = scale(config, drive);

  if (cubic.r == 0.0) {
    BranchSolution sol = make_solution(config, drive, 0.0);
    sol.label = Branch::low;
    sol.stable = true;
    return {sol};
  }
  if (cubic.k == 0.0) {
    BranchSolution sol = make_solution(config, drive, cubic.r / (cubic.d * cubic.d + 0.25));
    sol.label = Branch::low;
    sol.stable = true;
    return {sol};
  }

  const RootLayout layout = locate_roots(cubic);
  const double k = cubic.k;
  const std::vector<double> guesses = closed_form_roots(
      -2.0 * cubic.d / k, (cubic.d * cubic.d + 0.25) / (k * k), -cubic.r / (k * k));

  std::vector<BranchSolution> out;
  for (const Bracket& br : layout.brackets) {
    double guess = 0.5 * (br.lo + br.hi);
    for (double g : guesses) {
      if (g > br.lo && g < br.hi) {
        guess = g;
        break;
      }
    }
    double n = polish(cubic, br, guess);
    if (n < 0.0 && n > -1e-12) n = 0.0;
    if (n < 0.0) continue;
    out.push_back(make_solution(config, drive, n));
  }
  if (out.empty()) throw NumericalError("photon-number cubic has no admissible root");

  if (out.size() == 3) {
    out[0].label = Branch::low;
    out[1].label = Branch::unstable;
    out[2].label = Branch::high;
    out[1].stable = false;
  } else {
    BranchSolution& sol = out.front();
    const double y = (cubic.d - k * sol.n) * (k > 0.0 ? 1.0 : -1.0);
    sol.label = y < 0.5 / std::sqrt(3.0) ? Branch::high : Branch::low;
    sol.stable = true;
    sol.boundary = layout.boundary;
  }
  return out;
}

bool is_stable(double n, const CavityConfig& config, const Drive& drive) {
  const double kappa = config.kappa_tot();
  const double k = config.kerr / kappa;
  const double d = drive.detuning(config) / kappa;
  const double growth = k * k * n * n - (d - 2.0 * k * n) * (d - 2.0 * k * n);
  return !(growth > 0.25);
}

bool classify_stability(const BranchSolution& root, const CavityConfig& config,
                        const Drive& drive) {
  return is_stable(root.n, config, drive);
}

std::complex<double> reflection_coefficient(const CavityConfig& config, const Drive& drive,
                                            double n) {
  const double x = drive.detuning(config) - config.kerr * n;
  const std::complex<double> num(x, -0.5 * (config.kappa_int - config.kappa_ext));
  const std::complex<double> den(x, -0.5 * (config.kappa_int + config.kappa_ext));
  return num / den;
}

double wrap_deg(double degrees) {
  double w = std::remainder(degrees, 360.0);
  if (w <= -180.0) w += 360.0;
  return w;
}

double phase_deg(std::complex<double> z) {
  if (z == std::complex<double>(0.0, 0.0)) throw UndefinedPhase("phase of a zero amplitude");
  return wrap_deg(std::arg(z) * 180.0 / std::numbers::pi);
}

CriticalPoint critical_point(const CavityConfig& config) {
  config.validate();
  if (config.kerr == 0.0) {
    throw NoCriticalPoint("Kerr coefficient is zero: the oscillator is monostable at every drive");
  }
  const double kappa = config.kappa_tot();
  CriticalPoint cp;
  cp.delta_c = std::copysign(std::sqrt(3.0) / 2.0 * kappa, config.kerr);
  cp.n_in_c = std::sqrt(3.0) / 9.0 * kappa * kappa * kappa / (std::abs(config.kerr) * config.kappa_ext);
  cp.p_c = cp.n_in_c * kHbar * (config.omega0 + cp.delta_c);
  return cp;
}

BistableRegion bistable_region(const CavityConfig& config, double n_in) {
  config.validate();
  if (!(n_in >= 0.0)) throw InvalidArgument("n_in must be >= 0");
  BistableRegion region;
  if (config.kerr == 0.0 || n_in == 0.0) return region;

  const double kappa = config.kappa_tot();
  const double k = config.kerr / kappa;
  const double abs_k = std::abs(k);
  const double r = config.kappa_ext * n_in / (kappa * kappa);
  const double r_c = std::sqrt(3.0) / (9.0 * abs_k);
  if (!(r > r_c)) return region;

  // On a fold the merging pair has photon number n with
  //   Delta = 2 k n + sigma s(n),  r = 2 k n^2 (k n + sigma s(n)),  s = sqrt(k^2 n^2 - 1/4).
  // For either sigma, r(n) is monotone on [n0, nc] and on [nc, inf).
  const double n0 = 0.5 / abs_k;
  const double nc = 1.0 / (std::sqrt(3.0) * abs_k);
  std::vector<double> edges;
  for (const double sigma : {1.0, -1.0}) {
    const auto s_of = [&](double n) { return std::sqrt(std::max(k * k * n * n - 0.25, 0.0)); };
    const auto g = [&](double n) { return 2.0 * k * n * n * (k * n + sigma * s_of(n)) - r; };

    double far = nc;
    while (g(far) <= 0.0) far *= 2.0;
    for (const Bracket piece : {Bracket{n0, nc}, Bracket{nc, far}}) {
      double lo = piece.lo;
      double hi = piece.hi;
      double g_lo = g(lo);
      const double g_hi = g(hi);
      if (g_lo == 0.0) {
        edges.push_back(2.0 * k * lo + sigma * s_of(lo));
        continue;
      }
      if ((g_lo > 0.0) == (g_hi > 0.0)) continue;
      for (int iter = 0; iter < 400 && hi - lo > 1e-16 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g(mid);
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
          lo = mid;
          g_lo = g_mid;
        } else {
          hi = mid;
        }
      }
      const double n = 0.5 * (lo + hi);
      edges.push_back(2.0 * k * n + sigma * s_of(n));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }),
              edges.end());
  if (edges.size() != 2) {
    std::ostringstream msg;
    msg << "bistable region search found " << edges.size() << " fold points (expected 2)";
    throw NumericalError(msg.str());
  }
  region.exists = true;
  region.delta_lower = edges[0] * kappa;
  region.delta_upper = edges[1] * kappa;
  return region;
}

std::vector<ResponsePoint> response_curve(const CavityConfig& config, double n_in,
                                          std::span<const double> delta_grid) {
  if (delta_grid.empty()) throw InvalidArgument("detuning grid is empty");
  if (!std::is_sorted(delta_grid.begin(), delta_grid.end())) {
    throw InvalidArgument("detuning grid must be sorted ascending");
  }
  std::vector<ResponsePoint> out;
  out.reserve(delta_grid.size());
  for (const double delta : delta_grid) {
    out.push_back(ResponsePoint{delta, photon_number_roots(config, Drive::at_detuning(config, delta, n_in))});
  }
  return out;
}

}  // namespace ccpt

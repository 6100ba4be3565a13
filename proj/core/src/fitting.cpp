#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <numbers>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/measurement.hpp"
#include "ccpt/steady_state.hpp"
#include "least_squares.hpp"

namespace ccpt {
namespace {

constexpr double kInvSqrtTwoPi = 0.3989422804014327;

double wrapped_normal(double x, double mu, double sigma) {
  double sum = 0.0;
  for (int image = -1; image <= 1; ++image) {
    const double z = (x - mu + 360.0 * image) / sigma;
    sum += std::exp(-0.5 * z * z);
  }
  return kInvSqrtTwoPi * sum / sigma;
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct Peak {
  std::size_t index = 0;
  double height = 0.0;
};

std::vector<double> smoothed_density(const PhaseHistogram& hist) {
  const std::size_t m = hist.bins();
  const double norm = 1.0 / (static_cast<double>(hist.n_tot()) * hist.bin_width());
  const int half = std::max(1, static_cast<int>(std::lround(3.0 / hist.bin_width())));
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (int j = -half; j <= half; ++j) {
      const std::size_t k = static_cast<std::size_t>(static_cast<long>(i + m) + j) % m;
      sum += static_cast<double>(hist.counts()[k]);
    }
    out[i] = sum * norm / (2.0 * half + 1.0);
  }
  return out;
}

std::vector<Peak> local_maxima(const std::vector<double>& y) {
  const std::size_t m = y.size();
  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < m; ++i) {
    const double left = y[(i + m - 1) % m];
    const double right = y[(i + 1) % m];
    if (y[i] > 0.0 && y[i] >= left && y[i] > right) peaks.push_back({i, y[i]});
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  return peaks;
}

// Minimum of y along the shorter circular arc between bins a and b.
double valley_depth(const std::vector<double>& y, std::size_t a, std::size_t b) {
  const std::size_t m = y.size();
  std::size_t forward = (b + m - a) % m;
  std::size_t start = a;
  if (forward > m / 2) {
    forward = m - forward;
    start = b;
  }
  double lowest = y[start];
  for (std::size_t j = 0; j <= forward; ++j) lowest = std::min(lowest, y[(start + j) % m]);
  return lowest;
}

double half_width_sigma(const std::vector<double>& y, std::size_t peak, double bin_width) {
  const std::size_t m = y.size();
  const double half = 0.5 * y[peak];
  std::size_t left = 0;
  while (left < m / 2 && y[(peak + m - left) % m] > half) ++left;
  std::size_t right = 0;
  while (right < m / 2 && y[(peak + right) % m] > half) ++right;
  const double fwhm = static_cast<double>(left + right) * bin_width;
  return std::max(fwhm / 2.3548, 0.5 * bin_width);
}

DoubleGaussFit moment_fit(const PhaseHistogram& hist) {
  std::complex<double> resultant;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double c = hist.bin_center(i) * std::numbers::pi / 180.0;
    resultant += static_cast<double>(hist.counts()[i]) * std::polar(1.0, c);
  }
  const double mu = resultant == std::complex<double>() ? 0.0 : phase_deg(resultant);
  double var = 0.0;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double d = wrap_deg(hist.bin_center(i) - mu);
    var += static_cast<double>(hist.counts()[i]) * d * d;
  }
  var /= static_cast<double>(hist.n_tot());
  const double sigma = std::max(std::sqrt(var), hist.bin_width() / std::sqrt(12.0));
  DoubleGaussFit fit;
  fit.mu1 = fit.mu2 = mu;
  fit.sigma1 = fit.sigma2 = sigma;
  fit.w1 = 1.0;
  fit.w2 = 0.0;
  fit.single_peak = true;
  return fit;
}

}  // namespace

double DoubleGaussFit::density(double phase_deg) const {
  return w1 * wrapped_normal(phase_deg, mu1, sigma1) + w2 * wrapped_normal(phase_deg, mu2, sigma2);
}

DoubleGaussFit fit_double_gaussian(const PhaseHistogram& hist) {
  if (hist.n_tot() < 100) {
    throw InvalidArgument("double-Gaussian fit needs at least 100 counts");
  }
  const std::vector<double> smooth = smoothed_density(hist);
  const std::vector<Peak> peaks = local_maxima(smooth);
  if (peaks.empty()) return moment_fit(hist);

  const Peak first = peaks.front();
  const double min_separation = std::max(4.0 * hist.bin_width(), 5.0);
  const Peak* second = nullptr;
  for (const Peak& p : peaks) {
    if (angular_distance(hist.bin_center(p.index), hist.bin_center(first.index)) >= min_separation &&
        p.height >= 0.02 * first.height &&
        valley_depth(smooth, first.index, p.index) < 0.75 * p.height) {
      second = &p;
      break;
    }
  }
  if (second == nullptr) return moment_fit(hist);

  const std::size_t m = hist.bins();
  const double norm = 1.0 / (static_cast<double>(hist.n_tot()) * hist.bin_width());
  std::vector<double> centers(m);
  std::vector<double> density(m);
  double peak_density = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    centers[i] = hist.bin_center(i);
    density[i] = static_cast<double>(hist.counts()[i]) * norm;
    peak_density = std::max(peak_density, density[i]);
  }
  const double scale = 1.0 / peak_density;

  // x = [mu1, mu2, log sigma1, log sigma2, logit w1]
  const auto residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const double s1 = std::exp(x[2]);
    const double s2 = std::exp(x[3]);
    const double w = logistic(x[4]);
    for (std::size_t i = 0; i < m; ++i) {
      const double model = w * wrapped_normal(centers[i], x[0], s1) +
                           (1.0 - w) * wrapped_normal(centers[i], x[1], s2);
      r[static_cast<Eigen::Index>(i)] = (model - density[i]) * scale;
    }
  };

  const double s1 = half_width_sigma(smooth, first.index, hist.bin_width());
  const double s2 = half_width_sigma(smooth, second->index, hist.bin_width());
  const double a1 = first.height * s1;
  const double a2 = second->height * s2;
  Eigen::VectorXd x0(5);
  x0 << centers[first.index], centers[second->index], std::log(s1), std::log(s2),
      std::log(a1 / a2);

  const detail::LeastSquaresResult res =
      detail::least_squares(residuals, static_cast<int>(m), x0, 1e-8, 1e-10, 4000);
  if (!res.x.allFinite()) throw NumericalError("double-Gaussian fit diverged");

  DoubleGaussFit fit;
  fit.mu1 = wrap_deg(res.x[0]);
  fit.mu2 = wrap_deg(res.x[1]);
  fit.sigma1 = std::exp(res.x[2]);
  fit.sigma2 = std::exp(res.x[3]);
  fit.w1 = logistic(res.x[4]);
  fit.w2 = 1.0 - fit.w1;
  fit.goodness = res.residual_norm / scale;
  if (fit.mu1 > fit.mu2) {
    std::swap(fit.mu1, fit.mu2);
    std::swap(fit.sigma1, fit.sigma2);
    std::swap(fit.w1, fit.w2);
  }
  const double sep = angular_distance(fit.mu1, fit.mu2);
  if (std::min(fit.w1, fit.w2) < 0.01 || sep < 0.5 * std::max(fit.sigma1, fit.sigma2)) {
    DoubleGaussFit single = moment_fit(hist);
    single.goodness = fit.goodness;
    return single;
  }
  return fit;
}

double sigmoid(double x, double delta0, double gamma) {
  return 1.0 / (1.0 + std::exp(-kSigmoidWidthFactor * (x - delta0) / gamma));
}

SigmoidFit fit_sigmoid(std::span<const double> x, std::span<const double> p) {
  if (x.size() != p.size()) throw InvalidArgument("sigmoid fit: x and p differ in length");
  const auto [p_min_it, p_max_it] = std::minmax_element(p.begin(), p.end());
  if (x.size() < 5 || *p_min_it >= 0.2 || *p_max_it <= 0.8) {
    std::ostringstream msg;
    msg << "sigmoid fit needs >= 5 points spanning p < 0.2 to p > 0.8; got " << x.size()
        << " points with p in [" << (p.empty() ? 0.0 : *p_min_it) << ", "
        << (p.empty() ? 0.0 : *p_max_it) << "]";
    throw IllConditionedFit(msg.str());
  }

  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const double x_lo = x[order.front()];
  const double x_hi = x[order.back()];
  const double center = 0.5 * (x_lo + x_hi);
  const double half_span = 0.5 * (x_hi - x_lo);
  if (!(half_span > 0.0)) throw IllConditionedFit("sigmoid fit: all abscissae coincide");

  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - center) / half_span;

  double cov = 0.0;
  double p_mean = 0.0;
  for (double v : p) p_mean += v;
  p_mean /= static_cast<double>(p.size());
  for (std::size_t i = 0; i < x.size(); ++i) cov += u[i] * (p[i] - p_mean);
  const double direction = cov >= 0.0 ? 1.0 : -1.0;

  // Level crossings by linear interpolation along the sorted abscissa.
  const auto crossing = [&](double level) -> std::optional<double> {
    for (std::size_t j = 0; j + 1 < order.size(); ++j) {
      const double pa = p[order[j]];
      const double pb = p[order[j + 1]];
      if ((pa - level) * (pb - level) <= 0.0 && pa != pb) {
        const double ua = u[order[j]];
        const double ub = u[order[j + 1]];
        return ua + (level - pa) * (ub - ua) / (pb - pa);
      }
    }
    return std::nullopt;
  };
  const double u0 = crossing(0.5).value_or(0.0);
  double width = 0.5;
  if (auto a = crossing(0.1), b = crossing(0.9); a && b && std::abs(*b - *a) > 1e-6) {
    width = std::abs(*b - *a);
  }

  const auto residuals = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    const double gamma = direction * std::exp(v[1]);
    for (std::size_t i = 0; i < u.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = sigmoid(u[i], v[0], gamma) - p[i];
    }
  };

  SigmoidFit best;
  double best_norm = std::numeric_limits<double>::infinity();
  for (const double factor : {1.0, 0.5, 2.0}) {
    Eigen::VectorXd v0(2);
    v0 << u0, std::log(width * factor);
    const detail::LeastSquaresResult res =
        detail::least_squares(residuals, static_cast<int>(u.size()), v0, 1e-14, 1e-14, 2000);
    if (res.x.allFinite() && res.residual_norm < best_norm) {
      best_norm = res.residual_norm;
      best.delta0 = center + half_span * res.x[0];
      best.gamma = direction * std::exp(res.x[1]) * half_span;
      best.residual_norm = res.residual_norm;
    }
  }
  if (!std::isfinite(best_norm)) throw NumericalError("sigmoid fit failed to converge");
  return best;
}

}  // namespace ccpt

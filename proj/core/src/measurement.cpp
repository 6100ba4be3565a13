#include "ccpt/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/rng.hpp"
#include "ccpt/steady_state.hpp"

namespace ccpt {
namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

/// Probability that a wrapped normal (mu, sigma in degrees) lies within 90 degrees of center.
double semicircle_mass(double mu, double sigma, double center) {
  const double m = center + wrap_deg(mu - center);
  const double scale = sigma * std::numbers::sqrt2;
  double mass = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double lo = center - 90.0 + 360.0 * k;
    const double hi = center + 90.0 + 360.0 * k;
    mass += 0.5 * (std::erf((hi - m) / scale) - std::erf((lo - m) / scale));
  }
  return std::clamp(mass, 0.0, 1.0);
}

}  // namespace

void AmplifierChain::validate() const {
  if (!std::isfinite(added_noise_density) || added_noise_density < 0.0) {
    throw InvalidArgument("added_noise_density must be finite and >= 0");
  }
  if (!idealized && added_noise_density < 0.5) {
    throw InvalidArgument("added_noise_density below the 0.5 quantum floor requires an idealized chain");
  }
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) {
    throw InvalidArgument("sample_period must be positive");
  }
}

Demodulator::Demodulator(const CavityConfig& config, const AmplifierChain& chain, double t_start,
                         double t_end, std::uint64_t seed)
    : t_start_(t_start),
      period_(chain.sample_period),
      sqrt_kappa_ext_(std::sqrt(config.kappa_ext)),
      noise_sigma_(0.0),
      seed_(seed) {
  chain.validate();
  if (!(t_end > t_start)) throw InvalidArgument("demodulation window must have t_end > t_start");
  const double samples = std::floor((t_end - t_start) / period_ + 1e-9);
  if (samples < 1.0) {
    throw InvalidArgument("demodulation window is shorter than one sample period");
  }
  const auto count = static_cast<std::size_t>(samples);
  sum_out_.assign(count, {});
  sum_in_.assign(count, 0.0);
  counts_.assign(count, 0);
  noise_sigma_ = std::sqrt(chain.added_noise_density / (2.0 * period_));
}

void Demodulator::add(double t, std::complex<double> alpha, double input_amplitude) {
  const double pos = (t - t_start_) / period_ + 1e-9;
  if (pos < 0.0) return;
  const auto k = static_cast<std::size_t>(pos);
  if (k >= counts_.size()) return;
  sum_out_[k] += input_amplitude - sqrt_kappa_ext_ * alpha;
  sum_in_[k] += input_amplitude;
  ++counts_[k];
}

std::vector<double> Demodulator::finish() {
  Rng rng(seed_);
  std::vector<double> phases;
  phases.reserve(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] == 0) continue;
    const double inv = 1.0 / static_cast<double>(counts_[k]);
    const double in = sum_in_[k] * inv;
    if (in == 0.0) throw UndefinedPhase("zero input amplitude inside the demodulation window");
    std::complex<double> out = sum_out_[k] * inv;
    if (noise_sigma_ > 0.0) {
      const double nx = rng.gaussian();
      const double ny = rng.gaussian();
      out += noise_sigma_ * std::complex<double>(nx, ny);
    }
    phases.push_back(phase_deg(std::conj(out / in)));
  }
  return phases;
}

std::vector<double> demodulate(const Trajectory& trajectory, const CavityConfig& config,
                               const AmplifierChain& chain, TimeWindow window, std::uint64_t seed) {
  if (trajectory.alpha.empty()) throw InvalidArgument("empty trajectory");
  const double tol = 1e-9 * std::max(trajectory.dt, 1e-300);
  const double t_last = trajectory.times.back();
  if (window.t_start < -tol || window.t_end > t_last + trajectory.dt + tol) {
    throw InvalidArgument("demodulation window lies outside the trajectory");
  }
  Demodulator demod(config, chain, window.t_start, window.t_end, seed);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < trajectory.alpha.size(); ++i) {
    const double t = trajectory.times[i];
    demod.add(t, trajectory.alpha[i], trajectory.envelope.at(t, &cursor).amplitude);
  }
  return demod.finish();
}

double averaged_phase(std::span<const double> phases_deg) {
  if (phases_deg.empty()) throw InvalidArgument("no phase samples to average");
  std::complex<double> sum;
  for (const double ph : phases_deg) sum += std::polar(1.0, ph / kDegPerRad);
  if (std::abs(sum) <= 1e-9 * static_cast<double>(phases_deg.size())) {
    throw UndefinedPhase("phase samples cancel: circular mean undefined");
  }
  return phase_deg(sum);
}

double averaged_phase(std::span<const double> phases_deg, double sample_period, double t_acq) {
  if (!(sample_period > 0.0) || !(t_acq > 0.0)) {
    throw InvalidArgument("sample_period and t_acq must be positive");
  }
  const auto count = static_cast<std::size_t>(std::floor(t_acq / sample_period + 1e-9));
  if (count == 0) throw InvalidArgument("acquisition time shorter than one sample period");
  if (count > phases_deg.size()) throw InvalidArgument("acquisition time exceeds the recorded samples");
  return averaged_phase(phases_deg.first(count));
}

PhaseHistogram::PhaseHistogram(double bin_width_deg) : width_(bin_width_deg) {
  const double bins = 360.0 / bin_width_deg;
  if (!(bin_width_deg > 0.0) || std::abs(bins - std::round(bins)) > 1e-9 || bins < 2.0) {
    throw InvalidArgument("histogram bin width must divide 360 degrees");
  }
  counts_.assign(static_cast<std::size_t>(std::lround(bins)), 0);
}

PhaseHistogram PhaseHistogram::from_samples(std::span<const double> phases_deg, double bin_width_deg) {
  PhaseHistogram h(bin_width_deg);
  for (const double ph : phases_deg) h.add(ph);
  return h;
}

PhaseHistogram PhaseHistogram::from_counts(std::vector<std::uint64_t> counts) {
  if (counts.size() < 2) throw InvalidArgument("histogram needs at least two bins");
  PhaseHistogram h(360.0 / static_cast<double>(counts.size()));
  h.counts_ = std::move(counts);
  h.n_tot_ = 0;
  for (const auto c : h.counts_) h.n_tot_ += c;
  return h;
}

std::size_t PhaseHistogram::bin_index(double phase_deg) const {
  if (!std::isfinite(phase_deg)) throw InvalidArgument("phase must be finite");
  const double w = wrap_deg(phase_deg);
  const double pos = std::ceil((w + 180.0) / width_) - 1.0;
  return std::min(counts_.size() - 1, static_cast<std::size_t>(std::max(pos, 0.0)));
}

void PhaseHistogram::add(double phase_deg) {
  ++counts_[bin_index(phase_deg)];
  ++n_tot_;
}

void PhaseHistogram::merge(const PhaseHistogram& other) {
  if (!same_bins(other)) throw InvalidArgument("cannot merge histograms with different bins");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  n_tot_ += other.n_tot_;
}

std::vector<double> PhaseHistogram::bin_edges() const {
  std::vector<double> edges(counts_.size() + 1);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = -180.0 + static_cast<double>(i) * width_;
  return edges;
}

bool PhaseHistogram::same_bins(const PhaseHistogram& other) const {
  return counts_.size() == other.counts_.size() && width_ == other.width_;
}

double angular_distance(double a_deg, double b_deg) { return std::abs(wrap_deg(a_deg - b_deg)); }

double extract_p_high(const DoubleGaussFit& fit, const BranchPhases& prior) {
  if (angular_distance(prior.high_deg, prior.low_deg) < 1e-9) {
    throw InvalidArgument("high and low branch phases coincide");
  }
  const double center = phase_deg(std::polar(1.0, prior.high_deg / kDegPerRad) -
                                  std::polar(1.0, prior.low_deg / kDegPerRad));
  if (fit.single_peak) return semicircle_mass(fit.dominant_center(), fit.dominant_width(), center);
  return fit.w1 * semicircle_mass(fit.mu1, fit.sigma1, center) +
         fit.w2 * semicircle_mass(fit.mu2, fit.sigma2, center);
}

double extract_p_high(const PhaseHistogram& hist, const BranchPhases& prior) {
  return extract_p_high(fit_double_gaussian(hist), prior);
}

FidelityReport fidelity_from_centers(const PhaseHistogram& hist_a, const PhaseHistogram& hist_b,
                                     double center_a, double center_b) {
  if (!hist_a.same_bins(hist_b)) throw InvalidArgument("fidelity needs histograms on identical bins");
  if (hist_a.n_tot() == 0 || hist_b.n_tot() == 0) throw InvalidArgument("fidelity of an empty histogram");

  const double signed_sep = wrap_deg(center_b - center_a);
  const double orientation = signed_sep >= 0.0 ? 1.0 : -1.0;
  FidelityReport report;
  report.center_a = wrap_deg(center_a);
  report.center_b = wrap_deg(center_b);
  report.separation = std::abs(signed_sep);
  report.phi_th = wrap_deg(center_a + 0.5 * signed_sep);

  std::uint64_t errors_a = 0;
  std::uint64_t errors_b = 0;
  for (std::size_t i = 0; i < hist_a.bins(); ++i) {
    const double side = orientation * wrap_deg(hist_a.bin_center(i) - report.phi_th);
    if (side > 0.0) errors_a += hist_a.counts()[i];
    if (side < 0.0) errors_b += hist_b.counts()[i];
  }
  report.f_a = 1.0 - static_cast<double>(errors_a) / static_cast<double>(hist_a.n_tot());
  report.f_b = 1.0 - static_cast<double>(errors_b) / static_cast<double>(hist_b.n_tot());
  report.f_avg = 0.5 * (report.f_a + report.f_b);
  return report;
}

FidelityReport fidelity(const PhaseHistogram& hist_a, const PhaseHistogram& hist_b) {
  const DoubleGaussFit fit_a = fit_double_gaussian(hist_a);
  const DoubleGaussFit fit_b = fit_double_gaussian(hist_b);
  FidelityReport report =
      fidelity_from_centers(hist_a, hist_b, fit_a.dominant_center(), fit_b.dominant_center());
  report.gauss_width = 0.5 * (fit_a.dominant_width() + fit_b.dominant_width());
  report.flagged = report.separation < report.gauss_width || report.f_avg < 0.6;
  return report;
}

ContrastResult contrast(std::span<const double> grid, std::span<const double> p_a,
                        std::span<const double> p_b) {
  if (grid.empty() || grid.size() != p_a.size() || grid.size() != p_b.size()) {
    throw InvalidArgument("contrast needs two curves on one non-empty common grid");
  }
  constexpr double tie = 1e-12;
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) best = std::max(best, std::abs(p_a[i] - p_b[i]));
  std::size_t first = 0;
  while (std::abs(p_a[first] - p_b[first]) < best - tie) ++first;
  std::size_t last = first;
  while (last + 1 < grid.size() && std::abs(p_a[last + 1] - p_b[last + 1]) >= best - tie) ++last;
  ContrastResult out;
  out.index = first + (last - first) / 2;
  out.max_contrast = std::abs(p_a[out.index] - p_b[out.index]);
  out.x_opt = grid[out.index];
  return out;
}

ContrastResult contrast(const SCurve& a, const SCurve& b) {
  if (a.detunings != b.detunings) throw InvalidArgument("contrast needs S-curves on a common grid");
  return contrast(a.detunings, a.p_high, b.p_high);
}

double charge_sensitivity(double delta_ng, double t_acq) {
  if (!(delta_ng > 0.0) || !(t_acq > 0.0) || !std::isfinite(delta_ng) || !std::isfinite(t_acq)) {
    throw InvalidArgument("charge sensitivity needs positive finite delta_ng and t_acq");
  }
  return delta_ng * std::sqrt(t_acq);
}

}  // namespace ccpt

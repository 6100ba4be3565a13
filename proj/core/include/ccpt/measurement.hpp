#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ccpt/dynamics.hpp"
#include "ccpt/model.hpp"

namespace ccpt {

/// Input-referred model of the amplification and digitization chain.
struct AmplifierChain {
  double added_noise_density = 4.67;  ///< photons/(s*Hz), input referred
  double sample_period = 100e-9;      ///< s
  /// Allows added_noise_density below the 0.5 quantum floor (idealized tests only).
  bool idealized = false;

  void validate() const;
  static AmplifierChain ideal(double sample_period) { return AmplifierChain{0.0, sample_period, true}; }
};

/// Streaming heterodyne demodulator over the window [t_start, t_end).
///
/// Output samples are boxcar averages of beta_out = alpha_in - sqrt(kappa_ext) alpha over
/// consecutive sample periods, plus complex Gaussian chain noise with per-quadrature variance
/// added_noise_density / (2 sample_period). Each sample is reported as the phase of S11, i.e.
/// arg(conj(beta_out / alpha_in)) in degrees.
class Demodulator {
 public:
  Demodulator(const CavityConfig& config, const AmplifierChain& chain, double t_start, double t_end,
              std::uint64_t seed);

  /// Feeds one point of the trajectory; points outside the window are ignored.
  void add(double t, std::complex<double> alpha, double input_amplitude);
  /// Phases of all non-empty samples, in time order. Throws UndefinedPhase when the mean
  /// input amplitude of a sample vanishes.
  std::vector<double> finish();

  std::size_t sample_count() const { return sum_out_.size(); }

 private:
  double t_start_;
  double period_;
  double sqrt_kappa_ext_;
  double noise_sigma_;
  std::uint64_t seed_;
  std::vector<std::complex<double>> sum_out_;
  std::vector<double> sum_in_;
  std::vector<std::uint32_t> counts_;
};

struct TimeWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Phase samples (degrees) of a recorded trajectory over a window.
std::vector<double> demodulate(const Trajectory& trajectory, const CavityConfig& config,
                               const AmplifierChain& chain, TimeWindow window, std::uint64_t seed);

/// Circular mean (degrees) of phase samples. Throws InvalidArgument for an empty set and
/// UndefinedPhase when the unit phasors cancel.
double averaged_phase(std::span<const double> phases_deg);

/// Circular mean of the samples that fall inside an acquisition time t_acq, i.e. the first
/// floor(t_acq / sample_period) samples.
double averaged_phase(std::span<const double> phases_deg, double sample_period, double t_acq);

/// Histogram on (-180, 180] degrees; bin i covers (-180 + i w, -180 + (i+1) w].
class PhaseHistogram {
 public:
  explicit PhaseHistogram(double bin_width_deg = 1.0);

  static PhaseHistogram from_samples(std::span<const double> phases_deg, double bin_width_deg = 1.0);
  static PhaseHistogram from_counts(std::vector<std::uint64_t> counts);

  void add(double phase_deg);
  /// Adds the counts of another histogram with identical bins.
  void merge(const PhaseHistogram& other);

  std::size_t bins() const { return counts_.size(); }
  double bin_width() const { return width_; }
  double bin_center(std::size_t i) const { return -180.0 + (static_cast<double>(i) + 0.5) * width_; }
  std::vector<double> bin_edges() const;
  std::size_t bin_index(double phase_deg) const;
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t n_tot() const { return n_tot_; }
  bool same_bins(const PhaseHistogram& other) const;

 private:
  double width_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_tot_ = 0;
};

/// Mixture w1 N(mu1, sigma1) + w2 N(mu2, sigma2) on the circle (degrees).
struct DoubleGaussFit {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double w1 = 1.0;
  double w2 = 0.0;
  double goodness = 0.0;  ///< residual 2-norm of the density fit
  bool single_peak = false;

  /// Center of the component with the larger weight.
  double dominant_center() const { return w1 >= w2 ? mu1 : mu2; }
  double dominant_width() const { return w1 >= w2 ? sigma1 : sigma2; }
  /// Mixture density (1/degree) at a phase.
  double density(double phase_deg) const;
};

/// Least-squares fit of a two-component wrapped Gaussian mixture to the bin densities,
/// initialised from the highest local maximum and the highest well-separated second maximum.
/// Histograms with a single mode return a moment estimate with single_peak set.
DoubleGaussFit fit_double_gaussian(const PhaseHistogram& hist);

/// Expected phases (degrees) of the high- and low-amplitude states.
struct BranchPhases {
  double high_deg = 0.0;
  double low_deg = 0.0;
};

/// Circular distance between two angles in degrees, in [0, 180].
double angular_distance(double a_deg, double b_deg);

/// Probability mass of the fitted mixture on the half circle of phases closer to the high-state
/// phase than to the low-state phase. For two well separated peaks this is the weight of the
/// high-state Gaussian; shots that switch during acquisition fall between the peaks and are
/// split at the bisector.
double extract_p_high(const DoubleGaussFit& fit, const BranchPhases& prior);
double extract_p_high(const PhaseHistogram& hist, const BranchPhases& prior);

/// Width constant of the S-curve sigmoid, 2 ln 9: gamma is the 10%-90% width.
inline constexpr double kSigmoidWidthFactor = 4.394449154672439;

/// P(x) = 1 / (1 + exp(-kSigmoidWidthFactor (x - delta0) / gamma)).
double sigmoid(double x, double delta0, double gamma);

struct SigmoidFit {
  double delta0 = 0.0;
  double gamma = 0.0;
  double residual_norm = 0.0;

  double operator()(double x) const { return sigmoid(x, delta0, gamma); }
};

/// Damped least-squares sigmoid fit with three starting widths. Requires at least five points
/// with p spanning below 0.2 and above 0.8; otherwise throws IllConditionedFit.
SigmoidFit fit_sigmoid(std::span<const double> x, std::span<const double> p);

/// Probability of the high state against drive detuning (rad/s).
struct SCurve {
  std::vector<double> detunings;
  std::vector<double> p_high;
  std::optional<SigmoidFit> fit;
};

struct FidelityReport {
  double phi_th = 0.0;       ///< degrees
  double f_a = 0.0;
  double f_b = 0.0;
  double f_avg = 0.0;
  double separation = 0.0;   ///< degrees
  double gauss_width = 0.0;  ///< mean dominant width, degrees
  double center_a = 0.0;
  double center_b = 0.0;
  bool flagged = false;      ///< histograms are not distinguishable
};

/// Fidelities for a threshold midway between two peak centers. Bins are assigned to the
/// state whose center lies on the same side of the threshold (circularly).
FidelityReport fidelity_from_centers(const PhaseHistogram& hist_a, const PhaseHistogram& hist_b,
                                     double center_a, double center_b);

/// Fits both histograms and evaluates the fidelity at the midpoint of their dominant centers.
FidelityReport fidelity(const PhaseHistogram& hist_a, const PhaseHistogram& hist_b);

struct ContrastResult {
  double max_contrast = 0.0;
  double x_opt = 0.0;
  std::size_t index = 0;
};

/// max |p_a - p_b| over a common grid; ties resolve to the middle of the first maximal run.
ContrastResult contrast(std::span<const double> grid, std::span<const double> p_a,
                        std::span<const double> p_b);
ContrastResult contrast(const SCurve& a, const SCurve& b);

/// Charge sensitivity (e/sqrt(Hz)) of a measurement resolving delta_ng in time t_acq.
double charge_sensitivity(double delta_ng, double t_acq);

}  // namespace ccpt

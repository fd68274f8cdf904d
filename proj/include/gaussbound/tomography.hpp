#pragma once

#include "gaussbound/certifier.hpp"
#include "gaussbound/rng.hpp"
#include "gaussbound/stats.hpp"

#include <utility>

namespace gaussbound {

// One homodyne configuration: per mode i the measured observable is
// x_i cos(theta_i) + p_i sin(theta_i). A shot-noise setting records vacuum
// instead of the state and calibrates the per-channel normalization.
struct MeasurementSetting {
  std::vector<double> angles_deg;
  std::string label;
  bool shot_noise = false;
};

// count x n_modes, one row per joint outcome.
using SampleBlock =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct QuadratureDataset {
  int n_modes = 0;
  std::vector<MeasurementSetting> settings;
  std::vector<SampleBlock> samples;

  bool balanced() const;
  long total_samples() const;
};

struct UnidentifiableModelError : std::runtime_error {
  // 0-based (row, col) coordinates of gamma entries the plan cannot constrain.
  std::vector<std::pair<int, int>> entries;
  UnidentifiableModelError(const std::string& msg,
                           std::vector<std::pair<int, int>> unconstrained)
      : std::runtime_error(msg), entries(std::move(unconstrained)) {}
};

// Draws joint quadrature outcomes: multivariate normal whose covariance is
// gamma conjugated by the per-mode rotations and restricted to the measured
// coordinates (vacuum gives unit variance on every channel).
SampleBlock sample_state(const GaussianState& state,
                         const MeasurementSetting& setting, long count,
                         Rng& rng);

// Samples every setting of the plan (shot-noise settings sample vacuum).
// Deterministic for fixed seed, independent of thread count.
QuadratureDataset generate_dataset(const GaussianState& state,
                                   const std::vector<MeasurementSetting>& plan,
                                   long count_per_setting, std::uint64_t seed,
                                   int threads = 1);

// Minimal full-rank plan: all-x, all-p, all-diagonal, the binary 0/90
// mode patterns and their complements, plus one shot-noise setting.
// For four modes this is exactly eight settings.
std::vector<MeasurementSetting> default_setting_plan(int n_modes);

struct CovarianceEstimate {
  CovarianceMatrix cov;
  Mat standard_errors;               // entrywise, same shape as the matrix
  std::vector<double> channel_gains; // fitted shot-noise gains (1 if no shot data)
};

// Least squares over the per-setting second moments. Throws
// UnidentifiableModelError naming the unconstrained entries when the plan's
// design matrix is rank deficient.
CovarianceEstimate estimate_covariance(const QuadratureDataset& data);

struct BootstrapOptions {
  long resamples = 10000;
  std::uint64_t seed = 1;
  double tol = 1e-6;  // certifier bisection tolerance per resample
  SdpOptions sdp;
  int threads = 1;
  bool without_replacement = false;  // subsample mode (see README)
  long subsample_size = 0;           // required when without_replacement
};

struct BootstrapReport {
  long resample_count = 0;
  std::vector<double> e_samples;
  std::vector<double> p_samples;
  std::vector<double> physicality_samples;
  double e_mean = 0.0, e_std = 0.0;
  double p_mean = 0.0, p_std = 0.0;
  double phys_mean = 0.0, phys_std = 0.0;
  // mean/std; NaN (and significance_defined = false) when std == 0.
  double significance_e = 0.0, significance_p = 0.0, significance_phys = 0.0;
  bool significance_defined = false;
  double full_e = 0.0, full_p = 0.0, full_phys = 0.0;
};

// Per resample: indices drawn uniformly with replacement per setting,
// covariance re-estimated, certified (unphysical estimates are certified
// anyway; their physicality is part of the record). Resample r depends only
// on (seed, r), so results are identical under any thread count.
BootstrapReport bootstrap_certify(const QuadratureDataset& data,
                                  const ModePartition& partition,
                                  const BootstrapOptions& opts);

struct ChannelReport {
  std::string setting_label;
  int mode = 0;
  MomentSummary moments;
  Chi2Result chi2;
  bool degenerate = false;
  std::vector<std::pair<double, double>> qq;  // (theoretical, sample) quantiles
};

struct GaussianityReport {
  std::vector<ChannelReport> channels;
  int quantile_grid = 0;
};

// Per channel: standardized moments to order 4, Q-Q pairs against the fitted
// normal, and an equiprobable-bin chi-squared test. Needs >= 100 samples per
// channel; constant channels are flagged degenerate and skip the test.
GaussianityReport gaussianity_tests(const QuadratureDataset& data,
                                    int quantile_grid = 101);

}  // namespace gaussbound

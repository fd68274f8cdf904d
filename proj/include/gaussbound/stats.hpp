#pragma once

#include <cstddef>
#include <vector>

namespace gaussbound {

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::size_t count = 0;
  bool degenerate = false;  // variance == 0
};

MomentSummary sample_moments(const std::vector<double>& data);

// Standard normal CDF and its inverse (Acklam's approximation polished with
// one Halley step; good to ~1e-15 over the open unit interval).
double normal_cdf(double x);
double normal_quantile(double p);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-squared distribution with dof degrees.
double chi2_sf(double statistic, int dof);

// Linear-interpolation sample quantile of an ascending-sorted vector.
double sorted_quantile(const std::vector<double>& sorted, double q);

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;
};

// Chi-squared goodness of fit against the normal with the sample's own mean
// and variance, using equiprobable bins (count = ceil(2 n^(2/5)), capped).
// dof = bins - 3 accounts for the two estimated parameters.
Chi2Result chi2_normality(const std::vector<double>& data, int max_bins = 200);

}  // namespace gaussbound

#include "gaussbound/stats.hpp"
#include "gaussbound/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace gaussbound;

TEST_CASE("moments of simple samples") {
  const MomentSummary m = sample_moments({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.skewness == doctest::Approx(0.0));

  const MomentSummary constant = sample_moments({2.0, 2.0, 2.0});
  CHECK(constant.degenerate);

  Rng rng(1);
  std::vector<double> normal(200000);
  for (double& v : normal) v = rng.normal();
  const MomentSummary g = sample_moments(normal);
  CHECK(std::abs(g.mean) < 0.01);
  CHECK(g.variance == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(g.skewness) < 0.02);
  CHECK(std::abs(g.excess_kurtosis) < 0.03);
}

TEST_CASE("normal quantile inverts the CDF") {
  for (double p : {1e-9, 1e-4, 0.02, 0.31, 0.5, 0.77, 0.975, 1.0 - 1e-7}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.9750021048517795) ==
        doctest::Approx(1.96).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(-0.1), std::invalid_argument);
}

TEST_CASE("incomplete gamma and chi2 tail") {
  // gamma_p(1, x) = 1 - exp(-x).
  CHECK(gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)));
  CHECK(gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)));
  // chi2 with 2 dof: SF(x) = exp(-x/2).
  CHECK(chi2_sf(3.0, 2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  // Median of chi2_k is about k(1 - 2/(9k))^3.
  const double median5 = 5.0 * std::pow(1.0 - 2.0 / 45.0, 3);
  CHECK(chi2_sf(median5, 5) == doctest::Approx(0.5).epsilon(5e-3));
  CHECK(chi2_sf(0.0, 3) == 1.0);
  CHECK_THROWS_AS(chi2_sf(1.0, 0), std::invalid_argument);
}

TEST_CASE("sorted quantiles") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(sorted_quantile(v, 0.0) == 1.0);
  CHECK(sorted_quantile(v, 1.0) == 5.0);
  CHECK(sorted_quantile(v, 0.5) == doctest::Approx(3.0));
  CHECK(sorted_quantile(v, 0.25) == doctest::Approx(2.0));
  CHECK_THROWS_AS(sorted_quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("chi2 normality accepts normal and rejects uniform") {
  Rng rng(77);
  std::vector<double> normal(300000);
  for (double& v : normal) v = 1.7 + 0.4 * rng.normal();
  std::sort(normal.begin(), normal.end());
  const Chi2Result ok = chi2_normality(normal);
  CHECK(ok.bins <= 200);
  CHECK(ok.dof == ok.bins - 3);
  CHECK(ok.p_value > 0.01);

  std::vector<double> uniform(300000);
  for (double& v : uniform) v = rng.uniform(-1.0, 1.0);
  std::sort(uniform.begin(), uniform.end());
  CHECK(chi2_normality(uniform).p_value < 1e-6);

  CHECK_THROWS_AS(chi2_normality({1.0, 2.0}), std::invalid_argument);
}

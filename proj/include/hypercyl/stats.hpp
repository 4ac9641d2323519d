#pragma once

// Statistical helpers shared by the experiment suites and tests: score
// intervals, Kolmogorov-Smirnov tests, chi-square goodness of fit, and a
// two-sample Poisson rate comparison.

#include <cstdint>
#include <functional>
#include <vector>

namespace hypercyl::stats {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson 95% score interval for a binomial proportion.
Interval wilson95(std::uint64_t successes, std::uint64_t trials);

double mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);

// Standard normal CDF.
double std_normal_cdf(double z);

// Kolmogorov asymptotic survival function Q(x) = 2 sum_k (-1)^{k-1} e^{-2 k^2 x^2}.
double kolmogorov_q(double x);

// One-sample Kolmogorov-Smirnov p-value of `sample` against a continuous CDF
// (Stephens' small-sample adjustment on the asymptotic distribution).
double ks_test(std::vector<double> sample,
               const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov p-value.
double ks2_test(std::vector<double> a, std::vector<double> b);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// Chi-square survival function P(X > x) with `dof` degrees of freedom.
double chisq_sf(double x, int dof);

// Chi-square goodness-of-fit p-value; expected counts must be positive.
double chisq_gof_p(const std::vector<double>& observed,
                   const std::vector<double>& expected);

// Two-sided p-value for equality of the means behind two Poisson totals,
// via the conditional binomial z statistic (n1 - n2)/sqrt(n1 + n2).
double poisson_two_sample_p(double n1, double n2);

// Pearson correlation; returns 0 when either side has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hypercyl::stats

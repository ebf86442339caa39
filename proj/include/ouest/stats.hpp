#pragma once

#include <span>
#include <vector>

namespace ouest {

double normal_cdf(double x);

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1}
// exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
    double stat = 0;
    double p_value = 0;
};

// One-sample KS test against N(0, variance); p-value from the asymptotic
// Kolmogorov distribution, n >= 100 enforced.
KsResult ks_test_normal(std::span<const double> samples, double variance);

// Two-sample KS test.
KsResult ks_test_two_sample(std::span<const double> a,
                            std::span<const double> b);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased
double skewness(std::span<const double> v);
double median(std::vector<double> v);        // by value: needs a sort
double lag1_autocorr(std::span<const double> v);

}  // namespace ouest

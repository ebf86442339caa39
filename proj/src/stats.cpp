#include "ouest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ouest {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_q(double lambda) {
    if (lambda <= 0) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> samples, double variance) {
    const std::size_t n = samples.size();
    if (n < 100)
        throw std::invalid_argument("ks_test_normal: need at least 100 samples");
    if (!(variance > 0))
        throw std::invalid_argument("ks_test_normal: variance must be > 0");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double sd = std::sqrt(variance);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = normal_cdf(s[i] / sd);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    }
    KsResult r;
    r.stat = d;
    r.p_value = kolmogorov_q(std::sqrt(static_cast<double>(n)) * d);
    return r;
}

KsResult ks_test_two_sample(std::span<const double> a,
                            std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("ks_test_two_sample: too few samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(i / nx - j / ny));
    }
    KsResult r;
    r.stat = d;
    r.p_value = kolmogorov_q(std::sqrt(nx * ny / (nx + ny)) * d);
    return r;
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("variance: need n >= 2");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double skewness(std::span<const double> v) {
    const double m = mean(v);
    double s2 = 0.0, s3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        s2 += d * d;
        s3 += d * d * d;
    }
    const double n = static_cast<double>(v.size());
    const double sd = std::sqrt(s2 / n);
    return sd > 0 ? (s3 / n) / (sd * sd * sd) : 0.0;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5 * (hi + v[mid - 1]);
}

double lag1_autocorr(std::span<const double> v) {
    if (v.size() < 3) throw std::invalid_argument("lag1_autocorr: too short");
    const double m = mean(v);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - m;
        den += d * d;
        if (i + 1 < v.size()) num += d * (v[i + 1] - m);
    }
    return num / den;
}

}  // namespace ouest

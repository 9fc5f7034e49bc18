#pragma once

// Kolmogorov-Smirnov statistics and Monte Carlo summaries.

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace annulus_moduli {

struct KsResult {
    double statistic;
    double p_value;
};

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// p-value with the Stephens small-sample correction (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double ks_p_value(double d, double n_eff) {
    const double s = std::sqrt(n_eff);
    return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

template <class Cdf>
KsResult ks_one_sample(std::vector<double> xs, Cdf&& cdf) {
    detail::require(!xs.empty(), "ks_one_sample: no samples");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_p_value(d, n)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    detail::require(!a.empty() && !b.empty(), "ks_two_sample: no samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p_value(d, na * nb / (na + nb))};
}

struct MeanEstimate {
    double mean;
    double std_error;
};

template <class F>
MeanEstimate sample_mean(const std::vector<double>& xs, F&& f) {
    detail::require(xs.size() >= 2, "sample_mean: need at least two samples");
    double s = 0.0;
    for (double x : xs) s += f(x);
    const double n = static_cast<double>(xs.size());
    const double m = s / n;
    double v = 0.0;
    for (double x : xs) {
        const double d = f(x) - m;
        v += d * d;
    }
    return {m, std::sqrt(v / (n - 1.0) / n)};
}

}  // namespace annulus_moduli

#pragma once

// Dedekind eta and Jacobi theta_1 on the imaginary axis, and complex Gamma.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"

namespace annulus_moduli {

using ComplexValue = std::complex<double>;

struct SeriesConfig {
    double rel_tol = 1e-15;
    int max_terms = 256;

    void validate() const {
        detail::require(rel_tol > 0.0 && rel_tol <= 1e-6, "SeriesConfig: rel_tol must lie in (0, 1e-6]");
        detail::require(max_terms >= 8, "SeriesConfig: max_terms must be >= 8");
    }
};

namespace detail {

constexpr double pi = std::numbers::pi;

// eta(i t) = e^{-pi t/12} prod_k (1 - e^{-2 pi k t}), fast once t >= 1.
inline double eta_product(double t, const SeriesConfig& cfg) {
    const double x = std::exp(-2.0 * pi * t);
    double prod = 1.0;
    double xk = x;
    for (int k = 1; k <= cfg.max_terms; ++k) {
        if (xk < cfg.rel_tol * 0.01) return std::exp(-pi * t / 12.0) * prod;
        prod *= 1.0 - xk;
        xk *= x;
    }
    throw ConvergenceError("dedekind_eta: product did not converge");
}

}  // namespace detail

inline double dedekind_eta(double tau, const SeriesConfig& cfg = {}) {
    cfg.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("dedekind_eta: tau must be positive and finite");
    if (tau >= 1.0) return detail::eta_product(tau, cfg);
    return detail::eta_product(1.0 / tau, cfg) / std::sqrt(tau);
}

// Real theta_1(x | i tau).
//   tau >= 1: 2 e^{-pi tau/4} sum_n (-1)^n e^{-n(n+1) pi tau} sin((2n+1) pi x)
//   tau <  1: the Poisson-resummed image series
//             tau^{-1/2} sum_j (-1)^j exp(-pi (x - 1/2 - j)^2 / tau),
//             with the j and -1-j images paired so small x loses no digits.
inline double jacobi_theta1(double x, double tau, const SeriesConfig& cfg = {}) {
    cfg.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("jacobi_theta1: tau must be positive and finite");
    if (!std::isfinite(x)) throw DomainError("jacobi_theta1: x must be finite");
    using detail::pi;

    double sign = 1.0;
    if (x < 0.0) {
        sign = -1.0;
        x = -x;
    }
    const double k = std::floor(x);
    double r = x - k;
    if (std::fmod(k, 2.0) != 0.0) sign = -sign;
    if (r == 0.0) return 0.0;
    if (r > 0.5) r = 1.0 - r;

    if (tau >= 1.0) {
        double sum = 0.0;
        for (int n = 0; n < cfg.max_terms; ++n) {
            const double w = std::exp(-n * (n + 1.0) * pi * tau);
            if (n > 0 && w * (2.0 * n + 1.0) < 0.1 * cfg.rel_tol) {
                return sign * 2.0 * std::exp(-pi * tau / 4.0) * sum;
            }
            const double term = w * std::sin((2.0 * n + 1.0) * pi * r);
            sum += (n % 2 == 0) ? term : -term;
        }
        throw ConvergenceError("jacobi_theta1: sine series did not converge");
    }

    const double lead = (0.5 - r) * (0.5 - r);
    double sum = 0.0;
    for (int j = 0; j < cfg.max_terms; ++j) {
        const double c = j + 0.5 - r;
        const double e = c * c;
        if (j > 0 && std::exp(-pi * (e - lead) / tau) < 0.1 * cfg.rel_tol) {
            return sign * sum / std::sqrt(tau);
        }
        const double term = std::exp(-pi * e / tau) * -std::expm1(-2.0 * pi * (2.0 * j + 1.0) * r / tau);
        sum += (j % 2 == 0) ? term : -term;
    }
    throw ConvergenceError("jacobi_theta1: image series did not converge");
}

namespace detail {

// B_{2k} / (2k (2k - 1)) for the Stirling series.
constexpr std::array<double, 8> stirling_c = {
    1.0 / 12.0,   -1.0 / 360.0,        1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0, -691.0 / 360360.0,   1.0 / 156.0,  -3617.0 / 122400.0};

// log Gamma(z) for Re z >= 1/2: shift until |z| >= 15, then Stirling.
inline std::complex<double> log_gamma_right(std::complex<double> z) {
    std::complex<double> prod = 1.0;
    while (std::abs(z) < 15.0) {
        prod *= z;
        z += 1.0;
    }
    const std::complex<double> iz = 1.0 / z, iz2 = iz * iz;
    std::complex<double> series = 0.0;
    for (std::size_t k = stirling_c.size(); k-- > 0;) series = series * iz2 + stirling_c[k];
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + series * iz - std::log(prod);
}

}  // namespace detail

// Full complex Gamma. Accuracy is certified on the lines 1 + i R and i R only.
inline ComplexValue gamma_complex(ComplexValue z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("gamma_complex: non-finite argument");
    if (z.real() < 0.5) {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        if (z.imag() == 0.0 && z.real() == std::floor(z.real())) throw DomainError("gamma_complex: pole");
        const ComplexValue s = std::sin(detail::pi * z);
        return detail::pi / (s * std::exp(detail::log_gamma_right(1.0 - z)));
    }
    return std::exp(detail::log_gamma_right(z));
}

inline ComplexValue gamma_one_plus_ix(double x) {
    if (!std::isfinite(x)) throw DomainError("gamma_one_plus_ix: x must be finite");
    if (x == 0.0) return {1.0, 0.0};
    const ComplexValue g = gamma_complex({1.0, std::abs(x)});
    return x < 0.0 ? std::conj(g) : g;
}

}  // namespace annulus_moduli

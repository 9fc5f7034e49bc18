#pragma once

// Annulus partition functions of the O(n) loop model / CLE_kappa:
// open and closed channels, Cardy's SLE_{8/3} function, nesting ratios.

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "specfun.hpp"

namespace annulus_moduli {

struct CleParams {
    double kappa;
    double g;    // 4 / kappa
    double chi;  // (1 - g) pi
    double n;    // loop weight 2 cos chi
    double c;    // central charge
};

inline CleParams cle_params(double kappa) {
    if (!(kappa > 8.0 / 3.0 && kappa <= 4.0)) throw DomainError("cle_params: kappa must lie in (8/3, 4]");
    CleParams p{};
    p.kappa = kappa;
    p.g = 4.0 / kappa;
    p.chi = (1.0 - p.g) * std::numbers::pi;
    p.n = 2.0 * std::cos(p.chi);
    p.c = 1.0 - 6.0 * (1.0 - p.g) * (1.0 - p.g) / p.g;
    return p;
}

struct WindingWeight {
    double chi_prime;
    double n_prime;
};

inline WindingWeight winding_weight(double chi_prime) {
    if (!std::isfinite(chi_prime)) throw DomainError("winding_weight: chi_prime must be finite");
    return {chi_prime, 2.0 * std::cos(chi_prime)};
}

struct NomePair {
    double tau;
    double q;        // e^{-pi/tau}
    double q_tilde;  // e^{-2 pi tau}
};

inline NomePair nome_pair(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("nome_pair: tau must be positive and finite");
    return {tau, std::exp(-std::numbers::pi / tau), std::exp(-2.0 * std::numbers::pi * tau)};
}

namespace detail {

// chi' folded into [0, pi] using 2 pi periodicity and evenness of Z.
inline double fold_angle(double chi_prime) {
    double a = std::fmod(std::abs(chi_prime), 2.0 * pi);
    if (a > pi) a = 2.0 * pi - a;
    return a;
}

inline void check_tau(double tau, const char* who) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError(std::string(who) + ": tau must be positive and finite");
}

// 1 / prod_{r>=1} (1 - x^r)
inline double inverse_euler_product(double x, const SeriesConfig& cfg, const char* who) {
    double prod = 1.0, xr = x;
    for (int r = 1; r <= cfg.max_terms; ++r) {
        if (xr < 0.01 * cfg.rel_tol) return 1.0 / prod;
        prod *= 1.0 - xr;
        xr *= x;
    }
    throw ConvergenceError(std::string(who) + ": q-product did not converge");
}

// sum_{p in Z} [sin((p+1)chi')/sin chi'] q^{g p^2/4 - (1-g) p/2}.
// p = -1 contributes nothing and p' = -p-2 carries weight -U_p, so the sum
// is folded onto p >= 0 with the two exponents side by side.
inline double open_sum(double tau, const CleParams& P, double chi_prime, const SeriesConfig& cfg) {
    const double a = fold_angle(chi_prime);
    const double s = std::sin(a), cs = std::cos(a);
    const bool chebyshev = std::abs(s) < 1e-8;
    const double lq = -pi / tau;  // log q
    double u_prev = 0.0, u = 1.0;  // U_{-1}, U_0
    double sum = 0.0;
    for (int p = 0; p < cfg.max_terms; ++p) {
        const double weight = chebyshev ? u : std::sin((p + 1.0) * a) / s;
        const double e = P.g * p * p / 4.0 - (1.0 - P.g) * p / 2.0;
        const double lead = std::exp(e * lq);
        sum += weight * lead * -std::expm1((p + 1.0) * lq);
        if (p > 0 && (p + 1.0) * lead <= 0.01 * cfg.rel_tol * std::abs(sum)) return sum;
        const double u_next = 2.0 * cs * u - u_prev;
        u_prev = u;
        u = u_next;
    }
    throw ConvergenceError("z_open: p-series did not converge");
}

// sum_m [sin(theta_m/g)/sin chi'] exp(-tau theta_m^2/(pi g)), theta_m = chi' + 2 pi m.
// At chi' = k pi both numerator and denominator vanish and the ratio is
// replaced by its limit F'(k pi)/cos(k pi).
inline double closed_sum(double tau, const CleParams& P, double chi_prime, const SeriesConfig& cfg) {
    const double a = fold_angle(chi_prime);
    const double s = std::sin(a);
    const bool limit = std::abs(s) < 1e-8;
    const double a0 = limit ? (a < 0.5 * pi ? 0.0 : pi) : a;
    const double denom = limit ? std::cos(a0) : s;
    auto term = [&](int m) {
        const double th = a0 + 2.0 * pi * m;
        const double w = std::exp(-tau * th * th / (pi * P.g));
        if (!limit) return std::sin(th / P.g) * w;
        return (std::cos(th / P.g) / P.g - std::sin(th / P.g) * 2.0 * tau * th / (pi * P.g)) * w;
    };
    double sum = term(0);
    for (int m = 1; m < cfg.max_terms; ++m) {
        const double tp = term(m), tm = term(-m);
        sum += tp + tm;
        const double th = 2.0 * pi * m - pi;
        const double bound = (1.0 + 2.0 * tau * (th + 2.0 * pi) / (pi * P.g)) * std::exp(-tau * th * th / (pi * P.g));
        if (bound <= 0.01 * cfg.rel_tol * std::abs(sum)) return sum / denom;
    }
    throw ConvergenceError("z_closed: m-series did not converge");
}

}  // namespace detail

// Open channel, nome q = e^{-pi/tau}.
inline double z_open(double tau, const CleParams& p, const WindingWeight& w, const SeriesConfig& cfg = {}) {
    cfg.validate();
    detail::check_tau(tau, "z_open");
    const double q = std::exp(-detail::pi / tau);
    const double pref = std::exp(detail::pi * p.c / (24.0 * tau)) * detail::inverse_euler_product(q, cfg, "z_open");
    return pref * detail::open_sum(tau, p, w.chi_prime, cfg);
}

// Closed channel, nome q~ = e^{-2 pi tau}. The q~ powers
// -c/12 - (1-g)^2/(2g) combine to the single factor e^{pi tau / 6}.
inline double z_closed(double tau, const CleParams& p, const WindingWeight& w, const SeriesConfig& cfg = {}) {
    cfg.validate();
    detail::check_tau(tau, "z_closed");
    const double qt2 = std::exp(-4.0 * detail::pi * tau);
    const double pref = std::sqrt(2.0 / p.g) * std::exp(detail::pi * tau / 6.0) *
                        detail::inverse_euler_product(qt2, cfg, "z_closed");
    return pref * detail::closed_sum(tau, p, w.chi_prime, cfg);
}

// Whichever channel converges faster at this tau.
inline double z_auto(double tau, const CleParams& p, const WindingWeight& w, const SeriesConfig& cfg = {}) {
    return tau >= 1.0 ? z_closed(tau, p, w, cfg) : z_open(tau, p, w, cfg);
}

// Z(tau) * eta(2 i tau), free of the overflowing prefactors of either
// channel, so it can be integrated over all of (0, inf).
//   tau < 1 : (2 tau)^{-1/2} q^{(1-c)/24} * open_sum
//   tau >= 1: (2/g)^{1/2} * closed_sum
inline double z_eta_product(double tau, const CleParams& p, const WindingWeight& w, const SeriesConfig& cfg = {}) {
    cfg.validate();
    detail::check_tau(tau, "z_eta_product");
    if (tau >= 1.0) return std::sqrt(2.0 / p.g) * detail::closed_sum(tau, p, w.chi_prime, cfg);
    return std::exp(-detail::pi * (1.0 - p.c) / (24.0 * tau)) / std::sqrt(2.0 * tau) *
           detail::open_sum(tau, p, w.chi_prime, cfg);
}

namespace detail {

// sum_{k in Z} k (-1)^{k-1} exp(-(3 pi/(2 tau)) (k - 1/3)^2).
// For tau > 1 the Poisson-resummed form converges faster:
//   -sqrt(pi/a) sum_{w = pi, 3pi, ...} e^{-w^2/(4a)} [(2/3) cos(w/3) - (w/a) sin(w/3)],
// with a = 3 pi / (2 tau).
inline double cardy_sum(double tau, const SeriesConfig& cfg) {
    const double a = 3.0 * pi / (2.0 * tau);
    double sum = 0.0;
    if (tau <= 1.0) {
        for (int k = 1; k < cfg.max_terms; ++k) {
            const double sgn = (k % 2 == 1) ? 1.0 : -1.0;
            const double dp = k - 1.0 / 3.0, dm = -k - 1.0 / 3.0;
            sum += sgn * k * (std::exp(-a * dp * dp) - std::exp(-a * dm * dm));
            if (k * std::exp(-a * dp * dp) <= 0.01 * cfg.rel_tol * std::abs(sum)) return sum;
        }
        throw ConvergenceError("z_cardy: k-series did not converge");
    }
    for (int j = 0; j < cfg.max_terms; ++j) {
        const double w = (2.0 * j + 1.0) * pi;
        const double e = std::exp(-w * w / (4.0 * a));
        sum += e * ((2.0 / 3.0) * std::cos(w / 3.0) - (w / a) * std::sin(w / 3.0));
        if (j > 0 && e * (1.0 + w / a) <= 0.01 * cfg.rel_tol * std::abs(sum)) return -std::sqrt(pi / a) * sum;
    }
    throw ConvergenceError("z_cardy: resummed series did not converge");
}

}  // namespace detail

// eta(2 i tau) Z_Cardy(tau) = (2 tau)^{-1/2} sum_k k (-1)^{k-1} q^{(3/2)(k-1/3)^2}
inline double z_cardy_eta(double tau, const SeriesConfig& cfg = {}) {
    cfg.validate();
    detail::check_tau(tau, "z_cardy_eta");
    return detail::cardy_sum(tau, cfg) / std::sqrt(2.0 * tau);
}

// Z_Cardy(tau) = prod (1 - q^r)^{-1} sum_k k (-1)^{k-1} q^{3k^2/2 - k + 1/8}, q = e^{-pi/tau}.
inline double z_cardy(double tau, const SeriesConfig& cfg = {}) {
    cfg.validate();
    detail::check_tau(tau, "z_cardy");
    if (tau > 1.0) return z_cardy_eta(tau, cfg) / dedekind_eta(2.0 * tau, cfg);
    const double q = std::exp(-detail::pi / tau);
    double sum = 0.0;
    for (int k = 1; k < cfg.max_terms; ++k) {
        const double sgn = (k % 2 == 1) ? 1.0 : -1.0;
        const double ep = 1.5 * k * k - k + 0.125, em = 1.5 * k * k + k + 0.125;
        sum += sgn * k * (std::pow(q, ep) - std::pow(q, em));
        if (k * std::pow(q, ep) <= 0.01 * cfg.rel_tol * std::abs(sum)) {
            return detail::inverse_euler_product(q, cfg, "z_cardy") * sum;
        }
    }
    throw ConvergenceError("z_cardy: k-series did not converge");
}

// E[(n'/n)^N] = Z(tau, kappa, chi') / Z(tau, kappa, chi).
inline double nesting_ratio(double tau, const CleParams& p, const WindingWeight& w, const SeriesConfig& cfg = {}) {
    if (w.chi_prime == p.chi) {
        detail::check_tau(tau, "nesting_ratio");
        return 1.0;
    }
    return z_auto(tau, p, w, cfg) / z_auto(tau, p, winding_weight(p.chi), cfg);
}

// Laplace transform int_0^inf e^{-t tau} Z(tau) eta(2 i tau) d tau in closed form.
inline double z_eta_laplace_closed(double t, const CleParams& p, const WindingWeight& w) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("z_eta_laplace_closed: t must be positive");
    const double A = std::sqrt(p.kappa * detail::pi * t / 4.0);
    const double B = std::sqrt(4.0 * detail::pi * t / p.kappa);
    const double c = std::cos(w.chi_prime);
    double ratio;
    if (B < 20.0) {
        ratio = std::sinh(A) / (std::cosh(B) - c);
    } else {
        ratio = std::exp(A - B) * -std::expm1(-2.0 * A) / (1.0 + std::exp(-2.0 * B) - 2.0 * c * std::exp(-B));
    }
    return std::sqrt(detail::pi) * ratio / std::sqrt(2.0 * t);
}

}  // namespace annulus_moduli

#pragma once

// Closed-form laws of annulus moduli and boundary lengths: GMC length-ratio
// characteristic function, Brownian and CLE modulus densities and MGFs,
// conformal-radius moments, nesting sums, Liouville boundary moments.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "partition.hpp"
#include "specfun.hpp"
#include "transforms.hpp"

namespace annulus_moduli {

struct LqgParams {
    double gamma;
    double Q;    // gamma/2 + 2/gamma
    double c_L;  // 1 + 6 Q^2
};

inline LqgParams lqg_params(double gamma) {
    if (!(gamma > 0.0 && gamma < 2.0)) throw DomainError("lqg_params: gamma must lie in (0, 2)");
    const double Q = gamma / 2.0 + 2.0 / gamma;
    return {gamma, Q, 1.0 + 6.0 * Q * Q};
}

inline const double gamma_brownian = std::sqrt(8.0 / 3.0);

namespace detail {

// u / sinh(u), with a series near 0.
inline double u_over_sinh(double u) {
    const double a = std::abs(u);
    if (a < 1e-4) {
        const double u2 = u * u;
        return 1.0 - u2 / 6.0 + 7.0 * u2 * u2 / 360.0 - 31.0 * u2 * u2 * u2 / 15120.0;
    }
    if (a > 700.0) return 2.0 * a * std::exp(-a);
    return a / std::sinh(a);
}

}  // namespace detail

// Characteristic function of the lateral log-ratio, pi g^2 x / (4 sinh(g^2 pi x/4)):
// a logistic law, independent of the modulus.
inline double lateral_cf(double x, double gamma) { return detail::u_over_sinh(gamma * gamma * detail::pi * x / 4.0); }

// E[exp(i x log(L1/L0))] on the cylinder of modulus tau.
inline double gmc_ratio_cf(double x, const LqgParams& lqg, double tau) {
    if (!(tau > 0.0)) throw DomainError("gmc_ratio_cf: tau must be positive");
    const double g2 = lqg.gamma * lqg.gamma;
    return std::exp(-detail::pi * g2 * tau * x * x / 4.0) * lateral_cf(x, lqg.gamma);
}

namespace detail {

// |cf| bound used to cut the inversion integral: the lateral factor alone.
inline double log_ratio_cutoff(double gamma) {
    double t = 1.0;
    while (u_over_sinh(gamma * gamma * pi * t / 4.0) > 1e-18) t += 0.5;
    return t;
}

}  // namespace detail

// Density of log(L1/L0) at s, by direct cosine inversion of gmc_ratio_cf.
inline double log_ratio_density(double s, const LqgParams& lqg, double tau) {
    if (!(tau > 0.0)) throw DomainError("log_ratio_density: tau must be positive");
    const double g2 = lqg.gamma * lqg.gamma;
    // Gaussian factor may cut the range earlier than the lateral factor.
    const double tg = std::sqrt(4.0 * 41.5 / (detail::pi * g2 * tau));
    const double T = std::min(detail::log_ratio_cutoff(lqg.gamma), tg);
    const double h = std::min(0.5, 2.0 * detail::pi / std::max(std::abs(s), 1.0));
    const int n = std::max(1, static_cast<int>(std::ceil(T / h)));
    return gauss_panels([&](double t) { return std::cos(t * s) * gmc_ratio_cf(t, lqg, tau); }, 0.0, T, n) / detail::pi;
}

// Density of X_tau = L1/L0 at gamma = sqrt(8/3) on a grid of x > 0.
inline DensityTable rho_tau_density(double tau, const Grid& xgrid) {
    if (!(tau > 0.0)) throw DomainError("rho_tau_density: tau must be positive");
    if (!(xgrid.min() > 0.0)) throw DomainError("rho_tau_density: grid must lie in (0, inf)");
    const LqgParams lqg = lqg_params(gamma_brownian);
    std::vector<double> s(xgrid.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::log(xgrid[i]);
    const DensityTable ds = cf_to_density([&](double t) { return gmc_ratio_cf(t, lqg, tau); }, Grid::explicit_points(s));
    if (ds.tail_bound > 1e-8) throw AccuracyError("rho_tau_density: inversion tail mass exceeds 1e-8", ds.tail_bound);
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = ds.values[i] / xgrid[i];
    return DensityTable(xgrid.points(), std::move(v), ds.tail_bound, ds.clamp_mass);
}

// Default x-grid: log-spaced, wide enough that the log-ratio tails are < 1e-9.
inline Grid rho_tau_default_grid(double tau, std::size_t count = 65537) {
    const double sd = std::sqrt(detail::pi * (8.0 / 3.0) * tau / 2.0);
    const double S = 14.0 + 6.5 * sd;
    return Grid::log_spaced(std::exp(-S), std::exp(S), count);
}

inline DensityTable rho_tau_density(double tau) { return rho_tau_density(tau, rho_tau_default_grid(tau)); }

// 2^{-1/2} eta(2 i tau)
inline double ba_weight(double tau) { return dedekind_eta(2.0 * tau) / std::numbers::sqrt2; }

inline Grid ba_default_grid() { return Grid::graded(1e-3, 0.5, 60.0, 1.02, 0.01); }

// Law of the modulus of BA(a, b): density proportional to eta(2 i tau) rho_tau(b/a).
inline DensityTable ba_modulus_density(double a, double b, const Grid& grid) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("ba_modulus_density: boundary lengths must be positive");
    if (!(grid.min() > 0.0)) throw DomainError("ba_modulus_density: grid must lie in (0, inf)");
    const LqgParams lqg = lqg_params(gamma_brownian);
    const double s = std::log(b) - std::log(a);
    const double r = b / a;
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = ba_weight(grid[i]) * log_ratio_density(s, lqg, grid[i]) / r;
        if (v[i] < 0.0) v[i] = 0.0;
    }
    DensityTable d(grid.points(), std::move(v));
    if (!(d.mass > 0.0) || !std::isfinite(d.mass)) throw AccuracyError("ba_modulus_density: normalization failed");
    // Beyond the grid the weight decays like e^{-pi tau / 6}.
    const double tail = d.values.back() * 6.0 / detail::pi;
    DensityTable n = d.normalized();
    n.tail_bound = tail / d.mass;
    return n;
}

inline DensityTable ba_modulus_density(double a, double b) { return ba_modulus_density(a, b, ba_default_grid()); }

// cos(pi (4/g^2 - 1)) (g / 2 pi) theta_1(g^2/8, i g^2 tau / 4)
inline double qa_weight(double tau, const LqgParams& lqg) {
    const double g = lqg.gamma, g2 = g * g;
    if (!(g > gamma_brownian && g < 2.0)) throw DomainError("qa_weight: gamma must lie in (sqrt(8/3), 2)");
    if (!(tau > 0.0)) throw DomainError("qa_weight: tau must be positive");
    return std::cos(detail::pi * (4.0 / g2 - 1.0)) * (g / (2.0 * detail::pi)) * jacobi_theta1(g2 / 8.0, g2 * tau / 4.0);
}

// ---------------------------------------------------------------------------
// Exit time Y_0 of Brownian motion from (-1, 1), started at 0.
// E[e^{-s Y_0}] = 1 / cosh(sqrt(2 s)).

inline double y0_density(double t) {
    if (!(t > 0.0) || 1.0 / (2.0 * t) > 745.0) return 0.0;
    const double pi = detail::pi;
    double sum = 0.0;
    if (t < 0.6) {
        for (int k = 0; k < 64; ++k) {
            const double m = 2.0 * k + 1.0;
            const double term = m * std::exp(-m * m / (2.0 * t));
            sum += (k % 2 == 0) ? term : -term;
            if (term <= 1e-17 * std::abs(sum)) break;
        }
        return 2.0 * sum / std::sqrt(2.0 * pi * t * t * t);
    }
    for (int k = 0; k < 64; ++k) {
        const double m = 2.0 * k + 1.0;
        const double term = m * std::exp(-m * m * pi * pi * t / 8.0);
        sum += (k % 2 == 0) ? term : -term;
        if (term <= 1e-17 * std::abs(sum)) break;
    }
    return 0.5 * pi * sum;
}

// P(Y_0 > t)
inline double y0_survival(double t) {
    if (!(t > 0.0)) return 1.0;
    const double pi = detail::pi;
    double sum = 0.0;
    if (t < 0.6) {
        // 1 - 2 sum_k (-1)^k erfc((2k+1)/sqrt(2t))
        for (int k = 0; k < 64; ++k) {
            const double term = std::erfc((2.0 * k + 1.0) / std::sqrt(2.0 * t));
            sum += (k % 2 == 0) ? term : -term;
            if (term <= 1e-17) break;
        }
        return 1.0 - 2.0 * sum;
    }
    for (int k = 0; k < 64; ++k) {
        const double m = 2.0 * k + 1.0;
        const double term = std::exp(-m * m * pi * pi * t / 8.0) / m;
        sum += (k % 2 == 0) ? term : -term;
        if (term <= 1e-17 * std::abs(sum)) break;
    }
    return 4.0 / pi * sum;
}

// ---------------------------------------------------------------------------
// CLE modulus laws. u0 = 4/kappa - 1, u = sqrt(u0^2 - 8 lambda / kappa).

namespace detail {

// sin(k pi u / 4) / u and cos(pi u) as functions of u^2, continued to
// sinh / cosh for u^2 < 0.
struct TrigPair {
    double s;
    double c;
};

inline TrigPair trig_pair(double u2, double kappa) {
    const double k4 = kappa * pi / 4.0;
    if (u2 >= 0.0) {
        const double u = std::sqrt(u2);
        const double w = k4 * u;
        double s;
        if (u < 1e-6) {
            const double w2 = w * w;
            s = k4 * (1.0 - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0);
        } else {
            s = std::sin(w) / u;
        }
        return {s, std::cos(pi * u)};
    }
    const double v = std::sqrt(-u2);
    const double w = k4 * v;
    double s;
    if (v < 1e-6) {
        const double w2 = w * w;
        s = k4 * (1.0 + w2 / 6.0 + w2 * w2 / 120.0 + w2 * w2 * w2 / 5040.0);
    } else {
        s = std::sinh(w) / v;
    }
    return {s, std::cosh(pi * v)};
}

inline double mgf_threshold(double kappa) { return 3.0 * kappa / 32.0 + 2.0 / kappa - 1.0; }

inline double u_squared(double lambda, const CleParams& p) {
    if (!(lambda > mgf_threshold(p.kappa))) throw DomainError("lambda must exceed 3 kappa/32 + 2/kappa - 1");
    const double u0 = 4.0 / p.kappa - 1.0;
    return u0 * u0 - 8.0 * lambda / p.kappa;
}

}  // namespace detail

// E[exp(-2 pi lambda Mod(eta_j))].
inline double cle_mod_mgf(double lambda, const CleParams& p, int j) {
    if (j < 1) throw DomainError("cle_mod_mgf: j must be >= 1");
    const double u0 = 4.0 / p.kappa - 1.0;
    const double u2 = detail::u_squared(lambda, p);
    const auto at_u = detail::trig_pair(u2, p.kappa);
    const auto at_u0 = detail::trig_pair(u0 * u0, p.kappa);
    return at_u.s / at_u0.s * std::pow(at_u0.c / at_u.c, j);
}

// E[CR(eta_j)^lambda]; the cosine ratio cos(pi u0) / cos(pi u) to the power j.
inline double cr_moment(double lambda, const CleParams& p, int j) {
    if (j < 1) throw DomainError("cr_moment: j must be >= 1");
    const double u0 = 4.0 / p.kappa - 1.0;
    const auto at_u = detail::trig_pair(detail::u_squared(lambda, p), p.kappa);
    return std::pow(std::cos(detail::pi * u0) / at_u.c, j);
}

// cr_moment / cle_mod_mgf in closed form: u sin(pi(1 - kappa/4)) / (u0 sin(kappa pi u / 4)).
inline double mod_cr_factor(double lambda, const CleParams& p) {
    const double u0 = 4.0 / p.kappa - 1.0;
    const auto at_u = detail::trig_pair(detail::u_squared(lambda, p), p.kappa);
    const auto at_u0 = detail::trig_pair(u0 * u0, p.kappa);
    return at_u0.s / at_u.s;
}

namespace detail {

// tanh(th')/th' * cosh(k th/4)/cosh(th), th = pi sqrt(8 s / kappa), th' = kappa th / 4,
// continued to tan/cos for s < 0.
inline double hitting_product(double s, double kappa) {
    const double k4 = kappa / 4.0;
    if (s == 0.0) return 1.0;
    if (s > 0.0) {
        const double th = pi * std::sqrt(8.0 * s / kappa), thp = k4 * th;
        return std::tanh(thp) / thp * std::cosh(k4 * th) / std::cosh(th);
    }
    const double ph = pi * std::sqrt(-8.0 * s / kappa), php = k4 * ph;
    return std::tan(php) / php * std::cos(k4 * ph) / std::cos(ph);
}

}  // namespace detail

// The j = 1 modulus MGF assembled from Brownian hitting-time transforms:
// E[e^{-th^2 T0/2}] = tanh(th)/th for the last zero before exit from
// (-1, 1), and E[e^{-th^2 Y_a/2}] = cosh(a th)/cosh(th) for the exit time
// from a. The modulus law is the e^{c M} tilt of the combination, so the
// product is evaluated at the shifted argument and renormalized.
inline double hitting_time_mgf(double lambda, const CleParams& p) {
    const double u0 = 4.0 / p.kappa - 1.0;
    const double shift = p.kappa * u0 * u0 / 8.0;
    detail::u_squared(lambda, p);  // threshold check
    return detail::hitting_product(lambda - shift, p.kappa) / detail::hitting_product(-shift, p.kappa);
}

// Untilted j = 1 modulus weight theta_1(kappa/8, i kappa tau/4), the tilt
// rate pi kappa u0^2/4 and the decay rate of the tilted density.
inline double cle_theta_weight(double tau, const CleParams& p) {
    return jacobi_theta1(p.kappa / 8.0, p.kappa * tau / 4.0);
}
inline double cle_tilt_rate(const CleParams& p) {
    const double u0 = 4.0 / p.kappa - 1.0;
    return detail::pi * p.kappa * u0 * u0 / 4.0;
}
inline double cle_decay_rate(const CleParams& p) {
    const double u0 = 4.0 / p.kappa - 1.0;
    return detail::pi * p.kappa / 4.0 * (0.25 - u0 * u0);
}

// Density of the increment (2 pi / kappa) Y_0 between successive nested loops.
inline double cle_increment_density(double tau, const CleParams& p) {
    const double s = p.kappa / (2.0 * detail::pi);
    return s * y0_density(s * tau);
}

inline Grid cle_default_grid(const CleParams& p, int j) {
    const double T = 2.0 * (21.0 + 2.0 * (j - 1)) / cle_decay_rate(p);
    return Grid::graded(1e-18, 0.5, T, 1.01, 0.01);
}

namespace detail {

inline DensityTable untilted_theta_table(const CleParams& p, const Grid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = cle_theta_weight(grid[i], p);
    DensityTable d(grid.points(), std::move(v));
    // theta_1 decays like e^{-pi kappa tau / 16}.
    d.tail_bound = d.values.back() * 16.0 / (pi * p.kappa);
    const double t = d.tail_bound / d.mass;
    DensityTable n = d.normalized();
    n.tail_bound = t;
    return n;
}

inline DensityTable increment_table(const CleParams& p, const Grid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = cle_increment_density(grid[i], p);
    DensityTable d(grid.points(), std::move(v));
    d.tail_bound = y0_survival(p.kappa / (2.0 * pi) * grid.max());
    return d.normalized();
}

}  // namespace detail

// Law of Mod(eta_j), the modulus of the annulus between the j-th nested
// CLE loop around a point and the domain boundary. Tilting commutes with
// convolution, so the j-th law is the tilted j = 1 law convolved with j-1
// copies of the tilted increment.
inline DensityTable cle_mod_density(const CleParams& p, int j, const Grid& grid) {
    if (j < 1) throw DomainError("cle_mod_density: j must be >= 1");
    if (!(grid.min() > 0.0)) throw DomainError("cle_mod_density: grid must lie in (0, inf)");
    const double c = cle_tilt_rate(p), r = cle_decay_rate(p);
    const auto tilted = [&](auto&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::exp(c * grid[i]) * f(grid[i]);
        DensityTable d(grid.points(), std::move(v));
        // both tilted pieces decay like e^{-r tau}
        const double tail = d.values.back() / r / d.mass;
        DensityTable n = d.normalized();
        n.tail_bound = tail;
        return n;
    };
    DensityTable out = tilted([&](double t) { return cle_theta_weight(t, p); });
    if (j > 1) {
        const DensityTable inc = tilted([&](double t) { return cle_increment_density(t, p); });
        for (int k = 2; k <= j; ++k) out = tilt_convolve(out, inc, 0.0);
    }
    if (out.tail_bound > 1e-8) throw AccuracyError("cle_mod_density: grid too short, tail mass exceeds 1e-8", out.tail_bound);
    return out;
}

inline DensityTable cle_mod_density(const CleParams& p, int j) { return cle_mod_density(p, j, cle_default_grid(p, j)); }

// Left side of the nesting identity for f(tau) = e^{-t tau} e^{-pi kappa u0^2 tau/4}:
// sum_{j <= J_max} (n'/n)^{j-1} int f density_j.
// The modulus of eta_j is Mod(eta_1) plus j-1 independent tilted increments,
// so int f density_j = E_1 * E_inc^{j-1}, each factor a one-dimensional
// quadrature against its own density.
struct NestedExpectation {
    double value;
    double tail_bound;
    double first;      // int f density_1
    double increment;  // int f-weighted increment factor
};

inline NestedExpectation nested_expectation(double t, const CleParams& p, const WindingWeight& w, int J_max) {
    if (!(t > 0.0)) throw DomainError("nested_expectation: t must be positive");
    if (J_max < 1) throw DomainError("nested_expectation: J_max must be >= 1");
    const double c = cle_tilt_rate(p);
    const double beta = w.n_prime / p.n;
    QuadratureConfig qc;
    qc.rel_tol = 1e-10;
    qc.abs_tol = 1e-14;

    // Both weights decay faster than e^{-c s}; past s = 700/c the products vanish.
    const auto weighted = [&](double rate, auto&& f) {
        return integrate_halfline([&](double s) { return rate * s > 700.0 || -rate * s > 700.0 ? 0.0 : std::exp(rate * s) * f(s); }, qc).value;
    };
    const auto theta = [&](double s) { return cle_theta_weight(s, p); };
    const auto incr = [&](double s) { return cle_increment_density(s, p); };
    const double e1 = weighted(-t, theta) / weighted(c, theta);
    const double ei = weighted(-t, incr) / weighted(c, incr);

    const double r = beta * ei;
    if (!(std::abs(r) < 1.0)) throw DomainError("nested_expectation: |n'/n| too large, the j-sum diverges");
    double sum = 0.0, pw = 1.0;
    for (int j = 1; j <= J_max; ++j) {
        sum += pw;
        pw *= r;
    }
    return {e1 * sum, e1 * std::abs(pw) / (1.0 - std::abs(r)), e1, ei};
}

// Right side: K int e^{-t tau} Z(tau, kappa, chi') eta(2 i tau) d tau with
// K = sqrt(kappa) u0 cos(pi u0) / (sqrt 2 sin(pi (1 - kappa/4))), by
// quadrature and by the closed-form Laplace transform.
struct NestingRhs {
    double quadrature;
    double closed;
};

inline NestingRhs nesting_rhs(double t, const CleParams& p, const WindingWeight& w) {
    const double u0 = 4.0 / p.kappa - 1.0;
    const double K = std::sqrt(p.kappa) * std::cos(detail::pi * u0) /
                     (std::numbers::sqrt2 * detail::trig_pair(u0 * u0, p.kappa).s);
    QuadratureConfig qc;
    qc.rel_tol = 1e-10;
    qc.abs_tol = 1e-14;
    const double q = integrate_halfline([&](double s) { return std::exp(-t * s) * z_eta_product(s, p, w); }, qc).value;
    return {K * q, K * z_eta_laplace_closed(t, p, w)};
}

// ---------------------------------------------------------------------------
// Liouville field boundary moments.

// LF_tau[L1 e^{-L1} L0^{ix}] = pi g x Gamma(1+ix) e^{-pi g^2 tau x^2/4} / (2 sinh(g^2 pi x/4))
inline ComplexValue lf_boundary_moment(double x, const LqgParams& lqg, double tau) {
    if (!(tau > 0.0)) throw DomainError("lf_boundary_moment: tau must be positive");
    return (2.0 / lqg.gamma) * gmc_ratio_cf(x, lqg, tau) * gamma_one_plus_ix(x);
}

namespace detail {

// d/d mu U(alpha, mu) = U(alpha, mu) e / mu, e = 2 (alpha - Q)/gamma, with
// U(alpha, mu) = (2/g) Gamma(e) mu^e Gamma(g alpha/2 - g^2/4) Gamma(1 - g^2/4)^{-e}.
// Evaluated in logs with e Gamma(e) = Gamma(1 + e); both Gamma arguments have
// real part >= 1 on the line alpha = Q + iP.
inline std::complex<double> bootstrap_dU(std::complex<double> alpha, double mu, const LqgParams& lqg) {
    const double g = lqg.gamma;
    const std::complex<double> e = 2.0 * (alpha - lqg.Q) / g;
    const double log_G = std::lgamma(1.0 - g * g / 4.0);
    const std::complex<double> lg = std::log(2.0 / g) + log_gamma_right(1.0 + e) + e * std::log(mu) +
                                    log_gamma_right(g * alpha / 2.0 - g * g / 4.0) - e * log_G;
    return std::exp(lg) / mu;
}

}  // namespace detail

struct BootstrapValue {
    double raw;
    double simplified;
};

// LF_tau[L0 L1 e^{-mu0 L0 - L1}] from the boundary structure constant U, as
// (a) the raw P-integral of dU(Q+iP, mu0) dU(Q-iP, 1) e^{-pi tau P^2}/(2 pi) and
// (b) the real form (g pi/(4 mu0)) int cos(u log mu0) u^2 e^{-pi g^2 tau u^2/4}
//     / (sinh(pi u) sinh(g^2 pi u/4)) du.
inline BootstrapValue bootstrap_rhs(double tau, const LqgParams& lqg, double mu0) {
    if (!(tau > 0.0 && mu0 > 0.0)) throw DomainError("bootstrap_rhs: tau and mu0 must be positive");
    const double g = lqg.gamma, g2 = g * g, pi = detail::pi;
    QuadratureConfig qc;
    qc.rel_tol = 1e-10;
    qc.abs_tol = 1e-14;
    const double raw = integrate_halfline(
                           [&](double P) {
                               if (pi * tau * P * P > 745.0) return 0.0;
                               const std::complex<double> a(lqg.Q, P), b(lqg.Q, -P);
                               const auto v = detail::bootstrap_dU(a, mu0, lqg) * detail::bootstrap_dU(b, 1.0, lqg);
                               const auto w = detail::bootstrap_dU(std::conj(a), mu0, lqg) * detail::bootstrap_dU(std::conj(b), 1.0, lqg);
                               return (v + w).real() * std::exp(-pi * tau * P * P);
                           },
                           qc)
                           .value /
                       (2.0 * pi);
    const double lm = std::log(mu0);
    const double simp = 2.0 * (g * pi / (4.0 * mu0)) *
                        integrate_halfline(
                            [&](double u) {
                                if (pi * g2 * tau * u * u / 4.0 > 745.0) return 0.0;
                                // u^2 / (sinh(pi u) sinh(g^2 pi u /4)) = u_over_sinh(pi u) u_over_sinh(g^2 pi u/4) / (pi * g^2 pi/4)
                                const double core = detail::u_over_sinh(pi * u) * detail::u_over_sinh(g2 * pi * u / 4.0) /
                                                    (pi * g2 * pi / 4.0);
                                return std::cos(u * lm) * core * std::exp(-pi * g2 * tau * u * u / 4.0);
                            },
                            qc)
                            .value;
    return {raw, simp};
}

// LF_tau[L0 L1 e^{-mu0 L0 - L1}] through the length-ratio law:
// (2/g) int f_V(v) e^v / (mu0 + e^v)^2 dv with V = log(L1/L0).
inline double bootstrap_lhs(double tau, const LqgParams& lqg, double mu0) {
    if (!(tau > 0.0 && mu0 > 0.0)) throw DomainError("bootstrap_lhs: tau and mu0 must be positive");
    const double sd = std::sqrt(detail::pi * lqg.gamma * lqg.gamma * tau / 2.0);
    const double V = 40.0 + 10.0 * sd + std::abs(std::log(mu0));
    const Grid grid = Grid::uniform(-V, V, 8001);
    const DensityTable f = cf_to_density([&](double t) { return gmc_ratio_cf(t, lqg, tau); }, grid);
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = grid[i];
        // e^v / (mu0 + e^v)^2 written to stay finite for large |v|
        const double k = v > 0.0 ? std::exp(-v) / std::pow(mu0 * std::exp(-v) + 1.0, 2) : std::exp(v) / std::pow(mu0 + std::exp(v), 2);
        const double wgt = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
        s += wgt * f.values[i] * k;
    }
    return (2.0 / lqg.gamma) * s * (grid[1] - grid[0]);
}

// |LF^{(alpha, i)}_H(ell)|, the total mass of the disk with one bulk insertion.
inline double lf_disk_mass(double alpha, const LqgParams& lqg, double ell) {
    const double g = lqg.gamma, Q = lqg.Q;
    if (!(alpha > g / 2.0)) throw DomainError("lf_disk_mass: alpha must exceed gamma/2");
    if (!(ell > 0.0)) throw DomainError("lf_disk_mass: ell must be positive");
    return (2.0 / g) * std::pow(2.0, alpha * alpha / 2.0 - alpha * Q) *
           std::pow(2.0 * detail::pi / std::tgamma(1.0 - g * g / 4.0), (2.0 / g) * (Q - alpha)) *
           std::tgamma(g * alpha / 2.0 - g * g / 4.0) * std::pow(ell, (2.0 / g) * (alpha - Q) - 1.0);
}

// ---------------------------------------------------------------------------
// Modulus weights m(d tau) and their mixed boundary-length moments.

enum class WeightKind { BA, QA, QA_j };

// QA_j: the QA weight convolved j-1 times with the increment (2 pi/g^2) Y_0,
// scaled by cos(pi(4/g^2 - 1))^{j-1}; tabulated, evaluated by interpolation.
class ModulusWeight {
public:
    static ModulusWeight ba() { return ModulusWeight(WeightKind::BA, gamma_brownian, 1); }
    static ModulusWeight qa(double gamma) { return ModulusWeight(WeightKind::QA, gamma, 1); }
    static ModulusWeight qa_j(double gamma, int j) {
        if (j < 1) throw DomainError("ModulusWeight: j must be >= 1");
        ModulusWeight m(j == 1 ? WeightKind::QA : WeightKind::QA_j, gamma, j);
        if (j > 1) m.build_table();
        return m;
    }

    WeightKind kind() const { return kind_; }
    double gamma() const { return lqg_.gamma; }
    int j() const { return j_; }

    double operator()(double tau) const {
        switch (kind_) {
            case WeightKind::BA: return ba_weight(tau);
            case WeightKind::QA: return qa_weight(tau, lqg_);
            case WeightKind::QA_j: return table_mass_ * (*table_)(tau);
        }
        return 0.0;
    }

private:
    ModulusWeight(WeightKind k, double gamma, int j) : kind_(k), lqg_(lqg_params(gamma)), j_(j) {
        if (k != WeightKind::BA && !(gamma > gamma_brownian && gamma < 2.0))
            throw DomainError("ModulusWeight: gamma must lie in (sqrt(8/3), 2)");
    }

    void build_table() {
        const CleParams p = cle_params(lqg_.gamma * lqg_.gamma);
        const double c = std::cos(detail::pi * (4.0 / (lqg_.gamma * lqg_.gamma) - 1.0));
        const Grid grid = Grid::graded(1e-18, 0.5, 2.0 * (21.0 + 2.0 * j_) * 16.0 / (detail::pi * p.kappa), 1.01, 0.01);
        DensityTable acc = detail::untilted_theta_table(p, grid);
        const DensityTable inc = detail::increment_table(p, grid);
        for (int k = 2; k <= j_; ++k) acc = tilt_convolve(acc, inc, 0.0);
        table_ = std::make_shared<DensityTable>(std::move(acc));
        // total QA mass is c gamma / 2; each increment is a probability law
        table_mass_ = std::pow(c, j_ - 1) * c * lqg_.gamma / 2.0;
    }

    WeightKind kind_;
    LqgParams lqg_;
    int j_;
    std::shared_ptr<const DensityTable> table_;
    double table_mass_ = 0.0;
};

// Weight[L1 e^{-L1} L0^{ix}] for the annulus of the given kind.
inline ComplexValue annulus_length_moment(WeightKind kind, double x, double gamma = gamma_brownian, int j = 1) {
    const double ch = std::cosh(detail::pi * x);
    if (kind == WeightKind::BA) return detail::pi * gamma_one_plus_ix(x) / (2.0 * ch);
    if (!(gamma > gamma_brownian && gamma < 2.0)) throw DomainError("annulus_length_moment: gamma must lie in (sqrt(8/3), 2)");
    const double c = std::cos(detail::pi * (4.0 / (gamma * gamma) - 1.0));
    if (kind == WeightKind::QA) return c * gamma_one_plus_ix(x) / ch;
    if (j < 1) throw DomainError("annulus_length_moment: j must be >= 1");
    return std::pow(c / ch, j) * gamma_one_plus_ix(x);
}

// Right side of the KPZ relation: int e^{-pi g^2 x^2 tau/4} m(d tau) equals
// 2 sinh(g^2 pi x/4) / (pi g x Gamma(1 + ix)) times the length moment.
inline double kpz_laplace_from_moment(WeightKind kind, double x, double gamma, int j = 1) {
    const double g = kind == WeightKind::BA ? gamma_brownian : gamma;
    const ComplexValue m = annulus_length_moment(kind, x, g, j);
    const double lead = x == 0.0 ? g / 2.0 : 2.0 * std::sinh(g * g * detail::pi * x / 4.0) / (detail::pi * g * x);
    return (lead * m / gamma_one_plus_ix(x)).real();
}

}  // namespace annulus_moduli

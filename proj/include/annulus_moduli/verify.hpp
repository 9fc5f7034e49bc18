#pragma once

// The acceptance checks, shared by the acceptance binary and `verify`.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gmc_mc.hpp"
#include "laws.hpp"
#include "partition.hpp"
#include "samplers.hpp"
#include "specfun.hpp"
#include "stats.hpp"
#include "transforms.hpp"

namespace annulus_moduli {

struct CheckResult {
    std::string name;
    std::string suite;
    std::string anchor;
    std::vector<double> computed{};
    std::vector<double> reference{};
    double tolerance = 0.0;
    bool pass = false;
    double seconds = 0.0;
    std::string note{};
};

// Per-check tolerance overrides, keyed by check name.
using ToleranceMap = std::map<std::string, double>;

struct CheckSpec {
    std::string name;
    std::string suite;
    std::string anchor;
    double default_tolerance;
    std::function<CheckResult(double tol)> run;
};

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Collects (computed, reference) pairs and tracks the worst relative error.
struct Pairs {
    std::vector<double> c, r;
    double worst = 0.0;
    void add(double computed, double reference) {
        c.push_back(computed);
        r.push_back(reference);
        worst = std::max(worst, rel_err(computed, reference));
    }
};

inline QuadratureConfig tight_quad() {
    QuadratureConfig q;
    q.rel_tol = 1e-12;
    q.abs_tol = 1e-15;
    return q;
}

inline CheckResult finish(CheckResult r, const Pairs& p, double tol) {
    r.computed = p.c;
    r.reference = p.r;
    r.tolerance = tol;
    r.pass = p.worst <= tol;
    r.note = "max relative error " + sci(p.worst);
    return r;
}

// Standard-error band check: |est - ref| <= k se for every pair.
struct Band {
    std::vector<double> c, r;
    double worst_z = 0.0;
    void add(double est, double se, double ref) {
        c.push_back(est);
        r.push_back(ref);
        const double z = se > 0.0 ? std::abs(est - ref) / se : (est == ref ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, z);
    }
};

inline double eta_laplace_reference(double a) {
    return std::sqrt(pi / a) * std::sinh(2.0 * std::sqrt(pi * a / 3.0)) / std::cosh(std::sqrt(3.0 * pi * a));
}

inline double theta_laplace_reference(double a, double x, double b) {
    return std::sqrt(pi / (a * b)) * std::sinh(2.0 * x * std::sqrt(pi * a / b)) / std::cosh(std::sqrt(pi * a / b));
}

}  // namespace detail

inline std::vector<CheckSpec> acceptance_checks() {
    using namespace detail;
    std::vector<CheckSpec> v;

    v.push_back({"01_special_functions", "specfun", "eta modular relation and theta_1(1/3) = sqrt3 eta(3 tau)", 1e-12, [](double tol) {
                     CheckResult r{"01_special_functions", "specfun", "eta modular relation and theta_1(1/3) = sqrt3 eta(3 tau)"};
                     Pairs p;
                     const SeriesConfig cfg;
                     for (double t : {0.2, 0.37, 1.0, 2.7, 5.0}) {
                         // both sides by the direct product, so the relation is not used to evaluate itself
                         p.add(eta_product(1.0 / t, cfg), std::sqrt(t) * eta_product(t, cfg));
                         p.add(jacobi_theta1(1.0 / 3.0, t), std::sqrt(3.0) * dedekind_eta(3.0 * t));
                     }
                     return finish(r, p, tol);
                 }});

    v.push_back({"02_modular_invariance", "partition", "open and closed channels of Z(tau, kappa, chi')", 1e-10, [](double tol) {
                     CheckResult r{"02_modular_invariance", "partition", "open and closed channels of Z(tau, kappa, chi')"};
                     Pairs p;
                     for (double tau : {0.4, 1.0, 2.5})
                         for (double k : {2.9, 3.3, 4.0}) {
                             const CleParams cp = cle_params(k);
                             for (double chp : {0.3, cp.chi, 1.2}) {
                                 const WindingWeight w = winding_weight(chp);
                                 p.add(z_open(tau, cp, w), z_closed(tau, cp, w));
                             }
                         }
                     return finish(r, p, tol);
                 }});

    v.push_back({"03_laplace_transforms", "specfun", "Laplace transforms of eta and theta_1", 1e-8, [](double tol) {
                     CheckResult r{"03_laplace_transforms", "specfun", "Laplace transforms of eta and theta_1"};
                     Pairs p;
                     const auto q = tight_quad();
                     for (double a : {0.5, 2.0}) {
                         p.add(integrate_halfline([&](double t) { return std::exp(-a * t) * dedekind_eta(t); }, q).value,
                               eta_laplace_reference(a));
                         p.add(integrate_halfline([&](double t) { return std::exp(-a * t) * jacobi_theta1(0.25, 0.5 * t); }, q).value,
                               theta_laplace_reference(a, 0.25, 0.5));
                     }
                     return finish(r, p, tol);
                 }});

    v.push_back({"04_z_eta_laplace", "partition", "Laplace transform of Z eta(2 i tau)", 1e-6, [](double tol) {
                     CheckResult r{"04_z_eta_laplace", "partition", "Laplace transform of Z eta(2 i tau)"};
                     Pairs p;
                     const auto q = tight_quad();
                     for (double t : {1.0, 3.0})
                         for (double k : {3.0, 3.7}) {
                             const CleParams cp = cle_params(k);
                             for (double chp : {cp.chi, 0.7}) {
                                 const WindingWeight w = winding_weight(chp);
                                 p.add(integrate_halfline([&](double s) { return std::exp(-t * s) * z_eta_product(s, cp, w); }, q).value,
                                       z_eta_laplace_closed(t, cp, w));
                             }
                         }
                     return finish(r, p, tol);
                 }});

    v.push_back({"05_kpz_and_mellin", "laws", "KPZ relation for BA and QA; Mellin double integral", 1e-6, [](double tol) {
                     CheckResult r{"05_kpz_and_mellin", "laws", "KPZ relation for BA and QA; Mellin double integral"};
                     Pairs p;
                     const auto q = tight_quad();
                     const double gb = gamma_brownian;
                     const LqgParams l17 = lqg_params(1.7);
                     for (double x : {0.5, 1.0, 2.0}) {
                         const double sb = pi * gb * gb * x * x / 4.0;
                         p.add(integrate_halfline([&](double t) { return std::exp(-sb * t) * ba_weight(t); }, q).value,
                               kpz_laplace_from_moment(WeightKind::BA, x, gb));
                         const double sq = pi * 1.7 * 1.7 * x * x / 4.0;
                         p.add(integrate_halfline([&](double t) { return std::exp(-sq * t) * qa_weight(t, l17); }, q).value,
                               kpz_laplace_from_moment(WeightKind::QA, x, 1.7));
                     }
                     // int int a e^{-a} b^{ix} / (sqrt(ab)(a+b)) da db at x = 1, b = e^v on the inner line
                     const double x = 1.0;
                     QuadratureConfig q2;
                     q2.rel_tol = 1e-9;
                     q2.abs_tol = 1e-12;
                     // inner integrand decays like e^{-|v - log a|/2}; a window of +-80 leaves < e^{-40}
                     const auto inner = [&](double a, bool imag) {
                         const double c = std::log(a);
                         return gauss_panels(
                             [&](double v) {
                                 const double w = std::exp(0.5 * (v - c)) / (1.0 + std::exp(v - c)) / std::sqrt(a);
                                 return w * (imag ? std::sin(x * v) : std::cos(x * v));
                             },
                             c - 80.0, c + 80.0, 640);
                     };
                     const double re = integrate_halfline([&](double a) { return a > 700.0 ? 0.0 : std::sqrt(a) * std::exp(-a) * inner(a, false); }, q2).value;
                     const double im = integrate_halfline([&](double a) { return a > 700.0 ? 0.0 : std::sqrt(a) * std::exp(-a) * inner(a, true); }, q2).value;
                     const ComplexValue ref = pi * gamma_one_plus_ix(x) / std::cosh(pi * x);
                     p.add(re, ref.real());
                     p.add(im, ref.imag());
                     return finish(r, p, tol);
                 }});

    v.push_back({"06_cle_mgf_normalization", "laws", "CLE modulus MGF at lambda = 0 and density round trip", 1e-10, [](double tol) {
                     CheckResult r{"06_cle_mgf_normalization", "laws", "CLE modulus MGF at lambda = 0 and density round trip"};
                     Pairs norm, trip;
                     for (double k : {2.9, 3.5, 4.0}) {
                         const CleParams cp = cle_params(k);
                         for (int j : {1, 2, 3}) {
                             norm.add(cle_mod_mgf(0.0, cp, j), 1.0);
                             const DensityTable d = cle_mod_density(cp, j);
                             trip.add(d.expectation([](double t) { return std::exp(-2.0 * pi * 0.5 * t); }), cle_mod_mgf(0.5, cp, j));
                         }
                     }
                     r.computed = norm.c;
                     r.computed.insert(r.computed.end(), trip.c.begin(), trip.c.end());
                     r.reference = norm.r;
                     r.reference.insert(r.reference.end(), trip.r.begin(), trip.r.end());
                     r.tolerance = tol;
                     // the round trip carries the fixed density-table tolerance 1e-4
                     r.pass = norm.worst <= tol && trip.worst <= 1e-4;
                     r.note = "normalization error " + sci(norm.worst) + ", round-trip error " + sci(trip.worst);
                     return r;
                 }});

    v.push_back({"07_cr_factorization", "laws", "CR moment / modulus MGF independent of j", 1e-10, [](double tol) {
                     CheckResult r{"07_cr_factorization", "laws", "CR moment / modulus MGF independent of j"};
                     Pairs p;
                     for (double k : {3.3, 3.9}) {
                         const CleParams cp = cle_params(k);
                         for (double lam : {0.2, 0.4}) {
                             const double f = mod_cr_factor(lam, cp);
                             for (int j : {1, 2, 3}) p.add(cr_moment(lam, cp, j) / cle_mod_mgf(lam, cp, j), f);
                         }
                     }
                     return finish(r, p, tol);
                 }});

    v.push_back({"08_hitting_times", "mc", "Brownian hitting-time representation of the j = 1 modulus", 1e-10, [](double tol) {
                     CheckResult r{"08_hitting_times", "mc", "Brownian hitting-time representation of the j = 1 modulus"};
                     Pairs p;
                     const CleParams cp = cle_params(3.5);
                     for (double lam : {0.3, 1.0}) p.add(hitting_time_mgf(lam, cp), cle_mod_mgf(lam, cp, 1));
                     // theta = 1: E e^{-Y_a/2} = cosh(a)/cosh(1), E e^{-T_0/2} = tanh(1)
                     const PathConfig cfg;  // dt = 1e-5
                     const std::size_t n = 100000;
                     const auto f = [](double t) { return std::exp(-0.5 * t); };
                     Band b;
                     const PathBatch z = simulate_paths(0.0, n, cfg, 101);
                     std::vector<double> y0, t0;
                     for (const auto& s : z.samples) {
                         y0.push_back(s.exit_time);
                         t0.push_back(s.last_zero);
                     }
                     const PathBatch ya = simulate_paths(3.5 / 4.0, n, cfg, 102);
                     std::vector<double> y875;
                     for (const auto& s : ya.samples) y875.push_back(s.exit_time);
                     const auto m0 = sample_mean(y0, f), mt = sample_mean(t0, f), ma = sample_mean(y875, f);
                     b.add(m0.mean, m0.std_error, 1.0 / std::cosh(1.0));
                     b.add(ma.mean, ma.std_error, std::cosh(0.875) / std::cosh(1.0));
                     b.add(mt.mean, mt.std_error, std::tanh(1.0));
                     r.computed = p.c;
                     r.computed.insert(r.computed.end(), b.c.begin(), b.c.end());
                     r.reference = p.r;
                     r.reference.insert(r.reference.end(), b.r.begin(), b.r.end());
                     r.tolerance = tol;
                     r.pass = p.worst <= tol && b.worst_z <= 3.0;
                     r.note = "product formula error " + sci(p.worst) + ", worst path z-score " + sci(b.worst_z) +
                              ", censored " + std::to_string(z.censored + ya.censored);
                     return r;
                 }});

    v.push_back({"09_nesting", "laws", "nesting sum equals the partition-function side", 1e-4, [](double tol) {
                     CheckResult r{"09_nesting", "laws", "nesting sum equals the partition-function side"};
                     Pairs p;
                     const CleParams cp = cle_params(3.5);
                     for (double chp : {cp.chi, 0.7}) {
                         const WindingWeight w = winding_weight(chp);
                         p.add(nested_expectation(1.0, cp, w, 40).value, nesting_rhs(1.0, cp, w).quadrature);
                     }
                     const double one = nesting_ratio(1.0, cp, winding_weight(cp.chi));
                     r = finish(r, p, tol);
                     r.computed.push_back(one);
                     r.reference.push_back(1.0);
                     r.pass = r.pass && one == 1.0;
                     return r;
                 }});

    v.push_back({"10_cardy", "partition", "Cardy partition function Laplace transform", 1e-6, [](double tol) {
                     CheckResult r{"10_cardy", "partition", "Cardy partition function Laplace transform"};
                     const auto q = tight_quad();
                     std::vector<double> ratios;
                     for (double x : {0.5, 1.0, 1.5, 2.0}) {
                         const double s = 2.0 * pi * x * x / 3.0;
                         const double lt = integrate_halfline([&](double t) { return s * t > 700.0 ? 0.0 : std::exp(-s * t) * dedekind_eta(2.0 * t) * z_cardy(t); }, q).value;
                         ratios.push_back(lt / (std::sinh(2.0 * pi * x / 3.0) / (x * std::cosh(pi * x) * std::cosh(pi * x))));
                     }
                     Pairs p;
                     for (double v : ratios) p.add(v, ratios.front());
                     r = finish(r, p, tol);
                     r.note += " (constant " + sci(ratios.front()) + ")";
                     return r;
                 }});

    v.push_back({"11_bootstrap", "laws", "boundary structure constant bootstrap with C(tau) = 1", 1e-4, [](double tol) {
                     CheckResult r{"11_bootstrap", "laws", "boundary structure constant bootstrap with C(tau) = 1"};
                     Pairs p;
                     for (double g : {1.2, gamma_brownian}) {
                         const LqgParams l = lqg_params(g);
                         for (double mu : {0.7, 1.3}) {
                             const BootstrapValue b = bootstrap_rhs(1.0, l, mu);
                             const double lhs = bootstrap_lhs(1.0, l, mu);
                             p.add(b.raw, lhs);
                             p.add(b.simplified, lhs);
                         }
                     }
                     return finish(r, p, tol);
                 }});

    v.push_back({"12_gmc_ratio_mc", "mc", "Monte Carlo CF of log L1 - log L0", 3.0, [](double tol) {
                     CheckResult r{"12_gmc_ratio_mc", "mc", "Monte Carlo CF of log L1 - log L0"};
                     const double g = gamma_brownian;
                     const LqgParams l = lqg_params(g);
                     Band b;
                     bool unit = true;
                     for (double tau : {0.5, 1.0}) {
                         CylinderSpec s;
                         s.tau = tau;
                         s.n_boundary = 1024;
                         const McRun run = estimate_log_ratio_cf(s, g, {0.0, 0.5, 1.0, 2.0}, 16384, 7);
                         unit = unit && run.re[0] == 1.0 && run.im[0] == 0.0 && run.se_re[0] == 0.0;
                         for (std::size_t i = 1; i < run.x.size(); ++i) {
                             b.add(run.re[i], run.se_re[i], gmc_ratio_cf(run.x[i], l, tau));
                             b.add(run.im[i], run.se_im[i], 0.0);
                         }
                     }
                     r.computed = b.c;
                     r.reference = b.r;
                     r.tolerance = tol;
                     r.pass = unit && b.worst_z <= tol;
                     r.note = "worst z-score " + sci(b.worst_z) + (unit ? ", x = 0 exactly 1" : ", x = 0 NOT exactly 1");
                     return r;
                 }});

    v.push_back({"13_lateral_mc", "mc", "lateral ratio: tau independence and log-logistic CF", 3.0, [](double tol) {
                     CheckResult r{"13_lateral_mc", "mc", "lateral ratio: tau independence and log-logistic CF"};
                     const double g = gamma_brownian;
                     CylinderSpec a, b;
                     a.tau = 0.5;
                     b.tau = 1.0;
                     const auto ra = lateral_ratio_samples(a, g, 10000, 11);
                     const auto rb = lateral_ratio_samples(b, g, 10000, 12);
                     const KsResult ks = ks_two_sample(ra, rb);
                     const auto cf = sample_mean(rb, [](double v) { return std::cos(std::log(v)); });
                     const double ref = lateral_cf(1.0, g);
                     const double z = std::abs(cf.mean - ref) / cf.std_error;
                     r.computed = {ks.p_value, cf.mean};
                     r.reference = {0.01, ref};
                     r.tolerance = tol;
                     r.pass = ks.p_value >= 0.01 && z <= tol;
                     r.note = "KS p = " + sci(ks.p_value) + ", CF z-score " + sci(z);
                     return r;
                 }});

    v.push_back({"14_ba_modulus", "laws", "Brownian annulus modulus law: symmetry, mass, sampling", 1e-6, [](double tol) {
                     CheckResult r{"14_ba_modulus", "laws", "Brownian annulus modulus law: symmetry, mass, sampling"};
                     const DensityTable d1 = ba_modulus_density(1.0, 2.5), d2 = ba_modulus_density(2.5, 1.0);
                     double sym = 0.0;
                     for (std::size_t i = 0; i < d1.size(); ++i) sym = std::max(sym, std::abs(d1.values[i] - d2.values[i]));
                     const TableSampler s(d1);
                     RngStream rng(14, 0);
                     const KsResult ks = ks_one_sample(s.draw(100000, rng), [&](double x) { return s.cdf(x); });
                     r.computed = {sym, d1.mass, ks.p_value};
                     r.reference = {0.0, 1.0, 0.01};
                     r.tolerance = tol;
                     r.pass = sym <= tol && std::abs(d1.mass - 1.0) <= tol && d1.tail_bound <= 1e-8 && ks.p_value >= 0.01;
                     r.note = "symmetry " + sci(sym) + ", KS p = " + sci(ks.p_value);
                     return r;
                 }});

    return v;
}

inline CheckResult run_check(const CheckSpec& c, const ToleranceMap& tol = {}) {
    const auto it = tol.find(c.name);
    const double t = it != tol.end() ? it->second : c.default_tolerance;
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = c.run(t);
    } catch (const std::exception& e) {
        r = CheckResult{c.name, c.suite, c.anchor};
        r.tolerance = t;
        r.pass = false;
        r.note = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace annulus_moduli

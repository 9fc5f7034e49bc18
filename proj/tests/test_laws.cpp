#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "annulus_moduli/laws.hpp"

using namespace annulus_moduli;

namespace {

constexpr double pi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double halfline(auto&& f) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(f, 1e-13);
}

}  // namespace

TEST(Lqg, Params) {
    const auto l = lqg_params(gamma_brownian);
    EXPECT_NEAR(l.Q, gamma_brownian / 2.0 + 2.0 / gamma_brownian, 1e-15);
    EXPECT_NEAR(l.c_L, 26.0, 1e-12);
    EXPECT_THROW(lqg_params(2.0), DomainError);
    EXPECT_THROW(lqg_params(0.0), DomainError);
}

TEST(LengthRatio, CharacteristicFunctionProperties) {
    const auto l = lqg_params(1.3);
    EXPECT_EQ(gmc_ratio_cf(0.0, l, 1.0), 1.0);
    EXPECT_EQ(lateral_cf(0.0, 1.3), 1.0);
    // series and closed form meet smoothly
    for (double u : {5e-5, 9.99e-5}) EXPECT_NEAR(detail::u_over_sinh(u), u / std::sinh(u), 1e-15);
    for (double x : {0.3, 2.0, 9.0}) {
        EXPECT_GT(gmc_ratio_cf(x, l, 0.5), 0.0);
        EXPECT_LT(gmc_ratio_cf(x, l, 0.5), lateral_cf(x, 1.3));
    }
}

TEST(LengthRatio, DensityInvertsCharacteristicFunction) {
    const auto l = lqg_params(gamma_brownian);
    const double tau = 0.7;
    boost::math::quadrature::tanh_sinh<double> q;
    const double mass = q.integrate([&](double s) { return log_ratio_density(s, l, tau); }, -40.0, 40.0, 1e-12);
    EXPECT_NEAR(mass, 1.0, 1e-9);
    for (double x : {0.4, 1.5}) {
        const double cf = q.integrate([&](double s) { return std::cos(x * s) * log_ratio_density(s, l, tau); }, -40.0, 40.0, 1e-12);
        EXPECT_NEAR(cf, gmc_ratio_cf(x, l, tau), 1e-9) << x;
    }
    EXPECT_NEAR(log_ratio_density(1.3, l, tau), log_ratio_density(-1.3, l, tau), 1e-15);
}

TEST(RhoTau, MassAndInversionSymmetry) {
    const double tau = 1.0;
    const DensityTable d = rho_tau_density(tau, Grid::log_spaced(std::exp(-30.0), std::exp(30.0), 8193));
    EXPECT_NEAR(d.mass, 1.0, 1e-5);
    // log(L1/L0) is symmetric, so rho(x) = rho(1/x) / x^2
    for (std::size_t i : {1000u, 3000u, 4096u, 5000u}) {
        const std::size_t j = d.size() - 1 - i;
        const double x = d.grid[i];
        EXPECT_NEAR(d.values[i], d.values[j] / (x * x), 1e-10 * d.values[i] + 1e-300);
    }
    EXPECT_THROW(rho_tau_density(0.0), DomainError);
}

TEST(BaModulus, NormalizedAndSymmetricInBoundaryLengths) {
    const DensityTable a = ba_modulus_density(1.0, 2.5), b = ba_modulus_density(2.5, 1.0);
    EXPECT_NEAR(a.mass, 1.0, 1e-12);
    EXPECT_LT(a.tail_bound, 1e-12);
    for (std::size_t i = 0; i < a.size(); i += 97) EXPECT_NEAR(a.values[i], b.values[i], 1e-12 * (1.0 + a.values[i]));
    EXPECT_THROW(ba_modulus_density(0.0, 1.0), DomainError);
}

TEST(Y0, LaplaceTransform) {
    for (double s : {0.1, 1.0, 4.0, 20.0}) {
        const double v = halfline([&](double t) { return std::exp(-s * t) * y0_density(t); });
        EXPECT_LT(rel(v, 1.0 / std::cosh(std::sqrt(2.0 * s))), 1e-11) << s;
    }
}

TEST(Y0, SurvivalMatchesDensity) {
    for (double t : {0.05, 0.3, 0.6, 1.0, 3.0}) {
        const double tail = halfline([&](double u) { return y0_density(t + u); });
        EXPECT_NEAR(y0_survival(t), tail, 1e-12) << t;
    }
    EXPECT_NEAR(y0_density(0.6 - 1e-12), y0_density(0.6 + 1e-12), 1e-10);
    EXPECT_EQ(y0_density(0.0), 0.0);
    EXPECT_EQ(y0_survival(0.0), 1.0);
}

TEST(CleMgf, NormalizationAndFactorization) {
    for (double kappa : {2.8, 3.0, 3.5, 4.0}) {
        const auto p = cle_params(kappa);
        for (int j : {1, 2, 5}) EXPECT_NEAR(cle_mod_mgf(0.0, p, j), 1.0, 1e-14);
        for (double lam : {-0.05, 0.3, 2.0}) {
            if (lam <= detail::mgf_threshold(kappa)) continue;
            for (int j : {1, 3}) {
                EXPECT_LT(rel(cr_moment(lam, p, j), cle_mod_mgf(lam, p, j) * mod_cr_factor(lam, p)), 1e-13);
            }
            EXPECT_LT(rel(hitting_time_mgf(lam, p), cle_mod_mgf(lam, p, 1)), 1e-12) << kappa << " " << lam;
        }
    }
    EXPECT_THROW(cle_mod_mgf(-10.0, cle_params(3.0), 1), DomainError);
    EXPECT_THROW(cle_mod_mgf(0.1, cle_params(3.0), 0), DomainError);
}

TEST(CleMgf, MonotoneAndContinuousAcrossZeroU) {
    const auto p = cle_params(3.0);
    double prev = INFINITY;
    for (double lam = -0.05; lam < 3.0; lam += 0.1) {
        const double m = cle_mod_mgf(lam, p, 2);
        EXPECT_LT(m, prev);
        prev = m;
    }
    // u^2 = 0 at lambda = kappa u0^2 / 8
    const double u0 = 4.0 / 3.0 - 1.0, l0 = 3.0 * u0 * u0 / 8.0;
    EXPECT_NEAR(cle_mod_mgf(l0 - 1e-13, p, 1), cle_mod_mgf(l0 + 1e-13, p, 1), 1e-11);
}

TEST(CleDensity, RoundTripAgainstMgf) {
    for (double kappa : {3.0, 4.0}) {
        const auto p = cle_params(kappa);
        for (int j : {1, 2}) {
            const DensityTable d = cle_mod_density(p, j);
            EXPECT_NEAR(d.mass, 1.0, 1e-12);
            EXPECT_LT(d.tail_bound, 1e-8);
            for (double lam : {0.0, 0.25, 1.0}) {
                const double e = d.expectation([&](double t) { return std::exp(-2.0 * pi * lam * t); });
                EXPECT_LT(rel(e, cle_mod_mgf(lam, p, j)), 1e-4) << kappa << " " << j << " " << lam;
            }
        }
    }
}

TEST(Nesting, SeriesMatchesBothRightSides) {
    const auto p = cle_params(3.0);
    for (double chp : {0.7, 1.3}) {
        const auto w = winding_weight(chp);
        for (double t : {0.5, 2.0}) {
            const auto l = nested_expectation(t, p, w, 60);
            const auto r = nesting_rhs(t, p, w);
            EXPECT_LT(l.tail_bound, 1e-12);
            EXPECT_LT(rel(l.value, r.closed), 1e-9) << chp << " " << t;
            EXPECT_LT(rel(r.quadrature, r.closed), 1e-9);
        }
    }
    EXPECT_THROW(nested_expectation(0.0, p, winding_weight(1.0), 10), DomainError);
}

TEST(Bootstrap, ThreeRoutesAgreeAndFrozen) {
    const auto l = lqg_params(1.5);
    const auto b = bootstrap_rhs(1.0, l, 0.7);
    const double lhs = bootstrap_lhs(1.0, l, 0.7);
    EXPECT_LT(rel(b.raw, b.simplified), 1e-10);
    EXPECT_LT(rel(lhs, b.simplified), 1e-10);
    EXPECT_NEAR(b.simplified, 0.27511175448616, 1e-12);
    const auto l2 = lqg_params(gamma_brownian);
    for (double mu : {0.2, 3.0}) {
        const auto v = bootstrap_rhs(0.4, l2, mu);
        EXPECT_LT(rel(v.raw, v.simplified), 1e-9);
        EXPECT_LT(rel(bootstrap_lhs(0.4, l2, mu), v.simplified), 1e-9);
    }
}

TEST(LfMoments, ValueAtZeroAndScaling) {
    const auto l = lqg_params(1.2);
    EXPECT_NEAR(lf_boundary_moment(0.0, l, 0.9).real(), 2.0 / 1.2, 1e-15);
    EXPECT_NEAR(lf_boundary_moment(0.0, l, 0.9).imag(), 0.0, 1e-15);
    const double a = 1.5, e = (2.0 / 1.2) * (a - l.Q) - 1.0;
    EXPECT_LT(rel(lf_disk_mass(a, l, 2.0), lf_disk_mass(a, l, 1.0) * std::pow(2.0, e)), 1e-13);
    EXPECT_THROW(lf_disk_mass(0.5, l, 1.0), DomainError);
}

TEST(Kpz, BaAndQaLaplaceFromMoments) {
    for (double x : {0.0, 0.4, 1.3}) {
        const double g2 = 8.0 / 3.0;
        const double ba = halfline([&](double t) { return std::exp(-pi * g2 * x * x * t / 4.0) * ba_weight(t); });
        EXPECT_LT(rel(ba, kpz_laplace_from_moment(WeightKind::BA, x, gamma_brownian)), 1e-10) << x;
        const auto q = ModulusWeight::qa(1.8);
        const double qa = halfline([&](double t) { return std::exp(-pi * 1.8 * 1.8 * x * x * t / 4.0) * q(t); });
        EXPECT_LT(rel(qa, kpz_laplace_from_moment(WeightKind::QA, x, 1.8)), 1e-10) << x;
    }
}

TEST(Kpz, NestedWeightTable) {
    const auto m = ModulusWeight::qa_j(1.8, 2);
    const double g2 = 1.8 * 1.8;
    for (double x : {0.2, 0.8}) {
        const double s = gauss_panels([&](double t) { return std::exp(-pi * g2 * x * x * t / 4.0) * m(t); }, 0.0, 80.0, 8000);
        EXPECT_LT(rel(s, kpz_laplace_from_moment(WeightKind::QA_j, x, 1.8, 2)), 2e-4) << x;
    }
    EXPECT_THROW(ModulusWeight::qa_j(1.5, 2), DomainError);
}

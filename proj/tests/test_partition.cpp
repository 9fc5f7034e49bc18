#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>

#include "annulus_moduli/partition.hpp"

using namespace annulus_moduli;

namespace {

constexpr double pi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(CleParams, KnownValues) {
    const auto p4 = cle_params(4.0);
    EXPECT_DOUBLE_EQ(p4.g, 1.0);
    EXPECT_NEAR(p4.c, 1.0, 1e-15);
    EXPECT_NEAR(p4.n, 2.0, 1e-15);
    const auto p3 = cle_params(3.0);
    EXPECT_NEAR(p3.c, 0.5, 1e-15);
    EXPECT_NEAR(p3.n, 1.0, 1e-15);
    EXPECT_NEAR(cle_params(8.0 / 3.0 + 1e-12).c, 0.0, 1e-9);
    EXPECT_THROW(cle_params(8.0 / 3.0), DomainError);
    EXPECT_THROW(cle_params(4.5), DomainError);
}

TEST(Partition, OpenAndClosedChannelsAgree) {
    for (double kappa : {2.7, 3.0, 10.0 / 3.0, 3.9, 4.0}) {
        const auto p = cle_params(kappa);
        for (double chp : {0.0, 0.4, 1.3, p.chi, 2.5, pi}) {
            const auto w = winding_weight(chp);
            for (double tau : {0.3, 0.7, 1.0, 1.6, 3.0}) {
                const double o = z_open(tau, p, w), c = z_closed(tau, p, w);
                EXPECT_LT(rel(o, c), 1e-11) << "kappa=" << kappa << " chi'=" << chp << " tau=" << tau;
            }
        }
    }
}

TEST(Partition, EvenAndPeriodicInWindingAngle) {
    const auto p = cle_params(3.3);
    for (double chp : {0.2, 1.1, 2.9}) {
        const double z = z_auto(0.8, p, winding_weight(chp));
        EXPECT_LT(rel(z_auto(0.8, p, winding_weight(-chp)), z), 1e-14);
        EXPECT_LT(rel(z_auto(0.8, p, winding_weight(chp + 2.0 * pi)), z), 1e-12);
    }
}

TEST(Partition, ContinuousAtFoldedEndpoints) {
    const auto p = cle_params(3.5);
    for (double a : {0.0, pi}) {
        for (double tau : {0.5, 2.0}) {
            const double z0 = z_auto(tau, p, winding_weight(a));
            const double zh = z_auto(tau, p, winding_weight(a == 0.0 ? 1e-6 : pi - 1e-6));
            EXPECT_LT(rel(zh, z0), 1e-9);
        }
    }
}

TEST(Partition, EtaProductMatchesChannelTimesEta) {
    const auto p = cle_params(3.2);
    const auto w = winding_weight(0.9);
    for (double tau : {0.2, 0.6, 1.0, 2.0, 5.0}) {
        EXPECT_LT(rel(z_eta_product(tau, p, w), z_auto(tau, p, w) * dedekind_eta(2.0 * tau)), 1e-12) << tau;
    }
}

TEST(Partition, NestingRatioBounds) {
    const auto p = cle_params(3.0);
    EXPECT_EQ(nesting_ratio(1.0, p, winding_weight(p.chi)), 1.0);
    // 0 <= n' < n gives a probability generating function value in (0, 1)
    for (double chp : {1.2, 1.4, pi / 2.0}) {
        for (double tau : {0.3, 1.0, 4.0}) {
            const double r = nesting_ratio(tau, p, winding_weight(chp));
            EXPECT_GT(r, 0.0);
            EXPECT_LT(r, 1.0);
        }
    }
    // more nesting at larger moduli: the ratio falls with tau
    const auto w = winding_weight(1.3);
    EXPECT_GT(nesting_ratio(0.5, p, w), nesting_ratio(1.0, p, w));
    EXPECT_GT(nesting_ratio(1.0, p, w), nesting_ratio(2.0, p, w));
}

TEST(Partition, LaplaceClosedFormMatchesQuadrature) {
    boost::math::quadrature::exp_sinh<double> q;
    for (double kappa : {3.0, 3.7}) {
        const auto p = cle_params(kappa);
        for (double chp : {0.3, 2.0}) {
            const auto w = winding_weight(chp);
            for (double t : {0.5, 2.0, 7.0}) {
                const double num = q.integrate([&](double s) { return std::exp(-t * s) * z_eta_product(s, p, w); }, 1e-13);
                EXPECT_LT(rel(z_eta_laplace_closed(t, p, w), num), 1e-10) << kappa << " " << chp << " " << t;
            }
        }
    }
}

TEST(Cardy, BranchesAgree) {
    for (double tau : {0.4, 0.9, 1.0, 1.2, 3.0}) {
        EXPECT_LT(rel(z_cardy(tau), z_cardy_eta(tau) / dedekind_eta(2.0 * tau)), 1e-12) << tau;
    }
}

TEST(Cardy, ClosedSideSeriesByDirectSum) {
    // direct k-sum of the closed-channel theta series in long double
    for (double tau : {0.5, 2.0}) {
        long double s = 0.0L;
        const long double a = 3.0L * pi / (2.0L * tau);
        for (int k = -60; k <= 60; ++k) s += static_cast<long double>(k) * ((k - 1) % 2 ? -1.0L : 1.0L) * std::exp(-a * (k - 1.0L / 3.0L) * (k - 1.0L / 3.0L));
        EXPECT_LT(rel(z_cardy_eta(tau), static_cast<double>(s / std::sqrt(2.0L * tau))), 1e-12) << tau;
    }
}

TEST(Partition, RejectsBadArguments) {
    const auto p = cle_params(3.0);
    const auto w = winding_weight(1.0);
    EXPECT_THROW(z_open(0.0, p, w), DomainError);
    EXPECT_THROW(z_closed(-1.0, p, w), DomainError);
    EXPECT_THROW(z_eta_laplace_closed(0.0, p, w), DomainError);
    EXPECT_THROW(winding_weight(NAN), DomainError);
}

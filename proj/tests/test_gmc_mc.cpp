#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "annulus_moduli/gmc_mc.hpp"
#include "annulus_moduli/laws.hpp"
#include "annulus_moduli/stats.hpp"

using namespace annulus_moduli;

namespace {

constexpr double pi = std::numbers::pi;

CylinderSpec small_spec(double tau) {
    CylinderSpec s;
    s.tau = tau;
    s.n_boundary = 128;
    return s;
}

}  // namespace

TEST(Cylinder, SpecValidation) {
    CylinderSpec s;
    s.n_boundary = 100;
    EXPECT_THROW(boundary_covariance(s), DomainError);
    s = {};
    s.tau = 0.0;
    EXPECT_THROW(boundary_covariance(s), DomainError);
    s = {};
    s.m_cut = 600;
    EXPECT_THROW(boundary_covariance(s), DomainError);
    s = {};
    s.k_cut = 1000;
    EXPECT_THROW(boundary_covariance(s), AccuracyError);
    EXPECT_EQ(CylinderSpec{}.modes(), 511);
}

TEST(Cylinder, ExplicitSumConvergesToClosedBlocks) {
    const long K = 1000000;
    for (double tau : {0.3, 1.0}) {
        const double bound = 4.0 * tau / (pi * K);
        for (int m : {0, 1, 3}) {
            const auto c = detail::closed_block(m, tau), e = detail::explicit_block(m, tau, K);
            EXPECT_NEAR(e.same, c.same, bound) << tau << " " << m;
            EXPECT_NEAR(e.cross, c.cross, bound) << tau << " " << m;
        }
    }
}

TEST(Cylinder, BlocksArePositiveSemidefinite) {
    const auto cov = boundary_covariance(small_spec(0.05));
    for (const auto& b : cov.blocks) EXPECT_GE(b.same, std::abs(b.cross));
    double v = 0.0;
    for (std::size_t m = 0; m < cov.blocks.size(); ++m) v += (m ? 2.0 : 1.0) * cov.blocks[m].same;
    EXPECT_DOUBLE_EQ(cov.point_variance, v);
}

TEST(Field, EmpiricalCovarianceMatches) {
    const auto cov = boundary_covariance(small_spec(0.5));
    FieldSampler fs(cov);
    RngStream r(4, 0);
    const int N = 20000;
    double s00 = 0.0, s01 = 0.0, sshift = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto f = fs.sample(r);
        s00 += f.h0[0] * f.h0[0];
        s01 += f.h0[0] * f.h1[0];
        sshift += f.h0[3] * f.h1[40];
    }
    const double v = cov.point_variance;
    // standard error of a product mean is at most ~ sqrt(2) v / sqrt(N)
    const double tol = 5.0 * std::sqrt(2.0) * v / std::sqrt(N);
    EXPECT_NEAR(s00 / N, v, tol);
    EXPECT_NEAR(s01 / N, boundary_cov_entry(cov, 0, 0.0, 1, 0.0), tol);
    EXPECT_NEAR(sshift / N, boundary_cov_entry(cov, 0, 3.0 / 128.0, 1, 40.0 / 128.0), tol);
}

TEST(Field, LateralFieldHasZeroMean) {
    const auto cov = boundary_covariance(small_spec(1.0));
    RngStream r(5, 0);
    const auto f = sample_boundary_field(cov, r, false);
    double s0 = 0.0, s1 = 0.0;
    for (double h : f.h0) s0 += h;
    for (double h : f.h1) s1 += h;
    EXPECT_NEAR(s0, 0.0, 1e-10);
    EXPECT_NEAR(s1, 0.0, 1e-10);
    EXPECT_DOUBLE_EQ(field_variance(cov, false), cov.point_variance - cov.blocks[0].same);
}

TEST(Gmc, LengthOfFlatField) {
    EXPECT_NEAR(gmc_length(std::vector<double>(64, 0.0), 1.0, 2.0), std::exp(-0.25), 1e-15);
    EXPECT_DOUBLE_EQ(gmc_length(std::vector<double>(64, 3.0), 0.0, 2.0), 1.0);
    EXPECT_THROW(gmc_length(std::vector<double>(8, 0.0), 2.0, 1.0), DomainError);
}

TEST(Gmc, DeterministicAcrossThreadCounts) {
    const auto spec = small_spec(1.0);
    const auto a = estimate_log_ratio_cf(spec, 1.0, {0.5, 1.0}, 256, 99);
    ::setenv("ANNULUS_MODULI_THREADS", "1", 1);
    const auto b = estimate_log_ratio_cf(spec, 1.0, {0.5, 1.0}, 256, 99);
    ::unsetenv("ANNULUS_MODULI_THREADS");
    EXPECT_EQ(a.re, b.re);
    EXPECT_EQ(a.se_im, b.se_im);
    EXPECT_THROW(estimate_log_ratio_cf(spec, 1.95, {1.0}, 10, 1), DomainError);
}

TEST(Gmc, JackknifeOfMeanIsClassicalStandardError) {
    const std::vector<double> v = {1.0, 2.0, 4.0, 7.0, 11.0};
    const auto [m, se] = detail::jackknife_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    EXPECT_DOUBLE_EQ(m, 5.0);
    EXPECT_NEAR(se, std::sqrt(ss / 4.0 / 5.0), 1e-14);
}

TEST(Gmc, SmallGammaRatioLawMatchesClosedForm) {
    // at small gamma the finite-resolution bias is far below the noise
    CylinderSpec spec;
    spec.tau = 0.5;
    spec.n_boundary = 256;
    const double g = 0.6;
    const auto run = estimate_log_ratio_cf(spec, g, {1.0, 2.0}, 8000, 12);
    for (std::size_t i = 0; i < run.x.size(); ++i) {
        EXPECT_NEAR(run.re[i], gmc_ratio_cf(run.x[i], lqg_params(g), spec.tau), 4.0 * run.se_re[i]) << run.x[i];
        EXPECT_NEAR(run.im[i], 0.0, 4.0 * run.se_im[i]);
    }
    const auto lat = lateral_ratio_samples(spec, g, 8000, 13);
    const auto m = sample_mean(lat, [](double x) { return std::cos(std::log(x)); });
    EXPECT_NEAR(m.mean, lateral_cf(1.0, g), 4.0 * m.std_error);
}

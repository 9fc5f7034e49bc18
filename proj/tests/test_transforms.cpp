#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "annulus_moduli/transforms.hpp"

using namespace annulus_moduli;

namespace {

constexpr double pi = std::numbers::pi;

DensityTable tabulate(const Grid& g, auto&& f) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
    return DensityTable(g.points(), std::move(v));
}

}  // namespace

TEST(Quadrature, StandardIntegrals) {
    EXPECT_NEAR(integrate_halfline([](double x) { return std::exp(-x); }).value, 1.0, 1e-12);
    EXPECT_NEAR(integrate_line([](double x) { return std::exp(-x * x); }).value, std::sqrt(pi), 1e-12);
    EXPECT_NEAR(integrate_interval([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0).value, 2.0, 1e-10);
    EXPECT_NEAR(gauss_panels([](double x) { return std::cos(x); }, 0.0, pi / 2.0, 4), 1.0, 1e-15);
}

TEST(Quadrature, DecayHintRescales) {
    QuadratureConfig c;
    c.tail_decay_hint = 1e-3;
    EXPECT_NEAR(integrate_halfline([](double x) { return std::exp(-1e-3 * x); }, c).value, 1e3, 1e-6);
}

TEST(Quadrature, ConfigValidation) {
    QuadratureConfig c;
    c.rel_tol = 0.5;
    EXPECT_THROW(integrate_halfline([](double x) { return std::exp(-x); }, c), DomainError);
    c = {};
    c.tail_decay_hint = -1.0;
    EXPECT_THROW(integrate_halfline([](double x) { return std::exp(-x); }, c), DomainError);
}

TEST(Quadrature, NonFiniteIntegrandIsReported) {
    EXPECT_THROW(integrate_interval([](double) { return NAN; }, 0.0, 1.0), AccuracyError);
}

TEST(Grid, Constructors) {
    const Grid u = Grid::uniform(0.0, 1.0, 101);
    EXPECT_EQ(u.size(), 101u);
    EXPECT_DOUBLE_EQ(u[50], 0.5);
    const Grid l = Grid::log_spaced(1e-3, 1e3, 129);
    EXPECT_NEAR(l[64], 1.0, 1e-12);
    const Grid g = Grid::graded(1e-6, 0.5, 10.0, 1.05, 0.01);
    EXPECT_DOUBLE_EQ(g.min(), 1e-6);
    EXPECT_DOUBLE_EQ(g.max(), 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
    EXPECT_THROW(Grid::uniform(0.0, 1.0, 10), DomainError);
    EXPECT_THROW(Grid::uniform(1.0, 0.0, 100), DomainError);
    EXPECT_THROW(Grid::log_spaced(0.0, 1.0, 100), DomainError);
    EXPECT_THROW(Grid::graded(1.0, 0.5, 10.0, 1.1, 0.1), DomainError);
}

TEST(DensityTable, MassInterpolationMoments) {
    const Grid g = Grid::uniform(0.0, 40.0, 40001);
    const DensityTable d = tabulate(g, [](double x) { return 2.0 * std::exp(-x); });
    EXPECT_NEAR(d.mass, 2.0, 1e-6);
    const DensityTable n = d.normalized();
    EXPECT_TRUE(n.is_normalized(1e-12));
    EXPECT_NEAR(n.mean(), 1.0, 1e-6);
    EXPECT_NEAR(n(1.00005), std::exp(-1.00005), 1e-7);
    EXPECT_EQ(n(-1.0), 0.0);
    EXPECT_EQ(n(41.0), 0.0);
    EXPECT_NEAR(n.upper_mass(2.0), std::exp(-2.0), 1e-6);
    EXPECT_THROW(DensityTable(g.points(), std::vector<double>(g.size(), -1.0)), DomainError);
}

TEST(InverseCdf, RoundTrip) {
    const Grid g = Grid::uniform(0.0, 40.0, 20001);
    const DensityTable d = tabulate(g, [](double x) { return std::exp(-x); }).normalized();
    const InverseCdf inv(d);
    for (double u : {1e-6, 0.1, 0.5, 0.9, 0.999}) {
        EXPECT_NEAR(inv.cdf(inv(u)), u, 1e-12);
        EXPECT_NEAR(inv(u), -std::log1p(-u), 1e-5 * (1.0 - std::log1p(-u)));
    }
    EXPECT_THROW(inv(0.0), DomainError);
    EXPECT_THROW(inverse_cdf(tabulate(g, [](double x) { return 3.0 * std::exp(-x); }), 0.5), DomainError);
}

TEST(CfInversion, GaussianAndLogistic) {
    const Grid g = Grid::uniform(-12.0, 12.0, 2401);
    const DensityTable n = cf_to_density([](double t) { return std::exp(-t * t / 2.0); }, g);
    for (std::size_t i = 0; i < g.size(); i += 150) EXPECT_NEAR(n.values[i], std::exp(-g[i] * g[i] / 2.0) / std::sqrt(2.0 * pi), 1e-13);
    // logistic law: cf pi t / sinh(pi t), density 1 / (4 cosh^2(s/2))
    const DensityTable l = cf_to_density([](double t) { return t == 0.0 ? 1.0 : pi * t / std::sinh(pi * t); }, g);
    for (std::size_t i = 0; i < g.size(); i += 150) {
        const double c = std::cosh(g[i] / 2.0);
        EXPECT_NEAR(l.values[i], 1.0 / (4.0 * c * c), 1e-13);
    }
    EXPECT_THROW(cf_to_density([](double) { return 2.0; }, g), DomainError);
}

TEST(TiltConvolve, ExponentialsGiveGamma) {
    const Grid g = Grid::graded(1e-8, 0.5, 60.0, 1.01, 0.005);
    const DensityTable e = tabulate(g, [](double x) { return std::exp(-x); }).normalized();
    const DensityTable c = tilt_convolve(e, e, 0.0);
    for (double x : {0.1, 1.0, 3.0, 8.0}) EXPECT_NEAR(c(x), x * std::exp(-x), 2e-5) << x;
    // a tilt of -1 turns Exp(1) into Exp(2); the sum is Gamma(2, 2)
    const DensityTable t = tilt_convolve(e, e, -1.0);
    for (double x : {0.1, 1.0, 3.0}) EXPECT_NEAR(t(x), 4.0 * x * std::exp(-2.0 * x), 1e-4) << x;
    EXPECT_NEAR(c.mean(), 2.0, 1e-4);
}

TEST(TiltConvolve, SymmetricInArguments) {
    const Grid g = Grid::graded(1e-8, 0.5, 40.0, 1.01, 0.01);
    const DensityTable a = tabulate(g, [](double x) { return std::exp(-x); }).normalized();
    const DensityTable b = tabulate(g, [](double x) { return x * x * std::exp(-2.0 * x); }).normalized();
    const DensityTable ab = tilt_convolve(a, b, 0.3), ba = tilt_convolve(b, a, 0.3);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(ab.values[i], ba.values[i], 1e-14);
    EXPECT_THROW(tilt_convolve(a, tabulate(Grid::uniform(0.0, 1.0, 100), [](double) { return 1.0; }), 0.0), DomainError);
}

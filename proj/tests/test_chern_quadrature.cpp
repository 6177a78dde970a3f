#include "hochheat/chern_quadrature.hpp"
#include "hochheat/dolbeault_spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hochheat;
using namespace hochheat::chern;

namespace {

const QuadratureGrid& grid3()
{
    static const QuadratureGrid g = make_grid(Scheme::gauss_legendre, 3);
    return g;
}

ChartForm transformed(const ChartForm& f, double angle, double shift_x, double shift_y)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {f.name + " (moved)", [f, c, s, shift_x, shift_y](double x, double y) {
                const double u = c * x - s * y - shift_x;
                const double v = s * x + c * y - shift_y;
                return f.density(u, v);
            }};
}

} // namespace

TEST(ChernIntegrals, FirstChernClasses)
{
    for (int m : {1, 2, 3}) {
        const auto v = integrate_chart(chern_form(m), grid3());
        EXPECT_NEAR(v.value, m, 1e-8) << "m=" << m;
        EXPECT_FALSE(v.flagged);
        EXPECT_LT(v.error_estimate, 1e-8);
    }
    EXPECT_NEAR(integrate_chart(fubini_study_volume(), grid3()).value, 1.0, 1e-8);
}

TEST(ChernIntegrals, ZeroForm)
{
    const auto v = integrate_chart(zero_form(), grid3());
    EXPECT_EQ(v.value, 0.0);
    EXPECT_FALSE(v.flagged);
}

TEST(ChernIntegrals, Todd)
{
    const auto v = integrate_todd_p1(grid3());
    EXPECT_NEAR(v.value, 1.0, 1e-8);
    EXPECT_FALSE(v.flagged);
}

TEST(ChernIntegrals, HalfResolutionWithinReportedError)
{
    const auto coarse = integrate_todd_p1(make_grid(Scheme::gauss_legendre, 1));
    EXPECT_LE(std::abs(coarse.value - 1.0), std::max(coarse.error_estimate, 1e-15));
    const auto fine = integrate_todd_p1(make_grid(Scheme::gauss_legendre, 2));
    EXPECT_LE(fine.error_estimate, coarse.error_estimate);
}

TEST(ChernIntegrals, ToddDensityEqualsChernOne)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    const auto todd = todd_form();
    const auto c1 = chern_form(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = coord(rng);
        const double y = coord(rng);
        const double a = todd.density(x, y);
        const double b = c1.density(x, y);
        EXPECT_NEAR(a, b, 4 * std::numeric_limits<double>::epsilon() * b);
        // independent closed form
        const double rho = 1 + x * x + y * y;
        EXPECT_NEAR(b, 1.0 / (std::numbers::pi * rho * rho), 4 * std::numeric_limits<double>::epsilon() * b);
    }
}

TEST(ChernQuadrature, ConvergesTenfoldPerLevel)
{
    for (Scheme scheme : {Scheme::gauss_legendre, Scheme::tanh_sinh}) {
        std::vector<double> values;
        for (unsigned level = 0; level <= 4; ++level)
            values.push_back(integrate_on(chern_form(1), make_grid(scheme, level)));
        for (std::size_t i = 2; i < values.size(); ++i) {
            const double prev = std::abs(values[i - 1] - values[i - 2]);
            const double now = std::abs(values[i] - values[i - 1]);
            if (prev < 1e-13)
                break; // rounding dominates from here on
            EXPECT_LE(now * 10, prev) << "level " << i;
        }
        EXPECT_NEAR(values.back(), 1.0, 1e-12);
    }
}

TEST(ChernQuadrature, GridStructure)
{
    for (Scheme scheme : {Scheme::gauss_legendre, Scheme::tanh_sinh}) {
        for (unsigned level = 0; level <= 5; ++level) {
            const auto g = make_grid(scheme, level);
            EXPECT_EQ(g.angular, 8u << level);
            ASSERT_EQ(g.radii.size(), g.radial_weights.size());
            for (std::size_t i = 0; i < g.radii.size(); ++i) {
                EXPECT_GT(g.radial_weights[i], 0.0);
                EXPECT_GE(g.radii[i], 0.0);
                EXPECT_TRUE(std::isfinite(g.radii[i]));
            }
            if (level > 0) {
                const auto coarser = make_grid(scheme, level - 1);
                EXPECT_NEAR(static_cast<double>(g.node_count()) / coarser.node_count(), 4.0, 0.6);
            }
        }
        EXPECT_EQ(make_grid(Scheme::gauss_legendre, 2).radii.size(), 32u);
    }
    EXPECT_THROW(make_grid(Scheme::gauss_legendre, 13), InvalidInput);
}

TEST(ChernQuadrature, RadialWeightsIntegrateKnownFunction)
{
    // int_0^inf r (1+r^2)^{-3} dr = 1/4
    const auto g = make_grid(Scheme::gauss_legendre, 3);
    double s = 0.0;
    for (std::size_t i = 0; i < g.radii.size(); ++i)
        s += g.radial_weights[i] * std::pow(1 + g.radii[i] * g.radii[i], -3);
    EXPECT_NEAR(s, 0.25, 1e-13);
}

TEST(ChernQuadrature, RotationAndShiftInvariance)
{
    const auto base = integrate_on(chern_form(1), grid3());
    for (double angle : {0.3, 1.1, 2.5})
        EXPECT_NEAR(integrate_on(transformed(chern_form(1), angle, 0, 0), grid3()), base, 1e-10);
    // Shifts move the peak off the grid centre, so use a finer grid.
    const auto fine = make_grid(Scheme::gauss_legendre, 5);
    for (auto [sx, sy] : {std::pair{0.2, -0.1}, std::pair{0.5, 0.5}})
        EXPECT_NEAR(integrate_on(transformed(chern_form(1), 0.4, sx, sy), fine), base, 1e-10);
}

TEST(ChernQuadrature, TanhSinhAgrees)
{
    const auto g = make_grid(Scheme::tanh_sinh, 3);
    EXPECT_NEAR(integrate_chart(chern_form(2), g).value, 2.0, 1e-8);
    EXPECT_NEAR(integrate_todd_p1(g).value, 1.0, 1e-8);
}

TEST(ChernProduct, Examples)
{
    const std::vector<ChartForm> todd3(3, todd_form());
    EXPECT_NEAR(integrate_product(todd3, grid3()).value, 1.0, 1e-6);
    const std::vector<ChartForm> mixed{chern_form(1), chern_form(3)};
    EXPECT_NEAR(integrate_product(mixed, grid3()).value, 3.0, 1e-6);
    const std::vector<ChartForm> one{chern_form(2)};
    const auto p = integrate_product(one, grid3());
    const auto c = integrate_chart(chern_form(2), grid3());
    EXPECT_EQ(p.value, c.value);
    EXPECT_EQ(p.error_estimate, c.error_estimate);
}

TEST(ChernProduct, FactorCountIsChecked)
{
    EXPECT_THROW(integrate_product(std::vector<ChartForm>{}, grid3()), InvalidInput);
    EXPECT_THROW(integrate_product(std::vector<ChartForm>(5, todd_form()), grid3()), InvalidInput);
}

TEST(ChernConsistency, ToddMatchesHarmonicSupertrace)
{
    const double index = dolbeault::harmonic_supertrace(dolbeault::build_model(0, 12), weyl::Element::one(1));
    EXPECT_NEAR(integrate_todd_p1(grid3()).value, index, 1e-6);
}

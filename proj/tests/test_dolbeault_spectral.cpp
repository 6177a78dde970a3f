#include "hochheat/dolbeault_spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace hochheat;
using namespace hochheat::dolbeault;

namespace {

// (1/pi) int z^p zbar^q rho^{-m} dx dy by brute force: trapezoid in the angle (exact for
// trigonometric polynomials) and composite Simpson in u = r^2/(1+r^2) for the radial part,
// where the integrand becomes u^{(p+q)/2} (1-u)^{m-(p+q)/2-2}.
double moment_oracle(int p, int q, int m)
{
    const int angular = 64;
    double ang_re = 0.0;
    for (int j = 0; j < angular; ++j)
        ang_re += std::cos((p - q) * 2 * std::numbers::pi * j / angular);
    ang_re *= 2 * std::numbers::pi / angular;
    if (std::abs(ang_re) < 1e-12)
        return 0.0;
    const double s = 0.5 * (p + q);
    const int n = 4000;
    const double h = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = i * h;
        const double f = std::pow(u, s) * std::pow(1.0 - u, m - s - 2);
        acc += f * (i == 0 || i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
    }
    const double radial = acc * h / 3.0; // int_0^inf r^{p+q} rho^{-m} r dr = radial / 2
    return ang_re / std::numbers::pi * radial / 2.0;
}

struct Index {
    int a;
    int b;
};

// Trial basis z^a zbar^b rho^{-rho}, a <= a_max, b <= b_max, listed by charge a - b and then by b.
std::vector<Index> oracle_basis(int a_max, int b_max)
{
    std::vector<Index> out;
    for (int q = -b_max; q <= a_max; ++q)
        for (int b = 0; b <= b_max; ++b)
            if (q + b >= 0 && q + b <= a_max)
                out.push_back({q + b, b});
    return out;
}

std::vector<EigenGroup> closed_form_spectrum(int k, int n, int j_min)
{
    std::vector<EigenGroup> out;
    for (int j = j_min; j <= n; ++j)
        out.push_back({static_cast<double>(j) * (j + k + 1), static_cast<unsigned>(k + 1 + 2 * j)});
    return out;
}

void expect_groups_near(const std::vector<EigenGroup>& got, const std::vector<EigenGroup>& want, double tol)
{
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_NEAR(got[i].value, want[i].value, tol * std::max(1.0, want[i].value)) << "group " << i;
        EXPECT_EQ(got[i].multiplicity, want[i].multiplicity) << "group " << i;
    }
}

std::filesystem::path fresh_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("hochheat_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

const weyl::Element& euler()
{
    static const weyl::Element e = weyl::parse_element("z1*d1");
    return e;
}

} // namespace

TEST(DolbeaultMoments, MatchNumericOracle)
{
    for (int p = 0; p <= 6; ++p)
        for (int m = p + 2; m <= p + 10; ++m) {
            const auto v = chart_moment(p, p, m);
            ASSERT_TRUE(v.has_value());
            EXPECT_NEAR(to_double(*v), moment_oracle(p, p, m), 1e-9 * to_double(*v)) << p << "," << m;
            EXPECT_NEAR(to_double(*v), std::beta(p + 1.0, m - p - 1.0), 1e-12) << p << "," << m;
        }
}

TEST(DolbeaultMoments, OffDiagonalVanishAndDivergenceIsReported)
{
    EXPECT_EQ(*chart_moment(1, 2, 5), 0);
    EXPECT_NEAR(moment_oracle(1, 2, 5), 0.0, 1e-12);
    EXPECT_FALSE(chart_moment(3, 3, 4).has_value());
    EXPECT_FALSE(chart_moment(0, 0, 1).has_value());
    EXPECT_EQ(*chart_moment(0, 0, 2), 1); // unit total volume
}

TEST(DolbeaultGram, MatchesIndependentAssembly)
{
    for (int k : {0, 1, 3}) {
        const int n = std::max(4, k + 2);
        const auto model = build_model(k, n);
        const auto g = model.gram(0);
        const auto basis = oracle_basis(n + k, n);
        ASSERT_EQ(g.size(), basis.size());
        ASSERT_EQ(model.dimension(0), (n + k + 1) * (n + 1));
        const int m = 2 * n + k + 2; // rho^{-N} twice, fiber weight rho^{-k}, area rho^{-2}
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j) {
                const int p = basis[i].a + basis[j].b;
                const int q = basis[i].b + basis[j].a;
                EXPECT_NEAR(to_double(g[i][j]), moment_oracle(p, q, m), 1e-10) << i << "," << j;
                EXPECT_EQ(g[i][j], g[j][i]);
            }
        const auto g1 = model.gram(1);
        const auto basis1 = oracle_basis(n + k + 1, n - 1);
        ASSERT_EQ(g1.size(), basis1.size());
        const int m1 = 2 * (n + 1) + k;
        for (std::size_t i = 0; i < basis1.size(); ++i)
            for (std::size_t j = 0; j < basis1.size(); ++j)
                EXPECT_NEAR(to_double(g1[i][j]),
                            moment_oracle(basis1[i].a + basis1[j].b, basis1[i].b + basis1[j].a, m1), 1e-10);
    }
}

TEST(DolbeaultSpectrum, HarmonicDimensions)
{
    EXPECT_EQ(build_model(0, 8).harmonic_dim(0), 1u);
    EXPECT_EQ(build_model(0, 8).harmonic_dim(1), 0u);
    EXPECT_EQ(build_model(3, 10).harmonic_dim(0), 4u);
    for (int k = 0; k <= 6; ++k) {
        const auto m = build_model(k, k + 4);
        EXPECT_EQ(m.harmonic_dim(0), static_cast<unsigned>(k + 1)) << "k=" << k;
        EXPECT_EQ(m.harmonic_dim(1), 0u) << "k=" << k;
    }
}

TEST(DolbeaultSpectrum, MatchesClosedForm)
{
    // Delta on O(k) over the unit-volume sphere: eigenvalue j(j+k+1) with multiplicity k+1+2j.
    for (int k : {0, 1, 2, 4}) {
        const int n = 8;
        const auto s = build_model(k, n).summary();
        expect_groups_near(s.eigs0, closed_form_spectrum(k, n, 0), 1e-9);
        expect_groups_near(s.eigs1, closed_form_spectrum(k, n, 1), 1e-9);
    }
}

TEST(DolbeaultSpectrum, EigenvaluesAreNonNegativeAndSorted)
{
    const auto m = build_model(2, 10);
    for (int deg : {0, 1}) {
        const auto& ev = m.eigenvalues(deg);
        ASSERT_EQ(static_cast<int>(ev.size()), m.dimension(deg));
        EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
        EXPECT_GE(ev.front(), 0.0);
    }
}

TEST(DolbeaultSpectrum, SupersymmetricPairing)
{
    for (int k = 0; k <= 4; ++k) {
        const auto m = build_model(k, 12);
        const auto l0 = nonzero_eigenvalues(m, 0);
        const auto l1 = nonzero_eigenvalues(m, 1);
        ASSERT_GE(l0.size(), 10u);
        ASSERT_GE(l1.size(), 10u);
        for (std::size_t i = 0; i < 10; ++i)
            EXPECT_NEAR(l0[i], l1[i], 1e-6) << "k=" << k << " i=" << i;
    }
}

TEST(DolbeaultSpectrum, MonotoneRefinement)
{
    for (int k : {0, 2}) {
        std::vector<double> previous;
        for (int n : {8, 10, 12}) {
            const std::vector<double> ev = build_model(k, n).eigenvalues(0);
            if (!previous.empty()) {
                for (std::size_t i = 0; i < 30; ++i)
                    EXPECT_LE(ev[i], previous[i] + 1e-9) << "k=" << k << " N=" << n << " i=" << i;
            }
            previous = ev;
        }
    }
}

TEST(DolbeaultHeat, McKeanSingerFlatness)
{
    for (int k = 0; k <= 4; ++k) {
        const auto m = build_model(k, 12);
        double lo = 1e300;
        double hi = -1e300;
        for (int i = 0; i < 20; ++i) {
            const double t = 0.2 + (5.0 - 0.2) * i / 19.0;
            const double v = heat_supertrace(m, t);
            EXPECT_NEAR(v, k + 1.0, 1e-3) << "k=" << k << " t=" << t;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_LE(hi - lo, 1e-3) << "k=" << k;
    }
}

TEST(DolbeaultHeat, LongTimeLimitIsIndex)
{
    const auto m = build_model(3, 10);
    EXPECT_NEAR(heat_supertrace(m, 50.0), 4.0, 1e-12);
    EXPECT_THROW(heat_supertrace(m, 0.0), InvalidInput);
    EXPECT_THROW(heat_supertrace(m, -1.0), InvalidInput);
}

TEST(DolbeaultHarmonic, Supertraces)
{
    EXPECT_NEAR(harmonic_supertrace(build_model(0, 12), weyl::Element::one(1)), 1.0, 1e-8);
    EXPECT_NEAR(harmonic_supertrace(build_model(2, 12), weyl::Element::one(1)), 3.0, 1e-8);
    EXPECT_NEAR(harmonic_supertrace(build_model(2, 12), euler()), 3.0, 1e-6);
    for (int k = 0; k <= 4; ++k) {
        const auto m = build_model(k, 12);
        EXPECT_NEAR(harmonic_supertrace(m, weyl::Element::one(1)), k + 1.0, 1e-8) << "k=" << k;
        EXPECT_NEAR(harmonic_supertrace(m, euler()), k * (k + 1) / 2.0, 1e-6) << "k=" << k;
    }
}

TEST(DolbeaultHarmonic, TraceOnHolomorphicSections)
{
    // On span{1, z, ..., z^k}: z^2 d^2 acts diagonally by j(j-1); z raises degree so has zero trace.
    const int k = 4;
    const auto m = build_model(k, 12);
    double expect = 0.0;
    for (int j = 0; j <= k; ++j)
        expect += j * (j - 1);
    EXPECT_NEAR(harmonic_supertrace(m, weyl::parse_element("z1^2*d1^2")), expect, 1e-6);
    EXPECT_NEAR(harmonic_supertrace(m, weyl::parse_element("z1")), 0.0, 1e-8);
    EXPECT_NEAR(harmonic_supertrace(m, weyl::parse_element("2*z1*d1 + 3")), k * (k + 1) + 3.0 * (k + 1), 1e-6);
}

TEST(DolbeaultLimit, IdentityIsConstant)
{
    // str(e^{-t Delta}) is t-independent, so the series sits at the index for every t.
    const auto m = build_model(0, 12);
    const auto s = limit_supertrace(m, weyl::Element::one(1), {1, 2, 4, 8});
    ASSERT_EQ(s.series.size(), 4u);
    for (double v : s.series)
        EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_NEAR(s.limit_estimate, 1.0, 1e-12);
}

TEST(DolbeaultLimit, EulerOperatorConvergesToHarmonicValue)
{
    for (int k = 0; k <= 4; ++k) {
        const auto m = build_model(k, 12);
        const double target = harmonic_supertrace(m, euler());
        const auto s = limit_supertrace(m, euler(), {0.5, 1, 2, 5, 10});
        EXPECT_NEAR(s.limit_estimate, target, 1e-6) << "k=" << k;
        for (std::size_t i = 1; i < s.series.size(); ++i)
            EXPECT_LE(std::abs(s.series[i] - target), std::abs(s.series[i - 1] - target) + 1e-12);
    }
}

TEST(DolbeaultLimit, Errors)
{
    const auto m = build_model(1, 6);
    EXPECT_THROW(limit_supertrace(m, euler(), {}), InvalidInput);
    EXPECT_THROW(limit_supertrace(m, euler(), {2, 1}), InvalidInput);
    EXPECT_THROW(limit_supertrace(m, euler(), {0, 1}), InvalidInput);
}

TEST(DolbeaultErrors, TruncationAndDegree)
{
    try {
        build_model(3, 4);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("--trunc"), std::string::npos);
    }
    try {
        build_model(-1, 8);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("--k"), std::string::npos);
    }
}

TEST(DolbeaultErrors, OperatorEscapesTruncation)
{
    const auto m = build_model(0, 4);
    EXPECT_THROW(harmonic_supertrace(m, weyl::parse_element("z1^5")), EscapesTruncation);
    EXPECT_THROW(harmonic_supertrace(m, weyl::parse_element("z2")), InvalidInput);
    // z * d/dz applied to rho^{-N} sections needs rho-derivatives; moderate degrees stay inside
    EXPECT_NO_THROW(harmonic_supertrace(m, weyl::parse_element("z1^2*d1^2")));
}

TEST(DolbeaultErrors, RawGramConditioning)
{
    BuildOptions raw;
    raw.orthogonalization = Orthogonalization::none;
    EXPECT_THROW(build_model(2, 12, raw), IllConditioned);
    const auto small = build_model(1, 3, raw);
    EXPECT_EQ(small.summary().convention, convention_raw);
    expect_groups_near(small.summary().eigs0, closed_form_spectrum(1, 3, 0), 1e-6);
    EXPECT_NEAR(harmonic_supertrace(small, euler()), 1.0, 1e-6);
}

TEST(DolbeaultCache, RoundTrip)
{
    const auto dir = fresh_dir("cache");
    const auto built = build_model(2, 8).summary();
    const auto first = spectrum(2, 8, dir);
    EXPECT_EQ(first, built);
    const auto file = cache_path(dir, 2, 8, convention_exact);
    ASSERT_TRUE(std::filesystem::exists(file));
    const auto loaded = load_cached(dir, 2, 8);
    ASSERT_TRUE(loaded.has_value());
    EXPECT_EQ(*loaded, built);
    EXPECT_EQ(spectrum(2, 8, dir), built);
    EXPECT_EQ(summary_from_json(nlohmann::json::parse(to_json(built).dump())), built);

    // keyed by k, N and convention
    EXPECT_FALSE(load_cached(dir, 2, 9).has_value());
    EXPECT_FALSE(load_cached(dir, 2, 8, convention_raw).has_value());

    // corrupt entries are recomputed
    std::ofstream(file) << "{ not json";
    EXPECT_FALSE(load_cached(dir, 2, 8).has_value());
    EXPECT_EQ(spectrum(2, 8, dir), built);
    EXPECT_TRUE(load_cached(dir, 2, 8).has_value());

    // parameters are validated before the cache is consulted
    EXPECT_THROW(spectrum(2, 3, dir), InvalidInput);
    std::filesystem::remove_all(dir);
}

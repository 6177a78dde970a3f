#pragma once

// Integration of top-degree densities over the affine chart R^2 of P^1, and Fubini products
// over (P^1)^n. The chart is compactified radially with r = tan(theta/2), theta in [0, pi), so
// the whole plane is covered without a cutoff; the missing point at infinity has measure zero.

#include "hochheat/numeric.hpp"
#include "hochheat/rational.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace hochheat::chern {

/// f(x, y) dx ^ dy on the affine chart.
struct ChartForm {
    std::string name;
    std::function<double(double, double)> density;
};

/// First Chern form of O(m): (m / pi) (1 + x^2 + y^2)^{-2}.
inline ChartForm chern_form(double m)
{
    return {"chern(O(" + std::to_string(static_cast<long long>(m)) + "))", [m](double x, double y) {
                const double rho = 1.0 + x * x + y * y;
                return m / (std::numbers::pi * rho * rho);
            }};
}

/// Degree-2 Todd form of T P^1 = O(2): half the Chern form of O(2).
inline ChartForm todd_form()
{
    const ChartForm c2 = chern_form(2.0);
    return {"todd(T)", [c2](double x, double y) { return 0.5 * c2.density(x, y); }};
}

/// Fubini-Study area form normalized to total volume 1 (equal to the Chern form of O(1)).
inline ChartForm fubini_study_volume()
{
    ChartForm f = chern_form(1.0);
    f.name = "fubini-study volume";
    return f;
}

inline ChartForm zero_form()
{
    return {"zero", [](double, double) { return 0.0; }};
}

enum class Scheme { gauss_legendre, tanh_sinh };

/// Radial nodes are stored already mapped to r in [0, inf) with the Jacobian folded into the weights.
struct QuadratureGrid {
    Scheme scheme = Scheme::gauss_legendre;
    unsigned level = 0;
    std::vector<double> radii;
    std::vector<double> radial_weights; ///< include r dr and the tan substitution
    unsigned angular = 0;               ///< uniform angular nodes

    [[nodiscard]] std::size_t node_count() const { return radii.size() * angular; }
};

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(unsigned n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (unsigned i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (unsigned k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = z;
        for (unsigned k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
}

inline void push_radial(QuadratureGrid& g, double theta, double complement, double w_theta)
{
    // r = tan(theta/2) = cot(complement/2); dr/dtheta = (1 + r^2)/2
    const double r = theta <= std::numbers::pi / 2 ? std::tan(theta / 2) : 1.0 / std::tan(complement / 2);
    if (!std::isfinite(r) || r > 1e100)
        return;
    g.radii.push_back(r);
    g.radial_weights.push_back(w_theta * 0.5 * (1.0 + r * r) * r);
}

} // namespace detail

/// Grid at refinement `level`; each level doubles the radial and angular node counts.
inline QuadratureGrid make_grid(Scheme scheme, unsigned level)
{
    if (level > 12)
        throw InvalidInput("--levels: quadrature level above 12 is not supported");
    QuadratureGrid g;
    g.scheme = scheme;
    g.level = level;
    g.angular = 8u << level;
    const double pi = std::numbers::pi;
    if (scheme == Scheme::gauss_legendre) {
        std::vector<double> x, w;
        detail::gauss_legendre(8u << level, x, w);
        for (std::size_t i = 0; i < x.size(); ++i)
            detail::push_radial(g, pi / 2 * (1 + x[i]), pi / 2 * (1 - x[i]), pi / 2 * w[i]);
    } else {
        const double h = 0.5 / static_cast<double>(1u << level);
        // symmetric tanh-sinh on [-1, 1]; complements computed without cancellation
        for (int j = 0;; ++j) {
            const double t = j * h;
            const double u = pi / 2 * std::sinh(t);
            const double cu = std::cosh(u);
            const double w = h * pi / 2 * std::cosh(t) / (cu * cu);
            if (w < 1e-20 && j > 0)
                break;
            const double one_minus_x = 2.0 / (1.0 + std::exp(2 * u)); // 1 - tanh(u)
            const double x = std::tanh(u);
            detail::push_radial(g, pi / 2 * (1 + x), pi / 2 * one_minus_x, pi / 2 * w);
            if (j > 0)
                detail::push_radial(g, pi / 2 * one_minus_x, pi / 2 * (1 + x), pi / 2 * w);
        }
    }
    return g;
}

/// Single quadrature evaluation on one grid.
inline double integrate_on(const ChartForm& form, const QuadratureGrid& grid)
{
    const double dphi = 2 * std::numbers::pi / grid.angular;
    numeric::CompensatedSum total;
    for (std::size_t i = 0; i < grid.radii.size(); ++i) {
        const double r = grid.radii[i];
        numeric::CompensatedSum ring;
        for (unsigned j = 0; j < grid.angular; ++j) {
            const double phi = j * dphi;
            ring.add(form.density(r * std::cos(phi), r * std::sin(phi)));
        }
        total.add(grid.radial_weights[i] * dphi * ring.value());
    }
    return total.value();
}

struct ChartIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
    bool flagged = false;
};

/// Value on `grid`, error estimated from the next coarser level (or the next finer one at level 0).
/// Flagged when the level-to-level change grows instead of shrinking.
inline ChartIntegral integrate_chart(const ChartForm& form, const QuadratureGrid& grid)
{
    ChartIntegral out;
    out.value = integrate_on(form, grid);
    const double floor = 1e-14 * std::max(1.0, std::abs(out.value));
    if (grid.level == 0) {
        out.error_estimate = std::abs(integrate_on(form, make_grid(grid.scheme, 1)) - out.value);
        return out;
    }
    const double coarse = integrate_on(form, make_grid(grid.scheme, grid.level - 1));
    out.error_estimate = std::abs(out.value - coarse);
    if (grid.level >= 2) {
        const double coarser = integrate_on(form, make_grid(grid.scheme, grid.level - 2));
        const double previous = std::abs(coarse - coarser);
        out.flagged = out.error_estimate > floor && out.error_estimate > previous;
    }
    return out;
}

/// int td(T P^1) = (1/2) int c_1(O(2)).
inline ChartIntegral integrate_todd_p1(const QuadratureGrid& grid)
{
    return integrate_chart(todd_form(), grid);
}

/// Fubini product of the factor integrals over (P^1)^n, 1 <= n <= 4.
inline ChartIntegral integrate_product(std::span<const ChartForm> factors, const QuadratureGrid& grid)
{
    if (factors.empty() || factors.size() > 4)
        throw InvalidInput("--product: number of factors must be between 1 and 4");
    ChartIntegral out{1.0, 0.0, false};
    double relative = 0.0;
    for (const auto& f : factors) {
        const ChartIntegral v = integrate_chart(f, grid);
        out.value *= v.value;
        relative += v.value != 0.0 ? v.error_estimate / std::abs(v.value) : v.error_estimate;
        out.flagged = out.flagged || v.flagged;
    }
    out.error_estimate = relative * std::abs(out.value);
    if (factors.size() == 1)
        return integrate_chart(factors.front(), grid);
    return out;
}

} // namespace hochheat::chern

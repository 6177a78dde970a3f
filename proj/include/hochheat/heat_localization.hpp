#pragma once

// Heat kernels on flat circles of circumference L, as a Gaussian image sum and as a Fourier
// spectral sum (equal by Poisson summation), and localized heat traces tr(phi e^{-t Delta}) for
// compactly supported multiplication operators phi.

#include "hochheat/numeric.hpp"
#include "hochheat/rational.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace hochheat::localization {

/// Truncation target for the image and spectral sums.
inline constexpr double tail_target = 1e-15;

struct CircleGeometry {
    double length = 1.0;

    explicit CircleGeometry(double l) : length(l)
    {
        if (!(l > 0) || !std::isfinite(l))
            throw InvalidInput("circle circumference must be positive (got " + std::to_string(l) + ")");
    }
};

/// phi(x) = (1 - ((x - c)/rho)^2)^m on |x - c| < rho, zero elsewhere.
struct BumpFunction {
    double center = 0.0;
    double radius = 0.0;
    unsigned exponent = 2;

    BumpFunction(double c, double rho, unsigned m) : center(c), radius(rho), exponent(m)
    {
        if (!(rho > 0) || !std::isfinite(rho))
            throw InvalidInput("--bump: radius must be positive");
        if (m < 2)
            throw InvalidInput("--bump: exponent must be at least 2");
        if (!std::isfinite(c))
            throw InvalidInput("--bump: center must be finite");
    }

    [[nodiscard]] double operator()(double x) const
    {
        const double u = (x - center) / radius;
        return std::abs(u) < 1.0 ? std::pow(1.0 - u * u, exponent) : 0.0;
    }

    /// rho * int_{-1}^{1} (1 - u^2)^m du = rho * 2^{2m+1} (m!)^2 / (2m+1)!
    [[nodiscard]] double integral() const
    {
        double v = 2.0;
        for (unsigned j = 1; j <= exponent; ++j)
            v *= (2.0 * j) / (2.0 * j + 1.0);
        return radius * v;
    }
};

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0; ///< bound on everything dropped by the truncation
    unsigned terms = 0;      ///< largest |n| (or |j|) kept
};

namespace detail {

/// sum_{n >= 1} e^{-a n^2}, truncated adaptively; `scale` multiplies the tail bound target check.
/// The bound on the dropped tail uses e^{-a n^2} <= e^{-a (M+1)^2} e^{-a (2M+3)(n-M-1)}.
inline SeriesValue gaussian_tail_sum(double a, double scale, std::optional<unsigned> forced_terms = std::nullopt)
{
    SeriesValue out;
    numeric::CompensatedSum s;
    auto tail_after = [a](unsigned m) {
        const double first = std::exp(-a * (m + 1.0) * (m + 1.0));
        const double ratio = std::exp(-a * (2.0 * m + 3.0));
        return ratio < 1.0 ? first / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    };
    unsigned m = 0;
    while (true) {
        if (forced_terms ? m >= *forced_terms : scale * tail_after(m) < tail_target)
            break;
        ++m;
        s.add(std::exp(-a * static_cast<double>(m) * m));
        if (m > 100000000u)
            throw Error("gaussian tail sum failed to converge");
    }
    out.value = s.value();
    out.tail_bound = tail_after(m);
    out.terms = m;
    return out;
}

} // namespace detail

/// p_t(x, x) = (4 pi t)^{-1/2} sum_n e^{-(nL)^2/(4t)}, independent of x.
inline SeriesValue circle_heat_diagonal_images(const CircleGeometry& g, double t, std::optional<unsigned> terms = std::nullopt)
{
    if (!(t > 0))
        throw InvalidInput("heat kernel time t must be positive");
    const double pref = 1.0 / std::sqrt(4 * std::numbers::pi * t);
    const auto tail = detail::gaussian_tail_sum(g.length * g.length / (4 * t), 2 * pref, terms);
    return {pref * (1.0 + 2.0 * tail.value), 2 * pref * tail.tail_bound, tail.terms};
}

/// p_t(x, x) = (1/L) sum_j e^{-4 pi^2 j^2 t / L^2}.
inline SeriesValue circle_heat_diagonal_spectral(const CircleGeometry& g, double t, std::optional<unsigned> terms = std::nullopt)
{
    if (!(t > 0))
        throw InvalidInput("heat kernel time t must be positive");
    const double pi = std::numbers::pi;
    const double inv_l = 1.0 / g.length;
    const auto tail = detail::gaussian_tail_sum(4 * pi * pi * t * inv_l * inv_l, 2 * inv_l, terms);
    return {inv_l * (1.0 + 2.0 * tail.value), 2 * inv_l * tail.tail_bound, tail.terms};
}

/// On-diagonal heat kernel; uses whichever representation needs fewer terms.
inline double circle_heat_diagonal(const CircleGeometry& g, double t)
{
    const double pi = std::numbers::pi;
    // image terms decay like e^{-L^2 n^2/4t}, spectral like e^{-4 pi^2 t j^2/L^2}
    return g.length * g.length / (4 * t) >= 4 * pi * pi * t / (g.length * g.length)
               ? circle_heat_diagonal_images(g, t).value
               : circle_heat_diagonal_spectral(g, t).value;
}

inline void require_localized(const CircleGeometry& g, const BumpFunction& phi)
{
    if (!(2 * phi.radius < g.length))
        throw InvalidInput("bump support of width " + std::to_string(2 * phi.radius) +
                           " covers the whole circle of length " + std::to_string(g.length));
    if (phi.center < 0 || !(phi.center < g.length))
        throw InvalidInput("bump center must lie in [0, L)");
}

/// tr(phi e^{-t Delta}) = int phi(x) p_t(x,x) dx = (int phi) p_t(x,x) on the flat circle.
inline double localized_trace(const CircleGeometry& g, const BumpFunction& phi, double t)
{
    require_localized(g, phi);
    return phi.integral() * circle_heat_diagonal(g, t);
}

/// tr(phi e^{-t Delta}) - (1/L) int phi, from the spectral tail so it stays accurate when tiny.
inline double long_time_deviation(const CircleGeometry& g, const BumpFunction& phi, double t)
{
    require_localized(g, phi);
    if (!(t > 0))
        throw InvalidInput("heat kernel time t must be positive");
    const double pi = std::numbers::pi;
    const auto tail = detail::gaussian_tail_sum(4 * pi * pi * t / (g.length * g.length), 2 / g.length);
    return phi.integral() * 2.0 / g.length * tail.value;
}

struct LocalizationComparison {
    double delta = 0.0;
    double bound = 0.0;
    [[nodiscard]] bool within_bound() const { return delta <= bound; }
};

/// |tr_{L1}(phi e^{-t Delta}) - tr_{L2}(phi e^{-t Delta})| against the image-sum tail bound
/// (int phi) 2 (4 pi t)^{-1/2} sum_{n>=1} e^{-(n min(L1,L2))^2/(4t)}.
/// Both traces share the n = 0 image term, so delta is evaluated from the n != 0 images directly.
inline LocalizationComparison compare_localization(double l1, double l2, const BumpFunction& phi, double t)
{
    const CircleGeometry g1(l1);
    const CircleGeometry g2(l2);
    require_localized(g1, phi);
    require_localized(g2, phi);
    if (!(t > 0))
        throw InvalidInput("heat kernel time t must be positive");
    const double pref = 2.0 / std::sqrt(4 * std::numbers::pi * t);
    const double mass = phi.integral();
    const auto s1 = detail::gaussian_tail_sum(l1 * l1 / (4 * t), pref * mass);
    const auto s2 = detail::gaussian_tail_sum(l2 * l2 / (4 * t), pref * mass);
    const double lmin = std::min(l1, l2);
    const auto smin = detail::gaussian_tail_sum(lmin * lmin / (4 * t), pref * mass);
    LocalizationComparison out;
    out.delta = mass * pref * std::abs(s1.value - s2.value);
    out.bound = mass * pref * smin.value;
    return out;
}

} // namespace hochheat::localization

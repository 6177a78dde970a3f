// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Each criterion also has a wall-clock budget that counts towards its verdict.

#include "hochheat/chern_quadrature.hpp"
#include "hochheat/dolbeault_spectral.hpp"
#include "hochheat/heat_localization.hpp"
#include "hochheat/hochschild.hpp"
#include "hochheat/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>

using namespace hochheat;
using hochschild::TensorChain;
using weyl::Element;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

int failures = 0;

void criterion(int number, const char* title, double budget_s, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_s;
    const bool pass = o.ok && in_time;
    if (!pass)
        ++failures;
    std::printf("[%s] %2d: %s (%.2fs of %.0fs)%s%s\n", pass ? "PASS" : "FAIL", number, title, secs, budget_s,
                o.detail.empty() ? "" : " -- ", o.detail.c_str());
    if (!in_time)
        std::printf("       over the time budget\n");
    std::fflush(stdout);
}

int cycle_sign(const std::vector<unsigned>& perm)
{
    std::vector<bool> seen(perm.size(), false);
    unsigned cycles = 0;
    for (unsigned i = 0; i < perm.size(); ++i) {
        if (seen[i])
            continue;
        ++cycles;
        for (unsigned j = i; !seen[j]; j = perm[j])
            seen[j] = true;
    }
    return (perm.size() - cycles) % 2 == 0 ? 1 : -1;
}

TensorChain permutation_oracle(unsigned n)
{
    std::vector<Element> gens;
    for (unsigned i = 1; i <= n; ++i) {
        gens.push_back(Element::d(n, i));
        gens.push_back(Element::z(n, i));
    }
    std::vector<unsigned> perm(2 * n);
    std::iota(perm.begin(), perm.end(), 0u);
    TensorChain out(n);
    do {
        std::vector<Element> word{Element::one(n)};
        for (unsigned i : perm)
            word.push_back(gens[i]);
        out.add(TensorChain::from_word(cycle_sign(perm), word));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

std::vector<double> linear_grid(double a, double b, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(a + (b - a) * i / (n - 1));
    return g;
}

std::vector<double> log_grid(double a, double b, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    return g;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

int main()
{
    using namespace hochschild;

    criterion(1, "b(omega_2n) = 0 exactly, n = 1..3", 5, [] {
        for (unsigned n = 1; n <= 3; ++n) {
            const auto b = hochschild_b(omega_cycle(n));
            if (!b.terms().empty())
                return Outcome{false, "n=" + std::to_string(n) + " leaves " + std::to_string(b.size()) + " terms"};
        }
        return Outcome{true, ""};
    });

    criterion(2, "omega_2 sh omega_2 = omega_4 and omega_2 sh omega_4 = omega_6", 10, [] {
        const auto w2 = omega_cycle(1);
        const auto w4 = omega_cycle(2);
        if (shuffle_product(w2, w2) != w4)
            return Outcome{false, "omega_2 sh omega_2 differs"};
        if (shuffle_product(w2, w4) != omega_cycle(3))
            return Outcome{false, "omega_2 sh omega_4 differs"};
        return Outcome{true, ""};
    });

    criterion(3, "normalize(omega_2n) = signed permutation sum, n <= 3", 5, [] {
        for (unsigned n = 1; n <= 3; ++n)
            if (normalize(omega_cycle(n)) != permutation_oracle(n))
                return Outcome{false, "n=" + std::to_string(n) + " differs"};
        return Outcome{true, ""};
    });

    criterion(4, "hkr(normalize(omega_2n)) = dy1^dz1^...^dyn^dzn, coefficient 1", 5, [] {
        for (unsigned n = 1; n <= 3; ++n) {
            const auto f = hkr_symbol(normalize(omega_cycle(n)));
            if (f.terms().size() != 1)
                return Outcome{false, "n=" + std::to_string(n) + ": not a single term"};
            const auto& [key, coeff] = *f.terms().begin();
            const std::uint64_t mask = (std::uint64_t{1} << (2 * n)) - 1;
            const bool constant = std::all_of(key.poly.begin(), key.poly.end(), [](unsigned e) { return e == 0; });
            if (key.wedge != mask || !constant || coeff != 1)
                return Outcome{false, "n=" + std::to_string(n) + ": got " + to_json(f).dump()};
        }
        return Outcome{true, ""};
    });

    criterion(5, "b^2 = 0, b'^2 = 0, shuffle Leibniz, b(1-tau) = (1-tau)b', b'N = Nb, d^2 = 0 (100 chains each)", 20, [] {
        random::Engine rng(20240611);
        std::uniform_int_distribution<unsigned> deg(0, 4);
        std::uniform_int_distribution<unsigned> small(0, 2);
        std::uniform_int_distribution<unsigned> col(0, 5);
        const random::ElementShape shape{2, 2, 2};
        for (int i = 0; i < 100; ++i) {
            const auto c = random::random_chain(rng, shape, deg(rng));
            if (!hochschild_b(hochschild_b(c)).is_zero())
                return Outcome{false, "b^2 != 0"};
            if (!bar_bprime(bar_bprime(c)).is_zero())
                return Outcome{false, "b'^2 != 0"};
            if (hochschild_b(one_minus_tau(c)) != one_minus_tau(bar_bprime(c)))
                return Outcome{false, "b(1-tau) != (1-tau)b'"};
            if (bar_bprime(norm_N(c)) != norm_N(hochschild_b(c)))
                return Outcome{false, "b'N != Nb"};

            const unsigned p = small(rng);
            const auto x = random::random_chain(rng, {1, 2, 2}, p);
            const auto y = random::random_chain(rng, {1, 2, 2}, small(rng));
            auto rhs = shuffle_product(hochschild_b(x), y);
            rhs.add(shuffle_product(x, hochschild_b(y)), p % 2 == 0 ? 1 : -1);
            if (hochschild_b(shuffle_product(x, y)) != rhs)
                return Outcome{false, "Leibniz fails"};

            TsyganColumnVector v(2);
            const unsigned q = col(rng);
            v.add(q, random::random_chain(rng, shape, deg(rng)));
            v.add(q + 1, random::random_chain(rng, shape, deg(rng)));
            if (!tsygan_d(tsygan_d(v)).is_zero())
                return Outcome{false, "tsygan d^2 != 0"};
        }
        return Outcome{true, ""};
    });

    criterion(6, "P1 heat supertrace = k+1 (1e-3) and flat (1e-3), k = 0..4, N = 12", 30, [] {
        double worst = 0.0;
        double worst_flat = 0.0;
        for (int k = 0; k <= 4; ++k) {
            const auto m = dolbeault::build_model(k, 12);
            double lo = 1e300;
            double hi = -1e300;
            for (double t : linear_grid(0.2, 5.0, 20)) {
                const double v = dolbeault::heat_supertrace(m, t);
                worst = std::max(worst, std::abs(v - (k + 1)));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            worst_flat = std::max(worst_flat, hi - lo);
        }
        return Outcome{worst <= 1e-3 && worst_flat <= 1e-3,
                       "max |str - (k+1)| = " + fmt(worst) + ", max flatness = " + fmt(worst_flat)};
    });

    criterion(7, "harmonic supertraces: str(1) = k+1 (1e-8), str(z d/dz) = k(k+1)/2 (1e-6), k <= 4", 10, [] {
        double e1 = 0.0;
        double e2 = 0.0;
        const auto euler = weyl::parse_element("z1*d1");
        for (int k = 0; k <= 4; ++k) {
            const auto m = dolbeault::build_model(k, 12);
            e1 = std::max(e1, std::abs(dolbeault::harmonic_supertrace(m, Element::one(1)) - (k + 1)));
            e2 = std::max(e2, std::abs(dolbeault::harmonic_supertrace(m, euler) - k * (k + 1) / 2.0));
        }
        return Outcome{e1 <= 1e-8 && e2 <= 1e-6, "errors " + fmt(e1) + ", " + fmt(e2)};
    });

    criterion(8, "limit_supertrace at t = 10 matches harmonic_supertrace (1e-6)", 10, [] {
        double worst = 0.0;
        const std::vector<weyl::Element> ops{Element::one(1), weyl::parse_element("z1*d1")};
        for (int k = 0; k <= 4; ++k) {
            const auto m = dolbeault::build_model(k, 12);
            for (const auto& op : ops) {
                const auto s = dolbeault::limit_supertrace(m, op, {1, 2, 5, 10});
                worst = std::max(worst, std::abs(s.limit_estimate - dolbeault::harmonic_supertrace(m, op)));
            }
        }
        return Outcome{worst <= 1e-6, "max deviation " + fmt(worst)};
    });

    criterion(9, "int c1(O(1)) = 1, int td(T P1) = 1 (1e-8); (P1)^3 product of td = 1 (1e-6)", 10, [] {
        const auto grid = chern::make_grid(chern::Scheme::gauss_legendre, 3);
        const auto c1 = chern::integrate_chart(chern::chern_form(1), grid);
        const auto td = chern::integrate_todd_p1(grid);
        const std::vector<chern::ChartForm> factors(3, chern::todd_form());
        const auto prod = chern::integrate_product(factors, grid);
        const bool ok = std::abs(c1.value - 1) <= 1e-8 && std::abs(td.value - 1) <= 1e-8 &&
                        std::abs(prod.value - 1) <= 1e-6 && !c1.flagged && !td.flagged && !prod.flagged;
        return Outcome{ok, "c1 - 1 = " + fmt(c1.value - 1) + ", td - 1 = " + fmt(td.value - 1) +
                               ", product - 1 = " + fmt(prod.value - 1)};
    });

    criterion(10, "integrate_todd_p1 = harmonic_supertrace(build_model(0, 12), 1) (1e-6)", 5, [] {
        const double integral = chern::integrate_todd_p1(chern::make_grid(chern::Scheme::gauss_legendre, 3)).value;
        const double index = dolbeault::harmonic_supertrace(dolbeault::build_model(0, 12), Element::one(1));
        return Outcome{std::abs(integral - index) <= 1e-6, "difference " + fmt(integral - index)};
    });

    criterion(11, "localization: Poisson (1e-12), delta <= bound, bound(0.01) <= 1e-10 int phi, long-time rate", 5, [] {
        using namespace localization;
        double poisson = 0.0;
        for (double l : {0.7, 1.0, 1.7, 3.0})
            for (double t : log_grid(0.05, 20.0, 30))
                poisson = std::max(poisson, std::abs(circle_heat_diagonal_images(CircleGeometry(l), t).value -
                                                     circle_heat_diagonal_spectral(CircleGeometry(l), t).value));
        if (poisson > 1e-12)
            return Outcome{false, "Poisson mismatch " + fmt(poisson)};

        const BumpFunction phi(0.35, 0.2, 2);
        const double mass = phi.integral();
        for (double t : log_grid(0.01, 0.1, 10)) {
            const auto r = compare_localization(1.0, 1.7, phi, t);
            if (!(r.delta <= r.bound))
                return Outcome{false, "delta > bound at t = " + fmt(t)};
        }
        const double b001 = compare_localization(1.0, 1.7, phi, 0.01).bound;
        if (!(b001 <= 1e-10 * mass))
            return Outcome{false, "bound(0.01) / int phi = " + fmt(b001 / mass)};

        const double pi = std::numbers::pi;
        for (double l : {1.0, 1.7})
            for (double t : log_grid(1.0, 10.0, 10)) {
                const double dev = std::abs(long_time_deviation(CircleGeometry(l), phi, t));
                if (!(dev <= 3 * std::exp(-4 * pi * pi * t / (l * l)) * mass))
                    return Outcome{false, "long-time deviation too large at L = " + fmt(l) + ", t = " + fmt(t)};
            }
        return Outcome{true, "Poisson " + fmt(poisson) + ", bound(0.01) / int phi = " + fmt(b001 / mass)};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

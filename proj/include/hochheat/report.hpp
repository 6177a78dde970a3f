#pragma once

// Verification families, the report they produce, and its JSON/text renderings.

#include "hochheat/chern_quadrature.hpp"
#include "hochheat/dolbeault_spectral.hpp"
#include "hochheat/heat_localization.hpp"
#include "hochheat/hochschild.hpp"
#include "hochheat/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#ifndef HOCHHEAT_VERSION
#define HOCHHEAT_VERSION "0.1.0"
#endif

namespace hochheat::report {

using json = nlohmann::ordered_json;

enum class Verdict { pass, fail, flagged };

inline std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::flagged: return "flagged";
    }
    return "fail";
}

inline Verdict verdict_from_string(const std::string& s)
{
    if (s == "pass")
        return Verdict::pass;
    if (s == "fail")
        return Verdict::fail;
    if (s == "flagged")
        return Verdict::flagged;
    throw InvalidInput("unknown verdict '" + s + "'");
}

/// One verified statement. `computed`, `target` and `tolerance` are numbers, or strings for
/// exact checks ("exact-zero", "exact-equal", "exact").
struct Check {
    std::string id;
    std::string reference;
    json computed;
    json target;
    json tolerance;
    Verdict verdict = Verdict::fail;
    double runtime_ms = 0.0;

    friend bool operator==(const Check&, const Check&) = default;
};

struct VerificationReport {
    std::string tool_version = HOCHHEAT_VERSION;
    std::string timestamp;
    std::vector<Check> checks;
    json tables = json::object(); ///< per-family detail rows, keyed by family name

    friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

struct Config {
    std::uint64_t seed = 20240611;
    unsigned trials = 100;

    unsigned cycles_n_min = 1;
    unsigned cycles_n_max = 3;

    std::vector<int> ks{0, 1, 2, 3, 4};
    int trunc = 12;
    double t_min = 0.2;
    double t_max = 5.0;
    unsigned t_points = 20;
    double mckean_singer_tol = 1e-3;
    double pairing_tol = 1e-6;
    unsigned pairing_count = 10;
    double harmonic_identity_tol = 1e-8;
    double harmonic_euler_tol = 1e-6;
    double limit_t = 10.0;
    double limit_tol = 1e-6;
    bool use_cache = true;
    std::optional<std::filesystem::path> cache_dir;

    std::optional<std::string> chern_form; ///< "chern:m" or "todd"; unset runs the standard set
    unsigned quad_level = 3;
    unsigned product_n = 3;
    double chern_tol = 1e-8;
    double product_tol = 1e-6;
    double consistency_tol = 1e-6;

    double l1 = 1.0;
    double l2 = 1.7;
    double bump_center = 0.35;
    double bump_radius = 0.2;
    unsigned bump_exponent = 2;
    double t_grid_min = 0.01;
    double t_grid_max = 0.1;
    unsigned t_grid_points = 10;
    double poisson_tol = 1e-12;
    double bound_floor = 1e-10;
    double long_time_constant = 3.0;
};

inline const std::vector<std::string>& families()
{
    static const std::vector<std::string> names{"cycles",        "shuffle",  "symbol", "tsygan",  "spectrum",
                                                "mckean-singer", "harmonic", "chern",  "product", "localization"};
    return names;
}

// ---------------------------------------------------------------------------

namespace detail {

template <typename F>
Check timed(F&& f)
{
    const auto start = std::chrono::steady_clock::now();
    Check c = f();
    c.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return c;
}

inline Check numeric(std::string id, std::string ref, double computed, double target, double tol, bool flagged = false)
{
    Check c{std::move(id), std::move(ref), computed, target, tol, Verdict::fail, 0.0};
    const bool ok = std::isfinite(computed) && std::abs(computed - target) <= tol;
    c.verdict = !ok ? Verdict::fail : (flagged ? Verdict::flagged : Verdict::pass);
    if (!std::isfinite(computed))
        c.computed = "non-finite";
    return c;
}

inline Check exact(std::string id, std::string ref, bool ok, const char* what, std::string mismatch)
{
    Check c{std::move(id), std::move(ref), ok ? json(what) : json(std::move(mismatch)), what, "exact", Verdict::fail, 0.0};
    c.verdict = ok ? Verdict::pass : Verdict::fail;
    if (std::string(what) == "exact-zero")
        c.target = 0;
    return c;
}

inline std::string label(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

inline std::string range_label(const Config& cfg)
{
    const std::string lo = std::to_string(cfg.cycles_n_min);
    return cfg.cycles_n_min == cfg.cycles_n_max ? "n=" + lo : "n=" + lo + ".." + std::to_string(cfg.cycles_n_max);
}

inline void validate_cycles(const Config& cfg)
{
    if (cfg.cycles_n_min < 1 || cfg.cycles_n_max > 3 || cfg.cycles_n_min > cfg.cycles_n_max)
        throw InvalidInput("--n: cycle rank must lie in 1..3");
}

inline random::Engine family_engine(const Config& cfg, std::string_view family)
{
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : family)
        h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ull;
    return random::Engine(cfg.seed ^ h);
}

inline std::vector<Check> run_cycles(const Config& cfg, [[maybe_unused]] json& tables)
{
    using namespace hochschild;
    std::vector<Check> out;
    const std::string label = range_label(cfg);
    out.push_back(timed([&] {
        std::string bad;
        for (unsigned n = cfg.cycles_n_min; n <= cfg.cycles_n_max; ++n) {
            const auto b = hochschild_b(omega_cycle(n));
            if (!b.is_zero())
                bad += "n=" + std::to_string(n) + ": " + std::to_string(b.size()) + " terms; ";
        }
        return exact("cycles: b(omega_2n)=0, " + label, "omega_2n is a Hochschild 2n-cycle of A_n", bad.empty(),
                     "exact-zero", bad);
    }));
    out.push_back(timed([&] {
        std::string bad;
        for (unsigned n = cfg.cycles_n_min; n <= cfg.cycles_n_max; ++n)
            if (normalize(omega_cycle(n)) != signed_permutation_sum(n))
                bad += "n=" + std::to_string(n) + " differs; ";
        return exact("cycles: normalize(omega_2n) = signed permutation sum, " + label,
                     "normalized image of omega_2n is sum sgn(sigma) 1 (x) sigma(d1 (x) z1 (x) ... (x) dn (x) zn)",
                     bad.empty(), "exact-equal", bad);
    }));
    return out;
}

inline std::vector<Check> run_shuffle(const Config& cfg, [[maybe_unused]] json& tables)
{
    using namespace hochschild;
    std::vector<Check> out;
    const auto w2 = omega_cycle(1);
    const auto w4 = omega_cycle(2);
    const auto w6 = omega_cycle(3);
    const char* ref = "shuffle of omega cycles is multiplicative: m_sh(omega_2n (x) omega_2m) = omega_2(n+m)";
    out.push_back(timed([&] {
        return exact("shuffle: omega_2 sh omega_2 = omega_4", ref, shuffle_product(w2, w2) == w4, "exact-equal", "differs");
    }));
    out.push_back(timed([&] {
        return exact("shuffle: omega_2 sh omega_4 = omega_6", ref, shuffle_product(w2, w4) == w6, "exact-equal", "differs");
    }));
    out.push_back(timed([&] {
        return exact("shuffle: omega_4 sh omega_2 = omega_6", ref, shuffle_product(w4, w2) == w6, "exact-equal", "differs");
    }));
    out.push_back(timed([&] {
        auto rng = family_engine(cfg, "shuffle");
        std::uniform_int_distribution<unsigned> deg(0, 2);
        unsigned failures = 0;
        for (unsigned i = 0; i < cfg.trials; ++i) {
            const unsigned p = deg(rng);
            const unsigned q = deg(rng);
            const auto x = random::random_chain(rng, {1, 2, 2}, p);
            const auto y = random::random_chain(rng, {1, 2, 2}, q);
            const auto lhs = hochschild_b(shuffle_product(x, y));
            auto rhs = shuffle_product(hochschild_b(x), y);
            rhs.add(shuffle_product(x, hochschild_b(y)), p % 2 == 0 ? 1 : -1);
            if (lhs != rhs)
                ++failures;
        }
        return exact("shuffle: Leibniz rule b(x sh y) = b(x) sh y + (-1)^|x| x sh b(y)",
                     "the shuffle product is a map of complexes", failures == 0, "exact-equal",
                     std::to_string(failures) + " of " + std::to_string(cfg.trials) + " random pairs differ");
    }));
    return out;
}

inline std::vector<Check> run_symbol(const Config& cfg, [[maybe_unused]] json& tables)
{
    using namespace hochschild;
    std::vector<Check> out;
    out.push_back(timed([&] {
        std::string bad;
        for (unsigned n = cfg.cycles_n_min; n <= cfg.cycles_n_max; ++n)
            if (hkr_symbol(normalize(omega_cycle(n))) != PolyForm::volume(n))
                bad += "n=" + std::to_string(n) + " differs; ";
        return exact("symbol: hkr(normalize(omega_2n)) = dy1^dz1^...^dyn^dzn, " + range_label(cfg),
                     "the E1 image of omega_2n is the volume form dy1^dz1^...^dyn^dzn", bad.empty(), "exact-equal",
                     bad);
    }));
    return out;
}

inline std::vector<Check> run_tsygan(const Config& cfg, [[maybe_unused]] json& tables)
{
    using namespace hochschild;
    std::vector<Check> out;
    const random::ElementShape shape{2, 2, 2};
    std::uniform_int_distribution<unsigned> deg(0, 4);

    auto property = [&](const std::string& id, const char* ref, auto&& holds) {
        return timed([&] {
            auto rng = family_engine(cfg, id);
            unsigned failures = 0;
            for (unsigned i = 0; i < cfg.trials; ++i)
                if (!holds(rng))
                    ++failures;
            return exact(id, ref, failures == 0, "exact-equal",
                         std::to_string(failures) + " of " + std::to_string(cfg.trials) + " random inputs fail");
        });
    };

    out.push_back(property("tsygan: b^2 = 0", "b is a differential", [&](random::Engine& rng) {
        return hochschild_b(hochschild_b(random::random_chain(rng, shape, deg(rng)))).is_zero();
    }));
    out.push_back(property("tsygan: b'^2 = 0", "b' is a differential", [&](random::Engine& rng) {
        return bar_bprime(bar_bprime(random::random_chain(rng, shape, deg(rng)))).is_zero();
    }));
    out.push_back(property("tsygan: b(1-tau) = (1-tau)b'", "bicomplex identity", [&](random::Engine& rng) {
        const auto c = random::random_chain(rng, shape, deg(rng));
        return hochschild_b(one_minus_tau(c)) == one_minus_tau(bar_bprime(c));
    }));
    out.push_back(property("tsygan: b'N = Nb", "bicomplex identity", [&](random::Engine& rng) {
        const auto c = random::random_chain(rng, shape, deg(rng));
        return bar_bprime(norm_N(c)) == norm_N(hochschild_b(c));
    }));
    out.push_back(property("tsygan: d^2 = 0 on two-column vectors", "total differential of the Tsygan double complex",
                           [&](random::Engine& rng) {
                               std::uniform_int_distribution<unsigned> col(0, 4);
                               const unsigned p = col(rng);
                               TsyganColumnVector v(shape.n);
                               v.add(p, random::random_chain(rng, shape, deg(rng)));
                               v.add(p + 1, random::random_chain(rng, shape, deg(rng)));
                               return tsygan_d(tsygan_d(v)).is_zero();
                           }));
    return out;
}

inline void validate_spectral(const Config& cfg)
{
    for (int k : cfg.ks) {
        if (k < 0)
            throw InvalidInput("--k: bundle degree must be non-negative");
        if (cfg.trunc < k + 2)
            throw InvalidInput("--trunc: truncation N must satisfy N >= k + 2");
    }
}

inline std::vector<Check> run_spectrum(const Config& cfg, [[maybe_unused]] json& tables)
{
    validate_spectral(cfg);
    std::vector<Check> out;
    for (int k : cfg.ks) {
        const std::string suffix = ", k=" + std::to_string(k);
        std::optional<std::filesystem::path> dir = cfg.use_cache ? cfg.cache_dir : std::nullopt;
        const auto start = std::chrono::steady_clock::now();
        const auto s = dolbeault::spectrum(k, cfg.trunc, dir);
        tables["spectrum"].push_back(dolbeault::to_json(s));
        const double build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

        Check dims = exact("spectrum: harmonic dims = (k+1, 0)" + suffix,
                           "dim H^0(O(k)) = k+1 and H^1(O(k)) = 0 on P^1",
                           s.harmonic0_dim == static_cast<unsigned>(k + 1) && s.harmonic1_dim == 0, "exact-equal",
                           "(" + std::to_string(s.harmonic0_dim) + ", " + std::to_string(s.harmonic1_dim) + ")");
        dims.target = "(" + std::to_string(k + 1) + ", 0)";
        dims.runtime_ms = build_ms;
        out.push_back(dims);

        out.push_back(timed([&] {
            std::vector<double> l0, l1;
            for (const auto& g : s.eigs0)
                if (g.value > 0)
                    l0.insert(l0.end(), g.multiplicity, g.value);
            for (const auto& g : s.eigs1)
                if (g.value > 0)
                    l1.insert(l1.end(), g.multiplicity, g.value);
            double worst = 0.0;
            const std::size_t count = std::min<std::size_t>({cfg.pairing_count, l0.size(), l1.size()});
            for (std::size_t i = 0; i < count; ++i)
                worst = std::max(worst, std::abs(l0[i] - l1[i]));
            if (count < cfg.pairing_count)
                worst = std::numeric_limits<double>::infinity();
            return numeric("spectrum: first " + std::to_string(cfg.pairing_count) +
                               " nonzero eigenvalues pair across degrees" + suffix,
                           "nonzero spectra of dbar* dbar and dbar dbar* coincide", worst, 0.0, cfg.pairing_tol);
        }));
    }
    return out;
}

inline std::vector<double> linear_grid(double a, double b, unsigned n)
{
    std::vector<double> g;
    for (unsigned i = 0; i < n; ++i)
        g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return g;
}

inline std::vector<double> log_grid(double a, double b, unsigned n)
{
    std::vector<double> g;
    for (unsigned i = 0; i < n; ++i)
        g.push_back(n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    return g;
}

inline std::vector<Check> run_mckean_singer(const Config& cfg, [[maybe_unused]] json& tables)
{
    validate_spectral(cfg);
    if (!(cfg.t_min > 0) || !(cfg.t_max >= cfg.t_min) || cfg.t_points == 0)
        throw InvalidInput("--t-min/--t-max/--points: need 0 < t-min <= t-max and at least one point");
    std::vector<Check> out;
    for (int k : cfg.ks) {
        const std::string suffix = ", k=" + std::to_string(k);
        std::optional<std::filesystem::path> dir = cfg.use_cache ? cfg.cache_dir : std::nullopt;
        const auto s = dolbeault::spectrum(k, cfg.trunc, dir);
        std::vector<double> values;
        for (double t : linear_grid(cfg.t_min, cfg.t_max, cfg.t_points)) {
            values.push_back(dolbeault::heat_supertrace(s, t));
            tables["mckean-singer"].push_back(json{{"k", k}, {"t", t}, {"supertrace", values.back()}});
        }
        out.push_back(timed([&] {
            double worst = values.front();
            for (double v : values)
                if (std::abs(v - (k + 1)) > std::abs(worst - (k + 1)))
                    worst = v;
            return numeric("mckean-singer: str exp(-t Delta) = k+1 on the t grid" + suffix,
                           "str(id) equals the Euler characteristic k+1 (str(id) = 1 for O)", worst, k + 1.0,
                           cfg.mckean_singer_tol);
        }));
        out.push_back(timed([&] {
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            return numeric("mckean-singer: flatness max-min over the t grid" + suffix,
                           "the heat supertrace is independent of t", *hi - *lo, 0.0, cfg.mckean_singer_tol);
        }));
    }
    return out;
}

inline std::vector<Check> run_harmonic(const Config& cfg, [[maybe_unused]] json& tables)
{
    validate_spectral(cfg);
    std::vector<Check> out;
    const auto identity = weyl::Element::one(1);
    const auto euler = weyl::parse_element("z1*d1");
    for (int k : cfg.ks) {
        const std::string suffix = ", k=" + std::to_string(k);
        const auto start = std::chrono::steady_clock::now();
        const auto model = dolbeault::build_model(k, cfg.trunc);
        const double build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        Check c = numeric("harmonic: str(P0 id P0) = k+1" + suffix, "str(P0 alpha P0) with alpha = id",
                          dolbeault::harmonic_supertrace(model, identity), k + 1.0, cfg.harmonic_identity_tol);
        c.runtime_ms = build_ms;
        out.push_back(c);
        out.push_back(timed([&] {
            return numeric("harmonic: str(P0 z d/dz P0) = k(k+1)/2" + suffix,
                           "str(P0 alpha P0) with alpha = z d/dz (trace on span{1..z^k})",
                           dolbeault::harmonic_supertrace(model, euler), k * (k + 1) / 2.0, cfg.harmonic_euler_tol);
        }));
        out.push_back(timed([&] {
            const auto series = dolbeault::limit_supertrace(model, euler, log_grid(1.0, cfg.limit_t, 5));
            return numeric("harmonic: str(z d/dz exp(-t Delta)) at t=" + label(cfg.limit_t) +
                               " matches the harmonic supertrace" + suffix,
                           "lim_{t->inf} str(phi(alpha) exp(-t Delta)) = str(P0 alpha P0)", series.limit_estimate,
                           dolbeault::harmonic_supertrace(model, euler), cfg.limit_tol);
        }));
    }
    return out;
}

inline chern::ChartForm parse_form(const std::string& spec)
{
    if (spec == "todd")
        return chern::todd_form();
    if (spec.rfind("chern:", 0) == 0) {
        const std::string m = spec.substr(6);
        if (m.empty() || !std::all_of(m.begin(), m.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw InvalidInput("--form: expected chern:<m> with a non-negative integer m");
        return chern::chern_form(std::stod(m));
    }
    throw InvalidInput("--form: expected 'chern:<m>' or 'todd' (got '" + spec + "')");
}

inline double form_target(const std::string& spec)
{
    return spec == "todd" ? 1.0 : std::stod(spec.substr(6));
}

inline Check chart_check(json& tables, const char* table, std::string id, std::string ref, const chern::ChartIntegral& v,
                         double target, double tol)
{
    Check c = numeric(std::move(id), std::move(ref), v.value, target, tol, v.flagged);
    tables[table].push_back(json{{"integral", c.id},
                                 {"value", v.value},
                                 {"error_estimate", v.error_estimate},
                                 {"target", target},
                                 {"verdict", to_string(c.verdict)}});
    return c;
}

inline std::vector<Check> run_chern(const Config& cfg, [[maybe_unused]] json& tables)
{
    const auto grid = chern::make_grid(chern::Scheme::gauss_legendre, cfg.quad_level);
    std::vector<Check> out;
    if (cfg.chern_form) {
        const auto form = parse_form(*cfg.chern_form);
        out.push_back(timed([&] {
            return chart_check(tables, "chern", "chern: integral " + form.name, "integral of the form over P^1",
                               chern::integrate_chart(form, grid), form_target(*cfg.chern_form), cfg.chern_tol);
        }));
        return out;
    }
    for (int m : {1, 2, 3}) {
        out.push_back(timed([&] {
            return chart_check(tables, "chern", "chern: integral c1(O(" + std::to_string(m) + "))",
                               m == 1 ? "(1/pi) int dxdy/(1+x^2+y^2)^2 = 1" : "c1(O(m)) integrates to m",
                               chern::integrate_chart(chern::chern_form(m), grid), m, cfg.chern_tol);
        }));
    }
    out.push_back(timed([&] {
        return chart_check(tables, "chern", "chern: integral td(T P1)", "td(T P^1)_2 = c1(T P^1)/2 and T P^1 = O(2) give 1",
                           chern::integrate_todd_p1(grid), 1.0, cfg.chern_tol);
    }));
    out.push_back(timed([&] {
        const double harmonic = dolbeault::harmonic_supertrace(dolbeault::build_model(0, cfg.trunc), weyl::Element::one(1));
        return chart_check(tables, "chern", "chern: integral td(T P1) = str(P0 id P0) on O",
                           "I_E = int_X for X = P^1, E = O: supertrace of id equals the integral of its class",
                           chern::integrate_todd_p1(grid), harmonic, cfg.consistency_tol);
    }));
    return out;
}

inline std::vector<Check> run_product(const Config& cfg, [[maybe_unused]] json& tables)
{
    const auto grid = chern::make_grid(chern::Scheme::gauss_legendre, cfg.quad_level);
    std::vector<Check> out;
    const std::string spec = cfg.chern_form.value_or("todd");
    const auto form = parse_form(spec);
    out.push_back(timed([&] {
        const std::vector<chern::ChartForm> factors(cfg.product_n, form);
        const double target = std::pow(form_target(spec), cfg.product_n);
        return chart_check(tables, "product", "product: integral over (P1)^" + std::to_string(cfg.product_n) + " of " + form.name + "^" +
                               std::to_string(cfg.product_n),
                           "1 = int over (P^1)^n of [id^(x)n] = [id]^(x)n", chern::integrate_product(factors, grid),
                           target, cfg.product_tol);
    }));
    if (!cfg.chern_form) {
        out.push_back(timed([&] {
            const std::vector<chern::ChartForm> factors{chern::chern_form(1), chern::chern_form(3)};
            return chart_check(tables, "product", "product: integral over (P1)^2 of c1(O(1)) x c1(O(3))",
                               "Fubini: the product class integrates to the product of the factors",
                               chern::integrate_product(factors, grid), 3.0, cfg.product_tol);
        }));
    }
    return out;
}

inline std::vector<Check> run_localization(const Config& cfg, [[maybe_unused]] json& tables)
{
    using namespace localization;
    if (!(cfg.t_grid_min > 0) || !(cfg.t_grid_max >= cfg.t_grid_min) || cfg.t_grid_points == 0)
        throw InvalidInput("--t-grid: expected a:b:n with 0 < a <= b and n >= 1");
    const BumpFunction phi(cfg.bump_center, cfg.bump_radius, cfg.bump_exponent);
    const double mass = phi.integral();
    std::vector<Check> out;

    out.push_back(timed([&] {
        double worst = 0.0;
        for (double l : {0.7, 1.0, 3.0, cfg.l1, cfg.l2})
            for (double t : log_grid(0.05, 20.0, 25)) {
                const CircleGeometry g(l);
                worst = std::max(worst, std::abs(circle_heat_diagonal_images(g, t).value -
                                                 circle_heat_diagonal_spectral(g, t).value));
            }
        return numeric("localization: image sum = spectral sum (Poisson summation)",
                       "heat kernel on the circle: image and Fourier representations agree", worst, 0.0, cfg.poisson_tol);
    }));
    out.push_back(timed([&] {
        double violation = 0.0;
        for (double t : log_grid(cfg.t_grid_min, cfg.t_grid_max, cfg.t_grid_points)) {
            const auto cmp = compare_localization(cfg.l1, cfg.l2, phi, t);
            violation = std::max(violation, cmp.delta - cmp.bound);
            tables["localization"].push_back(
                json{{"t", t}, {"delta", cmp.delta}, {"bound", cmp.bound}, {"pass", cmp.within_bound()}});
        }
        return numeric("localization: |tr_L1 - tr_L2| <= image tail bound on the t grid",
                       "int_X str(phi p_t(x,x)) dx localizes to the support of phi", std::max(0.0, violation), 0.0, 0.0);
    }));
    out.push_back(timed([&] {
        const auto cmp = compare_localization(cfg.l1, cfg.l2, phi, cfg.t_grid_min);
        return numeric("localization: bound(t_min) / int phi <= " + label(cfg.bound_floor),
                       "the non-local contribution is exponentially small as t -> 0", cmp.bound / mass, 0.0,
                       cfg.bound_floor);
    }));
    out.push_back(timed([&] {
        double violation = 0.0;
        const double pi = std::numbers::pi;
        for (double l : {cfg.l1, cfg.l2}) {
            const CircleGeometry g(l);
            for (double t : log_grid(1.0, 10.0, 10)) {
                const double allowed = cfg.long_time_constant * std::exp(-4 * pi * pi * t / (l * l)) * mass;
                violation = std::max(violation, long_time_deviation(g, phi, t) - allowed);
            }
        }
        return numeric("localization: |tr - (1/L) int phi| <= 3 exp(-4 pi^2 t/L^2) int phi on t in [1,10]",
                       "long-time limit projects onto the harmonic (constant) functions", std::max(0.0, violation), 0.0,
                       0.0);
    }));
    return out;
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace detail

/// Runs the selected families concurrently; checks are sorted by id.
inline VerificationReport run_suite(std::span<const std::string> selection, const Config& cfg = {})
{
    using Runner = std::vector<Check> (*)(const Config&, json&);
    static const std::map<std::string, Runner> runners{
        {"cycles", detail::run_cycles},     {"shuffle", detail::run_shuffle},
        {"symbol", detail::run_symbol},     {"tsygan", detail::run_tsygan},
        {"spectrum", detail::run_spectrum}, {"mckean-singer", detail::run_mckean_singer},
        {"harmonic", detail::run_harmonic}, {"chern", detail::run_chern},
        {"product", detail::run_product},   {"localization", detail::run_localization},
    };
    std::set<std::string> unique;
    for (const auto& f : selection) {
        if (!runners.contains(f))
            throw InvalidInput("unknown check family '" + f + "'");
        unique.insert(f);
    }
    // Validate option values up front so the offending flag is reported before any work starts.
    if (unique.contains("spectrum") || unique.contains("mckean-singer") || unique.contains("harmonic"))
        detail::validate_spectral(cfg);
    if (unique.contains("cycles") || unique.contains("symbol"))
        detail::validate_cycles(cfg);

    struct Output {
        std::vector<Check> checks;
        json tables = json::object();
    };
    std::vector<std::future<Output>> jobs;
    for (const auto& f : unique) {
        const Runner run = runners.at(f);
        jobs.push_back(std::async(std::launch::async, [run, &cfg] {
            Output o;
            o.checks = run(cfg, o.tables);
            return o;
        }));
    }

    VerificationReport rep;
    rep.timestamp = detail::utc_timestamp();
    for (auto& j : jobs) {
        auto o = j.get();
        rep.checks.insert(rep.checks.end(), std::make_move_iterator(o.checks.begin()), std::make_move_iterator(o.checks.end()));
        for (auto& [name, rows] : o.tables.items())
            rep.tables[name] = std::move(rows);
    }
    std::sort(rep.checks.begin(), rep.checks.end(), [](const Check& a, const Check& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < rep.checks.size(); ++i)
        if (rep.checks[i].id == rep.checks[i - 1].id)
            throw Error("duplicate check id '" + rep.checks[i].id + "'");
    return rep;
}

/// 0 iff every verdict is pass.
inline int exit_code(const VerificationReport& rep)
{
    return std::all_of(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.verdict == Verdict::pass; })
               ? 0
               : 1;
}

// ---------------------------------------------------------------------------

inline json to_json(const VerificationReport& rep)
{
    json j;
    j["tool"] = "hochheat";
    j["tool_version"] = rep.tool_version;
    j["timestamp"] = rep.timestamp;
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json e;
        e["id"] = c.id;
        e["reference"] = c.reference;
        e["computed"] = c.computed;
        e["target"] = c.target;
        e["tolerance"] = c.tolerance;
        e["verdict"] = to_string(c.verdict);
        e["runtime_ms"] = c.runtime_ms;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    j["tables"] = rep.tables;
    return j;
}

inline VerificationReport report_from_json(const json& j)
{
    VerificationReport rep;
    rep.tool_version = j.at("tool_version").get<std::string>();
    rep.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& e : j.at("checks")) {
        Check c;
        c.id = e.at("id").get<std::string>();
        c.reference = e.at("reference").get<std::string>();
        c.computed = e.at("computed");
        c.target = e.at("target");
        c.tolerance = e.at("tolerance");
        c.verdict = verdict_from_string(e.at("verdict").get<std::string>());
        c.runtime_ms = e.at("runtime_ms").get<double>();
        rep.checks.push_back(std::move(c));
    }
    rep.tables = j.value("tables", json::object());
    return rep;
}

inline std::string to_text(const VerificationReport& rep)
{
    auto cell = [](const json& v) {
        if (v.is_string())
            return v.get<std::string>();
        std::ostringstream os;
        os << std::setprecision(12) << v.get<double>();
        return os.str();
    };
    std::ostringstream os;
    for (const auto& c : rep.checks) {
        os << std::left << std::setw(8) << ("[" + to_string(c.verdict) + "]") << ' ' << c.id << "  computed=" << cell(c.computed)
           << " target=" << cell(c.target) << " tol=" << cell(c.tolerance) << " (" << std::fixed << std::setprecision(1)
           << c.runtime_ms << " ms)" << std::defaultfloat << '\n';
    }
    return os.str();
}

enum class Format { json, text };

inline Format parse_format(const std::string& s)
{
    if (s == "json")
        return Format::json;
    if (s == "text")
        return Format::text;
    throw InvalidInput("--format: unknown format '" + s + "' (expected json or text)");
}

inline std::string render(const VerificationReport& rep, Format fmt)
{
    return fmt == Format::json ? to_json(rep).dump(2) + "\n" : to_text(rep);
}

/// Writes the report to `path`, or to standard output when no path is given.
inline void emit(const VerificationReport& rep, Format fmt, const std::optional<std::filesystem::path>& path = std::nullopt,
                 std::ostream& out = std::cout)
{
    const std::string body = render(rep, fmt);
    if (!path) {
        out << body;
        return;
    }
    std::ofstream f(*path);
    if (!f)
        throw Error("cannot write report to '" + path->string() + "'");
    f << body;
    if (!f)
        throw Error("failed while writing report to '" + path->string() + "'");
}

} // namespace hochheat::report

// hochheat command-line driver.

#include "hochheat/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace {

using hochheat::InvalidInput;
namespace report = hochheat::report;

struct Options {
    report::Config cfg;
    std::string format = "json";
    std::string report_path;
    std::string cache_dir;
    bool no_cache = false;
    std::string bump;
    std::string t_grid;
    std::vector<std::string> only;
    unsigned n = 0;
};

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    return parts;
}

double parse_double(const std::string& text, const std::string& flag)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw InvalidInput(flag + ": '" + text + "' is not a number");
    return v;
}

unsigned parse_unsigned(const std::string& text, const std::string& flag)
{
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw InvalidInput(flag + ": '" + text + "' is not a non-negative integer");
    return static_cast<unsigned>(std::stoul(text));
}

void apply_bump(Options& o)
{
    if (o.bump.empty())
        return;
    const auto p = split(o.bump, ',');
    if (p.size() != 3)
        throw InvalidInput("--bump: expected c,rho,m");
    o.cfg.bump_center = parse_double(p[0], "--bump");
    o.cfg.bump_radius = parse_double(p[1], "--bump");
    o.cfg.bump_exponent = parse_unsigned(p[2], "--bump");
}

void apply_t_grid(Options& o)
{
    if (o.t_grid.empty())
        return;
    const auto p = split(o.t_grid, ':');
    if (p.size() != 3)
        throw InvalidInput("--t-grid: expected a:b:n");
    o.cfg.t_grid_min = parse_double(p[0], "--t-grid");
    o.cfg.t_grid_max = parse_double(p[1], "--t-grid");
    o.cfg.t_grid_points = parse_unsigned(p[2], "--t-grid");
}

void add_common(CLI::App* app, Options& o)
{
    app->add_option("--seed", o.cfg.seed, "seed for the randomized property checks");
    app->add_option("--trials", o.cfg.trials, "random inputs per property check");
    app->add_option("--report", o.report_path, "write the report to this file instead of standard output");
    app->add_option("--format", o.format, "report format: json or text");
    app->add_option("--cache-dir", o.cache_dir, "spectral cache directory (overrides HOCHHEAT_CACHE_DIR)");
    app->add_flag("--no-cache", o.no_cache, "ignore the spectral cache");
}

void add_spectral(CLI::App* app, Options& o)
{
    app->add_option("--k", o.cfg.ks, "line bundle degrees (comma separated)")->delimiter(',');
    app->add_option("--trunc", o.cfg.trunc, "truncation order N");
}

void add_quadrature(CLI::App* app, Options& o)
{
    app->add_option("--form", o.cfg.chern_form, "chern:<m> or todd");
    app->add_option("--levels", o.cfg.quad_level, "quadrature refinement level");
}

void add_localization(CLI::App* app, Options& o)
{
    app->add_option("--l1", o.cfg.l1, "first circle circumference");
    app->add_option("--l2", o.cfg.l2, "second circle circumference");
    app->add_option("--bump", o.bump, "bump function c,rho,m");
    app->add_option("--t-grid", o.t_grid, "log-spaced time grid a:b:n");
}

int run(const std::vector<std::string>& selection, Options& o)
{
    apply_bump(o);
    apply_t_grid(o);
    const auto fmt = report::parse_format(o.format);
    if (!o.cache_dir.empty())
        o.cfg.cache_dir = o.cache_dir;
    else if (const char* env = std::getenv("HOCHHEAT_CACHE_DIR"); env && *env)
        o.cfg.cache_dir = env;
    o.cfg.use_cache = !o.no_cache && o.cfg.cache_dir.has_value();
    const auto rep = report::run_suite(selection, o.cfg);
    std::optional<std::filesystem::path> path;
    if (!o.report_path.empty())
        path = o.report_path;
    report::emit(rep, fmt, path);
    return report::exit_code(rep);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hochheat: verification suite for Weyl-algebra Hochschild cycles, Dolbeault heat traces, "
                 "Chern integrals and heat-kernel localization"};
    app.set_version_flag("--version", std::string(HOCHHEAT_VERSION));
    app.require_subcommand(1);

    Options o;
    std::vector<std::string> selection;

    auto* all = app.add_subcommand("all", "run every check family (or those named by --only)");
    add_common(all, o);
    all->add_option("--only", o.only, "restrict to these families (comma separated)")->delimiter(',');
    add_spectral(all, o);
    all->add_option("--t-min", o.cfg.t_min, "smallest time for the supertrace grid");
    all->add_option("--t-max", o.cfg.t_max, "largest time for the supertrace grid");
    all->add_option("--points", o.cfg.t_points, "points in the supertrace grid");
    add_quadrature(all, o);
    all->add_option("--product", o.cfg.product_n, "number of (P1) factors in the product check");
    add_localization(all, o);

    std::map<std::string, CLI::App*> family_cmds;
    for (const auto& f : report::families()) {
        auto* sub = app.add_subcommand(f, "run the '" + f + "' check family");
        add_common(sub, o);
        family_cmds[f] = sub;
    }
    for (const char* f : {"cycles", "symbol"})
        family_cmds[f]->add_option("--n", o.n, "cycle rank n (1..3); default checks all");
    for (const char* f : {"spectrum", "mckean-singer", "harmonic"})
        add_spectral(family_cmds[f], o);
    family_cmds["mckean-singer"]->add_option("--t-min", o.cfg.t_min, "smallest time");
    family_cmds["mckean-singer"]->add_option("--t-max", o.cfg.t_max, "largest time");
    family_cmds["mckean-singer"]->add_option("--points", o.cfg.t_points, "grid points");
    add_quadrature(family_cmds["chern"], o);
    add_quadrature(family_cmds["product"], o);
    family_cmds["product"]->add_option("--product", o.cfg.product_n, "number of factors (1..4)");
    add_localization(family_cmds["localization"], o);

    auto* verify = app.add_subcommand("verify-cycles", "exact cycle, normal form and symbol checks for omega_2n");
    add_common(verify, o);
    verify->add_option("--n", o.n, "cycle rank n (1..3)")->required();

    auto* integrals = app.add_subcommand("chern-integrals", "Chern/Todd chart integrals and Fubini products");
    add_common(integrals, o);
    add_quadrature(integrals, o);
    integrals->add_option("--product", o.cfg.product_n, "number of factors (1..4)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (o.n != 0) {
            o.cfg.cycles_n_min = o.n;
            o.cfg.cycles_n_max = o.n;
        }
        if (all->parsed()) {
            selection = o.only.empty() ? report::families() : o.only;
        } else if (verify->parsed()) {
            selection = {"cycles", "symbol"};
        } else if (integrals->parsed()) {
            selection = {"chern", "product"};
        } else {
            for (const auto& [name, sub] : family_cmds)
                if (sub->parsed())
                    selection = {name};
        }
        return run(selection, o);
    } catch (const InvalidInput& e) {
        std::cerr << "hochheat: invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hochheat: error: " << e.what() << '\n';
        return 3;
    }
}

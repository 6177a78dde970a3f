#pragma once

// Truncated spectral model of the Dolbeault Laplacian of O(k) -> P^1 with the Fubini-Study metric.
//
// Affine chart z, rho = 1 + |z|^2. Sections are weighted by rho^{-k}, the area measure is
// (1/pi) rho^{-2} dx dy (total volume 1) and |dzbar|^2 = rho^2. Trial spaces at truncation N:
//
//   degree 0:  e_ab = z^a zbar^b rho^{-N}        0 <= a <= N+k,  0 <= b <= N
//   degree 1:  f_ab = z^a zbar^b rho^{-N-1} dzbar  0 <= a <= N+k+1, 0 <= b <= N-1
//
// dbar maps the first space onto the second:
//   dbar e_ab = b f_{a,b-1} + (b - N) f_{a+1,b}.
// Every L^2 pairing reduces to
//   (1/pi) int z^p zbar^p rho^{-m} dx dy = p! (m-p-2)! / (m-1)!,
// so Gram and stiffness matrices are exact rationals. Both are block diagonal in the charge a - b.
// The Gram blocks are factored exactly (G = L D L^T); only the final symmetric eigensolve is
// floating point, and both Laplacians come from one matrix M of dbar in orthonormal coordinates:
// Delta_0 = M^T M, Delta_1 = M M^T.

#include "hochheat/numeric.hpp"
#include "hochheat/rational.hpp"
#include "hochheat/weyl_algebra.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

namespace hochheat::dolbeault {

inline constexpr const char* convention_exact = "fs-unit-volume/rho-weighted-monomials/exact-ldlt";
inline constexpr const char* convention_raw = "fs-unit-volume/rho-weighted-monomials/raw-gram";

class IllConditioned : public Error {
public:
    using Error::Error;
};

/// An operator whose matrix elements need a divergent integral on the trial space.
class EscapesTruncation : public Error {
public:
    using Error::Error;
};

struct EigenGroup {
    double value = 0.0;
    unsigned multiplicity = 0;
    friend bool operator==(const EigenGroup&, const EigenGroup&) = default;
};

/// The spectral data that can be cached and reported.
struct SpectrumSummary {
    int k = 0;
    int trunc = 0;
    std::string convention;
    std::vector<EigenGroup> eigs0;
    std::vector<EigenGroup> eigs1;
    unsigned harmonic0_dim = 0;
    unsigned harmonic1_dim = 0;

    friend bool operator==(const SpectrumSummary&, const SpectrumSummary&) = default;
};

enum class Orthogonalization { exact_ldlt, none };

struct BuildOptions {
    Orthogonalization orthogonalization = Orthogonalization::exact_ldlt;
    /// Raw Gram matrices with a larger eigenvalue ratio are rejected.
    double max_condition = 1e12;
    /// eigenvalue < zero_threshold * largest eigenvalue counts as zero.
    double zero_threshold = 1e-8;
};

// ---------------------------------------------------------------------------

/// (1/pi) int z^alpha zbar^beta rho^{-m} dx dy; nullopt when not absolutely convergent.
inline std::optional<Rational> chart_moment(int alpha, int beta, int m)
{
    if (alpha < 0 || beta < 0)
        return Rational(0);
    if (alpha + beta > 2 * m - 3)
        return std::nullopt;
    if (alpha != beta)
        return Rational(0);
    return factorial(static_cast<unsigned>(alpha)) * factorial(static_cast<unsigned>(m - alpha - 2)) /
           factorial(static_cast<unsigned>(m - 1));
}

namespace detail {

/// c z^alpha zbar^beta rho^{-s}
struct FunctionTerm {
    int alpha;
    int beta;
    int s;
    Rational c;
};

struct BasisIndex {
    int a;
    int b;
};

/// Trial basis of one Dolbeault degree, ordered by charge a - b, then by b.
struct Basis {
    int rho_power = 0; ///< every element carries rho^{-rho_power}
    int weight = 0;    ///< extra rho^{-weight} in the pairing measure
    std::vector<BasisIndex> elems;
    std::vector<int> charges;                   ///< distinct charges, ascending
    std::vector<std::pair<int, int>> blocks;    ///< [begin, end) per charge
    std::map<std::pair<int, int>, int> lookup;  ///< (a,b) -> index

    Basis(int a_max, int b_max, int rho, int w) : rho_power(rho), weight(w)
    {
        if (b_max < 0)
            return;
        for (int q = -b_max; q <= a_max; ++q) {
            const int begin = static_cast<int>(elems.size());
            for (int b = std::max(0, -q); b <= std::min(b_max, a_max - q); ++b) {
                lookup[{q + b, b}] = static_cast<int>(elems.size());
                elems.push_back({q + b, b});
            }
            charges.push_back(q);
            blocks.emplace_back(begin, static_cast<int>(elems.size()));
        }
    }

    [[nodiscard]] int size() const { return static_cast<int>(elems.size()); }

    [[nodiscard]] std::optional<std::size_t> block_of_charge(int q) const
    {
        if (charges.empty() || q < charges.front() || q > charges.back())
            return std::nullopt;
        return static_cast<std::size_t>(q - charges.front());
    }
};

using RMatrix = std::vector<std::vector<Rational>>;

inline RMatrix rzeros(std::size_t r, std::size_t c)
{
    return RMatrix(r, std::vector<Rational>(c, Rational(0)));
}

/// Exact G = L D L^T of a symmetric positive definite block; returns L^{-1} and D.
inline void exact_ldlt_inverse(const RMatrix& g, RMatrix& l_inv, std::vector<Rational>& diag)
{
    const std::size_t n = g.size();
    RMatrix l = rzeros(n, n);
    diag.assign(n, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
        Rational dj = g[j][j];
        for (std::size_t k = 0; k < j; ++k)
            dj -= l[j][k] * l[j][k] * diag[k];
        if (dj <= 0)
            throw Error("Gram block is not positive definite");
        diag[j] = dj;
        l[j][j] = 1;
        for (std::size_t i = j + 1; i < n; ++i) {
            Rational s = g[i][j];
            for (std::size_t k = 0; k < j; ++k)
                s -= l[i][k] * l[j][k] * diag[k];
            l[i][j] = s / dj;
        }
    }
    l_inv = rzeros(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        l_inv[j][j] = 1;
        for (std::size_t i = j + 1; i < n; ++i) {
            Rational s = 0;
            for (std::size_t k = j; k < i; ++k)
                s -= l[i][k] * l_inv[k][j];
            l_inv[i][j] = s;
        }
    }
}

inline RMatrix rmul(const RMatrix& a, const RMatrix& b)
{
    const std::size_t r = a.size();
    const std::size_t inner = b.size();
    const std::size_t c = inner ? b[0].size() : 0;
    RMatrix out = rzeros(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < inner; ++k) {
            if (a[i][k] == 0)
                continue;
            for (std::size_t j = 0; j < c; ++j)
                if (b[k][j] != 0)
                    out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

inline RMatrix rtranspose(const RMatrix& a)
{
    const std::size_t r = a.size();
    const std::size_t c = r ? a[0].size() : 0;
    RMatrix out = rzeros(c, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            out[j][i] = a[i][j];
    return out;
}

/// Applies sum c z^p d_z^q (d_z acting on z and on rho) to one function term.
inline void apply_operator(const weyl::Element& op, const FunctionTerm& f, std::vector<FunctionTerm>& out)
{
    for (const auto& [m, c] : op.terms()) {
        std::vector<FunctionTerm> cur{{f.alpha, f.beta, f.s, f.c * c}};
        for (unsigned r = 0; r < m.d[0]; ++r) {
            std::vector<FunctionTerm> next;
            for (const auto& t : cur) {
                if (t.alpha > 0)
                    next.push_back({t.alpha - 1, t.beta, t.s, t.c * t.alpha});
                if (t.s != 0)
                    next.push_back({t.alpha, t.beta + 1, t.s + 1, t.c * (-t.s)});
            }
            cur = std::move(next);
        }
        for (auto& t : cur) {
            t.alpha += static_cast<int>(m.z[0]);
            out.push_back(std::move(t));
        }
    }
}

/// Sparse exact matrix split into charge blocks: (row block, col block) -> dense block.
using BlockMatrix = std::map<std::pair<std::size_t, std::size_t>, RMatrix>;

struct DegreeData {
    Basis basis;
    std::vector<RMatrix> l_inv;            ///< per block
    std::vector<std::vector<Rational>> d;  ///< per block
    std::vector<double> sqrt_d;            ///< per global index

    explicit DegreeData(Basis b) : basis(std::move(b)) {}
};

/// B_{uv} = <op e_v, e_u> on one degree, as exact charge blocks. Throws EscapesTruncation when a
/// needed integral diverges.
inline BlockMatrix operator_blocks(const weyl::Element& op, const Basis& basis, int k)
{
    BlockMatrix out;
    const int n = basis.size();
    std::vector<FunctionTerm> image;
    for (int v = 0; v < n; ++v) {
        image.clear();
        apply_operator(op, {basis.elems[v].a, basis.elems[v].b, basis.rho_power, Rational(1)}, image);
        const auto& [vb_begin, vb_end] = basis.blocks[*basis.block_of_charge(basis.elems[v].a - basis.elems[v].b)];
        const std::size_t vblock = *basis.block_of_charge(basis.elems[v].a - basis.elems[v].b);
        for (const auto& t : image) {
            const int m = t.s + basis.rho_power + k + basis.weight;
            // Divergence check across every test function, not only the matching charge.
            for (int u = 0; u < n; ++u) {
                const auto& e = basis.elems[u];
                if (t.alpha + e.b + t.beta + e.a > 2 * m - 3)
                    throw EscapesTruncation("operator escapes the truncated trial space: pairing diverges (rho power " +
                                            std::to_string(m) + ")");
            }
            const auto ublock = basis.block_of_charge(t.alpha - t.beta);
            if (!ublock)
                continue;
            const auto [ub_begin, ub_end] = basis.blocks[*ublock];
            auto& blk = out.try_emplace({*ublock, vblock},
                                        rzeros(static_cast<std::size_t>(ub_end - ub_begin),
                                               static_cast<std::size_t>(vb_end - vb_begin)))
                            .first->second;
            for (int u = ub_begin; u < ub_end; ++u) {
                const auto& e = basis.elems[u];
                const auto mom = chart_moment(t.alpha + e.b, t.beta + e.a, m);
                blk[static_cast<std::size_t>(u - ub_begin)][static_cast<std::size_t>(v - vb_begin)] += t.c * *mom;
            }
        }
    }
    return out;
}

inline RMatrix gram_block(const Basis& basis, std::size_t blk, int k)
{
    const auto [begin, end] = basis.blocks[blk];
    const int m = 2 * basis.rho_power + k + basis.weight;
    RMatrix g = rzeros(static_cast<std::size_t>(end - begin), static_cast<std::size_t>(end - begin));
    for (int i = begin; i < end; ++i)
        for (int j = begin; j < end; ++j) {
            const auto& u = basis.elems[i];
            const auto& v = basis.elems[j];
            g[i - begin][j - begin] = *chart_moment(v.a + u.b, v.b + u.a, m);
        }
    return g;
}

inline Eigen::MatrixXd to_dense(const BlockMatrix& bm, const Basis& rows, const Basis& cols)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows.size(), cols.size());
    for (const auto& [key, blk] : bm) {
        const int r0 = rows.blocks[key.first].first;
        const int c0 = cols.blocks[key.second].first;
        for (std::size_t i = 0; i < blk.size(); ++i)
            for (std::size_t j = 0; j < blk[i].size(); ++j)
                out(r0 + static_cast<int>(i), c0 + static_cast<int>(j)) = to_double(blk[i][j]);
    }
    return out;
}

inline std::vector<EigenGroup> group_eigenvalues(const std::vector<double>& sorted)
{
    std::vector<EigenGroup> out;
    for (double v : sorted) {
        if (!out.empty() && std::abs(v - out.back().value) <= 1e-8 * std::max(1.0, std::abs(v)))
            ++out.back().multiplicity;
        else
            out.push_back({v, 1});
    }
    return out;
}

} // namespace detail

/// Immutable truncated spectral model. Copies share the underlying data.
class SpectralModel {
public:
    [[nodiscard]] int k() const { return impl_->summary.k; }
    [[nodiscard]] int trunc() const { return impl_->summary.trunc; }
    [[nodiscard]] const SpectrumSummary& summary() const { return impl_->summary; }
    [[nodiscard]] const std::vector<double>& eigenvalues(int degree) const { return degree == 0 ? impl_->evals0 : impl_->evals1; }
    [[nodiscard]] const Eigen::MatrixXd& eigenvectors(int degree) const { return degree == 0 ? impl_->evecs0 : impl_->evecs1; }
    [[nodiscard]] unsigned harmonic_dim(int degree) const
    {
        return degree == 0 ? impl_->summary.harmonic0_dim : impl_->summary.harmonic1_dim;
    }
    /// Columns span the numerical kernel in model coordinates.
    [[nodiscard]] Eigen::MatrixXd harmonic_basis(int degree) const
    {
        return eigenvectors(degree).leftCols(harmonic_dim(degree));
    }
    [[nodiscard]] int dimension(int degree) const { return degree == 0 ? impl_->deg0.basis.size() : impl_->deg1.basis.size(); }

    /// Exact Gram matrix of a degree's trial basis (dense; for inspection and tests).
    [[nodiscard]] detail::RMatrix gram(int degree) const
    {
        const auto& b = degree == 0 ? impl_->deg0.basis : impl_->deg1.basis;
        detail::RMatrix g = detail::rzeros(b.size(), b.size());
        for (std::size_t blk = 0; blk < b.blocks.size(); ++blk) {
            const auto gb = detail::gram_block(b, blk, k());
            const int o = b.blocks[blk].first;
            for (std::size_t i = 0; i < gb.size(); ++i)
                for (std::size_t j = 0; j < gb.size(); ++j)
                    g[o + i][o + j] = gb[i][j];
        }
        return g;
    }

    /// Matrix of <op x, y> in model coordinates (those of the eigenvectors).
    [[nodiscard]] Eigen::MatrixXd operator_matrix(const weyl::Element& op, int degree) const
    {
        if (op.n() != 1)
            throw InvalidInput("operators on P^1 must live in A_1");
        for (const auto& [m, c] : op.terms())
            if (static_cast<int>(m.z[0]) > trunc())
                throw EscapesTruncation("coefficient degree " + std::to_string(m.z[0]) + " exceeds truncation " +
                                        std::to_string(trunc()));
        const auto& dd = degree == 0 ? impl_->deg0 : impl_->deg1;
        const auto raw = detail::operator_blocks(op, dd.basis, k());
        if (!impl_->orthonormal)
            return detail::to_dense(raw, dd.basis, dd.basis);
        detail::BlockMatrix conj;
        for (const auto& [key, blk] : raw)
            conj[key] = detail::rmul(detail::rmul(dd.l_inv[key.first], blk), detail::rtranspose(dd.l_inv[key.second]));
        Eigen::MatrixXd out = detail::to_dense(conj, dd.basis, dd.basis);
        for (int i = 0; i < out.rows(); ++i)
            for (int j = 0; j < out.cols(); ++j)
                out(i, j) /= dd.sqrt_d[i] * dd.sqrt_d[j];
        return out;
    }

    friend SpectralModel build_model(int k, int trunc, const BuildOptions& opts);

private:
    struct Impl {
        SpectrumSummary summary;
        bool orthonormal = true;
        detail::DegreeData deg0;
        detail::DegreeData deg1;
        std::vector<double> evals0, evals1;
        Eigen::MatrixXd evecs0, evecs1;
        Impl(detail::Basis b0, detail::Basis b1) : deg0(std::move(b0)), deg1(std::move(b1)) {}
    };
    std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline double condition_estimate(const Eigen::MatrixXd& g)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo <= 0 ? std::numeric_limits<double>::infinity() : hi / lo;
}

inline void finish_spectrum(const Eigen::VectorXd& evals, const BuildOptions& opts, double scale, std::vector<double>& out,
                            unsigned& zero_count)
{
    out.resize(static_cast<std::size_t>(evals.size()));
    zero_count = 0;
    for (int i = 0; i < evals.size(); ++i) {
        double v = std::max(0.0, evals(i));
        if (v < opts.zero_threshold * scale) {
            v = 0.0;
            ++zero_count;
        }
        out[static_cast<std::size_t>(i)] = v;
    }
}

} // namespace detail

inline void validate_parameters(int k, int trunc)
{
    if (k < 0)
        throw InvalidInput("--k: negative bundle degree is not supported (got " + std::to_string(k) + ")");
    if (trunc < k + 2)
        throw InvalidInput("--trunc: truncation N must satisfy N >= k + 2 (got N = " + std::to_string(trunc) +
                           ", k = " + std::to_string(k) + ")");
}

/// Assembles the exact Gram and dbar matrices for O(k) at truncation `trunc` and solves for both spectra.
inline SpectralModel build_model(int k, int trunc, const BuildOptions& opts = {})
{
    validate_parameters(k, trunc);
    using namespace detail;

    auto impl = std::make_shared<SpectralModel::Impl>(Basis(trunc + k, trunc, trunc, 2),
                                                     Basis(trunc + k + 1, trunc - 1, trunc + 1, 0));
    impl->summary.k = k;
    impl->summary.trunc = trunc;
    impl->orthonormal = opts.orthogonalization == Orthogonalization::exact_ldlt;
    impl->summary.convention = impl->orthonormal ? convention_exact : convention_raw;

    const Basis& b0 = impl->deg0.basis;
    const Basis& b1 = impl->deg1.basis;

    // dbar e_ab = b f_{a,b-1} + (b - N) f_{a+1,b}; charge q block of degree 0 -> charge q+1 block of degree 1.
    BlockMatrix dbar;
    for (std::size_t blk = 0; blk < b0.blocks.size(); ++blk) {
        const int q = b0.charges[blk];
        const auto target = b1.block_of_charge(q + 1);
        if (!target)
            continue;
        const auto [c0, c1] = b0.blocks[blk];
        const auto [r0, r1] = b1.blocks[*target];
        RMatrix m = rzeros(static_cast<std::size_t>(r1 - r0), static_cast<std::size_t>(c1 - c0));
        for (int v = c0; v < c1; ++v) {
            const auto [a, b] = b0.elems[v];
            if (b > 0)
                m[b1.lookup.at({a, b - 1}) - r0][v - c0] += b;
            if (b != trunc)
                m[b1.lookup.at({a + 1, b}) - r0][v - c0] += b - trunc;
        }
        dbar[{*target, blk}] = std::move(m);
    }

    Eigen::MatrixXd delta0, delta1, mass0, mass1;
    if (impl->orthonormal) {
        for (DegreeData* dd : {&impl->deg0, &impl->deg1}) {
            dd->l_inv.resize(dd->basis.blocks.size());
            dd->d.resize(dd->basis.blocks.size());
            dd->sqrt_d.assign(static_cast<std::size_t>(dd->basis.size()), 0.0);
            for (std::size_t blk = 0; blk < dd->basis.blocks.size(); ++blk) {
                exact_ldlt_inverse(gram_block(dd->basis, blk, k), dd->l_inv[blk], dd->d[blk]);
                for (std::size_t i = 0; i < dd->d[blk].size(); ++i)
                    dd->sqrt_d[static_cast<std::size_t>(dd->basis.blocks[blk].first) + i] = std::sqrt(to_double(dd->d[blk][i]));
            }
        }
        // M = D1^{1/2} L1^T dbar L0^{-T} D0^{-1/2}. L1^T = (L1^{-1})^{-T}; recover L1 by exact inversion.
        BlockMatrix exact_m;
        for (const auto& [key, blk] : dbar) {
            const RMatrix& l1_inv = impl->deg1.l_inv[key.first];
            // Invert the unit lower triangular L1^{-1} to get L1.
            const std::size_t n1 = l1_inv.size();
            RMatrix l1 = rzeros(n1, n1);
            for (std::size_t j = 0; j < n1; ++j) {
                l1[j][j] = 1;
                for (std::size_t i = j + 1; i < n1; ++i) {
                    Rational s = 0;
                    for (std::size_t kk = j; kk < i; ++kk)
                        s -= l1_inv[i][kk] * l1[kk][j];
                    l1[i][j] = s;
                }
            }
            exact_m[key] = rmul(rmul(rtranspose(l1), blk), rtranspose(impl->deg0.l_inv[key.second]));
        }
        Eigen::MatrixXd m = to_dense(exact_m, b1, b0);
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                m(i, j) *= impl->deg1.sqrt_d[i] / impl->deg0.sqrt_d[j];
        delta0 = m.transpose() * m;
        delta1 = m * m.transpose();
    } else {
        BlockMatrix g0, g1;
        for (std::size_t blk = 0; blk < b0.blocks.size(); ++blk)
            g0[{blk, blk}] = gram_block(b0, blk, k);
        for (std::size_t blk = 0; blk < b1.blocks.size(); ++blk)
            g1[{blk, blk}] = gram_block(b1, blk, k);
        mass0 = to_dense(g0, b0, b0);
        mass1 = to_dense(g1, b1, b1);
        const double cond = std::max(condition_estimate(mass0), condition_estimate(mass1));
        if (!(cond <= opts.max_condition))
            throw IllConditioned("Gram matrix condition estimate " + std::to_string(cond) + " exceeds " +
                                 std::to_string(opts.max_condition) +
                                 "; use a smaller truncation or the exactly orthogonalized basis");
        const Eigen::MatrixXd d = to_dense(dbar, b1, b0);
        delta0 = d.transpose() * mass1 * d;
        delta1 = mass1 * d * mass0.ldlt().solve(d.transpose()) * mass1;
        delta0 = 0.5 * (delta0 + delta0.transpose());
        delta1 = 0.5 * (delta1 + delta1.transpose());
    }

    Eigen::VectorXd ev0, ev1;
    if (impl->orthonormal) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s0(delta0), s1(delta1);
        ev0 = s0.eigenvalues();
        ev1 = s1.eigenvalues();
        impl->evecs0 = s0.eigenvectors();
        impl->evecs1 = s1.eigenvectors();
    } else {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> s0(delta0, mass0), s1(delta1, mass1);
        ev0 = s0.eigenvalues();
        ev1 = s1.eigenvalues();
        impl->evecs0 = s0.eigenvectors();
        impl->evecs1 = s1.eigenvectors();
    }
    const double scale = std::max(ev0.size() ? ev0.maxCoeff() : 0.0, ev1.size() ? ev1.maxCoeff() : 0.0);
    finish_spectrum(ev0, opts, scale, impl->evals0, impl->summary.harmonic0_dim);
    finish_spectrum(ev1, opts, scale, impl->evals1, impl->summary.harmonic1_dim);
    impl->summary.eigs0 = group_eigenvalues(impl->evals0);
    impl->summary.eigs1 = group_eigenvalues(impl->evals1);

    SpectralModel model;
    model.impl_ = std::move(impl);
    return model;
}

// ---------------------------------------------------------------------------

/// str e^{-t Delta} = sum over degree 0 minus sum over degree 1 of mult * e^{-t lambda}.
inline double heat_supertrace(const SpectrumSummary& s, double t)
{
    if (!(t > 0))
        throw InvalidInput("heat_supertrace: t must be positive");
    numeric::CompensatedSum sum;
    for (const auto& g : s.eigs0)
        sum.add(g.multiplicity * std::exp(-t * g.value));
    for (const auto& g : s.eigs1)
        sum.add(-static_cast<double>(g.multiplicity) * std::exp(-t * g.value));
    return sum.value();
}

inline double heat_supertrace(const SpectralModel& m, double t)
{
    return heat_supertrace(m.summary(), t);
}

namespace detail {

inline double weighted_trace(const Eigen::MatrixXd& vecs, const Eigen::MatrixXd& op)
{
    if (vecs.cols() == 0)
        return 0.0;
    return (vecs.transpose() * op * vecs).trace();
}

} // namespace detail

/// str(P0 D P0): trace of D on the degree-0 harmonic space minus the trace on degree 1.
inline double harmonic_supertrace(const SpectralModel& m, const weyl::Element& op)
{
    double s = detail::weighted_trace(m.harmonic_basis(0), m.operator_matrix(op, 0));
    if (m.harmonic_dim(1) > 0)
        s -= detail::weighted_trace(m.harmonic_basis(1), m.operator_matrix(op, 1));
    return s;
}

struct LimitSeries {
    std::vector<double> series;
    double limit_estimate = 0.0;
};

/// str(D e^{-t Delta}) on each grid point via the eigenbasis; the estimate is the value at the largest t.
inline LimitSeries limit_supertrace(const SpectralModel& m, const weyl::Element& op, const std::vector<double>& t_grid)
{
    if (t_grid.empty())
        throw InvalidInput("limit_supertrace: empty t grid has no limit estimate");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0))
            throw InvalidInput("limit_supertrace: t values must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw InvalidInput("limit_supertrace: t grid must be strictly increasing");
    }
    const Eigen::MatrixXd& v0 = m.eigenvectors(0);
    const Eigen::MatrixXd& v1 = m.eigenvectors(1);
    const Eigen::VectorXd diag0 = (v0.transpose() * m.operator_matrix(op, 0) * v0).diagonal();
    const Eigen::VectorXd diag1 = (v1.transpose() * m.operator_matrix(op, 1) * v1).diagonal();
    const auto& l0 = m.eigenvalues(0);
    const auto& l1 = m.eigenvalues(1);

    LimitSeries out;
    for (double t : t_grid) {
        numeric::CompensatedSum s;
        for (int i = 0; i < diag0.size(); ++i)
            s.add(std::exp(-t * l0[static_cast<std::size_t>(i)]) * diag0(i));
        for (int i = 0; i < diag1.size(); ++i)
            s.add(-std::exp(-t * l1[static_cast<std::size_t>(i)]) * diag1(i));
        out.series.push_back(s.value());
    }
    out.limit_estimate = out.series.back();
    return out;
}

/// Nonzero eigenvalues (with multiplicity, ascending) of one degree.
inline std::vector<double> nonzero_eigenvalues(const SpectralModel& m, int degree)
{
    std::vector<double> out;
    for (double v : m.eigenvalues(degree))
        if (v > 0)
            out.push_back(v);
    return out;
}

// ---------------------------------------------------------------------------
// Spectral cache: one JSON file per (k, N, convention).

inline nlohmann::ordered_json to_json(const SpectrumSummary& s)
{
    auto groups = [](const std::vector<EigenGroup>& gs) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& g : gs)
            arr.push_back({{"value", g.value}, {"multiplicity", g.multiplicity}});
        return arr;
    };
    nlohmann::ordered_json j;
    j["k"] = s.k;
    j["trunc"] = s.trunc;
    j["convention"] = s.convention;
    j["harmonic0_dim"] = s.harmonic0_dim;
    j["harmonic1_dim"] = s.harmonic1_dim;
    j["eigs0"] = groups(s.eigs0);
    j["eigs1"] = groups(s.eigs1);
    return j;
}

inline SpectrumSummary summary_from_json(const nlohmann::json& j)
{
    auto groups = [](const nlohmann::json& arr) {
        std::vector<EigenGroup> out;
        for (const auto& g : arr)
            out.push_back({g.at("value").get<double>(), g.at("multiplicity").get<unsigned>()});
        return out;
    };
    SpectrumSummary s;
    s.k = j.at("k").get<int>();
    s.trunc = j.at("trunc").get<int>();
    s.convention = j.at("convention").get<std::string>();
    s.harmonic0_dim = j.at("harmonic0_dim").get<unsigned>();
    s.harmonic1_dim = j.at("harmonic1_dim").get<unsigned>();
    s.eigs0 = groups(j.at("eigs0"));
    s.eigs1 = groups(j.at("eigs1"));
    return s;
}

inline std::filesystem::path cache_path(const std::filesystem::path& dir, int k, int trunc, const std::string& convention)
{
    std::string tag = convention;
    std::replace(tag.begin(), tag.end(), '/', '_');
    return dir / ("spectrum_k" + std::to_string(k) + "_N" + std::to_string(trunc) + "_" + tag + ".json");
}

inline std::optional<SpectrumSummary> load_cached(const std::filesystem::path& dir, int k, int trunc,
                                                  const std::string& convention = convention_exact)
{
    const auto p = cache_path(dir, k, trunc, convention);
    std::ifstream in(p);
    if (!in)
        return std::nullopt;
    try {
        auto s = summary_from_json(nlohmann::json::parse(in));
        if (s.k != k || s.trunc != trunc || s.convention != convention)
            return std::nullopt;
        return s;
    } catch (const std::exception&) {
        return std::nullopt; // unreadable entries are recomputed
    }
}

inline void store_cached(const std::filesystem::path& dir, const SpectrumSummary& s)
{
    std::filesystem::create_directories(dir);
    const auto p = cache_path(dir, s.k, s.trunc, s.convention);
    // unique per writer so concurrent stores of the same key never share a temporary
    const auto tmp = p.string() + "." + std::to_string(::getpid()) + "." +
                     std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw Error("cannot write spectral cache entry " + tmp);
        out << to_json(s).dump(2) << '\n';
    }
    std::filesystem::rename(tmp, p);
}

/// Spectrum summary through the cache when a directory is given.
inline SpectrumSummary spectrum(int k, int trunc, const std::optional<std::filesystem::path>& cache_dir)
{
    validate_parameters(k, trunc);
    if (cache_dir) {
        if (auto hit = load_cached(*cache_dir, k, trunc))
            return *hit;
    }
    auto s = build_model(k, trunc).summary();
    if (cache_dir)
        store_cached(*cache_dir, s);
    return s;
}

} // namespace hochheat::dolbeault

#pragma once

// Hochschild, bar and cyclic chains over the Weyl algebra.
//
// A chain is a finite rational combination of words m_0 (x) m_1 (x) ... (x) m_k whose
// slots are normal-ordered Weyl monomials. Words built from general elements are
// expanded multilinearly, so equal chains have equal term maps.

#include "hochheat/weyl_algebra.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace hochheat::hochschild {

using weyl::Element;
using weyl::Monomial;
using Word = std::vector<Monomial>;

class TensorChain {
public:
    using Map = std::map<Word, Rational>;

    TensorChain() = default;
    explicit TensorChain(unsigned n) : n_(n) {}

    /// c * (a_0 (x) ... (x) a_k), expanded over the monomials of every slot.
    static TensorChain from_word(const Rational& c, const std::vector<Element>& slots)
    {
        if (slots.empty())
            throw InvalidInput("a chain word needs at least one slot");
        const unsigned n = slots.front().n();
        TensorChain out(n);
        for (const auto& s : slots)
            if (s.n() != n)
                throw InvalidInput("chain word mixes variable counts");
        Word w(slots.size());
        expand(out, slots, 0, c, w);
        return out;
    }

    static TensorChain from_monomials(const Rational& c, Word w)
    {
        if (w.empty())
            throw InvalidInput("a chain word needs at least one slot");
        TensorChain out(w.front().n());
        out.add_term(w, c);
        return out;
    }

    void add_term(const Word& w, const Rational& c)
    {
        if (c == 0)
            return;
        for (const auto& m : w)
            if (m.n() != n_)
                throw InvalidInput("chain word variable count mismatch");
        auto [it, inserted] = terms_.try_emplace(w, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0)
                terms_.erase(it);
        }
    }

    void add(const TensorChain& other, const Rational& c = 1)
    {
        weyl::detail::require_same_n(n_, other.n_, "chain add");
        if (c == 0)
            return;
        for (const auto& [w, x] : other.terms_)
            add_term(w, c * x);
    }

    [[nodiscard]] unsigned n() const noexcept { return n_; }
    [[nodiscard]] const Map& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }

    /// Largest word degree present, -1 for the zero chain.
    [[nodiscard]] int max_degree() const noexcept
    {
        int d = -1;
        for (const auto& [w, c] : terms_)
            d = std::max(d, static_cast<int>(w.size()) - 1);
        return d;
    }

    [[nodiscard]] TensorChain degree_part(int k) const
    {
        TensorChain out(n_);
        for (const auto& [w, c] : terms_)
            if (static_cast<int>(w.size()) - 1 == k)
                out.terms_.emplace(w, c);
        return out;
    }

    friend bool operator==(const TensorChain&, const TensorChain&) = default;

private:
    static void expand(TensorChain& out, const std::vector<Element>& slots, std::size_t i, const Rational& c, Word& w)
    {
        if (i == slots.size()) {
            out.add_term(w, c);
            return;
        }
        for (const auto& [m, x] : slots[i].terms()) {
            w[i] = m;
            expand(out, slots, i + 1, c * x, w);
        }
    }

    unsigned n_ = 0;
    Map terms_;
};

inline TensorChain operator+(TensorChain a, const TensorChain& b)
{
    a.add(b);
    return a;
}
inline TensorChain operator-(TensorChain a, const TensorChain& b)
{
    a.add(b, -1);
    return a;
}
inline TensorChain scale(const Rational& c, const TensorChain& a)
{
    TensorChain out(a.n());
    out.add(a, c);
    return out;
}

namespace detail {

// Adds c * (w with slots i, i+1 replaced by their product) into out.
inline void add_contracted(TensorChain& out, const Word& w, std::size_t i, const Rational& c)
{
    weyl::TermMap prod;
    weyl::mul_into(prod, w[i], w[i + 1], 1);
    Word nw;
    nw.reserve(w.size() - 1);
    nw.insert(nw.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
    nw.emplace_back();
    nw.insert(nw.end(), w.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.end());
    for (const auto& [m, x] : prod) {
        nw[i] = m;
        out.add_term(nw, c * x);
    }
}

inline Rational sign(std::size_t k) { return (k % 2 == 0) ? Rational(1) : Rational(-1); }

} // namespace detail

/// b' : the alternating sum of inner multiplications, without the wrap-around term.
inline TensorChain bar_bprime(const TensorChain& c)
{
    TensorChain out(c.n());
    for (const auto& [w, x] : c.terms()) {
        const std::size_t k = w.size() - 1;
        for (std::size_t i = 0; i < k; ++i)
            detail::add_contracted(out, w, i, detail::sign(i) * x);
    }
    return out;
}

/// Hochschild boundary b = b' + (-1)^k (a_k a_0) (x) a_1 (x) ... (x) a_{k-1}.
inline TensorChain hochschild_b(const TensorChain& c)
{
    TensorChain out = bar_bprime(c);
    for (const auto& [w, x] : c.terms()) {
        const std::size_t k = w.size() - 1;
        if (k == 0)
            continue;
        weyl::TermMap prod;
        weyl::mul_into(prod, w[k], w[0], 1);
        Word nw(w.begin(), w.end() - 1);
        for (const auto& [m, y] : prod) {
            nw[0] = m;
            out.add_term(nw, detail::sign(k) * x * y);
        }
    }
    return out;
}

/// tau(a_0 (x) ... (x) a_k) = (-1)^k a_k (x) a_0 (x) ... (x) a_{k-1}.
inline TensorChain cyclic_tau(const TensorChain& c)
{
    TensorChain out(c.n());
    for (const auto& [w, x] : c.terms()) {
        const std::size_t k = w.size() - 1;
        Word nw;
        nw.reserve(w.size());
        nw.push_back(w.back());
        nw.insert(nw.end(), w.begin(), w.end() - 1);
        out.add_term(nw, detail::sign(k) * x);
    }
    return out;
}

/// (1 - tau)
inline TensorChain one_minus_tau(const TensorChain& c)
{
    return c - cyclic_tau(c);
}

/// N = sum_{j=0}^{k} tau^j on degree-k words.
inline TensorChain norm_N(const TensorChain& c)
{
    TensorChain out(c.n());
    for (const auto& [w, x] : c.terms()) {
        const std::size_t k = w.size() - 1;
        Word cur = w;
        Rational s = x;
        for (std::size_t j = 0; j <= k; ++j) {
            out.add_term(cur, s);
            std::rotate(cur.rbegin(), cur.rbegin() + 1, cur.rend());
            s *= detail::sign(k);
        }
    }
    return out;
}

/// Drops every word with the unit in a slot other than slot 0. Idempotent.
inline TensorChain normalize(const TensorChain& c)
{
    TensorChain out(c.n());
    for (const auto& [w, x] : c.terms()) {
        bool degenerate = false;
        for (std::size_t i = 1; i < w.size() && !degenerate; ++i)
            degenerate = w[i].is_unit();
        if (!degenerate)
            out.add_term(w, x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shuffle product C(A_n) (x) C(A_m) -> C(A_{n+m}).

/// Calls f(mask, sign) for every (p,q)-shuffle. Bit i of mask set means interior
/// position i receives the next element of the first word.
template <typename F>
void for_each_shuffle(unsigned p, unsigned q, F&& f)
{
    const unsigned total = p + q;
    if (total > 63)
        throw InvalidInput("shuffle too long");
    // Enumerate p-subsets of {0..total-1} by Gosper's hack.
    if (p == 0) {
        f(std::uint64_t{0}, 1);
        return;
    }
    std::uint64_t mask = (std::uint64_t{1} << p) - 1;
    const std::uint64_t limit = std::uint64_t{1} << total;
    while (mask < limit) {
        // sign = (-1)^{number of (b, a) pairs with b placed before a}
        unsigned inversions = 0;
        unsigned bs_seen = 0;
        for (unsigned i = 0; i < total; ++i) {
            if (mask >> i & 1U)
                inversions += bs_seen;
            else
                ++bs_seen;
        }
        f(mask, (inversions % 2 == 0) ? 1 : -1);
        const std::uint64_t c = mask & (~mask + 1);
        const std::uint64_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}

inline TensorChain shuffle_product(const TensorChain& c1, const TensorChain& c2)
{
    const unsigned n = c1.n();
    const unsigned total = c1.n() + c2.n();
    TensorChain out(total);
    for (const auto& [w1, x1] : c1.terms()) {
        Word a;
        a.reserve(w1.size());
        for (const auto& m : w1)
            a.push_back(weyl::embed_monomial(m, 0, total));
        for (const auto& [w2, x2] : c2.terms()) {
            Word b;
            b.reserve(w2.size());
            for (const auto& m : w2)
                b.push_back(weyl::embed_monomial(m, n, total));

            // Disjoint blocks commute and a_0 b_0 is already normal ordered.
            weyl::TermMap head;
            weyl::mul_into(head, a[0], b[0], 1);

            const auto p = static_cast<unsigned>(a.size() - 1);
            const auto q = static_cast<unsigned>(b.size() - 1);
            Word w(p + q + 1);
            for_each_shuffle(p, q, [&](std::uint64_t mask, int sgn) {
                std::size_t ia = 1;
                std::size_t ib = 1;
                for (unsigned i = 0; i < p + q; ++i)
                    w[i + 1] = (mask >> i & 1U) ? a[ia++] : b[ib++];
                for (const auto& [m, y] : head) {
                    w[0] = m;
                    out.add_term(w, Rational(sgn) * x1 * x2 * y);
                }
            });
        }
    }
    return out;
}

/// omega(z) = 1 (x) d (x) z - 1 (x) z (x) d + 1 (x) 1 (x) 1 over A_1.
inline TensorChain omega_generator()
{
    const auto one = Element::one(1);
    const auto z = Element::z(1, 1);
    const auto d = Element::d(1, 1);
    TensorChain w = TensorChain::from_word(1, {one, d, z});
    w.add(TensorChain::from_word(-1, {one, z, d}));
    w.add(TensorChain::from_word(1, {one, one, one}));
    return w;
}

/// omega_{2n} = omega(z_1) sh omega(z_2) sh ... sh omega(z_n), a Hochschild 2n-cycle of A_n.
inline TensorChain omega_cycle(unsigned n)
{
    if (n == 0)
        throw InvalidInput("omega_cycle: n must be positive");
    const TensorChain gen = omega_generator();
    TensorChain out = gen;
    for (unsigned i = 1; i < n; ++i)
        out = shuffle_product(out, gen);
    return out;
}

/// sum_{sigma in S_2n} sgn(sigma) 1 (x) sigma(d_1 (x) z_1 (x) ... (x) d_n (x) z_n), enumerated directly.
inline TensorChain signed_permutation_sum(unsigned n)
{
    if (n == 0)
        throw InvalidInput("signed_permutation_sum: n must be positive");
    Word base;
    for (unsigned i = 1; i <= n; ++i) {
        base.push_back(Element::d(n, i).terms().begin()->first);
        base.push_back(Element::z(n, i).terms().begin()->first);
    }
    std::vector<unsigned> perm(2 * n);
    std::iota(perm.begin(), perm.end(), 0u);
    TensorChain out(n);
    Word w(2 * n + 1, Monomial(n));
    do {
        unsigned inversions = 0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = i + 1; j < perm.size(); ++j)
                inversions += perm[i] > perm[j] ? 1 : 0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            w[i + 1] = base[perm[i]];
        out.add_term(w, inversions % 2 == 0 ? 1 : -1);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

// ---------------------------------------------------------------------------
// Polynomial differential forms on T*U: commuting z_i, y_i and anticommuting dz_i, dy_i.

class PolyForm {
public:
    /// Commuting exponents: z_1..z_n followed by y_1..y_n.
    /// Anticommuting generators are bits of a mask in the order dy_1, dz_1, dy_2, dz_2, ...
    struct Key {
        weyl::Exponents poly;
        std::uint64_t wedge = 0;
        friend bool operator==(const Key&, const Key&) = default;
        friend bool operator<(const Key& a, const Key& b) { return std::tie(a.wedge, a.poly) < std::tie(b.wedge, b.poly); }
    };
    using Map = std::map<Key, Rational>;

    PolyForm() = default;
    explicit PolyForm(unsigned n) : n_(n)
    {
        if (2 * n > 64)
            throw InvalidInput("PolyForm supports at most 32 variables");
    }

    static unsigned dy_bit(unsigned i) { return 2 * (i - 1); }
    static unsigned dz_bit(unsigned i) { return 2 * (i - 1) + 1; }

    static PolyForm constant(unsigned n, const Rational& c)
    {
        PolyForm f(n);
        f.add_term({weyl::Exponents(2 * n, 0), 0}, c);
        return f;
    }

    /// dy_1 ^ dz_1 ^ ... ^ dy_n ^ dz_n with coefficient 1.
    static PolyForm volume(unsigned n)
    {
        PolyForm f(n);
        const std::uint64_t mask = (2 * n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (2 * n)) - 1);
        f.add_term({weyl::Exponents(2 * n, 0), mask}, 1);
        return f;
    }

    void add_term(const Key& k, const Rational& c)
    {
        if (c == 0)
            return;
        if (k.poly.size() != 2 * n_)
            throw InvalidInput("PolyForm exponent length mismatch");
        auto [it, inserted] = terms_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0)
                terms_.erase(it);
        }
    }

    void add(const PolyForm& o, const Rational& c = 1)
    {
        weyl::detail::require_same_n(n_, o.n_, "form add");
        for (const auto& [k, x] : o.terms_)
            add_term(k, c * x);
    }

    [[nodiscard]] unsigned n() const noexcept { return n_; }
    [[nodiscard]] const Map& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    friend bool operator==(const PolyForm&, const PolyForm&) = default;

private:
    unsigned n_ = 0;
    Map terms_;
};

/// Sign of moving the generators of `b` to the right of those of `a` into canonical order; 0 if they overlap.
inline int wedge_sign(std::uint64_t a, std::uint64_t b)
{
    if (a & b)
        return 0;
    unsigned swaps = 0;
    for (std::uint64_t rest = b; rest; rest &= rest - 1) {
        const unsigned bit = static_cast<unsigned>(std::countr_zero(rest));
        // generators of a that sit after this generator of b
        swaps += static_cast<unsigned>(std::popcount(a >> bit));
    }
    return swaps % 2 == 0 ? 1 : -1;
}

inline PolyForm wedge(const PolyForm& f, const PolyForm& g)
{
    weyl::detail::require_same_n(f.n(), g.n(), "wedge");
    PolyForm out(f.n());
    for (const auto& [kf, cf] : f.terms()) {
        for (const auto& [kg, cg] : g.terms()) {
            const int s = wedge_sign(kf.wedge, kg.wedge);
            if (s == 0)
                continue;
            PolyForm::Key k{kf.poly, kf.wedge | kg.wedge};
            for (std::size_t i = 0; i < k.poly.size(); ++i)
                k.poly[i] += kg.poly[i];
            out.add_term(k, Rational(s) * cf * cg);
        }
    }
    return out;
}

/// Total symbol z^a d^b -> z^a y^b as a 0-form.
inline PolyForm symbol(const Monomial& m)
{
    const unsigned n = m.n();
    PolyForm f(n);
    weyl::Exponents e(2 * n);
    std::copy(m.z.begin(), m.z.end(), e.begin());
    std::copy(m.d.begin(), m.d.end(), e.begin() + n);
    f.add_term({e, 0}, 1);
    return f;
}

/// Exterior derivative of a 0-form, sum_i (d/dz_i) dz_i + (d/dy_i) dy_i.
inline PolyForm exterior_d(const PolyForm& f)
{
    const unsigned n = f.n();
    PolyForm out(n);
    for (const auto& [k, c] : f.terms()) {
        if (k.wedge != 0)
            throw InvalidInput("exterior_d is only implemented on 0-forms");
        for (unsigned v = 0; v < 2 * n; ++v) {
            if (k.poly[v] == 0)
                continue;
            PolyForm::Key nk = k;
            nk.poly[v] -= 1;
            const unsigned var = v % n + 1;
            nk.wedge = std::uint64_t{1} << (v < n ? PolyForm::dz_bit(var) : PolyForm::dy_bit(var));
            out.add_term(nk, c * k.poly[v]);
        }
    }
    return out;
}

/// a_0 (x) ... (x) a_k -> (1/k!) sigma(a_0) dsigma(a_1) ^ ... ^ dsigma(a_k), extended linearly.
inline PolyForm hkr_symbol(const TensorChain& c)
{
    PolyForm out(c.n());
    for (const auto& [w, x] : c.terms()) {
        PolyForm term = symbol(w[0]);
        for (std::size_t i = 1; i < w.size() && !term.is_zero(); ++i)
            term = wedge(term, exterior_d(symbol(w[i])));
        out.add(term, x / factorial(static_cast<unsigned>(w.size() - 1)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tsygan double complex. Even columns carry b, odd columns carry -b'.
// Horizontal maps: odd column p -> p-1 by (1 - tau), even column p >= 2 -> p-1 by N.

class TsyganColumnVector {
public:
    TsyganColumnVector() = default;
    explicit TsyganColumnVector(unsigned n) : n_(n) {}

    void add(unsigned column, const TensorChain& c)
    {
        weyl::detail::require_same_n(n_, c.n(), "tsygan column");
        auto& slot = columns_.try_emplace(column, TensorChain(n_)).first->second;
        slot.add(c);
        if (slot.is_zero())
            columns_.erase(column);
    }

    [[nodiscard]] unsigned n() const noexcept { return n_; }
    [[nodiscard]] const std::map<unsigned, TensorChain>& columns() const noexcept { return columns_; }
    [[nodiscard]] bool is_zero() const noexcept { return columns_.empty(); }

    [[nodiscard]] TensorChain column(unsigned p) const
    {
        auto it = columns_.find(p);
        return it == columns_.end() ? TensorChain(n_) : it->second;
    }

    friend bool operator==(const TsyganColumnVector&, const TsyganColumnVector&) = default;

private:
    unsigned n_ = 0;
    std::map<unsigned, TensorChain> columns_;
};

inline TsyganColumnVector tsygan_d(const TsyganColumnVector& v)
{
    TsyganColumnVector out(v.n());
    for (const auto& [p, c] : v.columns()) {
        if (p % 2 == 0) {
            out.add(p, hochschild_b(c));
            if (p >= 2)
                out.add(p - 1, norm_N(c));
        } else {
            out.add(p, scale(-1, bar_bprime(c)));
            out.add(p - 1, one_minus_tau(c));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON: [{"coeff": "p/q", "word": ["z1*d1", ...]}, ...]

inline nlohmann::json to_json(const TensorChain& c)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [w, x] : c.terms()) {
        nlohmann::json words = nlohmann::json::array();
        for (const auto& m : w)
            words.push_back(weyl::to_string(Element::monomial(m)));
        arr.push_back({{"coeff", x.str()}, {"word", words}});
    }
    return arr;
}

inline TensorChain chain_from_json(const nlohmann::json& j, unsigned n)
{
    if (!j.is_array())
        throw InvalidInput("chain JSON must be an array");
    TensorChain out(n);
    for (const auto& t : j) {
        if (!t.contains("coeff") || !t.contains("word") || !t["word"].is_array())
            throw InvalidInput("chain JSON term needs 'coeff' and 'word'");
        std::vector<Element> slots;
        for (const auto& s : t["word"])
            slots.push_back(weyl::parse_element(s.get<std::string>(), n));
        out.add(TensorChain::from_word(parse_rational(t["coeff"].get<std::string>()), slots));
    }
    return out;
}

inline std::string wedge_string(std::uint64_t mask)
{
    std::string out;
    for (std::uint64_t rest = mask; rest; rest &= rest - 1) {
        const unsigned bit = static_cast<unsigned>(std::countr_zero(rest));
        if (!out.empty())
            out += '^';
        out += (bit % 2 == 0 ? "dy" : "dz") + std::to_string(bit / 2 + 1);
    }
    return out;
}

inline nlohmann::json to_json(const PolyForm& f)
{
    const unsigned n = f.n();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [k, x] : f.terms()) {
        std::string poly;
        for (unsigned v = 0; v < 2 * n; ++v) {
            if (k.poly[v] == 0)
                continue;
            if (!poly.empty())
                poly += '*';
            poly += (v < n ? "z" : "y") + std::to_string(v % n + 1);
            if (k.poly[v] > 1)
                poly += '^' + std::to_string(k.poly[v]);
        }
        arr.push_back({{"coeff", x.str()}, {"poly", poly.empty() ? "1" : poly}, {"wedge", wedge_string(k.wedge)}});
    }
    return arr;
}

} // namespace hochheat::hochschild

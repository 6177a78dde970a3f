#pragma once

// Exact arithmetic in the Weyl algebra A_n = Q<z_1..z_n, d_1..d_n> with [d_i, z_j] = delta_ij.
// Elements are kept in normal order: every monomial is z^a d^b with all z factors on the left.

#include "hochheat/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace hochheat::weyl {

using Exponents = std::vector<unsigned>;

/// z^{z_exp} d^{d_exp} in normal order.
struct Monomial {
    Exponents z;
    Exponents d;

    Monomial() = default;
    explicit Monomial(unsigned n) : z(n, 0), d(n, 0) {}
    Monomial(Exponents z_exp, Exponents d_exp) : z(std::move(z_exp)), d(std::move(d_exp))
    {
        if (z.size() != d.size())
            throw InvalidInput("monomial exponent vectors differ in length");
    }

    [[nodiscard]] unsigned n() const noexcept { return static_cast<unsigned>(z.size()); }

    [[nodiscard]] bool is_unit() const noexcept
    {
        return std::all_of(z.begin(), z.end(), [](unsigned e) { return e == 0; }) &&
               std::all_of(d.begin(), d.end(), [](unsigned e) { return e == 0; });
    }

    [[nodiscard]] unsigned degree() const noexcept
    {
        unsigned s = 0;
        for (unsigned e : z)
            s += e;
        for (unsigned e : d)
            s += e;
        return s;
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;
    friend bool operator<(const Monomial& a, const Monomial& b)
    {
        return std::tie(a.z, a.d) < std::tie(b.z, b.d);
    }
};

using TermMap = std::map<Monomial, Rational>;

inline void accumulate(TermMap& terms, const Monomial& m, const Rational& c)
{
    if (c == 0)
        return;
    auto [it, inserted] = terms.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            terms.erase(it);
    }
}

/// A normal-ordered element of A_n. No stored coefficient is zero.
class Element {
public:
    Element() = default;
    explicit Element(unsigned n) : n_(n) {}
    Element(unsigned n, TermMap terms) : n_(n), terms_(std::move(terms))
    {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->first.n() != n_)
                throw InvalidInput("monomial variable count does not match element");
            it = it->second == 0 ? terms_.erase(it) : std::next(it);
        }
    }

    static Element constant(unsigned n, const Rational& c)
    {
        Element e(n);
        accumulate(e.terms_, Monomial(n), c);
        return e;
    }
    static Element one(unsigned n) { return constant(n, 1); }

    /// The coordinate z_i (1-based index).
    static Element z(unsigned n, unsigned i) { return generator(n, i, true); }
    /// The derivation d/dz_i (1-based index).
    static Element d(unsigned n, unsigned i) { return generator(n, i, false); }

    static Element monomial(const Monomial& m, const Rational& c = 1)
    {
        Element e(m.n());
        accumulate(e.terms_, m, c);
        return e;
    }

    [[nodiscard]] unsigned n() const noexcept { return n_; }
    [[nodiscard]] const TermMap& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }

    /// True iff the element is a rational multiple of 1 (zero included).
    [[nodiscard]] bool is_scalar() const
    {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_unit());
    }

    friend bool operator==(const Element&, const Element&) = default;
    friend bool operator<(const Element& a, const Element& b)
    {
        return std::tie(a.n_, a.terms_) < std::tie(b.n_, b.terms_);
    }

private:
    static Element generator(unsigned n, unsigned i, bool is_z)
    {
        if (i == 0 || i > n)
            throw InvalidInput("generator index " + std::to_string(i) + " outside 1.." + std::to_string(n));
        Monomial m(n);
        (is_z ? m.z : m.d)[i - 1] = 1;
        return monomial(m);
    }

    unsigned n_ = 0;
    TermMap terms_;
};

namespace detail {

inline void require_same_n(unsigned a, unsigned b, const char* op)
{
    if (a != b)
        throw InvalidInput(std::string(op) + ": variable count mismatch (" + std::to_string(a) + " vs " +
                           std::to_string(b) + ")");
}

// d^p z^q = sum_j C(p,j) C(q,j) j! z^{q-j} d^{p-j}, one variable at a time.
struct Reorder {
    unsigned j;
    Integer coeff;
};

inline std::vector<Reorder> reorder_terms(unsigned p, unsigned q)
{
    std::vector<Reorder> out;
    Integer jfact = 1;
    for (unsigned j = 0; j <= std::min(p, q); ++j) {
        if (j > 0)
            jfact *= j;
        out.push_back({j, binomial(p, j) * binomial(q, j) * jfact});
    }
    return out;
}

} // namespace detail

/// Adds c * (a * b) into `out`.
inline void mul_into(TermMap& out, const Monomial& a, const Monomial& b, const Rational& c)
{
    const unsigned n = a.n();
    std::vector<std::vector<detail::Reorder>> per_var(n);
    for (unsigned i = 0; i < n; ++i)
        per_var[i] = detail::reorder_terms(a.d[i], b.z[i]);

    std::vector<std::size_t> idx(n, 0);
    Monomial m(n);
    while (true) {
        Rational coeff = c;
        for (unsigned i = 0; i < n; ++i) {
            const auto& r = per_var[i][idx[i]];
            coeff *= r.coeff;
            m.z[i] = a.z[i] + b.z[i] - r.j;
            m.d[i] = a.d[i] + b.d[i] - r.j;
        }
        accumulate(out, m, coeff);

        unsigned i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < per_var[i].size())
                break;
            idx[i] = 0;
        }
        if (i == n)
            break;
    }
}

inline Element mul(const Element& a, const Element& b)
{
    detail::require_same_n(a.n(), b.n(), "mul");
    TermMap out;
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms())
            mul_into(out, ma, mb, ca * cb);
    return Element(a.n(), std::move(out));
}

inline Element add(const Element& a, const Element& b)
{
    detail::require_same_n(a.n(), b.n(), "add");
    TermMap out = a.terms();
    for (const auto& [m, c] : b.terms())
        accumulate(out, m, c);
    return Element(a.n(), std::move(out));
}

inline Element scale(const Rational& c, const Element& a)
{
    if (c == 0)
        return Element(a.n());
    TermMap out;
    for (const auto& [m, x] : a.terms())
        out.emplace(m, c * x);
    return Element(a.n(), std::move(out));
}

inline Element sub(const Element& a, const Element& b)
{
    return add(a, scale(-1, b));
}

inline Element commutator(const Element& a, const Element& b)
{
    detail::require_same_n(a.n(), b.n(), "commutator");
    return sub(mul(a, b), mul(b, a));
}

inline Element operator+(const Element& a, const Element& b) { return add(a, b); }
inline Element operator-(const Element& a, const Element& b) { return sub(a, b); }
inline Element operator*(const Element& a, const Element& b) { return mul(a, b); }
inline Element operator*(const Rational& c, const Element& a) { return scale(c, a); }

/// Re-index variable i of `m` to i + offset inside A_total.
inline Monomial embed_monomial(const Monomial& m, unsigned offset, unsigned total)
{
    if (offset + m.n() > total)
        throw InvalidInput("disjoint_embed: offset " + std::to_string(offset) + " + n " + std::to_string(m.n()) +
                           " exceeds total " + std::to_string(total));
    Monomial out(total);
    std::copy(m.z.begin(), m.z.end(), out.z.begin() + offset);
    std::copy(m.d.begin(), m.d.end(), out.d.begin() + offset);
    return out;
}

inline Element disjoint_embed(const Element& a, unsigned offset, unsigned total)
{
    if (offset + a.n() > total)
        throw InvalidInput("disjoint_embed: offset " + std::to_string(offset) + " + n " + std::to_string(a.n()) +
                           " exceeds total " + std::to_string(total));
    TermMap out;
    for (const auto& [m, c] : a.terms())
        out.emplace(embed_monomial(m, offset, total), c);
    return Element(total, std::move(out));
}

// ---------------------------------------------------------------------------
// Polynomials in z_1..z_n, the natural module on which A_n acts.

class Polynomial {
public:
    using Map = std::map<Exponents, Rational>;

    Polynomial() = default;
    explicit Polynomial(unsigned n) : n_(n) {}

    static Polynomial monomial(Exponents e, const Rational& c = 1)
    {
        Polynomial p(static_cast<unsigned>(e.size()));
        p.add_term(e, c);
        return p;
    }

    /// Interprets a d-free Weyl element as a polynomial.
    static Polynomial from_element(const Element& e)
    {
        Polynomial p(e.n());
        for (const auto& [m, c] : e.terms()) {
            if (std::any_of(m.d.begin(), m.d.end(), [](unsigned x) { return x != 0; }))
                throw InvalidInput("element contains derivations; not a polynomial");
            p.add_term(m.z, c);
        }
        return p;
    }

    void add_term(const Exponents& e, const Rational& c)
    {
        if (e.size() != n_)
            throw InvalidInput("polynomial exponent length mismatch");
        if (c == 0)
            return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0)
                terms_.erase(it);
        }
    }

    [[nodiscard]] unsigned n() const noexcept { return n_; }
    [[nodiscard]] const Map& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    unsigned n_ = 0;
    Map terms_;
};

/// Action of `a` as a differential operator on `p`.
inline Polynomial apply(const Element& a, const Polynomial& p)
{
    detail::require_same_n(a.n(), p.n(), "apply");
    Polynomial out(a.n());
    for (const auto& [m, c] : a.terms()) {
        for (const auto& [e, pc] : p.terms()) {
            Rational coeff = c * pc;
            Exponents r(a.n());
            bool vanishes = false;
            for (unsigned i = 0; i < a.n() && !vanishes; ++i) {
                if (m.d[i] > e[i]) {
                    vanishes = true;
                    break;
                }
                for (unsigned s = 0; s < m.d[i]; ++s)
                    coeff *= e[i] - s;
                r[i] = e[i] - m.d[i] + m.z[i];
            }
            if (!vanishes)
                out.add_term(r, coeff);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text format: `3/2*z1^2*d1 + 1`. Factors within a term are multiplied left to right,
// so `d1*z1` parses to z1*d1 + 1.

namespace detail {

struct Factor {
    enum class Kind { number, z, d } kind;
    Rational value;
    unsigned index = 0;
    unsigned power = 1;
};

struct ParsedTerm {
    bool negative = false;
    std::vector<Factor> factors;
};

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    [[nodiscard]] bool done()
    {
        skip_ws();
        return pos_ >= s_.size();
    }
    [[nodiscard]] char peek()
    {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    char get()
    {
        skip_ws();
        if (pos_ >= s_.size())
            fail("unexpected end of input");
        return s_[pos_++];
    }
    unsigned number()
    {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("expected digits");
        return static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start))));
    }
    std::string digits()
    {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("expected digits");
        return std::string(s_.substr(start, pos_ - start));
    }
    [[noreturn]] void fail(const std::string& what) const
    {
        throw InvalidInput("cannot parse Weyl element '" + std::string(s_) + "' at offset " + std::to_string(pos_) +
                           ": " + what);
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

inline Factor parse_factor(Lexer& lx)
{
    char c = lx.peek();
    Factor f{};
    if (c == 'z' || c == 'd') {
        lx.get();
        f.kind = c == 'z' ? Factor::Kind::z : Factor::Kind::d;
        f.index = lx.number();
        if (f.index == 0)
            lx.fail("variable indices start at 1");
        if (lx.peek() == '^') {
            lx.get();
            f.power = lx.number();
        }
        return f;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string lit = lx.digits();
        if (lx.peek() == '/') {
            lx.get();
            std::string den = lx.digits();
            if (std::all_of(den.begin(), den.end(), [](char ch) { return ch == '0'; }))
                lx.fail("zero denominator");
            lit += "/" + den;
        }
        f.kind = Factor::Kind::number;
        f.value = Rational(lit);
        return f;
    }
    lx.fail("expected a number, zK or dK");
}

} // namespace detail

/// Parses the text format. The variable count is max(n, largest index used, 1).
inline Element parse_element(std::string_view text, unsigned n = 0)
{
    detail::Lexer lx(text);
    std::vector<detail::ParsedTerm> terms;
    if (lx.done())
        lx.fail("empty input");
    bool first = true;
    while (!lx.done()) {
        detail::ParsedTerm t;
        char c = lx.peek();
        if (c == '+' || c == '-') {
            lx.get();
            t.negative = c == '-';
        } else if (!first) {
            lx.fail("expected '+' or '-'");
        }
        first = false;
        t.factors.push_back(detail::parse_factor(lx));
        while (lx.peek() == '*') {
            lx.get();
            t.factors.push_back(detail::parse_factor(lx));
        }
        terms.push_back(std::move(t));
    }

    unsigned max_index = 0;
    for (const auto& t : terms)
        for (const auto& f : t.factors)
            max_index = std::max(max_index, f.index);
    if (n != 0 && max_index > n)
        throw InvalidInput("variable index " + std::to_string(max_index) + " exceeds n = " + std::to_string(n));
    const unsigned nv = std::max({n, max_index, 1u});

    Element result(nv);
    for (const auto& t : terms) {
        Element prod = Element::constant(nv, t.negative ? -1 : 1);
        for (const auto& f : t.factors) {
            using K = detail::Factor::Kind;
            if (f.kind == K::number) {
                prod = scale(f.value, prod);
                continue;
            }
            Monomial m(nv);
            (f.kind == K::z ? m.z : m.d)[f.index - 1] = f.power;
            prod = mul(prod, Element::monomial(m));
        }
        result = add(result, prod);
    }
    return result;
}

inline std::string monomial_string(const Monomial& m)
{
    std::string out;
    auto emit = [&](char sym, const Exponents& e) {
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (!out.empty())
                out += '*';
            out += sym + std::to_string(i + 1);
            if (e[i] > 1)
                out += '^' + std::to_string(e[i]);
        }
    };
    emit('z', m.z);
    emit('d', m.d);
    return out;
}

inline std::string to_string(const Element& a)
{
    if (a.is_zero())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : a.terms()) {
        const bool negative = c < 0;
        const Rational mag = negative ? Rational(-c) : c;
        if (first)
            out += negative ? "-" : "";
        else
            out += negative ? " - " : " + ";
        first = false;
        const std::string mono = monomial_string(m);
        if (mono.empty())
            out += mag.str();
        else if (mag == 1)
            out += mono;
        else
            out += mag.str() + "*" + mono;
    }
    return out;
}

} // namespace hochheat::weyl

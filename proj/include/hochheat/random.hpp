#pragma once

// Seeded generators of random Weyl elements and chains for the property checks.

#include "hochheat/hochschild.hpp"

#include <random>

namespace hochheat::random {

using Engine = std::mt19937_64;

struct ElementShape {
    unsigned n = 2;
    unsigned max_degree = 2; ///< total degree bound of each monomial
    unsigned max_terms = 3;
};

inline Rational small_coefficient(Engine& rng)
{
    std::uniform_int_distribution<int> num(-3, 3);
    std::uniform_int_distribution<int> den(1, 2);
    int a = 0;
    while (a == 0)
        a = num(rng);
    return Rational(a, den(rng));
}

inline weyl::Monomial random_monomial(Engine& rng, unsigned n, unsigned max_degree)
{
    weyl::Monomial m(n);
    std::uniform_int_distribution<unsigned> deg(0, max_degree);
    std::uniform_int_distribution<unsigned> slot(0, 2 * n - 1);
    const unsigned total = deg(rng);
    for (unsigned i = 0; i < total; ++i) {
        const unsigned s = slot(rng);
        (s < n ? m.z[s] : m.d[s - n]) += 1;
    }
    return m;
}

/// A nonzero random element.
inline weyl::Element random_element(Engine& rng, const ElementShape& shape)
{
    std::uniform_int_distribution<unsigned> count(1, shape.max_terms);
    weyl::Element e(shape.n);
    while (e.is_zero()) {
        const unsigned t = count(rng);
        for (unsigned i = 0; i < t; ++i)
            e = weyl::add(e, weyl::Element::monomial(random_monomial(rng, shape.n, shape.max_degree),
                                                     small_coefficient(rng)));
    }
    return e;
}

/// Random homogeneous chain of the given degree built from `words` random words.
inline hochschild::TensorChain random_chain(Engine& rng, const ElementShape& shape, unsigned degree, unsigned words = 2)
{
    hochschild::TensorChain c(shape.n);
    // Occasionally plant a unit in a slot so degenerate words are exercised.
    std::bernoulli_distribution unit(0.15);
    for (unsigned w = 0; w < words; ++w) {
        std::vector<weyl::Element> slots;
        for (unsigned i = 0; i <= degree; ++i)
            slots.push_back(unit(rng) ? weyl::Element::one(shape.n) : random_element(rng, shape));
        c.add(hochschild::TensorChain::from_word(small_coefficient(rng), slots));
    }
    return c;
}

} // namespace hochheat::random

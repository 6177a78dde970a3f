#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hochheat {

/// Arbitrary-precision rational used by every exact computation.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejected caller input (mismatched variable counts, out-of-range parameters, malformed text).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Parses "p", "-p" or "p/q" with q nonzero.
inline Rational parse_rational(std::string_view text)
{
    auto bad = [&]() { return InvalidInput("malformed rational literal '" + std::string(text) + "'"); };
    std::string_view body = text;
    if (!body.empty() && (body.front() == '-' || body.front() == '+'))
        body.remove_prefix(1);
    const auto slash = body.find('/');
    const std::string_view num = body.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
    auto all_digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    };
    if (!all_digits(num) || !all_digits(den))
        throw bad();
    if (std::all_of(den.begin(), den.end(), [](char c) { return c == '0'; }))
        throw InvalidInput("zero denominator in rational literal '" + std::string(text) + "'");
    Rational r{Integer(std::string(num)), Integer(std::string(den))};
    return text.front() == '-' ? Rational(-r) : r;
}

inline std::string to_string(const Rational& r)
{
    return r.str();
}

inline double to_double(const Rational& r)
{
    return r.convert_to<double>();
}

inline Rational factorial(unsigned n)
{
    Integer f = 1;
    for (unsigned i = 2; i <= n; ++i)
        f *= i;
    return Rational(f);
}

inline Integer binomial(unsigned n, unsigned k)
{
    if (k > n)
        return 0;
    Integer r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

} // namespace hochheat

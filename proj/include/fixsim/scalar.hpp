#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>

#include "fixsim/errors.hpp"

namespace fixsim {

using Rational = boost::multiprecision::mpq_rational;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

/** Largest integer not exceeding x. */
inline std::int64_t floor_to_int(double x) { return static_cast<std::int64_t>(std::floor(x)); }

inline std::int64_t floor_to_int(const Rational& x)
{
    using boost::multiprecision::mpz_int;
    const mpz_int num = boost::multiprecision::numerator(x);
    const mpz_int den = boost::multiprecision::denominator(x);
    mpz_int q = num / den;   // truncates toward zero
    if (num < 0 && q * den != num)
        q -= 1;
    return q.convert_to<std::int64_t>();
}

/** p / q in the scalar type T. */
template <class T>
T ratio(std::int64_t p, std::int64_t q)
{
    if constexpr (is_exact_v<T>)
        return Rational(p, q);
    else
        return static_cast<T>(p) / static_cast<T>(q);
}

/** Always "p/q", including integers ("1/1") and zero ("0/1"). */
inline std::string to_fraction_string(const Rational& x)
{
    return boost::multiprecision::numerator(x).str() + "/"
           + boost::multiprecision::denominator(x).str();
}

/** Accepts "p/q", an integer, or a terminating decimal such as "0.125". */
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start])))
        ++start;
    s = s.substr(start);
    if (s.empty())
        throw InvalidInput("empty rational literal");
    try
    {
        const auto slash = s.find('/');
        if (slash != std::string::npos)
        {
            const Rational num(boost::multiprecision::mpz_int(s.substr(0, slash)));
            const boost::multiprecision::mpz_int den(s.substr(slash + 1));
            if (den == 0)
                throw InvalidInput("zero denominator in '" + s + "'");
            return num / Rational(den);
        }
        const auto dot = s.find('.');
        if (dot == std::string::npos)
            return Rational(boost::multiprecision::mpz_int(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        const std::size_t decimals = s.size() - dot - 1;
        if (digits.empty() || digits == "-" || digits == "+")
            throw InvalidInput("malformed rational literal '" + s + "'");
        boost::multiprecision::mpz_int den = 1;
        for (std::size_t i = 0; i < decimals; ++i)
            den *= 10;
        return Rational(boost::multiprecision::mpz_int(digits)) / Rational(den);
    }
    catch (const InvalidInput&)
    {
        throw;
    }
    catch (const std::exception&)
    {
        throw InvalidInput("malformed rational literal '" + s + "'");
    }
}

}   // namespace fixsim

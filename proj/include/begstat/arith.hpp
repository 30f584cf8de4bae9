// Integer, modular and exact rational helpers shared by every module.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace begstat {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Thrown for malformed inputs (non-prime ell, unsorted exponents, shape mismatches).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a brute-force or canonicalization routine would exceed its size cap.
class OracleTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline bool is_odd_prime(i64 p) {
    if (p < 3 || p % 2 == 0) return false;
    for (i64 d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

/// ell^e as a 64-bit integer; throws on overflow.
inline i64 ipow(i64 base, int exp) {
    if (exp < 0) throw InvalidArgument("ipow: negative exponent");
    i64 r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > std::numeric_limits<i64>::max() / base)
            throw std::overflow_error("ipow: overflow computing " + std::to_string(base) + "^" +
                                      std::to_string(exp));
        r *= base;
    }
    return r;
}

inline BigInt big_pow(i64 base, long exp) {
    BigInt r = 1;
    BigInt b = base;
    if (exp < 0) throw InvalidArgument("big_pow: negative exponent");
    while (exp > 0) {
        if (exp & 1) r *= b;
        b *= b;
        exp >>= 1;
    }
    return r;
}

/// ell^e as an exact rational, negative exponents allowed.
inline Rational rat_pow(i64 base, long exp) {
    if (exp >= 0) return Rational(big_pow(base, exp));
    return Rational(BigInt(1), big_pow(base, -exp));
}

inline i64 floor_mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 mul_mod(i64 a, i64 b, i64 m) {
    if (m <= (i64{1} << 31)) return floor_mod(floor_mod(a, m) * floor_mod(b, m), m);
    auto p = static_cast<__int128>(floor_mod(a, m)) * floor_mod(b, m);
    return static_cast<i64>(p % m);
}

/// ell-adic valuation of a nonzero integer.
inline int valuation(i64 x, i64 ell) {
    if (x == 0) throw InvalidArgument("valuation of zero");
    int v = 0;
    while (x % ell == 0) {
        x /= ell;
        ++v;
    }
    return v;
}

/// Multiplicative inverse of a unit modulo m (extended Euclid).
inline i64 inverse_mod(i64 a, i64 m) {
    i64 g = m, x = 0, x1 = 1, a1 = floor_mod(a, m);
    while (a1 != 0) {
        i64 q = g / a1;
        i64 t = g - q * a1;
        g = a1;
        a1 = t;
        t = x - q * x1;
        x = x1;
        x1 = t;
    }
    if (g != 1) throw InvalidArgument("inverse_mod: not a unit");
    return floor_mod(x, m);
}

/// Multiply by ell^k when k >= 0, or divide exactly by ell^-k when k < 0.
inline i64 scale_by_power(i64 x, i64 ell, int k) {
    if (k >= 0) return x * ipow(ell, k);
    i64 d = ipow(ell, -k);
    if (x % d != 0) throw std::logic_error("scale_by_power: inexact division");
    return x / d;
}

/// Arithmetic in Z/ell^K with K the working precision.
class ModRing {
  public:
    ModRing(i64 ell, int precision) : ell_(ell), precision_(precision), modulus_(ipow(ell, precision)) {
        if (modulus_ > (i64{1} << 62)) throw InvalidArgument("ModRing: modulus too large");
        small_ = modulus_ <= (i64{1} << 31);
    }

    i64 ell() const { return ell_; }
    int precision() const { return precision_; }
    i64 modulus() const { return modulus_; }

    i64 reduce(i64 a) const { return floor_mod(a, modulus_); }
    i64 add(i64 a, i64 b) const {
        i64 s = a + b;
        return s >= modulus_ ? s - modulus_ : s;
    }
    i64 sub(i64 a, i64 b) const {
        i64 s = a - b;
        return s < 0 ? s + modulus_ : s;
    }
    i64 neg(i64 a) const { return a == 0 ? 0 : modulus_ - a; }
    i64 mul(i64 a, i64 b) const {
        if (small_) return static_cast<i64>((static_cast<u64>(a) * static_cast<u64>(b)) % static_cast<u64>(modulus_));
        return static_cast<i64>((static_cast<unsigned __int128>(a) * static_cast<u64>(b)) % static_cast<u64>(modulus_));
    }
    /// Valuation of a reduced residue; returns the precision for 0.
    int valuation(i64 a) const {
        if (a == 0) return precision_;
        int v = 0;
        while (a % ell_ == 0) {
            a /= ell_;
            ++v;
        }
        return v;
    }
    i64 inverse(i64 unit) const { return inverse_mod(unit, modulus_); }

  private:
    i64 ell_;
    int precision_;
    i64 modulus_;
    bool small_;
};

}  // namespace begstat

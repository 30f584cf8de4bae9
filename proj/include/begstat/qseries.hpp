// q-Pochhammer symbols, Gaussian binomials, matrix rank counts over F_ell,
// and the two infinite products that carry all non-rational factors.
#pragma once

#include "begstat/arith.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace begstat {

/// (a; q)_k = prod_{j<k} (1 - a q^j), exact.
inline Rational pochhammer(const Rational& a, const Rational& q, int k) {
    if (k < 0) throw InvalidArgument("pochhammer: negative k");
    Rational r = 1;
    Rational qj = 1;
    for (int j = 0; j < k; ++j) {
        r *= 1 - a * qj;
        qj *= q;
    }
    return r;
}

/// (1/ell; 1/ell)_k, written (ell^-1)_k in the measure formulas.
inline Rational inv_pochhammer(i64 ell, int k) {
    Rational x(BigInt(1), BigInt(ell));
    return pochhammer(x, x, k);
}

/// Gaussian binomial [a choose b]_ell counting b-dimensional subspaces of F_ell^a.
inline BigInt gaussian_binomial(i64 ell, int a, int b) {
    if (b < 0 || b > a) return 0;
    BigInt num = 1, den = 1;
    for (int i = 0; i < b; ++i) {
        num *= big_pow(ell, a - i) - 1;
        den *= big_pow(ell, i + 1) - 1;
    }
    return num / den;
}

/// Number of a x b matrices over F_ell of rank rho.
inline BigInt count_matrices_of_rank(i64 ell, int a, int b, int rho) {
    if (rho < 0 || rho > std::min(a, b)) return 0;
    BigInt num = 1, den = 1;
    for (int i = 0; i < rho; ++i) {
        num *= (big_pow(ell, a) - big_pow(ell, i)) * (big_pow(ell, b) - big_pow(ell, i));
        den *= big_pow(ell, rho) - big_pow(ell, i);
    }
    return num / den;
}

/// Number of invertible symmetric m x m matrices over F_ell (ell odd):
/// ell^{m(m+1)/2} (ell^-1; ell^-2)_{ceil(m/2)}.
inline BigInt count_nonsingular_symmetric(i64 ell, int m) {
    int k = (m + 1) / 2;
    BigInt r = big_pow(ell, m * (m + 1) / 2 - k * k);
    for (int i = 1; i <= k; ++i) r *= big_pow(ell, 2 * i - 1) - 1;
    return r;
}

/// Number of symmetric m x m matrices over F_ell with corank j.
inline BigInt count_symmetric_of_corank(i64 ell, int m, int j) {
    if (j < 0 || j > m) return 0;
    return count_nonsingular_symmetric(ell, m - j) * gaussian_binomial(ell, m, j);
}

namespace detail {

inline int product_terms_for(long double ratio, long double tol) {
    // Smallest N with 2 * ratio^N / (1 - ratio) < tol.
    int n = 1;
    long double r = ratio;
    while (2 * r / (1 - ratio) >= tol && n < 100000) {
        r *= ratio;
        ++n;
    }
    return n;
}

}  // namespace detail

/// c_ell = prod_{i>=0} (1 - ell^{-(2i+1)}), truncated once the geometric tail bound drops below tol.
inline long double c_ell(i64 ell, long double tol = 1e-12L) {
    if (!(tol > 0)) throw InvalidArgument("c_ell: tol must be positive");
    long double x = 1.0L / static_cast<long double>(ell);
    int terms = detail::product_terms_for(x * x, tol);
    long double r = 1;
    long double p = x;
    for (int i = 0; i <= terms; ++i) {
        r *= 1 - p;
        p *= x * x;
    }
    return r;
}

/// prod_{i>t} (1 + ell^-i)^{-1}; cached per (ell, t, tol).
inline long double tail_product(i64 ell, int t, long double tol = 1e-12L) {
    if (!(tol > 0)) throw InvalidArgument("tail_product: tol must be positive");
    static std::mutex mu;
    static std::map<std::tuple<i64, int, long double>, long double> cache;
    auto key = std::make_tuple(ell, t, tol);
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    long double x = 1.0L / static_cast<long double>(ell);
    int terms = detail::product_terms_for(x, tol);
    long double r = 1;
    long double p = std::pow(x, static_cast<long double>(t + 1));
    for (int i = 0; i <= terms; ++i) {
        r /= 1 + p;
        p *= x;
    }
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, r);
    return r;
}

inline long double to_long_double(const Rational& q) {
    return static_cast<long double>(q);
}

}  // namespace begstat

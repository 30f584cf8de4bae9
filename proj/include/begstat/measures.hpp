// Closed-form measures on BEGs.  Every value is an exact rational coefficient times one of the two
// infinite products, so identities between formulas can be checked exactly on the coefficients.
#pragma once

#include "begstat/beg.hpp"
#include "begstat/qseries.hpp"

#include <cstdlib>

namespace begstat {

struct MeasureParams {
    i64 ell = 3;
    int n = 1;
    int t = 0;
    long double tol = 1e-12L;

    void validate() const {
        if (!is_odd_prime(ell)) throw InvalidArgument("ell must be an odd prime");
        require_n(n);
        if (t < 0) throw InvalidArgument("t must be nonnegative");
        if (!(tol > 0)) throw InvalidArgument("tol must be positive");
    }
};

/// Default truncation tolerance; BEGSTAT_TOL overrides it.
inline long double default_tol() {
    if (const char* s = std::getenv("BEGSTAT_TOL")) {
        char* end = nullptr;
        long double v = std::strtold(s, &end);
        if (end != s && v > 0) return v;
    }
    return 1e-12L;
}

/// coeff × tail, where tail is c_ell or Π_{i>t}(1 + ell^-i)^{-1}.
struct MeasureValue {
    Rational coeff = 0;
    long double tail = 1;
    long double value() const { return to_long_double(coeff) * tail; }
};

/// (ell^-1)_t / (ell^-1)_{t-s}, zero when s > t.
inline Rational corank_weight(i64 ell, int t, int s) {
    if (s > t) return 0;
    return inv_pochhammer(ell, t) / inv_pochhammer(ell, t - s);
}

inline Rational group_order_power(const AbelianLGroup& G, int t) {
    return Rational(big_pow(G.ell, static_cast<long>(G.order_exp()) * t));
}

/// c_ell / (|Aut(G,ω,ψ)| |Sym²G[ell^n]|) when ψ is invertible, else 0.
inline MeasureValue mu_point(const BegTriple& tr, const MeasureParams& p) {
    p.validate();
    if (tr.n != p.n || tr.ell() != p.ell) throw InvalidArgument("mu_point: parameters do not match the triple");
    MeasureValue v{0, c_ell(p.ell, p.tol)};
    if (psi_corank(tr.psi) > 0) return v;
    BigInt aut = canonical_info(tr)->stabilizer;
    v.coeff = Rational(BigInt(1), aut * sym2_torsion_order(tr.G, tr.n));
    return v;
}

/// Q^t μ at a triple.
inline MeasureValue qtmu_point(const BegTriple& tr, const MeasureParams& p) {
    p.validate();
    if (tr.n != p.n || tr.ell() != p.ell) throw InvalidArgument("qtmu_point: parameters do not match the triple");
    MeasureValue v{0, tail_product(p.ell, p.t, p.tol)};
    int s = psi_corank(tr.psi);
    if (s > p.t) return v;
    BigInt aut = canonical_info(tr)->stabilizer;
    v.coeff = corank_weight(p.ell, p.t, s) / (Rational(aut * sym2_torsion_order(tr.G, tr.n)) * group_order_power(tr.G, p.t));
    return v;
}

/// μ(G) = Π(1+ell^-i)^{-1} |∧²G[ell^n]| h_G / |Aut G|.
inline MeasureValue mu_group(const AbelianLGroup& G, const MeasureParams& p) {
    p.validate();
    MeasureValue v{Rational(wedge2_torsion_order(G, p.n)) * h_G(G, p.n) / Rational(count_aut(G)), tail_product(p.ell, 0, p.tol)};
    return v;
}

/// Q^t μ(G) = P_t ell^{R_n} / (|Aut G| |Sym²G[ell^n]| |G|^t) Σ_{s<=t} A_{s,n}(G) (ell^-1)_t/(ell^-1)_{t-s}.
inline MeasureValue qtmu_group(const AbelianLGroup& G, const MeasureParams& p) {
    p.validate();
    auto A = allowable_psi_by_corank(G, p.n);
    Rational sum = 0;
    for (int s = 0; s <= std::min(p.t, G.rank()); ++s) sum += Rational(A[static_cast<std::size_t>(s)]) * corank_weight(p.ell, p.t, s);
    Rational coeff = Rational(count_omega_for_zero_psi(G, p.n)) * sum /
                     (Rational(count_aut(G) * sym2_torsion_order(G, p.n)) * group_order_power(G, p.t));
    return MeasureValue{coeff, tail_product(p.ell, p.t, p.tol)};
}

/// Malle's prediction for n = 1: P_t ell^{C(r,2)} (ell^-1)_{r+t} / ((ell^-1)_t |Aut G| |G|^t).
inline MeasureValue malle_group(const AbelianLGroup& G, const MeasureParams& p) {
    p.validate();
    if (p.n != 1) throw InvalidArgument("malle_group is defined for n = 1 only");
    const int r = G.rank();
    Rational coeff = Rational(big_pow(p.ell, static_cast<long>(r) * (r - 1) / 2)) * inv_pochhammer(p.ell, r + p.t) /
                     (inv_pochhammer(p.ell, p.t) * Rational(count_aut(G)) * group_order_power(G, p.t));
    return MeasureValue{coeff, tail_product(p.ell, p.t, p.tol)};
}

/// E #Surj(*, dst) under Q^t μ: |G|^{-t} / |Sym²G[ell^n]|.
inline Rational moment_theory(const BegTriple& dst, const MeasureParams& p) {
    p.validate();
    return Rational(1) / (Rational(sym2_torsion_order(dst.G, p.n)) * group_order_power(dst.G, p.t));
}

/// Largest k with ell^k <= bound.
inline int order_exp_bound(i64 ell, const BigInt& bound) {
    if (bound < 1) throw InvalidArgument("bound must be at least 1");
    int k = 0;
    BigInt x = ell;
    while (x <= bound) {
        ++k;
        x *= ell;
    }
    return k;
}

/// Σ of Q^t μ over all BEGs with |G| <= bound (via the group totals).
inline long double truncated_mass(const MeasureParams& p, const BigInt& bound) {
    p.validate();
    long double s = 0;
    for (const auto& G : groups_up_to(p.ell, order_exp_bound(p.ell, bound))) s += qtmu_group(G, p).value();
    return s;
}

/// Exact coefficient sum Σ_classes qtmu_point on G (the tail factor P_t is common).
inline Rational qtmu_classes_coeff_sum(const AbelianLGroup& G, const MeasureParams& p) {
    Rational s = 0;
    for (const auto& c : *triple_classes(G, p.n)) s += qtmu_point(c.rep, p).coeff;
    return s;
}

inline Rational mu_classes_coeff_sum(const AbelianLGroup& G, const MeasureParams& p) {
    Rational s = 0;
    for (const auto& c : *triple_classes(G, p.n)) s += mu_point(c.rep, p).coeff;
    return s;
}

}  // namespace begstat

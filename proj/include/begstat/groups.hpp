// Finite abelian ell-groups in exponent normal form.
#pragma once

#include "begstat/arith.hpp"
#include "begstat/qseries.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace begstat {

/// Default cap for brute-force iteration: |G| <= ell^8.
inline constexpr int kDefaultElementCapExp = 8;

/// ⊕ Z/ell^{e_i} with e_1 >= e_2 >= ... >= e_r >= 1.
struct AbelianLGroup {
    i64 ell = 3;
    std::vector<int> exponents;

    AbelianLGroup() = default;
    AbelianLGroup(i64 ell_, std::vector<int> exps) : ell(ell_), exponents(std::move(exps)) { validate(); }

    /// Accepts exponents in any order and sorts them.
    static AbelianLGroup from_unsorted(i64 ell, std::vector<int> exps) {
        std::sort(exps.begin(), exps.end(), std::greater<>());
        return AbelianLGroup(ell, std::move(exps));
    }

    void validate() const {
        if (!is_odd_prime(ell)) throw InvalidArgument("ell must be an odd prime, got " + std::to_string(ell));
        for (std::size_t i = 0; i < exponents.size(); ++i) {
            if (exponents[i] < 1) throw InvalidArgument("group exponents must be positive");
            if (i > 0 && exponents[i] > exponents[i - 1])
                throw InvalidArgument("group exponents must be non-increasing");
        }
    }

    int rank() const { return static_cast<int>(exponents.size()); }
    int e(int i) const { return exponents[static_cast<std::size_t>(i)]; }
    int max_exponent() const { return exponents.empty() ? 0 : exponents.front(); }
    /// log_ell |G|.
    int order_exp() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }
    BigInt order() const { return big_pow(ell, order_exp()); }
    i64 modulus(int i) const { return ipow(ell, e(i)); }
    bool trivial() const { return exponents.empty(); }

    /// min(e_i, m): exponent of the i-th cyclic factor of G[ell^m].
    int torsion_exp(int i, int m) const { return std::min(e(i), m); }

    bool operator==(const AbelianLGroup& o) const { return ell == o.ell && exponents == o.exponents; }
    bool operator!=(const AbelianLGroup& o) const { return !(*this == o); }
    bool operator<(const AbelianLGroup& o) const {
        return std::tie(ell, exponents) < std::tie(o.ell, o.exponents);
    }

    std::string to_string() const {
        if (exponents.empty()) return "trivial";
        std::ostringstream os;
        for (std::size_t i = 0; i < exponents.size(); ++i) {
            if (i) os << " + ";
            os << "Z/" << ell << "^" << exponents[i];
        }
        return os.str();
    }
};

struct GroupElement {
    std::vector<i64> coords;
    bool operator==(const GroupElement& o) const { return coords == o.coords; }
    bool operator<(const GroupElement& o) const { return coords < o.coords; }
};

inline GroupElement reduce_element(const AbelianLGroup& G, std::vector<i64> coords) {
    if (static_cast<int>(coords.size()) != G.rank()) throw InvalidArgument("element has wrong length");
    for (int i = 0; i < G.rank(); ++i) coords[static_cast<std::size_t>(i)] = floor_mod(coords[static_cast<std::size_t>(i)], G.modulus(i));
    return GroupElement{std::move(coords)};
}

/// Calls fn on every element of G in lexicographic order.
inline void for_each_element(const AbelianLGroup& G, const std::function<void(const GroupElement&)>& fn,
                             int cap_exp = kDefaultElementCapExp) {
    if (G.order_exp() > cap_exp)
        throw OracleTooLarge("oracle too large: |G| = " + G.to_string() + " exceeds ell^" + std::to_string(cap_exp));
    GroupElement x{std::vector<i64>(static_cast<std::size_t>(G.rank()), 0)};
    while (true) {
        fn(x);
        int i = G.rank() - 1;
        while (i >= 0) {
            auto& c = x.coords[static_cast<std::size_t>(i)];
            if (++c < G.modulus(i)) break;
            c = 0;
            --i;
        }
        if (i < 0) return;
    }
}

inline std::vector<GroupElement> iterate_elements(const AbelianLGroup& G, int cap_exp = kDefaultElementCapExp) {
    std::vector<GroupElement> out;
    for_each_element(G, [&](const GroupElement& x) { out.push_back(x); }, cap_exp);
    return out;
}

/// |∧²G[ell^n]| = ell^{Σ_{i<j} min(e_i,e_j,n)}.
inline BigInt wedge2_torsion_order(const AbelianLGroup& G, int n) {
    long s = 0;
    for (int i = 0; i < G.rank(); ++i)
        for (int j = i + 1; j < G.rank(); ++j) s += std::min({G.e(i), G.e(j), n});
    return big_pow(G.ell, s);
}

/// |Sym²G[ell^n]| = ell^{Σ_{i<=j} min(e_i,e_j,n)}.
inline BigInt sym2_torsion_order(const AbelianLGroup& G, int n) {
    long s = 0;
    for (int i = 0; i < G.rank(); ++i)
        for (int j = i; j < G.rank(); ++j) s += std::min({G.e(i), G.e(j), n});
    return big_pow(G.ell, s);
}

/// |Hom(G, H)| = Π ell^{min(e_i, f_a)}.
inline BigInt count_hom(const AbelianLGroup& G, const AbelianLGroup& H) {
    long s = 0;
    for (int e : G.exponents)
        for (int f : H.exponents) s += std::min(e, f);
    return big_pow(G.ell, s);
}

/// |Aut G| from the closed form for abelian p-groups (exponents taken in ascending order).
inline BigInt count_aut(const AbelianLGroup& G) {
    std::vector<int> e(G.exponents.rbegin(), G.exponents.rend());
    const int r = static_cast<int>(e.size());
    const i64 p = G.ell;
    BigInt result = 1;
    for (int k = 0; k < r; ++k) {
        int d = k, c = k;
        while (d + 1 < r && e[static_cast<std::size_t>(d + 1)] == e[static_cast<std::size_t>(k)]) ++d;
        while (c > 0 && e[static_cast<std::size_t>(c - 1)] == e[static_cast<std::size_t>(k)]) --c;
        // 1-based d_k = d + 1 and c_k = c + 1.
        result *= big_pow(p, d + 1) - big_pow(p, k);
        result *= big_pow(p, static_cast<long>(e[static_cast<std::size_t>(k)]) * (r - (d + 1)));
        result *= big_pow(p, static_cast<long>(e[static_cast<std::size_t>(k)] - 1) * (r - c));
    }
    return result;
}

/// Number of surjections G -> H.  Rows of H in decreasing exponent order; the a-th row may only be hit
/// surjectively mod ell by generators of G whose exponent is at least f_a.
inline BigInt count_surj_groups(const AbelianLGroup& G, const AbelianLGroup& H) {
    if (G.ell != H.ell) throw InvalidArgument("count_surj_groups: different primes");
    Rational frac = 1;
    for (int a = 0; a < H.rank(); ++a) {
        int supp = 0;
        for (int e : G.exponents)
            if (e >= H.e(a)) ++supp;
        long k = static_cast<long>(a) - supp;  // exponent a - |supp_a| in 1 - ell^{(a+1)-1-|supp_a|}
        if (k >= 0) return 0;
        frac *= 1 - rat_pow(G.ell, k);
    }
    Rational total = frac * Rational(count_hom(G, H));
    return boost::multiprecision::numerator(total);
}

/// Homomorphisms G -> H as matrices F(a, i) (column i = image of b_i); entry (a,i) is a multiple of
/// ell^{max(0, f_a - e_i)} below ell^{f_a}.
struct HomSpace {
    AbelianLGroup src, dst;

    int step_exp(int a, int i) const { return std::max(0, dst.e(a) - src.e(i)); }
    i64 step(int a, int i) const { return ipow(src.ell, step_exp(a, i)); }
    i64 range(int a, int i) const { return ipow(src.ell, std::min(dst.e(a), src.e(i))); }
};

/// Iterates all homomorphisms G -> H; matrix stored row-major (a * r_src + i).  Stops early if fn returns false.
inline void for_each_hom(const AbelianLGroup& G, const AbelianLGroup& H,
                         const std::function<bool(const std::vector<i64>&)>& fn, double cap = 1e8) {
    HomSpace hs{G, H};
    const int rs = G.rank(), rd = H.rank();
    if (static_cast<double>(count_hom(G, H)) > cap) throw OracleTooLarge("oracle too large: |Hom| exceeds cap");
    std::vector<i64> F(static_cast<std::size_t>(rs * rd), 0);
    std::vector<i64> idx(F.size(), 0);
    while (true) {
        if (!fn(F)) return;
        int pos = static_cast<int>(F.size()) - 1;
        while (pos >= 0) {
            int a = pos / std::max(rs, 1), i = pos % std::max(rs, 1);
            auto& k = idx[static_cast<std::size_t>(pos)];
            if (++k < hs.range(a, i)) {
                F[static_cast<std::size_t>(pos)] = k * hs.step(a, i);
                break;
            }
            k = 0;
            F[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) return;
    }
}

inline GroupElement apply_hom(const AbelianLGroup& G, const AbelianLGroup& H, const std::vector<i64>& F,
                              const GroupElement& x) {
    GroupElement y{std::vector<i64>(static_cast<std::size_t>(H.rank()), 0)};
    for (int a = 0; a < H.rank(); ++a) {
        i64 m = H.modulus(a);
        i64 s = 0;
        for (int i = 0; i < G.rank(); ++i)
            s = floor_mod(s + mul_mod(F[static_cast<std::size_t>(a * G.rank() + i)], x.coords[static_cast<std::size_t>(i)], m), m);
        y.coords[static_cast<std::size_t>(a)] = s;
    }
    return y;
}

/// Rank over F_ell of a matrix given as rows of residues.
inline int rank_mod_ell(std::vector<std::vector<i64>> m, i64 ell) {
    int rank = 0;
    const int rows = static_cast<int>(m.size());
    const int cols = rows ? static_cast<int>(m[0].size()) : 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (floor_mod(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)], ell) != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(m[static_cast<std::size_t>(piv)], m[static_cast<std::size_t>(rank)]);
        auto& pr = m[static_cast<std::size_t>(rank)];
        i64 inv = inverse_mod(pr[static_cast<std::size_t>(c)], ell);
        for (auto& v : pr) v = floor_mod(v * inv, ell);
        for (int r = 0; r < rows; ++r) {
            if (r == rank) continue;
            auto& row = m[static_cast<std::size_t>(r)];
            i64 f = floor_mod(row[static_cast<std::size_t>(c)], ell);
            if (f == 0) continue;
            for (int k = 0; k < cols; ++k)
                row[static_cast<std::size_t>(k)] = floor_mod(row[static_cast<std::size_t>(k)] - f * pr[static_cast<std::size_t>(k)], ell);
        }
        ++rank;
    }
    return rank;
}

/// A homomorphism G -> H is onto iff its reduction G/ell -> H/ell is onto.
inline bool hom_is_surjective(const AbelianLGroup& G, const AbelianLGroup& H, const std::vector<i64>& F) {
    if (H.rank() > G.rank()) return false;
    std::vector<std::vector<i64>> m(static_cast<std::size_t>(H.rank()), std::vector<i64>(static_cast<std::size_t>(G.rank())));
    for (int a = 0; a < H.rank(); ++a)
        for (int i = 0; i < G.rank(); ++i) m[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = F[static_cast<std::size_t>(a * G.rank() + i)];
    return rank_mod_ell(std::move(m), G.ell) == H.rank();
}

/// Brute force: count homomorphisms whose image has |H| elements.
inline BigInt count_surj_groups_bruteforce(const AbelianLGroup& G, const AbelianLGroup& H) {
    if (G.order_exp() > kDefaultElementCapExp || H.order_exp() > kDefaultElementCapExp)
        throw OracleTooLarge("oracle too large for surjection brute force");
    auto elems = iterate_elements(G);
    const auto target = static_cast<std::size_t>(ipow(H.ell, H.order_exp()));
    BigInt count = 0;
    for_each_hom(G, H, [&](const std::vector<i64>& F) {
        std::vector<GroupElement> img;
        img.reserve(elems.size());
        for (const auto& x : elems) img.push_back(apply_hom(G, H, F, x));
        std::sort(img.begin(), img.end());
        img.erase(std::unique(img.begin(), img.end()), img.end());
        if (img.size() == target) ++count;
        return true;
    });
    return count;
}

/// Brute force: count endomorphisms whose reduction on G/ell G is invertible.
inline BigInt count_aut_bruteforce(const AbelianLGroup& G) {
    if (G.order_exp() > kDefaultElementCapExp) throw OracleTooLarge("oracle too large for Aut brute force");
    BigInt count = 0;
    for_each_hom(G, G, [&](const std::vector<i64>& F) {
        if (hom_is_surjective(G, G, F)) ++count;
        return true;
    }, 1e9);
    return count;
}

/// Enumerates Aut(G) by column backtracking.  The reduction mod ell is block upper triangular in the
/// blocks of equal exponent, so each column only has to stay independent inside its own block.
inline void for_each_automorphism(const AbelianLGroup& G, const std::function<void(const std::vector<i64>&)>& fn) {
    const int r = G.rank();
    const i64 ell = G.ell;
    HomSpace hs{G, G};
    std::vector<i64> F(static_cast<std::size_t>(r * r), 0);
    if (r == 0) {
        fn(F);
        return;
    }
    std::vector<int> block_start(static_cast<std::size_t>(r)), block_end(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        int s = i, t = i;
        while (s > 0 && G.e(s - 1) == G.e(i)) --s;
        while (t + 1 < r && G.e(t + 1) == G.e(i)) ++t;
        block_start[static_cast<std::size_t>(i)] = s;
        block_end[static_cast<std::size_t>(i)] = t + 1;
    }
    // Echelon rows (reduced block vectors) chosen so far for each column's block.
    std::vector<std::vector<std::vector<i64>>> basis(static_cast<std::size_t>(r));

    std::function<void(int)> rec = [&](int i) {
        if (i == r) {
            fn(F);
            return;
        }
        const int bs = block_start[static_cast<std::size_t>(i)], be = block_end[static_cast<std::size_t>(i)];
        const int bw = be - bs;
        std::vector<i64> cnt(static_cast<std::size_t>(r), 0);
        auto& prev = basis[static_cast<std::size_t>(bs)];
        while (true) {
            for (int a = 0; a < r; ++a) F[static_cast<std::size_t>(a * r + i)] = cnt[static_cast<std::size_t>(a)] * hs.step(a, i);
            std::vector<i64> v(static_cast<std::size_t>(bw));
            for (int a = bs; a < be; ++a) v[static_cast<std::size_t>(a - bs)] = floor_mod(F[static_cast<std::size_t>(a * r + i)], ell);
            // Reduce against echelon rows; each row has a leading 1 at position lead.
            for (const auto& row : prev) {
                int lead = static_cast<int>(row.back());
                i64 f = v[static_cast<std::size_t>(lead)];
                if (f)
                    for (int k = 0; k < bw; ++k) v[static_cast<std::size_t>(k)] = floor_mod(v[static_cast<std::size_t>(k)] - f * row[static_cast<std::size_t>(k)], ell);
            }
            int lead = -1;
            for (int k = 0; k < bw; ++k)
                if (v[static_cast<std::size_t>(k)]) {
                    lead = k;
                    break;
                }
            if (lead >= 0) {
                auto saved = prev;
                i64 inv = inverse_mod(v[static_cast<std::size_t>(lead)], ell);
                for (auto& x : v) x = floor_mod(x * inv, ell);
                for (auto& row : prev) {
                    i64 f = row[static_cast<std::size_t>(lead)];
                    if (f)
                        for (int k = 0; k < bw; ++k) row[static_cast<std::size_t>(k)] = floor_mod(row[static_cast<std::size_t>(k)] - f * v[static_cast<std::size_t>(k)], ell);
                }
                v.push_back(lead);
                prev.push_back(v);
                rec(i + 1);
                prev = std::move(saved);
            }
            int a = r - 1;
            while (a >= 0) {
                if (++cnt[static_cast<std::size_t>(a)] < hs.range(a, i)) break;
                cnt[static_cast<std::size_t>(a)] = 0;
                --a;
            }
            if (a < 0) break;
        }
        for (int a = 0; a < r; ++a) F[static_cast<std::size_t>(a * r + i)] = 0;
    };
    rec(0);
}

/// All partitions (non-increasing exponent vectors) with Σe <= max_total.
inline std::vector<AbelianLGroup> groups_up_to(i64 ell, int max_order_exp) {
    std::vector<AbelianLGroup> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int remaining, int max_part) {
        out.emplace_back(ell, cur);
        for (int p = std::min(remaining, max_part); p >= 1; --p) {
            cur.push_back(p);
            rec(remaining - p, p);
            cur.pop_back();
        }
    };
    rec(max_order_exp, max_order_exp);
    std::sort(out.begin(), out.end(), [](const AbelianLGroup& a, const AbelianLGroup& b) {
        if (a.order_exp() != b.order_exp()) return a.order_exp() < b.order_exp();
        return a.exponents > b.exponents;
    });
    return out;
}

}  // namespace begstat

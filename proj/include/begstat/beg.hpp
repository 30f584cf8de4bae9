// Bilinearly enhanced groups: the pairing ω in ∧²G[ell^n], the map ψ: G^∨[ell^n] -> G[ell^n],
// their pairings, the compatibility relation, pushforwards, enumeration and canonical forms.
//
// Conventions.  G = ⊕ Z/ell^{e_i} b_i.  f_{i,m} is the character b_i -> ell^{-min(e_i,m)}, a basis of
// G^∨[ell^m].  Write mu_i = min(e_i,n) and r_i = e_i - mu_i, so ell^{r_i} b_i generate G[ell^n].
// ψ is stored as A (row-major) with ψ(f_{i,n}) = Σ_j A_ij ell^{r_j} b_j, A_ij mod ell^{mu_j}.
// ω = Σ_{i<j} c_ij b_i∧b_j with c_ij mod ell^{min(e_i,e_j)}, packed in (0,1),(0,2),...,(r-2,r-1) order.
#pragma once

#include "begstat/arith.hpp"
#include "begstat/groups.hpp"
#include "begstat/snf.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

namespace begstat {

inline int pair_index(int i, int j, int r) { return i * r - i * (i + 1) / 2 + (j - i - 1); }
inline int num_pairs(int r) { return r * (r - 1) / 2; }

struct OmegaElement {
    AbelianLGroup G;
    int n = 1;
    std::vector<i64> coeffs;

    i64 c(int i, int j) const {
        if (i == j) return 0;
        if (i < j) return coeffs[static_cast<std::size_t>(pair_index(i, j, G.rank()))];
        i64 m = ipow(G.ell, std::min(G.e(i), G.e(j)));
        return floor_mod(-coeffs[static_cast<std::size_t>(pair_index(j, i, G.rank()))], m);
    }
    bool operator==(const OmegaElement& o) const { return G == o.G && n == o.n && coeffs == o.coeffs; }
};

struct PsiMap {
    AbelianLGroup G;
    int n = 1;
    std::vector<i64> matrix;

    i64 at(int i, int j) const { return matrix[static_cast<std::size_t>(i * G.rank() + j)]; }
    bool operator==(const PsiMap& o) const { return G == o.G && n == o.n && matrix == o.matrix; }
};

/// Element of G^∨[ell^level]: Σ coords_i f_{i,level}, coords_i mod ell^{min(e_i,level)}.
struct DualElement {
    int level = 1;
    std::vector<i64> coords;
};

/// A residue num / ell^level in Q/Z, kept normalized (ell ∤ num, or num = level = 0).
struct Residue {
    i64 num = 0;
    int level = 0;
    bool operator==(const Residue& o) const { return num == o.num && level == o.level; }
    bool operator!=(const Residue& o) const { return !(*this == o); }
};

inline Residue make_residue(i64 ell, i64 num, int level) {
    if (level <= 0) return {};
    num = floor_mod(num, ipow(ell, level));
    while (level > 0 && num % ell == 0) {
        num /= ell;
        --level;
    }
    if (level == 0) return {};
    return {num, level};
}

inline Residue add_residue(i64 ell, const Residue& a, const Residue& b) {
    int L = std::max(a.level, b.level);
    i64 m = ipow(ell, L);
    i64 x = mul_mod(a.num, ipow(ell, L - a.level), m);
    i64 y = mul_mod(b.num, ipow(ell, L - b.level), m);
    return make_residue(ell, floor_mod(x + y, m), L);
}

inline Residue scale_residue(i64 ell, const Residue& a, i64 k) {
    if (a.level == 0) return {};
    return make_residue(ell, mul_mod(a.num, k, ipow(ell, a.level)), a.level);
}

inline Rational residue_to_rational(i64 ell, const Residue& a) {
    if (a.level == 0) return 0;
    return Rational(BigInt(a.num), big_pow(ell, a.level));
}

struct BegTriple {
    AbelianLGroup G;
    int n = 1;
    OmegaElement omega;
    PsiMap psi;

    i64 ell() const { return G.ell; }
    bool operator==(const BegTriple& o) const { return G == o.G && n == o.n && omega == o.omega && psi == o.psi; }
};

/// Exponent bookkeeping for the entry spaces of ω and ψ.
struct BegShape {
    AbelianLGroup G;
    int n;
    int mu(int i) const { return std::min(G.e(i), n); }
    int rr(int i) const { return G.e(i) - mu(i); }
    int omega_mod_exp(int i, int j) const { return std::min(G.e(i), G.e(j)); }
    int omega_step_exp(int i, int j) const { return std::max(0, omega_mod_exp(i, j) - n); }
    int psi_mod_exp(int, int j) const { return mu(j); }
    int psi_step_exp(int i, int j) const { return mu(j) - std::min(mu(i), mu(j)); }
};

inline void require_n(int n) {
    if (n < 1) throw InvalidArgument("n must be a positive integer");
}

/// Reduces all entries into range; throws if a torsion or homomorphism constraint fails.
inline void normalize_and_validate(BegTriple& t) {
    require_n(t.n);
    const int r = t.G.rank();
    BegShape sh{t.G, t.n};
    if (static_cast<int>(t.omega.coeffs.size()) != num_pairs(r)) throw InvalidArgument("omega has wrong number of coefficients");
    if (static_cast<int>(t.psi.matrix.size()) != r * r) throw InvalidArgument("psi matrix has wrong shape");
    t.omega.G = t.G;
    t.omega.n = t.n;
    t.psi.G = t.G;
    t.psi.n = t.n;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            auto& c = t.omega.coeffs[static_cast<std::size_t>(pair_index(i, j, r))];
            c = floor_mod(c, ipow(t.ell(), sh.omega_mod_exp(i, j)));
            if (c % ipow(t.ell(), sh.omega_step_exp(i, j)) != 0)
                throw InvalidArgument("omega is not ell^n-torsion");
        }
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            auto& a = t.psi.matrix[static_cast<std::size_t>(i * r + j)];
            a = floor_mod(a, ipow(t.ell(), sh.psi_mod_exp(i, j)));
            if (a % ipow(t.ell(), sh.psi_step_exp(i, j)) != 0)
                throw InvalidArgument("psi entry violates the homomorphism constraint");
        }
}

inline BegTriple trivial_triple(i64 ell, int n) {
    AbelianLGroup G(ell, {});
    return BegTriple{G, n, OmegaElement{G, n, {}}, PsiMap{G, n, {}}};
}

/// ω_m(a,b) = Σ_{i<j} c_ij (a_i b_j - a_j b_i) ell^{m - m_i - m_j} with m_i = min(e_i, m).
inline Residue omega_pairing(const OmegaElement& w, int m, const DualElement& a, const DualElement& b) {
    if (a.level != m || b.level != m) throw InvalidArgument("omega_pairing: torsion level mismatch");
    const auto& G = w.G;
    const i64 ell = G.ell;
    Residue acc;
    for (int i = 0; i < G.rank(); ++i)
        for (int j = i + 1; j < G.rank(); ++j) {
            int L = std::min(G.e(i), m) + std::min(G.e(j), m) - m;
            if (L <= 0) continue;
            i64 mod = ipow(ell, L);
            i64 x = floor_mod(mul_mod(a.coords[static_cast<std::size_t>(i)], b.coords[static_cast<std::size_t>(j)], mod) -
                                  mul_mod(a.coords[static_cast<std::size_t>(j)], b.coords[static_cast<std::size_t>(i)], mod),
                              mod);
            x = mul_mod(x, w.c(i, j), mod);
            acc = add_residue(ell, acc, make_residue(ell, x, L));
        }
    return acc;
}

/// ⟨γ,δ⟩ = δ(ψ(γ)) for γ in G^∨[ell^n] and δ in G^∨[ell^m].
inline Residue psi_pairing(const PsiMap& psi, const DualElement& gamma, const DualElement& delta) {
    const auto& G = psi.G;
    if (gamma.level != psi.n) throw InvalidArgument("psi_pairing: gamma must be ell^n-torsion");
    if (static_cast<int>(gamma.coords.size()) != G.rank() || static_cast<int>(delta.coords.size()) != G.rank())
        throw InvalidArgument("psi_pairing: group mismatch");
    const i64 ell = G.ell;
    BegShape sh{G, psi.n};
    Residue acc;
    for (int j = 0; j < G.rank(); ++j) {
        int L = std::min(G.e(j), delta.level) - sh.rr(j);
        if (L <= 0) continue;
        i64 mod = ipow(ell, L);
        i64 x = 0;
        for (int i = 0; i < G.rank(); ++i) x = floor_mod(x + mul_mod(gamma.coords[static_cast<std::size_t>(i)], psi.at(i, j), mod), mod);
        x = mul_mod(x, delta.coords[static_cast<std::size_t>(j)], mod);
        acc = add_residue(ell, acc, make_residue(ell, x, L));
    }
    return acc;
}

inline DualElement dual_basis(const AbelianLGroup& G, int i, int level) {
    DualElement d{level, std::vector<i64>(static_cast<std::size_t>(G.rank()), 0)};
    d.coords[static_cast<std::size_t>(i)] = 1;
    return d;
}

/// ell^r f_{i,n+r} written in the basis of G^∨[ell^n].
inline DualElement scaled_dual_basis(const AbelianLGroup& G, int i, int n, int r) {
    DualElement d{n, std::vector<i64>(static_cast<std::size_t>(G.rank()), 0)};
    int mu = std::min(G.e(i), n);
    int k = r + mu - std::min(G.e(i), n + r);
    if (k < mu) d.coords[static_cast<std::size_t>(i)] = ipow(G.ell, k);
    return d;
}

/// f_{i,a} regarded as an element of G^∨[ell^n], a <= n.
inline DualElement embedded_dual_basis(const AbelianLGroup& G, int i, int a, int n) {
    DualElement d{n, std::vector<i64>(static_cast<std::size_t>(G.rank()), 0)};
    d.coords[static_cast<std::size_t>(i)] = ipow(G.ell, std::min(G.e(i), n) - std::min(G.e(i), a));
    return d;
}

/// ⟨ell^r α, β⟩ = ⟨ell^r β, α⟩ + 2 ω_{n+r}(α, β) for all 0 <= r <= e_1 and basis pairs α, β of G^∨[ell^{n+r}].
inline bool check_compatibility(const AbelianLGroup& G, const OmegaElement& omega, const PsiMap& psi) {
    const int n = psi.n;
    const i64 ell = G.ell;
    for (int r = 0; r <= G.max_exponent(); ++r)
        for (int i = 0; i < G.rank(); ++i)
            for (int j = i + 1; j < G.rank(); ++j) {
                auto alpha = dual_basis(G, i, n + r), beta = dual_basis(G, j, n + r);
                Residue lhs = psi_pairing(psi, scaled_dual_basis(G, i, n, r), beta);
                Residue rhs = psi_pairing(psi, scaled_dual_basis(G, j, n, r), alpha);
                Residue w = omega_pairing(omega, n + r, alpha, beta);
                rhs = add_residue(ell, rhs, scale_residue(ell, w, 2));
                if (lhs != rhs) return false;
            }
    return true;
}

inline bool check_compatibility(const BegTriple& t) { return check_compatibility(t.G, t.omega, t.psi); }

/// ell^n ω = 0.
inline bool omega_is_torsion(const OmegaElement& w) {
    BegShape sh{w.G, w.n};
    for (int i = 0; i < w.G.rank(); ++i)
        for (int j = i + 1; j < w.G.rank(); ++j)
            if (w.c(i, j) % ipow(w.G.ell, sh.omega_step_exp(i, j)) != 0) return false;
    return true;
}

/// Builds a validated triple; throws if the compatibility relation fails.
inline BegTriple make_triple(const AbelianLGroup& G, int n, std::vector<i64> omega, std::vector<i64> psi) {
    BegTriple t{G, n, OmegaElement{G, n, std::move(omega)}, PsiMap{G, n, std::move(psi)}};
    normalize_and_validate(t);
    if (!check_compatibility(t)) throw InvalidArgument("omega and psi are not compatible");
    return t;
}

/// f_*ω for f: G -> H given as F(a,i), row-major with row length rank(G).
inline std::vector<i64> pushforward_omega(const AbelianLGroup& G, const AbelianLGroup& H, const std::vector<i64>& F,
                                          const OmegaElement& w) {
    const int rs = G.rank(), rd = H.rank();
    std::vector<i64> out(static_cast<std::size_t>(num_pairs(rd)), 0);
    for (int a = 0; a < rd; ++a)
        for (int b = a + 1; b < rd; ++b) {
            i64 mod = ipow(G.ell, std::min(H.e(a), H.e(b)));
            i64 s = 0;
            for (int i = 0; i < rs; ++i)
                for (int j = i + 1; j < rs; ++j) {
                    i64 c = w.coeffs[static_cast<std::size_t>(pair_index(i, j, rs))];
                    if (c == 0) continue;
                    i64 det = floor_mod(mul_mod(F[static_cast<std::size_t>(a * rs + i)], F[static_cast<std::size_t>(b * rs + j)], mod) -
                                            mul_mod(F[static_cast<std::size_t>(b * rs + i)], F[static_cast<std::size_t>(a * rs + j)], mod),
                                        mod);
                    s = floor_mod(s + mul_mod(c, det, mod), mod);
                }
            out[static_cast<std::size_t>(pair_index(a, b, rd))] = s;
        }
    return out;
}

/// f_*ψ = f ∘ ψ ∘ f^∨ on H^∨[ell^n].
inline std::vector<i64> pushforward_psi(const AbelianLGroup& G, const AbelianLGroup& H, const std::vector<i64>& F,
                                        const PsiMap& psi) {
    const int rs = G.rank(), rd = H.rank(), n = psi.n;
    const i64 ell = G.ell;
    BegShape sg{G, n}, sh{H, n};
    std::vector<i64> out(static_cast<std::size_t>(rd * rd), 0);
    std::vector<i64> P(static_cast<std::size_t>(rs)), z(static_cast<std::size_t>(rs));
    for (int a = 0; a < rd; ++a) {
        for (int i = 0; i < rs; ++i) {
            i64 f = F[static_cast<std::size_t>(a * rs + i)];
            P[static_cast<std::size_t>(i)] = floor_mod(scale_by_power(f, ell, sg.mu(i) - sh.mu(a)), ipow(ell, sg.mu(i)));
        }
        for (int j = 0; j < rs; ++j) {
            i64 mod = G.modulus(j);
            i64 s = 0;
            for (int i = 0; i < rs; ++i) s = floor_mod(s + mul_mod(P[static_cast<std::size_t>(i)], psi.at(i, j), mod), mod);
            z[static_cast<std::size_t>(j)] = mul_mod(s, ipow(ell, sg.rr(j)), mod);
        }
        for (int c = 0; c < rd; ++c) {
            i64 mod = H.modulus(c);
            i64 y = 0;
            for (int j = 0; j < rs; ++j) y = floor_mod(y + mul_mod(F[static_cast<std::size_t>(c * rs + j)], z[static_cast<std::size_t>(j)], mod), mod);
            i64 d = ipow(ell, sh.rr(c));
            if (y % d != 0) throw std::logic_error("pushforward_psi: image outside G[ell^n]");
            out[static_cast<std::size_t>(a * rd + c)] = y / d;
        }
    }
    return out;
}

inline BegTriple pushforward(const BegTriple& t, const AbelianLGroup& H, const std::vector<i64>& F) {
    return BegTriple{H, t.n, OmegaElement{H, t.n, pushforward_omega(t.G, H, F, t.omega)},
                     PsiMap{H, t.n, pushforward_psi(t.G, H, F, t.psi)}};
}

/// Flat encoding [c_ij..., A row-major]; lexicographic order on it defines canonical forms.
inline std::vector<i64> encode(const BegTriple& t) {
    std::vector<i64> e = t.omega.coeffs;
    e.insert(e.end(), t.psi.matrix.begin(), t.psi.matrix.end());
    return e;
}

inline BegTriple decode(const AbelianLGroup& G, int n, const std::vector<i64>& enc) {
    const auto np = static_cast<std::size_t>(num_pairs(G.rank()));
    return BegTriple{G, n, OmegaElement{G, n, std::vector<i64>(enc.begin(), enc.begin() + static_cast<std::ptrdiff_t>(np))},
                     PsiMap{G, n, std::vector<i64>(enc.begin() + static_cast<std::ptrdiff_t>(np), enc.end())}};
}

struct VecHash {
    std::size_t operator()(const std::vector<i64>& v) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (i64 x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL + 0x9e3779b97f4a7c15ULL;
        return h;
    }
};

/// Calls fn on every admissible coefficient vector for ω (ell^n-torsion) on G.
inline void for_each_omega(const AbelianLGroup& G, int n, const std::function<void(const std::vector<i64>&)>& fn) {
    BegShape sh{G, n};
    const int r = G.rank(), np = num_pairs(r);
    std::vector<i64> steps, ranges, cur(static_cast<std::size_t>(np), 0), idx(static_cast<std::size_t>(np), 0);
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            steps.push_back(ipow(G.ell, sh.omega_step_exp(i, j)));
            ranges.push_back(ipow(G.ell, sh.omega_mod_exp(i, j) - sh.omega_step_exp(i, j)));
        }
    while (true) {
        fn(cur);
        int p = np - 1;
        while (p >= 0) {
            auto q = static_cast<std::size_t>(p);
            if (++idx[q] < ranges[q]) {
                cur[q] = idx[q] * steps[q];
                break;
            }
            idx[q] = 0;
            cur[q] = 0;
            --p;
        }
        if (p < 0) return;
    }
}

/// Calls fn on every homomorphism ψ: G^∨[ell^n] -> G[ell^n] in matrix form.
inline void for_each_psi(const AbelianLGroup& G, int n, const std::function<void(const std::vector<i64>&)>& fn) {
    BegShape sh{G, n};
    const int r = G.rank();
    std::vector<i64> steps, ranges, cur(static_cast<std::size_t>(r * r), 0), idx(static_cast<std::size_t>(r * r), 0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            steps.push_back(ipow(G.ell, sh.psi_step_exp(i, j)));
            ranges.push_back(ipow(G.ell, sh.psi_mod_exp(i, j) - sh.psi_step_exp(i, j)));
        }
    while (true) {
        fn(cur);
        int p = r * r - 1;
        while (p >= 0) {
            auto q = static_cast<std::size_t>(p);
            if (++idx[q] < ranges[q]) {
                cur[q] = idx[q] * steps[q];
                break;
            }
            idx[q] = 0;
            cur[q] = 0;
            --p;
        }
        if (p < 0) return;
    }
}

inline BigInt count_omega_space(const AbelianLGroup& G, int n) { return wedge2_torsion_order(G, n); }

inline BigInt count_psi_space(const AbelianLGroup& G, int n) {
    long s = 0;
    for (int i = 0; i < G.rank(); ++i)
        for (int j = 0; j < G.rank(); ++j) s += std::min(std::min(G.e(i), n), std::min(G.e(j), n));
    return big_pow(G.ell, s);
}

/// Default cap on the number of (ω, ψ) candidates examined by enumerate_begs.
inline constexpr double kEnumerationCap = 2e7;

/// All compatible (ω, ψ) on G, ψ-major lexicographic order.
inline std::vector<BegTriple> enumerate_begs(const AbelianLGroup& G, int n, double cap = kEnumerationCap) {
    require_n(n);
    if (G.order_exp() > kDefaultElementCapExp) throw OracleTooLarge("oracle too large: " + G.to_string());
    double candidates = static_cast<double>(count_omega_space(G, n)) * static_cast<double>(count_psi_space(G, n));
    if (candidates > cap) throw OracleTooLarge("oracle too large: enumerate_begs on " + G.to_string());
    std::vector<BegTriple> out;
    std::vector<std::vector<i64>> omegas;
    for_each_omega(G, n, [&](const std::vector<i64>& c) { omegas.push_back(c); });
    for_each_psi(G, n, [&](const std::vector<i64>& A) {
        PsiMap psi{G, n, A};
        for (const auto& c : omegas) {
            OmegaElement w{G, n, c};
            if (check_compatibility(G, w, psi)) out.push_back(BegTriple{G, n, w, psi});
        }
    });
    return out;
}

/// Reduction of ψ to G^∨[ell] -> G[ell]: N_ij = A_ij ell^{mu_i - mu_j} mod ell.
inline std::vector<std::vector<i64>> psi_reduction(const PsiMap& psi) {
    const auto& G = psi.G;
    BegShape sh{G, psi.n};
    const int r = G.rank();
    std::vector<std::vector<i64>> N(static_cast<std::size_t>(r), std::vector<i64>(static_cast<std::size_t>(r), 0));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            int k = sh.mu(i) - sh.mu(j);
            i64 a = psi.at(i, j);
            N[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k >= 1 ? 0 : floor_mod(scale_by_power(a, G.ell, k), G.ell);
        }
    return N;
}

/// Codimension of ψ(G^∨[ell]) in G[ell].
inline int psi_corank(const PsiMap& psi) { return psi.G.rank() - rank_mod_ell(psi_reduction(psi), psi.G.ell); }

/// Brute-force corank: size of ψ(G^∨[ell]) computed by listing images.
inline int psi_corank_bruteforce(const PsiMap& psi) {
    const auto& G = psi.G;
    const int r = G.rank();
    if (r > 6) throw OracleTooLarge("oracle too large: corank brute force");
    auto N = psi_reduction(psi);
    std::set<std::vector<i64>> images;
    std::vector<i64> x(static_cast<std::size_t>(r), 0);
    i64 total = ipow(G.ell, r);
    for (i64 code = 0; code < total; ++code) {
        i64 c = code;
        for (int i = 0; i < r; ++i) {
            x[static_cast<std::size_t>(i)] = c % G.ell;
            c /= G.ell;
        }
        std::vector<i64> y(static_cast<std::size_t>(r), 0);
        for (int j = 0; j < r; ++j) {
            i64 s = 0;
            for (int i = 0; i < r; ++i) s += x[static_cast<std::size_t>(i)] * N[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(j)] = floor_mod(s, G.ell);
        }
        images.insert(y);
    }
    int dim = 0;
    for (auto s = images.size(); s > 1; s /= static_cast<std::size_t>(G.ell)) ++dim;
    return r - dim;
}

/// Symmetry ⟨α,β⟩ = ⟨β,α⟩ for ell^a α = ell^b β = 0 with a + b <= n.
inline bool is_allowable(const PsiMap& psi) {
    const auto& G = psi.G;
    const int n = psi.n;
    for (int a = 1; a < n; ++a) {
        int b = n - a;
        for (int i = 0; i < G.rank(); ++i)
            for (int j = 0; j < G.rank(); ++j) {
                auto alpha = embedded_dual_basis(G, i, a, n), beta = embedded_dual_basis(G, j, b, n);
                if (psi_pairing(psi, alpha, beta) != psi_pairing(psi, beta, alpha)) return false;
            }
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Automorphisms, orbits and canonical forms.

struct CanonCaps {
    int max_rank = 4;
    int max_order_exp = 6;
    double max_aut = 2e6;
};

inline bool within_caps(const AbelianLGroup& G, const CanonCaps& caps = {}) {
    return G.rank() <= caps.max_rank && G.order_exp() <= caps.max_order_exp &&
           static_cast<double>(count_aut(G)) <= caps.max_aut;
}

namespace detail {

struct AutStore {
    std::shared_mutex mu;
    std::map<AbelianLGroup, std::shared_ptr<const std::vector<std::vector<i64>>>> lists;
};

inline AutStore& aut_store() {
    static AutStore s;
    return s;
}

inline constexpr double kAutListCap = 3e5;

}  // namespace detail

/// Visits Aut(G); lists up to a few hundred thousand elements are kept in a shared cache.
inline void visit_automorphisms(const AbelianLGroup& G, const std::function<void(const std::vector<i64>&)>& fn) {
    if (static_cast<double>(count_aut(G)) > detail::kAutListCap) {
        for_each_automorphism(G, fn);
        return;
    }
    auto& st = detail::aut_store();
    std::shared_ptr<const std::vector<std::vector<i64>>> list;
    {
        std::shared_lock lock(st.mu);
        if (auto it = st.lists.find(G); it != st.lists.end()) list = it->second;
    }
    if (!list) {
        auto fresh = std::make_shared<std::vector<std::vector<i64>>>();
        for_each_automorphism(G, [&](const std::vector<i64>& F) { fresh->push_back(F); });
        std::unique_lock lock(st.mu);
        auto [it, inserted] = st.lists.emplace(G, fresh);
        list = it->second;
    }
    for (const auto& F : *list) fn(F);
}

/// |{f in Aut G : f_*ω = ω, f_*ψ = ψ}| by direct enumeration.
inline BigInt count_aut_triple(const BegTriple& t, const CanonCaps& caps = {}) {
    if (!within_caps(t.G, caps)) throw OracleTooLarge("oracle too large: Aut count on " + t.G.to_string());
    BigInt count = 0;
    visit_automorphisms(t.G, [&](const std::vector<i64>& F) {
        if (pushforward(t, t.G, F) == t) ++count;
    });
    return count;
}

struct CanonInfo {
    std::vector<i64> canonical;
    BigInt stabilizer;
    BigInt orbit_size;
};

namespace detail {

struct OrbitMemo {
    std::shared_mutex mu;
    std::unordered_map<std::vector<i64>, std::shared_ptr<const CanonInfo>, VecHash> map;
};

inline OrbitMemo& orbit_memo() {
    static OrbitMemo m;
    return m;
}

inline std::vector<i64> memo_key(const BegTriple& t, const std::vector<i64>& enc) {
    std::vector<i64> k{t.ell(), t.n, t.G.rank()};
    k.insert(k.end(), t.G.exponents.begin(), t.G.exponents.end());
    k.insert(k.end(), enc.begin(), enc.end());
    return k;
}

inline constexpr std::size_t kOrbitStoreCap = 200000;

}  // namespace detail

/// Orbit data of t under Aut(G): lexicographically least encoding and stabilizer order.
inline std::shared_ptr<const CanonInfo> canonical_info(const BegTriple& t, const CanonCaps& caps = {}) {
    if (!within_caps(t.G, caps)) throw OracleTooLarge("canonicalization cap exceeded on " + t.G.to_string());
    auto& memo = detail::orbit_memo();
    auto key = detail::memo_key(t, encode(t));
    {
        std::shared_lock lock(memo.mu);
        if (auto it = memo.map.find(key); it != memo.map.end()) return it->second;
    }
    std::unordered_set<std::vector<i64>, VecHash> orbit;
    visit_automorphisms(t.G, [&](const std::vector<i64>& F) { orbit.insert(encode(pushforward(t, t.G, F))); });
    auto info = std::make_shared<CanonInfo>();
    info->canonical = *std::min_element(orbit.begin(), orbit.end());
    info->orbit_size = orbit.size();
    info->stabilizer = count_aut(t.G) / info->orbit_size;
    std::unique_lock lock(memo.mu);
    if (orbit.size() <= detail::kOrbitStoreCap) {
        for (const auto& e : orbit) memo.map.emplace(detail::memo_key(t, e), info);
    } else {
        memo.map.emplace(key, info);
    }
    return info;
}

inline BegTriple canonicalize(const BegTriple& t, const CanonCaps& caps = {}) {
    return decode(t.G, t.n, canonical_info(t, caps)->canonical);
}

inline bool isomorphic(const BegTriple& a, const BegTriple& b, const CanonCaps& caps = {}) {
    if (a.G != b.G || a.n != b.n) return false;
    return canonical_info(a, caps)->canonical == canonical_info(b, caps)->canonical;
}

/// One isomorphism class of triples on a fixed group.
struct TripleClass {
    BegTriple rep;  // canonical representative
    BigInt aut;     // |Aut(G, ω, ψ)|
    BigInt orbit;   // number of (ω, ψ) pairs in the class
    int corank = 0;
};

namespace detail {

struct ClassStore {
    std::shared_mutex mu;
    std::map<std::tuple<i64, int, std::vector<int>>, std::shared_ptr<const std::vector<TripleClass>>> lists;
};

inline ClassStore& class_store() {
    static ClassStore s;
    return s;
}

}  // namespace detail

/// Isomorphism classes of ell^n-BEGs on G, sorted by canonical encoding.
inline std::shared_ptr<const std::vector<TripleClass>> triple_classes(const AbelianLGroup& G, int n, const CanonCaps& caps = {}) {
    auto& st = detail::class_store();
    auto key = std::make_tuple(G.ell, n, G.exponents);
    {
        std::shared_lock lock(st.mu);
        if (auto it = st.lists.find(key); it != st.lists.end()) return it->second;
    }
    auto all = enumerate_begs(G, n);
    std::map<std::vector<i64>, TripleClass> classes;
    for (const auto& t : all) {
        auto info = canonical_info(t, caps);
        if (classes.count(info->canonical)) continue;
        BegTriple rep = decode(G, n, info->canonical);
        classes.emplace(info->canonical, TripleClass{rep, info->stabilizer, info->orbit_size, psi_corank(rep.psi)});
    }
    auto out = std::make_shared<std::vector<TripleClass>>();
    for (auto& [k, c] : classes) out->push_back(std::move(c));
    std::unique_lock lock(st.mu);
    auto [it, inserted] = st.lists.emplace(key, out);
    return it->second;
}

/// Surjections f: src.G -> dst.G with f_*ω = ω' and f_*ψ = ψ'.
inline BigInt count_surj_triples(const BegTriple& src, const BegTriple& dst, double cap = 1e8) {
    if (src.n != dst.n || src.ell() != dst.ell()) throw InvalidArgument("count_surj_triples: incompatible triples");
    if (dst.G.trivial()) return 1;
    if (dst.G.rank() > src.G.rank()) return 0;
    BigInt count = 0;
    for_each_hom(src.G, dst.G, [&](const std::vector<i64>& F) {
        if (hom_is_surjective(src.G, dst.G, F) && pushforward(src, dst.G, F) == dst) ++count;
        return true;
    }, cap);
    return count;
}

struct Projection {
    AbelianLGroup H;
    std::vector<i64> F;  // H.rank() x G.rank(), row-major
};

/// The projection G -> G/<x> with the quotient in normal form.
inline Projection quotient_projection(const AbelianLGroup& G, const GroupElement& x) {
    const int r = G.rank();
    if (static_cast<int>(x.coords.size()) != r) throw InvalidArgument("quotient: element has wrong length");
    if (r == 0) return {G, {}};
    const int K = G.max_exponent() + 1;
    PadicMatrix rel(G.ell, K, r, r + 1);
    for (int i = 0; i < r; ++i) {
        rel(i, i) = ipow(G.ell, G.e(i));
        rel(i, r) = floor_mod(x.coords[static_cast<std::size_t>(i)], G.modulus(i));
    }
    auto snf = snf_local(rel, false);
    std::vector<int> rows;
    for (int a = r - 1; a >= 0; --a)
        if (snf.divisor_valuations[static_cast<std::size_t>(a)] > 0) rows.push_back(a);
    std::vector<int> exps;
    for (int a : rows) exps.push_back(snf.divisor_valuations[static_cast<std::size_t>(a)]);
    Projection p{AbelianLGroup(G.ell, exps), {}};
    p.F.assign(static_cast<std::size_t>(p.H.rank() * r), 0);
    for (int c = 0; c < p.H.rank(); ++c)
        for (int i = 0; i < r; ++i)
            p.F[static_cast<std::size_t>(c * r + i)] = floor_mod(snf.U(rows[static_cast<std::size_t>(c)], i), p.H.modulus(c));
    return p;
}

/// The quotient of t by the subgroup generated by x, with ω and ψ pushed forward along the projection.
inline BegTriple quotient_triple(const BegTriple& t, const GroupElement& x) {
    if (t.G.rank() == 0) {
        if (!x.coords.empty()) throw InvalidArgument("quotient: element has wrong length");
        return t;
    }
    auto p = quotient_projection(t.G, x);
    return pushforward(t, p.H, p.F);
}

// ---------------------------------------------------------------------------------------------
// Counting formulas.

/// R_n(G) = Σ_{i<j, max(e_i,e_j) <= n} min(e_i, e_j, n - max(e_i,e_j)).
inline int r_n(const AbelianLGroup& G, int n) {
    int s = 0;
    for (int i = 0; i < G.rank(); ++i)
        for (int j = i + 1; j < G.rank(); ++j) {
            int mx = std::max(G.e(i), G.e(j));
            if (mx <= n) s += std::min({G.e(i), G.e(j), n - mx});
        }
    return s;
}

/// ell^{R_n(G)}: the number of ω compatible with ψ = 0.
inline BigInt count_omega_for_zero_psi(const AbelianLGroup& G, int n) { return big_pow(G.ell, r_n(G, n)); }

inline BigInt count_omega_for_zero_psi_bruteforce(const AbelianLGroup& G, int n) {
    PsiMap zero{G, n, std::vector<i64>(static_cast<std::size_t>(G.rank() * G.rank()), 0)};
    BigInt count = 0;
    for_each_omega(G, n, [&](const std::vector<i64>& c) {
        if (check_compatibility(G, OmegaElement{G, n, c}, zero)) ++count;
    });
    return count;
}

/// Multiplicities m_k = #{i : min(e_i, n) = k}, indexed 0..n.
inline std::vector<int> level_multiplicities(const AbelianLGroup& G, int n) {
    std::vector<int> m(static_cast<std::size_t>(n + 1), 0);
    for (int e : G.exponents) ++m[static_cast<std::size_t>(std::min(e, n))];
    return m;
}

/// Number of allowable ψ: |Sym²G[ell^n]| |∧²G[ell^n]| / ell^{R_n}.
inline BigInt count_allowable_psi(const AbelianLGroup& G, int n) {
    return sym2_torsion_order(G, n) * wedge2_torsion_order(G, n) / count_omega_for_zero_psi(G, n);
}

/// A_{s,n}(G) for every s.  Reduction mod ell sends allowable ψ onto the block upper triangular space with
/// symmetric diagonal blocks at levels below n and a free block at level n, with constant fibres.  The
/// corank law is built block by block from the top level down.
inline std::vector<BigInt> allowable_psi_by_corank(const AbelianLGroup& G, int n) {
    require_n(n);
    const i64 ell = G.ell;
    const int r = G.rank();
    auto m = level_multiplicities(G, n);
    long dimW = 0;
    for (int k = 1; k <= n; ++k) {
        long mk = m[static_cast<std::size_t>(k)];
        dimW += (k < n) ? mk * (mk + 1) / 2 : mk * mk;
        for (int k2 = k + 1; k2 <= n; ++k2) dimW += mk * m[static_cast<std::size_t>(k2)];
    }
    BigInt total = count_allowable_psi(G, n);
    BigInt wsize = big_pow(ell, dimW);
    if (total % wsize != 0) throw std::logic_error("allowable_psi_by_corank: non-integral fibre");
    BigInt fibre = total / wsize;

    std::map<int, BigInt> dist;
    int a = m[static_cast<std::size_t>(n)];
    for (int c = 0; c <= a; ++c) dist[c] = count_matrices_of_rank(ell, a, a, a - c);
    for (int k = n - 1; k >= 1; --k) {
        int mk = m[static_cast<std::size_t>(k)];
        if (mk == 0) continue;
        std::map<int, BigInt> next;
        for (const auto& [c, w] : dist) {
            if (w == 0) continue;
            for (int kb = 0; kb <= mk; ++kb) {
                BigInt sym = count_symmetric_of_corank(ell, mk, kb);
                for (int rho = 0; rho <= std::min(kb, c); ++rho) {
                    BigInt wt = w * sym * big_pow(ell, static_cast<long>(mk) * a - static_cast<long>(c) * kb) *
                                count_matrices_of_rank(ell, kb, c, rho);
                    next[c + kb - rho] += wt;
                }
            }
        }
        dist = std::move(next);
        a += mk;
    }
    std::vector<BigInt> out(static_cast<std::size_t>(r + 1), 0);
    for (const auto& [c, w] : dist) out[static_cast<std::size_t>(c)] = w * fibre;
    return out;
}

inline BigInt count_allowable_psi_by_corank(const AbelianLGroup& G, int n, int s) {
    if (s < 0 || s > G.rank()) return 0;
    return allowable_psi_by_corank(G, n)[static_cast<std::size_t>(s)];
}

/// Brute force: allowable ψ tallied by corank.
inline std::vector<BigInt> allowable_psi_by_corank_bruteforce(const AbelianLGroup& G, int n, double cap = kEnumerationCap) {
    if (static_cast<double>(count_psi_space(G, n)) > cap) throw OracleTooLarge("oracle too large: psi space");
    std::vector<BigInt> out(static_cast<std::size_t>(G.rank() + 1), 0);
    for_each_psi(G, n, [&](const std::vector<i64>& A) {
        PsiMap psi{G, n, A};
        if (is_allowable(psi)) out[static_cast<std::size_t>(psi_corank(psi))] += 1;
    });
    return out;
}

/// Fraction of compatible pairs (ω, ψ) with ψ invertible:
/// (ell^-1; ell^-1)_{m_n} Π_{k<n} (ell^-1; ell^-2)_{ceil(m_k/2)}.
inline Rational h_G(const AbelianLGroup& G, int n) {
    require_n(n);
    auto m = level_multiplicities(G, n);
    Rational x(BigInt(1), BigInt(G.ell));
    Rational h = pochhammer(x, x, m[static_cast<std::size_t>(n)]);
    for (int k = 1; k < n; ++k) h *= pochhammer(x, x * x, (m[static_cast<std::size_t>(k)] + 1) / 2);
    return h;
}

}  // namespace begstat

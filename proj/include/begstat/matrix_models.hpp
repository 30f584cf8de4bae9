// The two random matrix models over Z/ell^K and extraction of (G, ω, ψ) from a cokernel.
//
// Basis order is e_1..e_g, f_1..f_g with Gram matrix J = [[0, I], [-I, 0]].
//   linear:    A = M + ell^n, M = J^{-1} S with S uniform symmetric (JM symmetric <=> M skew-symplectic).
//   nonlinear: A = 1 - F, F = S·D_q with S uniform in Sp and D_q = diag(1..1, q..q).
// The character f_{a,n} of G = coker A is x -> ell^{-n} ω(x, s) with s = -J ell^{n-mu_a} u_a, u_a the
// a-th row of U from U·A·V = D.  Then ψ(f_{a,n}) = ell^{-n} A s (linear) or ell^{-n}(F - 1) s (nonlinear).
#pragma once

#include "begstat/beg.hpp"
#include "begstat/snf.hpp"

#include <optional>
#include <random>

namespace begstat {

class PrecisionInsufficient : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Model { Linear, Nonlinear };

inline const char* model_name(Model m) { return m == Model::Linear ? "linear" : "nonlinear"; }

struct SampleConfig {
    i64 ell = 3;
    int n = 1;
    int g = 10;
    int K = 13;
    i64 q = 0;  // similitude factor for the nonlinear model; 0 when unused
    int t = 0;
    u64 seed = 7;
    u64 samples = 0;
    int max_resamples = 4;

    /// Largest precision whose modulus the arithmetic supports.
    int max_precision() const {
        int k = 0;
        i64 x = 1;
        while (x <= (i64{1} << 62) / ell) {
            x *= ell;
            ++k;
        }
        return k;
    }

    std::vector<std::string> problems(Model model) const {
        std::vector<std::string> out;
        if (!is_odd_prime(ell)) out.push_back("ell must be an odd prime");
        if (n < 1) out.push_back("n must be positive");
        if (g < 1) out.push_back("g must be positive");
        if (K <= n) out.push_back("K must exceed n");
        if (is_odd_prime(ell) && K > max_precision()) out.push_back("K exceeds the supported precision");
        if (t < 0) out.push_back("t must be nonnegative");
        if (max_resamples < 0) out.push_back("max_resamples must be nonnegative");
        if (model == Model::Nonlinear) {
            if (q < 2) {
                out.push_back("nonlinear model needs q >= 2");
            } else if (is_odd_prime(ell) && n >= 1) {
                i64 d = q - 1;
                int v = 0;
                while (d % ell == 0) {
                    d /= ell;
                    ++v;
                }
                if (v != n) out.push_back("q must satisfy ell^n || q - 1");
            }
        }
        return out;
    }

    void validate(Model model) const {
        auto p = problems(model);
        if (p.empty()) return;
        std::string msg = "invalid sample configuration:";
        for (const auto& s : p) msg += " " + s + ";";
        throw InvalidArgument(msg);
    }
};

/// Per-sample generator: the stream is a function of (seed, index, stream id) only.
inline std::mt19937_64 sample_rng(u64 seed, u64 index, u64 stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

/// Draws uniformly mod ell^Kmax and reduces, so raising K only reveals further digits of the same draw.
class DigitSource {
  public:
    DigitSource(std::mt19937_64& rng, i64 ell, int K, int Kmax)
        : rng_(rng), dist_(0, ipow(ell, Kmax) - 1), mod_(ipow(ell, K)), ell_(ell) {}
    i64 next() { return dist_(rng_) % mod_; }
    i64 next_mod_ell() { return dist_(rng_) % ell_; }

  private:
    std::mt19937_64& rng_;
    std::uniform_int_distribution<i64> dist_;
    i64 mod_;
    i64 ell_;
};

inline PadicMatrix standard_J(i64 ell, int K, int g) {
    PadicMatrix J(ell, K, 2 * g, 2 * g);
    i64 mod = ipow(ell, K);
    for (int i = 0; i < g; ++i) {
        J(i, i + g) = 1;
        J(i + g, i) = mod - 1;
    }
    return J;
}

/// M^T J + J M ≡ 0, i.e. JM symmetric.
inline bool is_skew_symplectic(const PadicMatrix& M) {
    const int g = M.rows / 2, d = M.rows;
    const ModRing R(M.ell, M.precision);
    auto jm = [&](int i, int j) { return i < g ? M(i + g, j) : R.neg(M(i - g, j)); };
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (jm(i, j) != jm(j, i)) return false;
    return true;
}

/// F^T J F ≡ q J, checked as ω(F e_i, F e_j) = q J_ij.
inline bool is_similitude(const PadicMatrix& F, i64 q) {
    const int g = F.rows / 2, d = F.rows;
    const ModRing R(F.ell, F.precision);
    const i64 qq = R.reduce(q);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            i64 s = 0;
            for (int k = 0; k < g; ++k) {
                s = R.add(s, R.mul(F(k, i), F(k + g, j)));
                s = R.sub(s, R.mul(F(k + g, i), F(k, j)));
            }
            i64 want = (j == i + g && i < g) ? qq : (i == j + g && j < g) ? R.neg(qq) : 0;
            if (s != want) return false;
        }
    return true;
}

/// Haar-uniform skew-symplectic M mod ell^K: M = J^{-1} S with S uniform symmetric.
inline PadicMatrix sample_skew_symplectic(i64 ell, int g, int K, std::mt19937_64& rng, int Kmax) {
    DigitSource src(rng, ell, K, Kmax);
    const int d = 2 * g;
    PadicMatrix S(ell, K, d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) S(i, j) = S(j, i) = src.next();
    ModRing R(ell, K);
    PadicMatrix M(ell, K, d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < g; ++i) {
            M(i, j) = R.neg(S(i + g, j));
            M(i + g, j) = S(i, j);
        }
    return M;
}

inline PadicMatrix sample_skew_symplectic(const SampleConfig& cfg, std::mt19937_64& rng) {
    return sample_skew_symplectic(cfg.ell, cfg.g, cfg.K, rng, cfg.max_precision());
}

namespace detail {

/// ω(x, y) = x^T J y.
inline i64 symp(const ModRing& R, const std::vector<i64>& x, const std::vector<i64>& y, int g) {
    i64 s = 0;
    for (int i = 0; i < g; ++i) {
        s = R.add(s, R.mul(x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i + g)]));
        s = R.sub(s, R.mul(x[static_cast<std::size_t>(i + g)], y[static_cast<std::size_t>(i)]));
    }
    return s;
}

}  // namespace detail

/// Haar-uniform S in Sp_{2g}(Z/ell^K) by sequential symplectic basis completion.
inline PadicMatrix sample_symplectic(i64 ell, int g, int K, std::mt19937_64& rng, int Kmax) {
    DigitSource src(rng, ell, K, Kmax);
    const ModRing R(ell, K);
    const int d = 2 * g;
    std::vector<std::vector<i64>> es, fs;
    auto project = [&](std::vector<i64> v) {
        for (std::size_t k = 0; k < es.size(); ++k) {
            i64 a = detail::symp(R, v, fs[k], g);
            i64 b = detail::symp(R, es[k], v, g);
            for (int i = 0; i < d; ++i) {
                auto u = static_cast<std::size_t>(i);
                v[u] = R.sub(v[u], R.add(R.mul(a, es[k][u]), R.mul(b, fs[k][u])));
            }
        }
        return v;
    };
    auto uniform_vec = [&]() {
        std::vector<i64> v(static_cast<std::size_t>(d));
        for (auto& x : v) x = src.next();
        return v;
    };
    for (int i = 0; i < g; ++i) {
        std::vector<i64> e;
        while (true) {
            e = project(uniform_vec());
            bool primitive = false;
            for (i64 x : e)
                if (x % ell != 0) primitive = true;
            if (primitive) break;
        }
        // A coordinate where e^T J is a unit; J e_k-projection gives a vector pairing to a unit with e.
        int k = -1;
        i64 unit = 0;
        for (int c = 0; c < d && k < 0; ++c) {
            std::vector<i64> x(static_cast<std::size_t>(d), 0);
            x[static_cast<std::size_t>(c)] = 1;
            i64 w = detail::symp(R, e, x, g);
            if (w % ell != 0) {
                k = c;
                unit = w;
            }
        }
        std::vector<i64> xk(static_cast<std::size_t>(d), 0);
        xk[static_cast<std::size_t>(k)] = 1;
        std::vector<i64> w0 = project(xk);
        i64 inv = R.inverse(unit);
        for (auto& x : w0) x = R.mul(x, inv);
        std::vector<i64> v = project(uniform_vec());
        i64 coef = R.sub(1, detail::symp(R, e, v, g));
        for (int c = 0; c < d; ++c) {
            auto u = static_cast<std::size_t>(c);
            v[u] = R.add(v[u], R.mul(coef, w0[u]));
        }
        es.push_back(std::move(e));
        fs.push_back(std::move(v));
    }
    PadicMatrix S(ell, K, d, d);
    for (int i = 0; i < g; ++i)
        for (int r = 0; r < d; ++r) {
            S(r, i) = es[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
            S(r, i + g) = fs[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
        }
    return S;
}

/// F = S·D_q, Haar-uniform on the similitude coset of factor q.
inline PadicMatrix sample_gsp_similitude(i64 ell, int g, int K, i64 q, std::mt19937_64& rng, int Kmax) {
    PadicMatrix F = sample_symplectic(ell, g, K, rng, Kmax);
    ModRing R(ell, K);
    i64 qq = R.reduce(q);
    for (int r = 0; r < 2 * g; ++r)
        for (int c = g; c < 2 * g; ++c) F(r, c) = R.mul(F(r, c), qq);
    return F;
}

inline PadicMatrix sample_gsp_similitude(const SampleConfig& cfg, std::mt19937_64& rng) {
    return sample_gsp_similitude(cfg.ell, cfg.g, cfg.K, cfg.q, rng, cfg.max_precision());
}

/// Result of one extraction with the per-sample invariant checks.
struct Extraction {
    BegTriple triple;
    std::vector<int> divisor_valuations;
    bool snf_ok = true;
    bool compatible = true;
    bool torsion_ok = true;
};

namespace detail {

/// Shared cokernel extraction.  psi_sign is +1 for ψ = A s / ell^n and -1 for ψ = -A s / ell^n.
inline Extraction extract_triple(const PadicMatrix& A, int n, int psi_sign, i64 omega_scale, bool verify_snf) {
    const i64 ell = A.ell;
    const int K = A.precision, d = A.rows, g = d / 2;
    const ModRing R(ell, K);
    Extraction out;
    auto snf = snf_local(A, verify_snf);
    if (verify_snf) out.snf_ok = snf_reconstructs(A, snf);
    out.divisor_valuations = snf.divisor_valuations;
    for (int v : snf.divisor_valuations)
        if (v + n >= K) throw PrecisionInsufficient("elementary divisor not resolved at precision " + std::to_string(K));

    std::vector<int> rows;
    for (int a = d - 1; a >= 0; --a)
        if (snf.divisor_valuations[static_cast<std::size_t>(a)] > 0) rows.push_back(a);
    std::vector<int> exps;
    for (int a : rows) exps.push_back(snf.divisor_valuations[static_cast<std::size_t>(a)]);
    AbelianLGroup G(ell, exps);
    const int r = G.rank();
    BegShape sh{G, n};
    auto urow = [&](int a) {
        std::vector<i64> u(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) u[static_cast<std::size_t>(j)] = snf.U(rows[static_cast<std::size_t>(a)], j);
        return u;
    };

    std::vector<i64> omega(static_cast<std::size_t>(num_pairs(r)), 0);
    for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
            i64 mod = ipow(ell, std::min(G.e(a), G.e(b)));
            i64 c = symp(R, urow(a), urow(b), g);
            omega[static_cast<std::size_t>(pair_index(a, b, r))] = mul_mod(c % mod, omega_scale, mod);
        }

    std::vector<i64> psi(static_cast<std::size_t>(r * r), 0);
    const i64 ln = ipow(ell, n);
    for (int a = 0; a < r; ++a) {
        auto u = urow(a);
        i64 scale = ipow(ell, n - sh.mu(a));
        std::vector<i64> s(static_cast<std::size_t>(d));
        for (int i = 0; i < g; ++i) {
            s[static_cast<std::size_t>(i)] = R.neg(R.mul(scale, u[static_cast<std::size_t>(i + g)]));
            s[static_cast<std::size_t>(i + g)] = R.mul(scale, u[static_cast<std::size_t>(i)]);
        }
        std::vector<i64> w(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            i64 x = 0;
            for (int j = 0; j < d; ++j) x = R.add(x, R.mul(A(i, j), s[static_cast<std::size_t>(j)]));
            if (x % ln != 0) throw std::logic_error("extract_triple: A s is not divisible by ell^n");
            w[static_cast<std::size_t>(i)] = x / ln;
        }
        for (int b = 0; b < r; ++b) {
            i64 mod = G.modulus(b);
            i64 y = 0;
            for (int j = 0; j < d; ++j)
                y = floor_mod(y + mul_mod(snf.U(rows[static_cast<std::size_t>(b)], j), w[static_cast<std::size_t>(j)], mod), mod);
            if (psi_sign < 0) y = floor_mod(-y, mod);
            i64 dv = ipow(ell, sh.rr(b));
            if (y % dv != 0) throw std::logic_error("extract_triple: psi image outside G[ell^n]");
            psi[static_cast<std::size_t>(a * r + b)] = y / dv;
        }
    }

    out.triple = BegTriple{G, n, OmegaElement{G, n, omega}, PsiMap{G, n, psi}};
    out.torsion_ok = omega_is_torsion(out.triple.omega);
    try {
        normalize_and_validate(out.triple);
    } catch (const InvalidArgument&) {
        out.torsion_ok = false;
    }
    out.compatible = check_compatibility(out.triple);
    return out;
}

}  // namespace detail

/// (G, ω, ψ) for coker(M + ell^n).  Throws PrecisionInsufficient when a divisor is not resolved.
inline Extraction extract_triple_linear(const PadicMatrix& M, int n, bool verify_snf = true) {
    PadicMatrix A = M;
    ModRing R(M.ell, M.precision);
    i64 ln = R.reduce(ipow(M.ell, n));
    for (int i = 0; i < A.rows; ++i) A(i, i) = R.add(A(i, i), ln);
    return detail::extract_triple(A, n, +1, 1, verify_snf);
}

/// (G, ω, ψ) for coker(1 - F) with ω = ((q-1)/(2 ell^n)) ω°.
inline Extraction extract_triple_nonlinear(const PadicMatrix& F, int n, i64 q, bool verify_snf = true) {
    PadicMatrix A = F;
    ModRing R(F.ell, F.precision);
    for (auto& x : A.a) x = R.neg(x);
    for (int i = 0; i < A.rows; ++i) A(i, i) = R.add(A(i, i), 1);
    i64 unit = (q - 1) / ipow(F.ell, n);
    i64 scale = R.mul(R.reduce(unit), R.inverse(2));
    return detail::extract_triple(A, n, -1, scale, verify_snf);
}

/// Draws t uniform elements and quotients by each in turn.
inline BegTriple apply_Q_sampler(BegTriple t0, int t, std::mt19937_64& rng) {
    for (int k = 0; k < t; ++k) {
        GroupElement x{std::vector<i64>(static_cast<std::size_t>(t0.G.rank()))};
        for (int i = 0; i < t0.G.rank(); ++i) {
            std::uniform_int_distribution<i64> dist(0, t0.G.modulus(i) - 1);
            x.coords[static_cast<std::size_t>(i)] = dist(rng);
        }
        t0 = quotient_triple(t0, x);
    }
    return t0;
}

/// One model draw with precision escalation.
struct SampleOutcome {
    std::optional<BegTriple> triple;  // empty when still unresolved after the resample budget
    int precision_used = 0;
    int escalations = 0;
    bool matrix_ok = true;
    bool snf_ok = true;
    bool compatible = true;
    bool torsion_ok = true;
};

inline constexpr u64 kModelStream = 1;
inline constexpr u64 kQuotientStream = 2;

/// Sample `index` of a run.  Each attempt replays the same stream at higher precision.
inline SampleOutcome draw_sample(const SampleConfig& cfg, Model model, u64 index, bool verify = true) {
    SampleOutcome out;
    const int Kmax = cfg.max_precision();
    int headroom = cfg.K - cfg.n;
    for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
        int K = std::min(cfg.n + headroom, Kmax);
        auto rng = sample_rng(cfg.seed, index, kModelStream);
        try {
            Extraction ex;
            if (model == Model::Linear) {
                PadicMatrix M = sample_skew_symplectic(cfg.ell, cfg.g, K, rng, Kmax);
                if (verify && !is_skew_symplectic(M)) out.matrix_ok = false;
                ex = extract_triple_linear(M, cfg.n, verify);
            } else {
                PadicMatrix F = sample_gsp_similitude(cfg.ell, cfg.g, K, cfg.q, rng, Kmax);
                if (verify && !is_similitude(F, cfg.q)) out.matrix_ok = false;
                ex = extract_triple_nonlinear(F, cfg.n, cfg.q, verify);
            }
            out.precision_used = K;
            out.escalations = attempt;
            out.snf_ok = ex.snf_ok;
            out.compatible = ex.compatible;
            out.torsion_ok = ex.torsion_ok;
            BegTriple tr = ex.triple;
            if (cfg.t > 0) {
                auto qrng = sample_rng(cfg.seed, index, kQuotientStream);
                tr = apply_Q_sampler(tr, cfg.t, qrng);
                if (!check_compatibility(tr)) out.compatible = false;
            }
            out.triple = std::move(tr);
            return out;
        } catch (const PrecisionInsufficient&) {
            if (K == Kmax) break;
            headroom *= 2;
        }
    }
    return out;
}

}  // namespace begstat

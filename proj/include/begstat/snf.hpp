// Dense matrices over Z/ell^K and Smith normal form over that local ring.
#pragma once

#include "begstat/arith.hpp"

#include <utility>
#include <vector>

namespace begstat {

/// Row-major matrix with entries in Z/ell^K.
struct PadicMatrix {
    i64 ell = 3;
    int precision = 1;
    int rows = 0, cols = 0;
    std::vector<i64> a;

    PadicMatrix() = default;
    PadicMatrix(i64 ell_, int K, int r, int c) : ell(ell_), precision(K), rows(r), cols(c), a(static_cast<std::size_t>(r * c), 0) {}

    static PadicMatrix identity(i64 ell, int K, int n) {
        PadicMatrix m(ell, K, n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    i64& operator()(int i, int j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    i64 operator()(int i, int j) const { return a[static_cast<std::size_t>(i * cols + j)]; }
    i64 modulus() const { return ipow(ell, precision); }
    ModRing ring() const { return ModRing(ell, precision); }

    bool operator==(const PadicMatrix& o) const {
        return ell == o.ell && precision == o.precision && rows == o.rows && cols == o.cols && a == o.a;
    }

    /// Same integer representatives reduced to a smaller precision.
    PadicMatrix reduced(int K) const {
        PadicMatrix m(ell, K, rows, cols);
        i64 mod = ipow(ell, K);
        for (std::size_t k = 0; k < a.size(); ++k) m.a[k] = a[k] % mod;
        return m;
    }

    PadicMatrix transpose() const {
        PadicMatrix t(ell, precision, cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

/// Product mod ell^K of matrices with reduced entries; one reduction per output entry.
inline PadicMatrix matmul(const PadicMatrix& x, const PadicMatrix& y) {
    if (x.cols != y.rows || x.ell != y.ell) throw InvalidArgument("matmul: shape mismatch");
    const int K = std::min(x.precision, y.precision);
    PadicMatrix z(x.ell, K, x.rows, y.cols);
    const i64 mod = ipow(x.ell, K);
    // Products of reduced entries stay below 2^52 when mod <= 2^26, so short sums fit in 64 bits.
    const bool small = mod <= (i64{1} << 26) && x.cols <= 2048;
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < y.cols; ++j) {
            if (small) {
                u64 s = 0;
                for (int k = 0; k < x.cols; ++k) s += static_cast<u64>(x(i, k)) * static_cast<u64>(y(k, j));
                z(i, j) = static_cast<i64>(s % static_cast<u64>(mod));
            } else {
                unsigned __int128 s = 0;
                for (int k = 0; k < x.cols; ++k)
                    s += static_cast<unsigned __int128>(static_cast<u64>(x(i, k) % mod)) * static_cast<u64>(y(k, j) % mod);
                z(i, j) = static_cast<i64>(s % static_cast<u64>(mod));
            }
        }
    return z;
}

/// U·A·V = diag(ell^{v_k} · unit_k) with v sorted ascending.  A valuation equal to the precision marks an
/// unresolved (zero mod ell^K) divisor.
struct SnfResult {
    PadicMatrix U, V;
    PadicMatrix D;
    std::vector<int> divisor_valuations;

    bool resolved() const {
        for (int v : divisor_valuations)
            if (v >= U.precision) return false;
        return true;
    }
};

/// Smith normal form over Z/ell^K: full pivoting on minimal valuation, unit normalization, then row and
/// column elimination.  Rectangular inputs are allowed; U is rows×rows and V is cols×cols.
inline SnfResult snf_local(const PadicMatrix& A, bool track_v = true) {
    const ModRing R(A.ell, A.precision);
    const int m = A.rows, n = A.cols, K = A.precision;
    PadicMatrix W = A;
    for (auto& x : W.a) x = R.reduce(x);
    SnfResult res{PadicMatrix::identity(A.ell, K, m), track_v ? PadicMatrix::identity(A.ell, K, n) : PadicMatrix(), PadicMatrix(), {}};
    auto& U = res.U;
    auto& V = res.V;
    const int steps = std::min(m, n);
    for (int k = 0; k < steps; ++k) {
        int best = K, pi = -1, pj = -1;
        for (int i = k; i < m && best > 0; ++i)
            for (int j = k; j < n; ++j) {
                i64 x = W(i, j);
                if (x == 0) continue;
                int v = R.valuation(x);
                if (v < best) {
                    best = v;
                    pi = i;
                    pj = j;
                    if (v == 0) break;
                }
            }
        if (pi < 0) {
            for (int r = k; r < steps; ++r) res.divisor_valuations.push_back(K);
            break;
        }
        if (pi != k) {
            for (int j = 0; j < n; ++j) std::swap(W(k, j), W(pi, j));
            for (int j = 0; j < m; ++j) std::swap(U(k, j), U(pi, j));
        }
        if (pj != k) {
            for (int i = 0; i < m; ++i) std::swap(W(i, k), W(i, pj));
            if (track_v)
                for (int i = 0; i < n; ++i) std::swap(V(i, k), V(i, pj));
        }
        const i64 pe = ipow(A.ell, best);
        const i64 unit = W(k, k) / pe;
        if (unit != 1) {
            const i64 inv = R.inverse(unit);
            for (int j = k; j < n; ++j) W(k, j) = R.mul(W(k, j), inv);
            for (int j = 0; j < m; ++j) U(k, j) = R.mul(U(k, j), inv);
        }
        for (int i = k + 1; i < m; ++i) {
            i64 x = W(i, k);
            if (x == 0) continue;
            i64 f = R.neg(x / pe);
            for (int j = k; j < n; ++j) W(i, j) = R.add(W(i, j), R.mul(f, W(k, j)));
            for (int j = 0; j < m; ++j) U(i, j) = R.add(U(i, j), R.mul(f, U(k, j)));
        }
        for (int j = k + 1; j < n; ++j) {
            i64 x = W(k, j);
            if (x == 0) continue;
            if (track_v) {
                i64 f = R.neg(x / pe);
                for (int i = 0; i < n; ++i) V(i, j) = R.add(V(i, j), R.mul(f, V(i, k)));
            }
            W(k, j) = 0;
        }
        res.divisor_valuations.push_back(best);
    }
    res.D = std::move(W);
    return res;
}

/// True iff U·A·V equals the diagonal D and U, V are invertible mod ell.
inline bool snf_reconstructs(const PadicMatrix& A, const SnfResult& s) {
    if (s.V.rows == 0) return false;
    PadicMatrix prod = matmul(matmul(s.U, A), s.V);
    if (!(prod.a == s.D.a)) return false;
    for (int i = 0; i < prod.rows; ++i)
        for (int j = 0; j < prod.cols; ++j)
            if (i != j && prod(i, j) != 0) return false;
    auto det_unit = [](const PadicMatrix& M) {
        // Rank over F_ell equals size iff invertible.
        std::vector<std::vector<i64>> rows(static_cast<std::size_t>(M.rows), std::vector<i64>(static_cast<std::size_t>(M.cols)));
        for (int i = 0; i < M.rows; ++i)
            for (int j = 0; j < M.cols; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = M(i, j) % M.ell;
        int rank = 0;
        for (int c = 0; c < M.cols && rank < M.rows; ++c) {
            int p = -1;
            for (int r = rank; r < M.rows; ++r)
                if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] % M.ell) {
                    p = r;
                    break;
                }
            if (p < 0) continue;
            std::swap(rows[static_cast<std::size_t>(p)], rows[static_cast<std::size_t>(rank)]);
            i64 inv = inverse_mod(rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)], M.ell);
            for (int r = 0; r < M.rows; ++r) {
                if (r == rank) continue;
                i64 f = floor_mod(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * inv, M.ell);
                for (int k = 0; k < M.cols; ++k)
                    rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
                        floor_mod(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] - f * rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(k)], M.ell);
            }
            ++rank;
        }
        return rank == M.rows;
    };
    return det_unit(s.U) && det_unit(s.V);
}

}  // namespace begstat

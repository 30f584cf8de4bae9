#include "begstat/qseries.hpp"
#include "begstat/snf.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace begstat;

TEST(Arith, IpowAndOverflow) {
    EXPECT_EQ(ipow(3, 0), 1);
    EXPECT_EQ(ipow(3, 5), 243);
    EXPECT_EQ(ipow(3, 39), 4052555153018976267LL);
    EXPECT_THROW(ipow(3, 40), std::overflow_error);
    EXPECT_EQ(big_pow(3, 45), BigInt("2954312706550833698643"));
}

TEST(Arith, ModularHelpers) {
    EXPECT_EQ(floor_mod(-1, 9), 8);
    EXPECT_EQ(valuation(54, 3), 3);
    EXPECT_EQ(mul_mod(inverse_mod(5, 27), 5, 27), 1);
    EXPECT_THROW(inverse_mod(6, 27), InvalidArgument);
    EXPECT_TRUE(is_odd_prime(3));
    EXPECT_FALSE(is_odd_prime(2));
    EXPECT_FALSE(is_odd_prime(9));
    const i64 big = ipow(3, 38);
    EXPECT_EQ(mul_mod(big - 1, big - 1, big), 1);
}

TEST(Arith, ModRing) {
    ModRing R(3, 4);
    EXPECT_EQ(R.reduce(-1), 80);
    EXPECT_EQ(R.valuation(0), 4);
    EXPECT_EQ(R.valuation(18), 2);
    EXPECT_EQ(R.mul(R.inverse(7), 7), 1);
    EXPECT_EQ(R.add(80, 2), 1);
}

TEST(QSeries, PochhammerExamples) {
    Rational third(1, 3), ninth(1, 9);
    EXPECT_EQ(pochhammer(third, third, 0), Rational(1));
    EXPECT_EQ(pochhammer(third, third, 1), Rational(2, 3));
    EXPECT_EQ(pochhammer(third, ninth, 2), Rational(52, 81));
}

TEST(QSeries, PochhammerMonotone) {
    for (auto [a, q] : std::vector<std::pair<Rational, Rational>>{{Rational(1, 3), Rational(1, 3)}, {Rational(1, 5), Rational(1, 25)}, {Rational(2, 3), Rational(1, 2)}}) {
        Rational prev = pochhammer(a, q, 0);
        for (int k = 1; k < 8; ++k) {
            Rational cur = pochhammer(a, q, k);
            EXPECT_LT(cur, prev);
            prev = cur;
        }
    }
}

namespace {

int rank_f(std::vector<std::vector<i64>> m, i64 ell) {
    if (m.empty()) return 0;
    int r = 0;
    const int rows = static_cast<int>(m.size()), cols = static_cast<int>(m[0].size());
    for (int c = 0; c < cols && r < rows; ++c) {
        int p = -1;
        for (int i = r; i < rows; ++i)
            if (m[i][c] % ell) p = i;
        if (p < 0) continue;
        std::swap(m[p], m[r]);
        i64 inv = inverse_mod(m[r][c], ell);
        for (int i = 0; i < rows; ++i)
            if (i != r) {
                i64 f = m[i][c] * inv % ell;
                for (int k = 0; k < cols; ++k) m[i][k] = floor_mod(m[i][k] - f * m[r][k], ell);
            }
        ++r;
    }
    return r;
}

}  // namespace

TEST(QSeries, MatrixCountsAgainstEnumeration) {
    for (i64 ell : {3, 5}) {
        for (int a = 1; a <= 2; ++a)
            for (int b = 1; b <= 2; ++b) {
                std::vector<long> by_rank(3, 0);
                const int cells = a * b;
                long total = 1;
                for (int i = 0; i < cells; ++i) total *= ell;
                for (long code = 0; code < total; ++code) {
                    std::vector<std::vector<i64>> m(a, std::vector<i64>(b));
                    long c = code;
                    for (int i = 0; i < a; ++i)
                        for (int j = 0; j < b; ++j) {
                            m[i][j] = c % ell;
                            c /= ell;
                        }
                    ++by_rank[rank_f(m, ell)];
                }
                for (int rho = 0; rho <= std::min(a, b); ++rho) EXPECT_EQ(count_matrices_of_rank(ell, a, b, rho), BigInt(by_rank[rho]));
            }
        // symmetric 3x3 by corank
        std::vector<long> sym(4, 0);
        long total = ell * ell * ell * ell * ell * ell;
        for (long code = 0; code < total; ++code) {
            long c = code;
            std::vector<i64> v(6);
            for (auto& x : v) {
                x = c % ell;
                c /= ell;
            }
            std::vector<std::vector<i64>> m{{v[0], v[1], v[2]}, {v[1], v[3], v[4]}, {v[2], v[4], v[5]}};
            ++sym[3 - rank_f(m, ell)];
        }
        for (int j = 0; j <= 3; ++j) EXPECT_EQ(count_symmetric_of_corank(ell, 3, j), BigInt(sym[j]));
        EXPECT_EQ(count_nonsingular_symmetric(ell, 3), BigInt(sym[0]));
    }
}

TEST(QSeries, GaussianBinomial) {
    EXPECT_EQ(gaussian_binomial(3, 2, 1), BigInt(4));
    EXPECT_EQ(gaussian_binomial(3, 4, 2), BigInt(130));
    EXPECT_EQ(gaussian_binomial(5, 3, 0), BigInt(1));
}

TEST(QSeries, InfiniteProducts) {
    long double c3 = c_ell(3);
    EXPECT_GT(c3, 0.0L);
    // ∏(1 - 3^{1-2i}): three factors bound it above, and the remaining ones cost at most Σ_{i>3} 3^{1-2i}
    const long double head = (2.0L / 3.0L) * (26.0L / 27.0L) * (242.0L / 243.0L);
    EXPECT_LT(c3, head);
    EXPECT_GT(c3, head * (1 - (1.0L / 2187.0L) * 9.0L / 8.0L));
    // ∏(1 + q^i)^{-1} = ∏(1 - q^{2i-1})
    EXPECT_NEAR(static_cast<double>(c3), static_cast<double>(tail_product(3, 0)), 1e-12);
    EXPECT_NEAR(static_cast<double>(c_ell(1009)), 1 - 1.0 / 1009, 2e-9);
    EXPECT_LT(tail_product(3, 0), tail_product(3, 1));
    EXPECT_NEAR(static_cast<double>(tail_product(3, 1) / tail_product(3, 0)), 4.0 / 3.0, 1e-12);
}

TEST(Snf, ScalarAndDiagonal) {
    auto A = PadicMatrix::identity(3, 6, 3);
    for (auto& x : A.a) x *= 9;
    auto s = snf_local(A);
    EXPECT_EQ(s.divisor_valuations, (std::vector<int>{2, 2, 2}));
    EXPECT_TRUE(snf_reconstructs(A, s));

    PadicMatrix B(3, 5, 2, 2);
    B(0, 0) = 3;
    B(1, 1) = 1;
    auto t = snf_local(B);
    EXPECT_EQ(t.divisor_valuations, (std::vector<int>{0, 1}));
    EXPECT_TRUE(snf_reconstructs(B, t));
}

TEST(Snf, ZeroMatrixIsUnresolved) {
    PadicMatrix Z(5, 3, 2, 2);
    auto s = snf_local(Z);
    EXPECT_EQ(s.divisor_valuations, (std::vector<int>{3, 3}));
    EXPECT_FALSE(s.resolved());
}

TEST(Snf, RandomReconstruction) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        int r = 1 + static_cast<int>(rng() % 6), c = 1 + static_cast<int>(rng() % 6);
        PadicMatrix A(3, 7, r, c);
        for (auto& x : A.a) x = static_cast<i64>(rng() % 2187) * ((rng() % 3) ? 1 : 3);
        for (auto& x : A.a) x %= 2187;
        auto s = snf_local(A);
        ASSERT_TRUE(snf_reconstructs(A, s));
        for (std::size_t k = 1; k < s.divisor_valuations.size(); ++k) EXPECT_LE(s.divisor_valuations[k - 1], s.divisor_valuations[k]);
    }
}

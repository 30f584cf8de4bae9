#include "begstat/groups.hpp"

#include <gtest/gtest.h>

#include <set>
#include <unordered_set>

using namespace begstat;

namespace {

AbelianLGroup grp(std::vector<int> e, i64 ell = 3) { return AbelianLGroup(ell, std::move(e)); }

// G⊗G = ⊕_{i,j} Z/ell^{min(e_i,e_j)}; returns (|S[ell^n]|, |(G⊗G/S)[ell^n]|) with S = span{x⊗y - y⊗x}.
std::pair<long, long> tensor_oracle(const AbelianLGroup& G, int n) {
    const int r = G.rank();
    std::vector<i64> mod;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) mod.push_back(ipow(G.ell, std::min(G.e(i), G.e(j))));
    const std::size_t d = mod.size();
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(i * r + j); };
    auto add = [&](std::vector<i64> a, const std::vector<i64>& b) {
        for (std::size_t k = 0; k < d; ++k) a[k] = (a[k] + b[k]) % mod[k];
        return a;
    };
    std::vector<std::vector<i64>> gens;
    auto elems = iterate_elements(G);
    for (const auto& x : elems)
        for (const auto& y : elems) {
            std::vector<i64> v(d, 0);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) {
                    i64 m = mod[idx(i, j)];
                    v[idx(i, j)] = floor_mod(x.coords[i] % m * (y.coords[j] % m) - y.coords[i] % m * (x.coords[j] % m), m);
                }
            gens.push_back(v);
        }
    std::set<std::vector<i64>> S{std::vector<i64>(d, 0)};
    std::vector<std::vector<i64>> frontier{std::vector<i64>(d, 0)};
    while (!frontier.empty()) {
        std::vector<std::vector<i64>> next;
        for (const auto& s : frontier)
            for (const auto& g : gens) {
                auto t = add(s, g);
                if (S.insert(t).second) next.push_back(t);
            }
        frontier = std::move(next);
    }
    auto scale = [&](std::vector<i64> v, i64 k) {
        for (std::size_t q = 0; q < d; ++q) v[q] = mul_mod(v[q], k, mod[q]);
        return v;
    };
    const i64 ln = ipow(G.ell, n);
    long wedge = 0;
    for (const auto& s : S)
        if (scale(s, ln) == std::vector<i64>(d, 0)) ++wedge;
    long in_pre = 0, total = 1;
    for (auto m : mod) total *= m;
    for (long code = 0; code < total; ++code) {
        std::vector<i64> v(d);
        long c = code;
        for (std::size_t q = 0; q < d; ++q) {
            v[q] = c % mod[q];
            c /= mod[q];
        }
        if (S.count(scale(v, ln))) ++in_pre;
    }
    return {wedge, in_pre / static_cast<long>(S.size())};
}

}  // namespace

TEST(Groups, Validation) {
    EXPECT_THROW(grp({1, 2}), InvalidArgument);
    EXPECT_THROW(grp({0}), InvalidArgument);
    EXPECT_THROW(AbelianLGroup(4, {1}), InvalidArgument);
    EXPECT_THROW(AbelianLGroup(2, {1}), InvalidArgument);
    EXPECT_EQ(AbelianLGroup::from_unsorted(3, {1, 3, 2}).exponents, (std::vector<int>{3, 2, 1}));
    auto G = grp({2, 1});
    EXPECT_EQ(G.order(), BigInt(27));
    EXPECT_EQ(G.rank(), 2);
}

TEST(Groups, IterateElements) {
    auto z3 = iterate_elements(grp({1}));
    ASSERT_EQ(z3.size(), 3u);
    for (i64 k = 0; k < 3; ++k) EXPECT_EQ(z3[static_cast<std::size_t>(k)].coords, std::vector<i64>{k});
    auto triv = iterate_elements(grp({}));
    ASSERT_EQ(triv.size(), 1u);
    EXPECT_TRUE(triv[0].coords.empty());
    auto sq = iterate_elements(grp({1, 1}));
    EXPECT_EQ(sq.size(), 9u);
    EXPECT_EQ(std::set<GroupElement>(sq.begin(), sq.end()).size(), 9u);
    EXPECT_THROW(iterate_elements(grp({5, 4})), OracleTooLarge);
}

TEST(Groups, WedgeSymExamples) {
    EXPECT_EQ(wedge2_torsion_order(grp({1}), 1), BigInt(1));
    EXPECT_EQ(wedge2_torsion_order(grp({1, 1}), 1), BigInt(3));
    EXPECT_EQ(wedge2_torsion_order(grp({2, 1}), 1), BigInt(3));
    EXPECT_EQ(sym2_torsion_order(grp({1}), 1), BigInt(3));
    EXPECT_EQ(sym2_torsion_order(grp({1, 1}), 1), BigInt(27));
    EXPECT_EQ(sym2_torsion_order(grp({}), 4), BigInt(1));
}

TEST(Groups, WedgeSymAgainstTensorOracle) {
    for (auto e : std::vector<std::vector<int>>{{1}, {2}, {1, 1}, {2, 1}, {3, 1}, {2, 2}, {1, 1, 1}}) {
        auto G = grp(e);
        for (int n = 1; n <= G.max_exponent() + 1; ++n) {
            auto [w, s] = tensor_oracle(G, n);
            EXPECT_EQ(wedge2_torsion_order(G, n), BigInt(w)) << G.to_string() << " n=" << n;
            EXPECT_EQ(sym2_torsion_order(G, n), BigInt(s)) << G.to_string() << " n=" << n;
        }
    }
}

TEST(Groups, WedgeSymBookkeeping) {
    for (i64 ell : {3, 5})
        for (const auto& G : groups_up_to(ell, 6))
            for (int n = 1; n <= 4; ++n) {
                long s = 0;
                for (int i = 0; i < G.rank(); ++i)
                    for (int j = 0; j < G.rank(); ++j) s += std::min({G.e(i), G.e(j), n});
                EXPECT_EQ(wedge2_torsion_order(G, n) * sym2_torsion_order(G, n), big_pow(ell, s));
            }
}

TEST(Groups, AutExamples) {
    EXPECT_EQ(count_aut(grp({1})), BigInt(2));
    EXPECT_EQ(count_aut(grp({1, 1})), BigInt(48));
    EXPECT_EQ(count_aut(grp({2, 1})), BigInt(108));
    EXPECT_EQ(count_aut(grp({})), BigInt(1));
}

TEST(Groups, AutAgainstBruteForce) {
    for (const auto& G : groups_up_to(3, 4)) EXPECT_EQ(count_aut(G), count_aut_bruteforce(G)) << G.to_string();
    for (const auto& G : groups_up_to(5, 3)) EXPECT_EQ(count_aut(G), count_aut_bruteforce(G)) << G.to_string();
}

TEST(Groups, AutomorphismEnumeration) {
    for (const auto& G : groups_up_to(3, 4)) {
        std::set<std::vector<i64>> seen;
        for_each_automorphism(G, [&](const std::vector<i64>& F) {
            EXPECT_TRUE(hom_is_surjective(G, G, F));
            seen.insert(F);
        });
        EXPECT_EQ(BigInt(seen.size()), count_aut(G)) << G.to_string();
    }
}

TEST(Groups, SurjExamples) {
    EXPECT_EQ(count_surj_groups(grp({1, 1}), grp({1})), BigInt(8));
    EXPECT_EQ(count_surj_groups(grp({1}), grp({1, 1})), BigInt(0));
    EXPECT_EQ(count_surj_groups(grp({2}), grp({2})), BigInt(6));
    EXPECT_EQ(count_surj_groups_bruteforce(grp({1, 1}), grp({1})), BigInt(8));
}

TEST(Groups, SurjAgainstBruteForce) {
    auto small = groups_up_to(3, 4);
    for (const auto& G : small)
        for (const auto& H : small)
            if (G.order_exp() + H.order_exp() <= 6)
                EXPECT_EQ(count_surj_groups(G, H), count_surj_groups_bruteforce(G, H)) << G.to_string() << " -> " << H.to_string();
}

// Exponents of a subgroup of H from the orders of its ell^k-torsion.
std::vector<int> subgroup_type(const AbelianLGroup& H, const std::set<std::vector<i64>>& K) {
    const int top = H.max_exponent();
    std::vector<long> tors(static_cast<std::size_t>(top + 2), 1);
    for (int k = 1; k <= top + 1; ++k) {
        long c = 0;
        for (const auto& v : K) {
            bool killed = true;
            for (int i = 0; i < H.rank(); ++i)
                if (mul_mod(v[static_cast<std::size_t>(i)], ipow(H.ell, k), H.modulus(i)) != 0) killed = false;
            if (killed) ++c;
        }
        tors[static_cast<std::size_t>(k)] = c;
    }
    // #{e_i >= k} = log |K[ell^k]| / |K[ell^{k-1}]|
    std::vector<int> exps;
    for (int k = top; k >= 1; --k) {
        int ge_k = valuation(tors[static_cast<std::size_t>(k)] / tors[static_cast<std::size_t>(k - 1)], H.ell);
        int ge_k1 = valuation(tors[static_cast<std::size_t>(k + 1)] / tors[static_cast<std::size_t>(k)], H.ell);
        for (int m = 0; m < ge_k - ge_k1; ++m) exps.push_back(k);
    }
    return exps;
}

TEST(Groups, HomCountIdentity) {
    // Σ over subgroups K <= H of #Surj(G, K) = |Hom(G, H)|.
    auto H = grp({2, 1});
    for (const auto& G : groups_up_to(3, 3)) {
        BigInt total = 0;
        std::set<std::set<std::vector<i64>>> images;
        for_each_hom(G, H, [&](const std::vector<i64>& F) {
            std::set<std::vector<i64>> img;
            for (const auto& x : iterate_elements(G)) img.insert(apply_hom(G, H, F, x).coords);
            images.insert(img);
            ++total;
            return true;
        });
        EXPECT_EQ(total, count_hom(G, H));
        BigInt by_image = 0;
        for (const auto& img : images) by_image += count_surj_groups(G, AbelianLGroup(3, subgroup_type(H, img)));
        EXPECT_EQ(by_image, total) << G.to_string();
    }
}

TEST(Groups, GroupsUpTo) {
    auto gs = groups_up_to(3, 4);
    // partitions of 0..4
    EXPECT_EQ(gs.size(), 1u + 1 + 2 + 3 + 5);
    EXPECT_TRUE(gs.front().trivial());
}

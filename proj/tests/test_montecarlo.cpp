#include "begstat/montecarlo.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace begstat;

namespace {

SampleConfig small_config(u64 N, int t = 0) {
    SampleConfig cfg;
    cfg.g = 6;
    cfg.samples = N;
    cfg.t = t;
    cfg.q = 4;
    return cfg;
}

ExperimentOptions opts(unsigned threads) {
    ExperimentOptions o;
    o.threads = threads;
    return o;
}

}  // namespace

TEST(MonteCarlo, EmptyRun) {
    auto h = run_experiment(small_config(0), Model::Linear, opts(1));
    EXPECT_EQ(h.total, 0u);
    EXPECT_TRUE(h.counts.empty());
    auto rep = compare(h, MeasureParams{3, 1, 0, 1e-12L}, 27);
    EXPECT_EQ(rep.tv, 0);
    EXPECT_TRUE(acceptance_failures(h, rep).empty());
}

TEST(MonteCarlo, Determinism) {
    auto a = run_experiment(small_config(400), Model::Linear, opts(1));
    auto b = run_experiment(small_config(400), Model::Linear, opts(1));
    EXPECT_EQ(a, b);
    auto c = run_experiment(small_config(400), Model::Linear, opts(3));
    EXPECT_EQ(a, c);
    auto cfg = small_config(400);
    cfg.seed = 8;
    EXPECT_FALSE(a == run_experiment(cfg, Model::Linear, opts(1)));
}

TEST(MonteCarlo, MergeIsAssociativeAndCommutative) {
    auto cfg = small_config(0, 1);
    ExperimentOptions o = opts(1);
    o.exact_order_exp = 1;  // exercise coarse entries as well
    auto x = run_range(cfg, Model::Linear, 0, 150, o);
    auto y = run_range(cfg, Model::Linear, 150, 300, o);
    auto z = run_range(cfg, Model::Linear, 300, 450, o);
    auto xy_z = x;
    xy_z.merge(y);
    xy_z.merge(z);
    auto yz = y;
    yz.merge(z);
    auto x_yz = x;
    x_yz.merge(yz);
    auto zyx = z;
    zyx.merge(y);
    zyx.merge(x);
    EXPECT_EQ(xy_z, x_yz);
    EXPECT_EQ(xy_z, zyx);
    auto whole = run_range(cfg, Model::Linear, 0, 450, o);
    EXPECT_EQ(xy_z, whole);
}

TEST(MonteCarlo, TrivialMomentIsOne) {
    for (int t = 0; t <= 1; ++t) {
        ExperimentOptions o = opts(1);
        o.exact_order_exp = 2;
        auto h = run_experiment(small_config(300, t), Model::Linear, o);
        auto m = estimate_moment(h, trivial_triple(3, 1));
        EXPECT_EQ(m.mean, 1.0);
        EXPECT_EQ(m.std_error, 0.0);
    }
}

TEST(MonteCarlo, CompareTheoryWithItself) {
    MeasureParams p{3, 1, 1, 1e-12L};
    const BigInt bound = 27;
    TripleHistogram h;
    h.t = 1;
    const double N = 1e12;
    auto rows = theory_rows(p, bound, h.exact_order_exp);
    double mass = 0;
    u64 total = 0;
    for (const auto& r : rows) {
        HistogramEntry e;
        e.count = static_cast<u64>(std::llround(N * r.probability));
        if (r.triple) {
            e.rep = *r.triple;
        } else {
            e.coarse = true;
            e.rep = decode(r.group, 1, std::vector<i64>(static_cast<std::size_t>(num_pairs(r.group.rank()) + r.group.rank() * r.group.rank()), 0));
        }
        h.counts[r.key] = e;
        total += e.count;
        mass += r.probability;
    }
    AbelianLGroup far(3, {4});
    HistogramEntry tail;
    tail.coarse = true;
    tail.rep = decode(far, 1, {0});
    tail.count = static_cast<u64>(std::llround(N * (1 - mass)));
    h.counts[coarse_key(far)] = tail;
    total += tail.count;
    h.total = total;
    auto rep = compare(h, p, bound);
    EXPECT_LT(rep.tv, 1e-9);
    for (const auto& r : rep.rows) EXPECT_LT(std::fabs(r.z), 1e-3) << r.key;
    EXPECT_NEAR(rep.out_of_support_observed, rep.out_of_support_expected, 1e-9);
    EXPECT_GT(rep.p_value, 0.999);
}

TEST(MonteCarlo, SmallRunAgreesWithTheory) {
    auto cfg = small_config(3000);
    cfg.g = 10;
    auto h = run_experiment(cfg, Model::Linear, opts(0));
    EXPECT_EQ(h.violations.total(), 0u);
    EXPECT_EQ(h.unresolved, 0u);
    auto rep = compare(h, MeasureParams{3, 1, 0, 1e-12L}, 27);
    const ClassRow* trivial = nullptr;
    for (const auto& r : rep.rows)
        if (r.group.trivial()) trivial = &r;
    ASSERT_NE(trivial, nullptr);
    EXPECT_NEAR(trivial->probability, static_cast<double>(c_ell(3)), 1e-12);
    EXPECT_LT(std::fabs(trivial->z), 4);
    EXPECT_LT(rep.tv, 0.06);
}

TEST(MonteCarlo, ConditionalsAndTv) {
    auto cfg = small_config(2000, 1);
    auto a = run_experiment(cfg, Model::Linear, opts(0));
    auto rep = compare(a, MeasureParams{3, 1, 1, 1e-12L}, 27);
    auto cond = conditionals(rep, AbelianLGroup(3, {1}));
    ASSERT_EQ(cond.size(), 3u);
    double shares = 0;
    for (const auto& c : cond) shares += c.expected_share;
    EXPECT_NEAR(shares, 1.0, 1e-12);
    EXPECT_EQ(tv_between(a, a, 3), 0.0);
}

TEST(MonteCarlo, AcceptanceFlagsViolations) {
    TripleHistogram h;
    h.total = 1000;
    h.unresolved = 2;
    h.violations.snf = 1;
    ComparisonReport rep;
    auto f = acceptance_failures(h, rep);
    EXPECT_EQ(f.size(), 2u);
}

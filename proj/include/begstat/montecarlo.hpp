// Monte Carlo runner: histograms of canonical triples, moment estimates and goodness-of-fit reports.
#pragma once

#include "begstat/matrix_models.hpp"
#include "begstat/measures.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <thread>

namespace begstat {

struct ExperimentOptions {
    int exact_order_exp = 4;  // samples with |G| <= ell^k are keyed by canonical triple, larger ones by group
    CanonCaps caps{};
    unsigned threads = 0;  // 0 = hardware concurrency
    bool verify = true;
};

struct HistogramEntry {
    BegTriple rep;
    bool coarse = false;
    u64 count = 0;
    std::map<std::vector<i64>, u64> raw;  // coarse entries keep every distinct raw triple

    bool operator==(const HistogramEntry& o) const {
        return coarse == o.coarse && count == o.count && raw == o.raw && (coarse ? rep.G == o.rep.G : rep == o.rep);
    }
};

struct InvariantTally {
    u64 matrix = 0, snf = 0, compatibility = 0, torsion = 0;
    u64 total() const { return matrix + snf + compatibility + torsion; }
    bool operator==(const InvariantTally& o) const {
        return matrix == o.matrix && snf == o.snf && compatibility == o.compatibility && torsion == o.torsion;
    }
};

struct TripleHistogram {
    i64 ell = 3;
    int n = 1;
    int t = 0;
    std::string model = "linear";
    u64 seed = 0;
    int exact_order_exp = 4;
    u64 total = 0;
    u64 unresolved = 0;
    InvariantTally violations;
    std::map<std::string, HistogramEntry> counts;
    double runtime_seconds = 0;

    u64 resolved() const { return total - unresolved; }

    void merge(const TripleHistogram& o) {
        total += o.total;
        unresolved += o.unresolved;
        violations.matrix += o.violations.matrix;
        violations.snf += o.violations.snf;
        violations.compatibility += o.violations.compatibility;
        violations.torsion += o.violations.torsion;
        for (const auto& [k, e] : o.counts) {
            auto [it, inserted] = counts.try_emplace(k, e);
            if (inserted) continue;
            it->second.count += e.count;
            for (const auto& [enc, c] : e.raw) it->second.raw[enc] += c;
        }
    }

    bool operator==(const TripleHistogram& o) const {
        return ell == o.ell && n == o.n && t == o.t && model == o.model && seed == o.seed &&
               exact_order_exp == o.exact_order_exp && total == o.total && unresolved == o.unresolved &&
               violations == o.violations && counts == o.counts;
    }
};

inline std::string group_key(const AbelianLGroup& G) {
    std::string s = "[";
    for (std::size_t i = 0; i < G.exponents.size(); ++i) s += (i ? "," : "") + std::to_string(G.exponents[i]);
    return s + "]";
}

inline std::string triple_key(const BegTriple& t) {
    std::string s = group_key(t.G) + "|";
    auto e = encode(t);
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
    return s;
}

inline std::string coarse_key(const AbelianLGroup& G) { return group_key(G) + "|coarse"; }

/// Adds one resolved sample to a histogram under its canonical or coarse key.
inline void record_triple(TripleHistogram& h, const BegTriple& tr, const ExperimentOptions& opts) {
    if (tr.G.order_exp() <= opts.exact_order_exp && within_caps(tr.G, opts.caps)) {
        BegTriple c = canonicalize(tr, opts.caps);
        auto& e = h.counts.try_emplace(triple_key(c), HistogramEntry{c, false, 0, {}}).first->second;
        ++e.count;
    } else {
        auto& e = h.counts.try_emplace(coarse_key(tr.G), HistogramEntry{tr, true, 0, {}}).first->second;
        ++e.count;
        ++e.raw[encode(tr)];
    }
}

inline TripleHistogram empty_histogram(const SampleConfig& cfg, Model model, const ExperimentOptions& opts) {
    TripleHistogram h;
    h.ell = cfg.ell;
    h.n = cfg.n;
    h.t = cfg.t;
    h.model = model_name(model);
    h.seed = cfg.seed;
    h.exact_order_exp = opts.exact_order_exp;
    return h;
}

/// Samples with indices [begin, end).
inline TripleHistogram run_range(const SampleConfig& cfg, Model model, u64 begin, u64 end, const ExperimentOptions& opts) {
    TripleHistogram h = empty_histogram(cfg, model, opts);
    for (u64 i = begin; i < end; ++i) {
        ++h.total;
        SampleOutcome o = draw_sample(cfg, model, i, opts.verify);
        if (!o.matrix_ok) ++h.violations.matrix;
        if (!o.snf_ok) ++h.violations.snf;
        if (!o.compatible) ++h.violations.compatibility;
        if (!o.torsion_ok) ++h.violations.torsion;
        if (!o.triple) {
            ++h.unresolved;
            continue;
        }
        record_triple(h, *o.triple, opts);
    }
    return h;
}

/// N samples split over worker threads; the merged result does not depend on the split.
inline TripleHistogram run_experiment(const SampleConfig& cfg, Model model, const ExperimentOptions& opts = {}) {
    cfg.validate(model);
    auto start = std::chrono::steady_clock::now();
    unsigned workers = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<u64>(workers, std::max<u64>(cfg.samples, 1)));
    std::vector<TripleHistogram> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto job = [&](unsigned w) {
        try {
            u64 b = cfg.samples * w / workers, e = cfg.samples * (w + 1) / workers;
            parts[w] = run_range(cfg, model, b, e, opts);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(job, w);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    TripleHistogram h = empty_histogram(cfg, model, opts);
    for (const auto& p : parts) h.merge(p);
    h.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return h;
}

struct MomentEstimate {
    double mean = 0;
    double std_error = 0;
    u64 samples = 0;
};

/// (1/N) Σ_samples #Surj(sample, dst) over resolved samples, with its standard error.
inline MomentEstimate estimate_moment(const TripleHistogram& h, const BegTriple& dst) {
    MomentEstimate m;
    m.samples = h.resolved();
    if (m.samples == 0) return m;
    long double s1 = 0, s2 = 0;
    auto add = [&](const BegTriple& tr, u64 c) {
        long double x = static_cast<long double>(count_surj_triples(tr, dst));
        s1 += x * c;
        s2 += x * x * c;
    };
    for (const auto& [k, e] : h.counts) {
        if (!e.coarse) {
            add(e.rep, e.count);
        } else {
            for (const auto& [enc, c] : e.raw) add(decode(e.rep.G, h.n, enc), c);
        }
    }
    long double N = static_cast<long double>(m.samples);
    long double mean = s1 / N;
    long double var = N > 1 ? (s2 - N * mean * mean) / (N - 1) : 0;
    m.mean = static_cast<double>(mean);
    m.std_error = static_cast<double>(std::sqrt(std::max<long double>(var, 0) / N));
    return m;
}

struct ClassRow {
    std::string key;
    AbelianLGroup group;
    std::optional<BegTriple> triple;  // empty for group-level rows
    u64 observed = 0;
    double probability = 0;
    double expected = 0;
    double z = 0;
};

struct ComparisonReport {
    std::vector<ClassRow> rows;
    double tv = 0;
    double chi2 = 0;
    int dof = 0;
    double p_value = 1;
    double out_of_support_observed = 0;
    double out_of_support_expected = 0;
    double truncated_mass = 0;
    u64 total = 0, resolved = 0, unresolved = 0;
    u64 seed = 0;
    double runtime_seconds = 0;
    BigInt bound = 1;
};

inline double z_score(double observed, double N, double p) {
    double var = N * p * (1 - p);
    if (var <= 0) return observed == N * p ? 0 : INFINITY;
    return (observed - N * p) / std::sqrt(var);
}

/// Expected law over the support |G| <= bound, one row per isomorphism class (or per group above the
/// exact-keying bound of the histogram).
inline std::vector<ClassRow> theory_rows(const MeasureParams& p, const BigInt& bound, int exact_order_exp) {
    std::vector<ClassRow> rows;
    for (const auto& G : groups_up_to(p.ell, order_exp_bound(p.ell, bound))) {
        bool exact = G.order_exp() <= exact_order_exp && within_caps(G);
        std::shared_ptr<const std::vector<TripleClass>> classes;
        if (exact) {
            try {
                classes = triple_classes(G, p.n);
            } catch (const OracleTooLarge&) {
                exact = false;
            }
        }
        if (exact) {
            for (const auto& c : *classes) {
                ClassRow r{triple_key(c.rep), G, c.rep, 0, static_cast<double>(qtmu_point(c.rep, p).value()), 0, 0};
                rows.push_back(std::move(r));
            }
        } else {
            rows.push_back(ClassRow{coarse_key(G), G, std::nullopt, 0, static_cast<double>(qtmu_group(G, p).value()), 0, 0});
        }
    }
    return rows;
}

inline ComparisonReport compare(const TripleHistogram& h, const MeasureParams& p, const BigInt& bound) {
    auto start = std::chrono::steady_clock::now();
    ComparisonReport rep;
    rep.total = h.total;
    rep.resolved = h.resolved();
    rep.unresolved = h.unresolved;
    rep.seed = h.seed;
    rep.bound = bound;
    rep.rows = theory_rows(p, bound, h.exact_order_exp);
    const double N = static_cast<double>(rep.resolved);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) index[rep.rows[i].key] = i;
    u64 in_support = 0;
    for (const auto& [k, e] : h.counts) {
        std::string key = k;
        if (!index.count(key)) key = coarse_key(e.rep.G);
        if (auto it = index.find(key); it != index.end()) {
            rep.rows[it->second].observed += e.count;
            in_support += e.count;
        }
    }
    double mass = 0;
    for (const auto& r : rep.rows) mass += r.probability;
    rep.truncated_mass = mass;
    rep.out_of_support_expected = 1 - mass;
    rep.out_of_support_observed = N > 0 ? static_cast<double>(rep.resolved - in_support) / N : 0;

    double tv = 0, chi2 = 0, pooled_obs = 0, pooled_exp = 0;
    int bins = 0;
    for (auto& r : rep.rows) {
        r.expected = N * r.probability;
        r.z = z_score(static_cast<double>(r.observed), N, r.probability);
        if (N > 0) tv += std::fabs(static_cast<double>(r.observed) / N - r.probability);
        if (r.expected >= 5) {
            chi2 += std::pow(static_cast<double>(r.observed) - r.expected, 2) / r.expected;
            ++bins;
        } else {
            pooled_obs += static_cast<double>(r.observed);
            pooled_exp += r.expected;
        }
    }
    double out_obs = N * rep.out_of_support_observed, out_exp = N * rep.out_of_support_expected;
    if (out_exp >= 5) {
        chi2 += std::pow(out_obs - out_exp, 2) / out_exp;
        ++bins;
    } else {
        pooled_obs += out_obs;
        pooled_exp += out_exp;
    }
    if (pooled_exp > 0) {
        chi2 += std::pow(pooled_obs - pooled_exp, 2) / pooled_exp;
        ++bins;
    }
    rep.tv = tv / 2;
    rep.chi2 = chi2;
    rep.dof = std::max(bins - 1, 0);
    if (rep.dof > 0) {
        boost::math::chi_squared dist(rep.dof);
        rep.p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Per-class conditional frequencies given the group, with binomial z-scores.
struct ConditionalRow {
    std::string key;
    u64 observed = 0;
    u64 group_total = 0;
    double expected_share = 0;
    double observed_share = 0;
    double z = 0;
};

inline std::vector<ConditionalRow> conditionals(const ComparisonReport& rep, const AbelianLGroup& G) {
    std::vector<ConditionalRow> out;
    u64 tot = 0;
    double ptot = 0;
    for (const auto& r : rep.rows)
        if (r.group == G) {
            tot += r.observed;
            ptot += r.probability;
        }
    for (const auto& r : rep.rows) {
        if (r.group != G) continue;
        ConditionalRow c{r.key, r.observed, tot, ptot > 0 ? r.probability / ptot : 0, 0, 0};
        c.observed_share = tot ? static_cast<double>(r.observed) / static_cast<double>(tot) : 0;
        c.z = z_score(static_cast<double>(r.observed), static_cast<double>(tot), c.expected_share);
        out.push_back(c);
    }
    return out;
}

/// Total variation between two empirical laws restricted to |G| <= ell^bound_exp.
inline double tv_between(const TripleHistogram& a, const TripleHistogram& b, int bound_exp) {
    std::map<std::string, std::pair<double, double>> m;
    double Na = static_cast<double>(a.resolved()), Nb = static_cast<double>(b.resolved());
    for (const auto& [k, e] : a.counts)
        if (e.rep.G.order_exp() <= bound_exp) m[k].first += static_cast<double>(e.count) / Na;
    for (const auto& [k, e] : b.counts)
        if (e.rep.G.order_exp() <= bound_exp) m[k].second += static_cast<double>(e.count) / Nb;
    double s = 0;
    for (const auto& [k, v] : m) s += std::fabs(v.first - v.second);
    return s / 2;
}

struct AcceptanceThresholds {
    double sigma = 3;                // per-class |z| bound
    double min_expected = 25;        // classes below this expected count are not z-tested
    double alpha = 0.01;             // chi-square level
    double max_unresolved = 0.001;   // fraction of N
};

/// Reasons a run fails the thresholds; empty means pass.
inline std::vector<std::string> acceptance_failures(const TripleHistogram& h, const ComparisonReport& rep,
                                                    const AcceptanceThresholds& th = {}) {
    std::vector<std::string> out;
    if (h.violations.total() > 0) out.push_back("invariant violations: " + std::to_string(h.violations.total()));
    if (h.total > 0 && static_cast<double>(h.unresolved) > th.max_unresolved * static_cast<double>(h.total))
        out.push_back("unresolved samples: " + std::to_string(h.unresolved));
    for (const auto& r : rep.rows)
        if (r.expected >= th.min_expected && std::fabs(r.z) > th.sigma)
            out.push_back("class " + r.key + " z=" + std::to_string(r.z));
    if (rep.dof > 0 && rep.p_value < th.alpha) out.push_back("chi-square p=" + std::to_string(rep.p_value));
    return out;
}

}  // namespace begstat

// Brute-force identity suites and ψ-marginal tables, shared by the CLI and the acceptance tests.
#pragma once

#include "begstat/measures.hpp"

#include <sstream>

namespace begstat {

struct OracleCheck {
    std::string suite;
    std::string label;
    bool pass = false;
    std::string detail;  // counterexample or observed values
};

inline std::string big_str(const BigInt& x) { return x.str(); }

inline std::string rat_str(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

inline std::string case_label(const AbelianLGroup& G, int n, int t = -1) {
    std::string s = G.to_string() + " n=" + std::to_string(n);
    if (t >= 0) s += " t=" + std::to_string(t);
    return s;
}

/// enumerate_begs size against |Sym²G[ell^n]| |∧²G[ell^n]|.
inline OracleCheck check_beg_count(const AbelianLGroup& G, int n) {
    OracleCheck c{"begs", case_label(G, n), false, ""};
    BigInt got = enumerate_begs(G, n).size();
    BigInt want = sym2_torsion_order(G, n) * wedge2_torsion_order(G, n);
    c.pass = got == want;
    c.detail = "count=" + big_str(got) + " formula=" + big_str(want);
    return c;
}

/// R_n, A_{s,n}, h_G and constant fibre against enumeration; classes partition the enumeration.
inline std::vector<OracleCheck> check_structure_counts(const AbelianLGroup& G, int n) {
    std::vector<OracleCheck> out;
    const std::string lab = case_label(G, n);
    auto begs = enumerate_begs(G, n);

    BigInt rf = count_omega_for_zero_psi(G, n), rb = count_omega_for_zero_psi_bruteforce(G, n);
    out.push_back({"counts", "R_n " + lab, rf == rb, "formula=" + big_str(rf) + " enumerated=" + big_str(rb)});

    auto af = allowable_psi_by_corank(G, n);
    std::vector<BigInt> ab(af.size(), 0);
    std::map<std::vector<i64>, BigInt> fibre;
    u64 invertible = 0;
    for (const auto& t : begs) fibre[t.psi.matrix] += 1;
    for (const auto& [A, cnt] : fibre) ab[static_cast<std::size_t>(psi_corank(PsiMap{G, n, A}))] += 1;
    for (const auto& t : begs)
        if (psi_corank(t.psi) == 0) ++invertible;
    {
        std::string d;
        for (std::size_t s = 0; s < af.size(); ++s) d += (s ? " " : "") + big_str(af[s]) + "/" + big_str(ab[s]);
        out.push_back({"counts", "A_sn " + lab, af == ab, "formula/enumerated by corank: " + d});
    }
    {
        bool constant = true;
        std::string bad;
        for (const auto& [A, cnt] : fibre)
            if (cnt != rf) {
                constant = false;
                bad = "fibre " + big_str(cnt) + " != " + big_str(rf);
                break;
            }
        out.push_back({"counts", "constant fibre " + lab, constant, constant ? "every allowable psi has " + big_str(rf) + " omegas" : bad});
    }
    {
        Rational hb(BigInt(invertible), BigInt(begs.size()));
        Rational hf = h_G(G, n);
        out.push_back({"counts", "h_G " + lab, hb == hf, "formula=" + rat_str(hf) + " enumerated=" + rat_str(hb)});
    }
    {
        BigInt orbits = 0;
        for (const auto& c : *triple_classes(G, n)) orbits += c.orbit;
        BigInt aut_f = count_aut(G), aut_b = count_aut_bruteforce(G);
        bool ok = orbits == BigInt(begs.size()) && aut_f == aut_b;
        out.push_back({"counts", "classes " + lab, ok,
                       "orbit sum=" + big_str(orbits) + " begs=" + std::to_string(begs.size()) + " |Aut|=" + big_str(aut_f) + "/" +
                           big_str(aut_b)});
    }
    return out;
}

/// Group aggregates against class sums, exactly in the rational coefficients.
inline std::vector<OracleCheck> check_aggregate(const AbelianLGroup& G, int n, int t) {
    MeasureParams p{G.ell, n, t, default_tol()};
    std::vector<OracleCheck> out;
    const std::string lab = case_label(G, n, t);
    Rational qa = qtmu_group(G, p).coeff, qs = qtmu_classes_coeff_sum(G, p);
    out.push_back({"garton", "qtmu " + lab, qa == qs, "group=" + rat_str(qa) + " pointwise=" + rat_str(qs)});
    if (t == 0) {
        Rational ma = mu_group(G, p).coeff, ms = mu_classes_coeff_sum(G, p);
        out.push_back({"garton", "mu " + lab, ma == ms, "group=" + rat_str(ma) + " pointwise=" + rat_str(ms)});
    }
    return out;
}

/// Malle's n = 1 prediction against qtmu_group.
inline OracleCheck check_malle(const AbelianLGroup& G, int t) {
    MeasureParams p{G.ell, 1, t, default_tol()};
    Rational a = malle_group(G, p).coeff, b = qtmu_group(G, p).coeff;
    return {"malle", case_label(G, 1, t), a == b, "malle=" + rat_str(a) + " qtmu=" + rat_str(b)};
}

/// Groups of rank <= rmax and order <= ell^max_order_exp.
inline std::vector<AbelianLGroup> groups_by_rank(i64 ell, int rmax, int max_order_exp) {
    std::vector<AbelianLGroup> out;
    for (auto& G : groups_up_to(ell, max_order_exp))
        if (G.rank() <= rmax) out.push_back(G);
    return out;
}

/// The structure suite: exponents [1],[2],[1,1],[2,1],[2,2],[1,1,1].
inline std::vector<AbelianLGroup> structure_suite(i64 ell) {
    std::vector<AbelianLGroup> out;
    for (const auto& e : std::vector<std::vector<int>>{{1}, {2}, {1, 1}, {2, 1}, {2, 2}, {1, 1, 1}}) out.emplace_back(ell, e);
    return out;
}

/// Q^t μ(G, [ψ]) / Q^t μ(G): the ψ-orbit marginal (ω summed out) conditioned on G.
inline Rational psi_conditional(const AbelianLGroup& G, const std::vector<i64>& psi, const MeasureParams& p) {
    PsiMap target{G, p.n, psi};
    BegTriple probe{G, p.n, OmegaElement{G, p.n, std::vector<i64>(static_cast<std::size_t>(num_pairs(G.rank())), 0)}, target};
    normalize_and_validate(probe);
    std::set<std::vector<i64>> orbit;
    visit_automorphisms(G, [&](const std::vector<i64>& F) { orbit.insert(pushforward_psi(G, G, F, probe.psi)); });
    Rational num = 0;
    for (const auto& c : *triple_classes(G, p.n))
        if (orbit.count(c.rep.psi.matrix)) num += qtmu_point(c.rep, p).coeff;
    Rational den = qtmu_group(G, p).coeff;
    if (den == 0) return 0;
    return num / den;
}

struct ClassMeasureRow {
    TripleClass cls;
    MeasureValue mu, qtmu;
    Rational conditional;  // qtmu_point / qtmu_group
};

inline std::vector<ClassMeasureRow> class_measure_rows(const AbelianLGroup& G, const MeasureParams& p) {
    std::vector<ClassMeasureRow> out;
    Rational tot = qtmu_group(G, p).coeff;
    for (const auto& c : *triple_classes(G, p.n)) {
        ClassMeasureRow r{c, mu_point(c.rep, p), qtmu_point(c.rep, p), 0};
        if (tot != 0) r.conditional = r.qtmu.coeff / tot;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace begstat

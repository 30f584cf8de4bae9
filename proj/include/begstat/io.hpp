// JSON ("schema": "beg/1") and CSV serialization.  Probabilities are written as decimal strings.
#pragma once

#include "begstat/montecarlo.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace begstat {

using json = nlohmann::json;

inline constexpr const char* kSchema = "beg/1";

inline std::string decimal(long double x, int digits = 15) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, x);
    return buf;
}

inline std::string rational_string(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

inline std::vector<int> parse_exponents(const std::string& text) {
    std::vector<int> out;
    std::string tok;
    std::istringstream is(text);
    while (std::getline(is, tok, ',')) {
        auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        tok = tok.substr(b, e - b + 1);
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw InvalidArgument("malformed exponent list: '" + text + "'");
        }
        if (used != tok.size() || v < 1) throw InvalidArgument("malformed exponent list: '" + text + "'");
        out.push_back(v);
    }
    return out;
}

inline json triple_to_json(const BegTriple& t) {
    json j;
    j["ell"] = t.ell();
    j["n"] = t.n;
    j["exponents"] = t.G.exponents;
    json om = json::array();
    const int r = t.G.rank();
    for (int i = 0; i < r; ++i)
        for (int k = i + 1; k < r; ++k) om.push_back({i + 1, k + 1, t.omega.coeffs[static_cast<std::size_t>(pair_index(i, k, r))]});
    j["omega"] = om;
    json ps = json::array();
    for (int i = 0; i < r; ++i) {
        json row = json::array();
        for (int k = 0; k < r; ++k) row.push_back(t.psi.at(i, k));
        ps.push_back(row);
    }
    j["psi"] = ps;
    return j;
}

/// Reads a triple record; omitted ω pairs are zero.  The result is validated.
inline BegTriple triple_from_json(const json& j) {
    try {
        i64 ell = j.at("ell").get<i64>();
        int n = j.at("n").get<int>();
        auto exps = j.at("exponents").get<std::vector<int>>();
        AbelianLGroup G(ell, exps);
        const int r = G.rank();
        std::vector<i64> omega(static_cast<std::size_t>(num_pairs(r)), 0);
        if (j.contains("omega"))
            for (const auto& e : j.at("omega")) {
                int a = e.at(0).get<int>(), b = e.at(1).get<int>();
                if (a < 1 || b <= a || b > r) throw InvalidArgument("omega entry must satisfy 1 <= i < j <= rank");
                omega[static_cast<std::size_t>(pair_index(a - 1, b - 1, r))] = e.at(2).get<i64>();
            }
        std::vector<i64> psi;
        const auto& P = j.at("psi");
        if (static_cast<int>(P.size()) != r) throw InvalidArgument("psi must have one row per generator");
        for (const auto& row : P) {
            if (static_cast<int>(row.size()) != r) throw InvalidArgument("psi rows must have rank entries");
            for (const auto& x : row) psi.push_back(x.get<i64>());
        }
        return make_triple(G, n, omega, psi);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed triple record: ") + e.what());
    }
}

inline json histogram_to_json(const TripleHistogram& h) {
    json j;
    j["schema"] = kSchema;
    j["kind"] = "histogram";
    j["ell"] = h.ell;
    j["n"] = h.n;
    j["t"] = h.t;
    j["model"] = h.model;
    j["seed"] = h.seed;
    j["exact_order_exp"] = h.exact_order_exp;
    j["total"] = h.total;
    j["unresolved"] = h.unresolved;
    j["violations"] = {{"matrix", h.violations.matrix},
                       {"snf", h.violations.snf},
                       {"compatibility", h.violations.compatibility},
                       {"torsion", h.violations.torsion}};
    json entries = json::array();
    for (const auto& [k, e] : h.counts) {
        json x;
        x["key"] = k;
        x["coarse"] = e.coarse;
        x["count"] = e.count;
        if (!e.coarse) {
            x["triple"] = triple_to_json(e.rep);
        } else {
            x["exponents"] = e.rep.G.exponents;
            json raw = json::array();
            for (const auto& [enc, c] : e.raw) raw.push_back({{"triple", triple_to_json(decode(e.rep.G, h.n, enc))}, {"count", c}});
            x["raw"] = raw;
        }
        entries.push_back(x);
    }
    j["entries"] = entries;
    return j;
}

inline TripleHistogram histogram_from_json(const json& j) {
    if (j.value("schema", "") != kSchema) throw InvalidArgument("unsupported schema");
    TripleHistogram h;
    h.ell = j.at("ell").get<i64>();
    h.n = j.at("n").get<int>();
    h.t = j.at("t").get<int>();
    h.model = j.at("model").get<std::string>();
    h.seed = j.at("seed").get<u64>();
    h.exact_order_exp = j.at("exact_order_exp").get<int>();
    h.total = j.at("total").get<u64>();
    h.unresolved = j.at("unresolved").get<u64>();
    const auto& v = j.at("violations");
    h.violations = {v.at("matrix").get<u64>(), v.at("snf").get<u64>(), v.at("compatibility").get<u64>(), v.at("torsion").get<u64>()};
    for (const auto& x : j.at("entries")) {
        HistogramEntry e;
        e.coarse = x.at("coarse").get<bool>();
        e.count = x.at("count").get<u64>();
        if (!e.coarse) {
            e.rep = triple_from_json(x.at("triple"));
        } else {
            AbelianLGroup G(h.ell, x.at("exponents").get<std::vector<int>>());
            for (const auto& r : x.at("raw")) e.raw[encode(triple_from_json(r.at("triple")))] = r.at("count").get<u64>();
            if (!e.raw.empty())
                e.rep = decode(G, h.n, e.raw.begin()->first);
            else
                e.rep = decode(G, h.n, std::vector<i64>(static_cast<std::size_t>(num_pairs(G.rank()) + G.rank() * G.rank()), 0));
        }
        h.counts[x.at("key").get<std::string>()] = std::move(e);
    }
    return h;
}

inline json report_to_json(const ComparisonReport& r) {
    json j;
    j["schema"] = kSchema;
    j["kind"] = "comparison";
    j["seed"] = r.seed;
    j["bound"] = r.bound.str();
    j["total"] = r.total;
    j["resolved"] = r.resolved;
    j["unresolved"] = r.unresolved;
    j["tv"] = decimal(r.tv);
    j["chi2"] = decimal(r.chi2);
    j["dof"] = r.dof;
    j["p_value"] = decimal(r.p_value);
    j["truncated_mass"] = decimal(r.truncated_mass);
    j["out_of_support_observed"] = decimal(r.out_of_support_observed);
    j["out_of_support_expected"] = decimal(r.out_of_support_expected);
    j["runtime_seconds"] = decimal(r.runtime_seconds, 6);
    json rows = json::array();
    for (const auto& c : r.rows) {
        json x;
        x["key"] = c.key;
        x["exponents"] = c.group.exponents;
        if (c.triple) x["triple"] = triple_to_json(*c.triple);
        x["observed"] = c.observed;
        x["probability"] = decimal(c.probability);
        x["expected"] = decimal(c.expected);
        x["z"] = decimal(c.z, 6);
        rows.push_back(x);
    }
    j["classes"] = rows;
    return j;
}

inline std::string report_to_csv(const ComparisonReport& r) {
    std::ostringstream os;
    os << "key,exponents,observed,probability,expected,z\n";
    for (const auto& c : r.rows) {
        os << '"' << c.key << "\"," << '"' << group_key(c.group) << "\"," << c.observed << ',' << decimal(c.probability) << ','
           << decimal(c.expected) << ',' << decimal(c.z, 6) << '\n';
    }
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open output file " + path);
    f << text;
}

inline json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open input file " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw InvalidArgument("invalid JSON in " + path + ": " + e.what());
    }
}

}  // namespace begstat

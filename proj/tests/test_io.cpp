#include "begstat/io.hpp"

#include <gtest/gtest.h>

using namespace begstat;

TEST(Io, TripleRoundTrip) {
    for (const auto& G : groups_up_to(3, 3))
        for (const auto& t : enumerate_begs(G, 2)) {
            auto j = triple_to_json(t);
            EXPECT_EQ(triple_from_json(json::parse(j.dump())), t);
        }
}

TEST(Io, TripleRecordLayout) {
    auto t = make_triple(AbelianLGroup(3, {1, 1}), 1, {2}, {0, 2, 1, 0});
    auto j = triple_to_json(t);
    EXPECT_EQ(j["exponents"], json::parse("[1,1]"));
    EXPECT_EQ(j["omega"], json::parse("[[1,2,2]]"));
    EXPECT_EQ(j["psi"], json::parse("[[0,2],[1,0]]"));
}

TEST(Io, MalformedTriple) {
    EXPECT_THROW(triple_from_json(json::parse(R"({"ell":3,"n":1,"exponents":[1],"psi":[[1,0]]})")), InvalidArgument);
    EXPECT_THROW(triple_from_json(json::parse(R"({"ell":3,"n":1,"exponents":[1,1],"omega":[[2,1,1]],"psi":[[0,0],[0,0]]})")), InvalidArgument);
    EXPECT_THROW(triple_from_json(json::parse(R"({"ell":3,"exponents":[1],"psi":[[1]]})")), InvalidArgument);
    // incompatible pair
    EXPECT_THROW(triple_from_json(json::parse(R"({"ell":3,"n":1,"exponents":[1,1],"omega":[[1,2,0]],"psi":[[0,1],[0,0]]})")), InvalidArgument);
}

TEST(Io, HistogramRoundTrip) {
    SampleConfig cfg;
    cfg.g = 6;
    cfg.samples = 300;
    cfg.t = 1;
    ExperimentOptions o;
    o.threads = 1;
    o.exact_order_exp = 1;
    auto h = run_experiment(cfg, Model::Linear, o);
    bool has_coarse = false;
    for (const auto& [k, e] : h.counts) has_coarse |= e.coarse;
    EXPECT_TRUE(has_coarse);
    auto back = histogram_from_json(json::parse(histogram_to_json(h).dump()));
    EXPECT_EQ(back, h);
}

TEST(Io, SchemaIsChecked) {
    json j = histogram_to_json(TripleHistogram{});
    EXPECT_EQ(j["schema"], "beg/1");
    j["schema"] = "beg/0";
    EXPECT_THROW(histogram_from_json(j), InvalidArgument);
}

TEST(Io, ReportUsesDecimalStrings) {
    SampleConfig cfg;
    cfg.g = 6;
    cfg.samples = 100;
    ExperimentOptions o;
    o.threads = 1;
    auto h = run_experiment(cfg, Model::Linear, o);
    auto rep = compare(h, MeasureParams{3, 1, 0, 1e-12L}, 9);
    auto j = report_to_json(rep);
    EXPECT_EQ(j["schema"], "beg/1");
    EXPECT_TRUE(j["tv"].is_string());
    EXPECT_TRUE(j["classes"][0]["probability"].is_string());
    EXPECT_NEAR(std::stod(j["classes"][0]["probability"].get<std::string>()), static_cast<double>(c_ell(3)), 1e-14);
    auto csv = report_to_csv(rep);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "key,exponents,observed,probability,expected,z");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rep.rows.size() + 1);
}

TEST(Io, ParseExponents) {
    EXPECT_EQ(parse_exponents("1,1"), (std::vector<int>{1, 1}));
    EXPECT_EQ(parse_exponents(" 2, 1 "), (std::vector<int>{2, 1}));
    EXPECT_TRUE(parse_exponents("").empty());
    EXPECT_THROW(parse_exponents("1,x"), InvalidArgument);
    EXPECT_THROW(parse_exponents("0"), InvalidArgument);
    EXPECT_THROW(parse_exponents("1.5"), InvalidArgument);
}

TEST(Io, DecimalFormatting) {
    EXPECT_EQ(decimal(0.25L), "0.25");
    EXPECT_EQ(decimal(0.375L), "0.375");
    EXPECT_EQ(rational_string(Rational(9, 52)), "9/52");
}

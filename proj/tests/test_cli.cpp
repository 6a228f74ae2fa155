#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "schrodclass/errors.hpp"
#include "schrodclass/fixtures.hpp"
#include "schrodclass/report_json.hpp"

using namespace schrodclass;

TEST(Fixtures, CaseCounts) {
    ASSERT_EQ(table_fixtures().size(), 3u);
    EXPECT_EQ(fixture_table(1).cases.size(), 8u);
    EXPECT_EQ(fixture_table(2).cases.size(), 5u);
    EXPECT_EQ(fixture_table(3).cases.size(), 4u);
    EXPECT_THROW(fixture_case(1, "9"), PreconditionError);
}

TEST(Fixtures, TableOneDimensions) {
    std::vector<int> dims;
    for (const auto& c : fixture_table(1).cases) dims.push_back(c.dim);
    EXPECT_EQ(dims, (std::vector<int>{2, 4, 3, 5, 5, 5, 5, 7}));
}

TEST(Fixtures, InstantiateReplacesWholeWords) {
    EXPECT_EQ(instantiate("i*b*x + b2", {{"b", "1"}}), "i*(1)*x + b2");
    EXPECT_EQ(instantiate("c*x^(-2)", {{"c", "i"}}), "(i)*x^(-2)");
    EXPECT_TRUE(is_zero(fixture_potential(fixture_case(1, "4c"), {{"b", "3"}}) - parse("3*i*x")));
    EXPECT_TRUE(is_zero(fixture_gamma(fixture_case(2, "2b"), {{"b", "2"}}) - parse("2*abs(t)^(-3/2)")));
}

TEST(Fixtures, BasisCountMatchesDimension) {
    for (const auto& table : table_fixtures()) {
        for (const auto& c : table.cases) {
            EXPECT_EQ(static_cast<int>(c.basis_templates.size()), c.dim) << table.table << "." << c.case_id;
            for (const auto& inst : c.instances) EXPECT_EQ(static_cast<int>(c.basis(inst).size()), c.dim);
        }
    }
}

TEST(Fixtures, SelfTestReproducesEveryCase) {
    std::vector<SelfTestResult> results = fixture_self_test(2);
    ASSERT_EQ(results.size(), 17u);
    for (const auto& r : results) EXPECT_TRUE(r.reproduced) << r.table << "." << r.case_id << ": " << r.detail;
}

TEST(ReportJson, RoundTripIsByteIdentical) {
    for (const char* v : {"1/x^2", "i*x", "x^2/4 + i*x", "0", "x^3 + t*x"}) {
        std::string a = report_to_json(classify_full(parse(v)));
        EXPECT_EQ(report_to_json(report_from_json(a)), a) << v;
    }
    std::string s = report_to_json(classify_subclass(parse("abs(t)^(-3/2)")));
    EXPECT_EQ(report_to_json(report_from_json(s)), s);
}

TEST(ReportJson, SchemaFields) {
    nlohmann::json j = nlohmann::json::parse(report_to_json(classify_full(parse("1/x^2"))));
    for (const char* key : {"basis", "canonical_potential", "case", "dim_ess", "k1", "k2", "mapping", "maximal",
                            "status", "table", "violated_condition"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["case"], "5");
    EXPECT_EQ(j["table"], 1);
    EXPECT_EQ(j["dim_ess"], 5);
    EXPECT_EQ(j["status"], "exact");
    EXPECT_EQ(j["basis"].size(), 5u);
    for (const auto& q : j["basis"]) {
        for (const char* key : {"chi", "rho", "sigma", "tau"}) EXPECT_TRUE(q[key].is_string()) << key;
    }
}

TEST(ReportJson, KeysSortedAndNewlineTerminated) {
    std::string s = report_to_json(classify_full(parse("0")));
    ASSERT_FALSE(s.empty());
    EXPECT_EQ(s.back(), '\n');
    EXPECT_LT(s.find("\"basis\""), s.find("\"case\""));
    EXPECT_LT(s.find("\"k2\""), s.find("\"mapping\""));
}

TEST(ReportJson, SchemaViolations) {
    EXPECT_THROW(report_from_json("[]"), PreconditionError);
    EXPECT_THROW(report_from_json("{\"case\": \"5\"}"), PreconditionError);
    nlohmann::json j = nlohmann::json::parse(report_to_json(classify_full(parse("1/x^2"))));
    j["k1"] = "three";
    EXPECT_THROW(report_from_json(j.dump()), PreconditionError);
    j = nlohmann::json::parse(report_to_json(classify_full(parse("1/x^2"))));
    j["basis"][0]["tau"] = "x^";
    EXPECT_THROW(report_from_json(j.dump()), GrammarError);
}

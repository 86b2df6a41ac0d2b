#include <gtest/gtest.h>

#include <fstream>

#include "goodmeasure/report.hpp"
#include "support.hpp"

using namespace goodmeasure;
using gmtest::R;

namespace {

Json schema() {
    std::ifstream in(GOODMEASURE_SCHEMA);
    return Json::parse(in);
}

const Json& field(const Json& report, const std::string& key) { return report.at(key); }

}  // namespace

TEST(Report, RationalsAreStrings) {
    EXPECT_EQ(rational_str(R("-3/6")), Json("-1/2"));
    EXPECT_EQ(rational_str(R("4")), Json("4"));
    EXPECT_EQ(rationals_str({R("1/3"), R("0")}), Json::parse(R"(["1/3", "0"])"));
}

TEST(Report, VerdictFields) {
    auto v = Verdict::not_good("test", Witness{R("1/3"), CompactOpen({CellId{0, {1}}})});
    v.certificate = ValuationCertificate{2, CompactOpen({CellId{0, {1}}}), 1, R("1/3")};
    auto j = verdict_json("x", v);
    EXPECT_EQ(j.at("kind"), "NotGood");
    EXPECT_EQ(j.at("witness").at("target"), "1/3");
    EXPECT_EQ(j.at("certificate").at("q"), 2);
    EXPECT_EQ(j.at("certificate").at("region"), Json::parse(R"([{"piece": 0, "path": [1]}])"));
    EXPECT_FALSE(j.contains("depth"));
}

TEST(Report, EveryScenarioHasTheRequiredKeys) {
    const auto s = schema();
    for (const auto& name : scenario_names(default_manifest())) {
        auto r = run_scenario(name, Json::object(), RunOptions{});
        auto j = report_json(r);
        for (const auto& key : s.at("required")) EXPECT_TRUE(j.contains(key.get<std::string>())) << name << " " << key;
        for (auto it = j.begin(); it != j.end(); ++it) EXPECT_TRUE(s.at("properties").contains(it.key())) << it.key();
        EXPECT_EQ(j.at("schema"), kReportSchema);
        EXPECT_TRUE(r.all_checks_pass()) << name;
        EXPECT_FALSE(r.primary.empty());
    }
}

TEST(Report, InputsRoundTrip) {
    auto r = run_scenario("back-and-forth-dyadic", Json::object(), RunOptions{});
    auto j = report_json(r);
    const auto& specs = field(j.at("inputs"), "specs");
    ASSERT_EQ(specs.size(), 2u);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        auto spec = spec_from_json(specs[i].at("spec"));
        EXPECT_EQ(spec_digest(spec), specs[i].at("digest"));
        EXPECT_EQ(spec_digest(spec), spec_digest(r.specs[i]));
    }
    auto again = run_scenario("back-and-forth-dyadic", j.at("inputs").at("params"), RunOptions{});
    again.runtime_ms = r.runtime_ms;
    EXPECT_EQ(report_json(again).dump(), j.dump());
}

TEST(Report, Deterministic) {
    for (const char* name : {"bratteli-fn", "example2-compactifications", "padic-haar"}) {
        auto a = run_scenario(name, Json::object(), RunOptions{});
        auto b = run_scenario(name, Json::object(), RunOptions{});
        a.runtime_ms = b.runtime_ms = 0;
        EXPECT_EQ(report_json(a).dump(), report_json(b).dump());
    }
}

TEST(Report, Overrides) {
    auto r = run_scenario("bratteli-fn", Json{{"range", "3..6"}}, RunOptions{});
    EXPECT_EQ(r.primary, "Good,NotGood,Good,NotGood");
    EXPECT_EQ(r.params.at("range"), "3..6");
    auto p = run_scenario("padic-haar", Json{{"p", 3}, {"members", {"2/9"}}, {"non_members", {"1/5"}}}, RunOptions{});
    EXPECT_TRUE(p.all_checks_pass());
}

TEST(Report, Errors) {
    EXPECT_THROW(run_scenario("no-such-scenario", Json::object(), RunOptions{}), std::invalid_argument);
    EXPECT_THROW(run_scenario("bratteli-fn", Json{{"range", "7..3"}}, RunOptions{}), std::invalid_argument);
    EXPECT_THROW(run_scenario("bratteli-fn", Json{{"range", 5}}, RunOptions{}), std::invalid_argument);
    EXPECT_THROW(run_scenario("back-and-forth-dyadic", Json{{"a", "missing"}}, RunOptions{}), std::invalid_argument);
    Json bad = Json::parse(R"([{"name": "x", "pipeline": "nothing", "params": {}}])");
    EXPECT_THROW(run_scenario("x", Json::object(), RunOptions{}, bad), std::invalid_argument);
}

TEST(Report, ManifestAddsScenariosWithoutCode) {
    Json m = Json::parse(R"([{"name": "padic-7", "pipeline": "padic_membership",
                              "params": {"p": 7, "members": ["5/49"], "non_members": ["1/3"]}}])");
    auto r = run_scenario("padic-7", Json::object(), RunOptions{}, m);
    EXPECT_EQ(r.primary, "Good");
    EXPECT_TRUE(r.all_checks_pass());
}

TEST(Report, TextFormat) {
    auto r = run_scenario("bernoulli-13-23", Json::object(), RunOptions{});
    auto t = report_text(r);
    EXPECT_NE(t.find("scenario: bernoulli-13-23"), std::string::npos);
    EXPECT_NE(t.find("primary: NotGood"), std::string::npos);
    EXPECT_EQ(t.find("FAIL"), std::string::npos);
}

#pragma once

/**
 * @file report.hpp
 * @brief Machine-readable reports and the data-driven scenario runner.
 *
 * Reports follow the schema "goodmeasure.report/1" (see docs/report-schema.json).
 * Rationals are written as "n" or "n/d" strings; embedded specs use the spec-file format.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "goodmeasure/homeo.hpp"
#include "goodmeasure/spec_io.hpp"

namespace goodmeasure {

inline constexpr const char* kReportSchema = "goodmeasure.report/1";

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ScenarioReport {
    std::string scenario;
    Json params = Json::object();
    std::vector<MeasureSpec> specs;
    std::vector<Json> verdicts;
    std::optional<Json> values;
    std::vector<Json> certificates;
    std::vector<Check> checks;
    std::optional<Json> artifacts;
    std::string primary;  // compared against --expect
    std::int64_t runtime_ms = 0;

    bool all_checks_pass() const;
};

Json rational_str(const Rational& r);
Json rationals_str(const std::vector<Rational>& rs);
Json region_json(const CompactOpen& u);
Json certificate_json(const ValuationCertificate& c);
Json verdict_json(const std::string& subject, const Verdict& v);
Json homeo_json(const std::string& subject, const HomeoVerdict& v);
Json sample_json(const ValueSample& s);
Json partial_homeo_json(const PartialHomeo& h);
Json gamma_json(const GammaCompactification& g);

Json report_json(const ScenarioReport& r);
std::string report_text(const ScenarioReport& r);

/// Defaults shared by every command.
struct RunOptions {
    std::size_t depth = 6;
    std::size_t horizon = 8;
    std::uint64_t budget = kDefaultBudget;
};

/// Built-in manifest: an array of {name, pipeline, description, params}.
const Json& default_manifest();
std::vector<std::string> scenario_names(const Json& manifest);

/// Runs the named manifest entry; `overrides` are merged over the entry's params.
/// Throws std::invalid_argument for unknown names, pipelines or malformed params.
ScenarioReport run_scenario(const std::string& name, const Json& overrides, const RunOptions& opts,
                            const Json& manifest = default_manifest());

}  // namespace goodmeasure

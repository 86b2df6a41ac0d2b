#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "goodmeasure/report.hpp"

using namespace goodmeasure;

namespace {

struct Common {
    std::vector<std::string> specs;
    std::size_t depth = 6;
    std::size_t horizon = 8;
    std::uint64_t budget = kDefaultBudget;
    std::string format = "json";
    std::string expect;
    std::string out;
    std::size_t jobs = 1;
    bool timing = false;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json parse_json_arg(const std::string& text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const Json::exception&) {
        throw UsageError(std::string("--") + what + " is not valid JSON");
    }
}

Json loose_value(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::exception&) {
        return text;
    }
}

MeasureSpec only_spec(const Common& c) {
    if (c.specs.size() != 1) throw UsageError("exactly one --spec is required");
    return load_spec_file(c.specs.front());
}

CompactOpen region_or_pieces(const std::string& text, const MeasureSpec& spec, std::size_t horizon) {
    if (!text.empty()) {
        auto j = parse_json_arg(text, "region");
        return compact_open_from_json(j.is_array() ? Json{{"cells", j}} : j);
    }
    std::vector<CellId> cells;
    const std::size_t n = piece_count(spec) ? std::min(*piece_count(spec), horizon) : horizon;
    for (std::size_t i = 0; i < n; ++i) cells.push_back(CellId{i, {}});
    return CompactOpen(cells);
}

ScenarioReport base_report(const std::string& name, const Common& c, Json params) {
    ScenarioReport r;
    r.scenario = name;
    params["depth"] = c.depth;
    params["horizon"] = c.horizon;
    params["budget"] = c.budget;
    r.params = std::move(params);
    return r;
}

std::string render(const std::vector<ScenarioReport>& reports, const Common& c) {
    if (c.format == "text") {
        std::string s;
        for (const auto& r : reports) s += report_text(r);
        return s;
    }
    Json out;
    auto one = [&](const ScenarioReport& r) {
        Json j = report_json(r);
        if (!c.timing) j["runtime_ms"] = 0;
        return j;
    };
    if (reports.size() == 1) {
        out = one(reports.front());
    } else {
        out = Json::array();
        for (const auto& r : reports) out.push_back(one(r));
    }
    return out.dump(2) + "\n";
}

int emit(const std::vector<ScenarioReport>& reports, const Common& c) {
    const auto text = render(reports, c);
    if (c.out.empty() || c.out == "-") {
        std::cout << text << std::flush;
        if (!std::cout) return 2;
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot open " << c.out << " for writing\n";
            return 2;
        }
        f << text;
        f.close();
        if (!f) {
            std::cerr << "error: failed writing " << c.out << "\n";
            return 2;
        }
    }
    if (!c.expect.empty()) {
        for (const auto& r : reports) {
            if (r.primary != c.expect) {
                std::cerr << "expectation mismatch for " << r.scenario << ": got " << r.primary << ", expected "
                          << c.expect << "\n";
                return 1;
            }
        }
    }
    return 0;
}

ScenarioReport run_values(const Common& c, const std::string& bound) {
    auto spec = only_spec(c);
    auto r = base_report("values", c, Json{{"bound", bound}});
    r.specs.push_back(spec);
    auto sample = enumerate_values(spec, c.depth, c.horizon, mass_from_json(loose_value(bound)), c.budget);
    r.values = sample_json(sample);
    r.primary = std::to_string(sample.values().size());
    return r;
}

ScenarioReport run_good(const Common& c, std::size_t search_depth) {
    auto spec = only_spec(c);
    auto r = base_report("good", c, Json{{"search_depth", search_depth}});
    r.specs.push_back(spec);
    auto v = decide_good(spec);
    r.verdicts.push_back(verdict_json("structural", v));
    if (v.kind == VerdictKind::Unknown) {
        SearchOptions so;
        so.horizon = c.horizon;
        so.budget = c.budget;
        v = find_nongood_witness(spec, search_depth, so);
        r.verdicts.push_back(verdict_json("search", v));
    }
    if (v.certificate) r.certificates.push_back(certificate_json(*v.certificate));
    r.primary = to_string(v.kind);
    return r;
}

ScenarioReport run_carve(const Common& c, const std::string& region_text, const std::string& target_text,
                         std::size_t max_depth) {
    auto spec = only_spec(c);
    auto region = region_or_pieces(region_text, spec, c.horizon);
    const Rational target = rational_from_json(loose_value(target_text));
    auto r = base_report("carve", c,
                         Json{{"region", region_json(region)}, {"target", rational_str(target)}, {"max_depth", max_depth}});
    r.specs.push_back(spec);
    auto res = carve(spec, region, target, max_depth, c.budget);
    Json a{{"depth", res.depth}};
    if (res.found) a["found"] = region_json(*res.found);
    r.artifacts = a;
    r.checks.push_back({"found set has the target mass", !res.found || mass_of(spec, *res.found) == ExtMass(target), ""});
    r.primary = res.ok() ? "Found" : "NotFound";
    return r;
}

ScenarioReport run_certify(const Common& c, const std::string& region_text, const std::string& target_text,
                           Prime max_q) {
    auto spec = only_spec(c);
    auto region = region_or_pieces(region_text, spec, c.horizon);
    const Rational target = rational_from_json(loose_value(target_text));
    auto r = base_report("certify", c, Json{{"region", region_json(region)}, {"target", rational_str(target)}, {"max_q", max_q}});
    r.specs.push_back(spec);
    auto cert = find_certificate(spec, region, target, max_q);
    if (cert) {
        r.certificates.push_back(certificate_json(*cert));
        r.checks.push_back({"certificate verifies", check_valuation_certificate(spec, *cert), ""});
    }
    r.primary = cert ? "Certified" : "None";
    return r;
}

ScenarioReport run_homeo(const Common& c, std::size_t stages, bool override_criterion) {
    if (c.specs.size() != 2) throw UsageError("homeo needs --spec twice");
    auto a = load_spec_file(c.specs[0]);
    auto b = load_spec_file(c.specs[1]);
    auto r = base_report("homeo", c, Json{{"stages", stages}, {"override", override_criterion}});
    r.specs = {a, b};
    auto h = homeo_criterion(a, b);
    r.verdicts.push_back(homeo_json("criterion", h));
    r.primary = to_string(h.kind);
    if (stages > 0 && (h.kind == HomeoKind::Homeomorphic || override_criterion)) {
        try {
            auto ph = back_and_forth(a, b, stages, c.depth, !override_criterion, c.budget);
            r.artifacts = Json{{"partial_homeo", partial_homeo_json(ph)}};
            r.checks.push_back({"stages completed", ph.stages.size() == stages || ph.exhausted, ""});
        } catch (const StageFailure& f) {
            Json fail{{"stage", f.stage},
                      {"depth", f.depth},
                      {"side", f.target_on_b ? "b" : "a"},
                      {"target", rational_str(f.witness.target)},
                      {"region", region_json(f.witness.region)},
                      {"partial_homeo", partial_homeo_json(f.partial)}};
            if (f.certificate) {
                fail["certificate"] = certificate_json(*f.certificate);
                r.certificates.push_back(certificate_json(*f.certificate));
            }
            r.artifacts = Json{{"stage_failure", fail}};
            r.checks.push_back({"stages completed", false, f.what()});
        }
    }
    if (h.kind == HomeoKind::Homeomorphic && a.kind() == b.kind()) {
        const bool infinite = total_mass(a).is_infinite() && total_mass(b).is_infinite();
        if (infinite)
            if (auto k = weak_homeo_constant(a, b)) r.values = Json{{"weak_homeo_constant", rational_str(*k)}};
    }
    return r;
}

ScenarioReport run_compactify(const Common& c, const std::string& classes, bool one_point, const std::string& gamma,
                              std::size_t steps) {
    auto spec = only_spec(c);
    const int modes = int(!classes.empty()) + int(one_point) + int(!gamma.empty());
    if (modes != 1) throw UsageError("compactify needs exactly one of --classes, --one-point, --gamma");
    if (!gamma.empty()) {
        const Rational g = rational_from_json(loose_value(gamma));
        auto r = base_report("compactify", c, Json{{"gamma", rational_str(g)}, {"steps", steps}});
        r.specs.push_back(spec);
        auto gc = gamma_compactification(spec, g, steps, c.depth, c.budget);
        r.verdicts.push_back(verdict_json("gamma", gc.verdict));
        if (gc.verdict.certificate) r.certificates.push_back(certificate_json(*gc.verdict.certificate));
        r.artifacts = Json{{"compactification", gamma_json(gc)}};
        r.primary = to_string(gc.verdict.kind);
        return r;
    }
    auto comp = one_point ? CompactificationSpec::one_point()
                          : compactification_from_json(parse_json_arg(classes, "classes"));
    auto r = base_report("compactify", c, Json{{"compactification", compactification_to_json(comp)}});
    r.specs.push_back(spec);
    auto v = decide_compactification_good(spec, comp);
    r.verdicts.push_back(verdict_json("compactification", v));
    if (v.certificate) r.certificates.push_back(certificate_json(*v.certificate));
    r.values = Json{{"depth", c.depth},
                    {"horizon", c.horizon},
                    {"values", rationals_str(compactified_values(spec, comp, c.depth, c.horizon, c.budget))}};
    r.artifacts = Json{{"compactification", compactification_to_json(comp)}};
    r.primary = to_string(v.kind);
    return r;
}

std::vector<ScenarioReport> run_scenarios(const Common& c, std::vector<std::string> names, const Json& overrides,
                                          const Json& manifest) {
    RunOptions opts;
    opts.depth = c.depth;
    opts.horizon = c.horizon;
    opts.budget = c.budget;
    for (const auto& n : names) {
        const auto known = scenario_names(manifest);
        if (std::find(known.begin(), known.end(), n) == known.end()) throw UsageError("unknown scenario '" + n + "'");
    }
    std::vector<ScenarioReport> reports(names.size());
    std::vector<std::exception_ptr> errors(names.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < names.size();) {
            try {
                reports[i] = run_scenario(names[i], overrides, opts, manifest);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(c.jobs, 1, names.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return reports;
}

void add_common(CLI::App* app, Common& c, bool spec_flag = true) {
    if (spec_flag) app->add_option("--spec", c.specs, "Measure spec file (JSON)");
    app->add_option("--depth", c.depth, "Refinement depth")->check(CLI::NonNegativeNumber);
    app->add_option("--horizon", c.horizon, "Number of pieces considered")->check(CLI::PositiveNumber);
    app->add_option("--budget", c.budget, "Subset-sum state budget")->check(CLI::PositiveNumber);
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    app->add_option("--expect", c.expect, "Exit with status 1 unless the primary result equals this");
    app->add_option("--out", c.out, "Write the report here instead of standard output");
    app->add_option("--jobs", c.jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
    app->add_flag("--timing", c.timing, "Record wall-clock runtime in reports");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact computations with good measures on Cantor spaces"};
    app.require_subcommand(1);
    Common c;

    auto* values = app.add_subcommand("values", "Sample the compact-open value set");
    std::string bound = "inf";
    add_common(values, c);
    values->add_option("--bound", bound, "Exclusive upper bound (rational or inf)");

    auto* good = app.add_subcommand("good", "Decide goodness, falling back to witness search");
    std::size_t search_depth = 4;
    add_common(good, c);
    good->add_option("--search-depth", search_depth, "Depth of the witness search");

    auto* carve_cmd = app.add_subcommand("carve", "Find a compact open subset of given mass");
    std::string region, target;
    std::size_t max_depth = 8;
    add_common(carve_cmd, c);
    carve_cmd->add_option("--region", region, "Region as a JSON array of cells (default: first pieces)");
    carve_cmd->add_option("--target", target, "Target mass")->required();
    carve_cmd->add_option("--max-depth", max_depth, "Refinement levels below the region");

    auto* certify = app.add_subcommand("certify", "Search for a valuation certificate");
    std::size_t max_q = 13;
    add_common(certify, c);
    certify->add_option("--region", region, "Region as a JSON array of cells (default: first pieces)");
    certify->add_option("--target", target, "Target mass")->required();
    certify->add_option("--max-q", max_q, "Largest prime tried");

    auto* homeo = app.add_subcommand("homeo", "Compare two measures and run the back-and-forth construction");
    std::size_t stages = 6;
    bool override_criterion = false;
    add_common(homeo, c);
    homeo->add_option("--stages", stages, "Back-and-forth stages (0 = criterion only)");
    homeo->add_flag("--override", override_criterion, "Run the construction even if the criterion fails");

    auto* compactify = app.add_subcommand("compactify", "Goodness of compactifications");
    std::string classes, gamma;
    bool one_point = false;
    std::size_t steps = 8;
    add_common(compactify, c);
    compactify->add_option("--classes", classes, "Piece classes as JSON, e.g. {\"classes\": [...]}");
    compactify->add_flag("--one-point", one_point, "One-point compactification");
    compactify->add_option("--gamma", gamma, "Introduce this clopen value");
    compactify->add_option("--steps", steps, "Carving steps for --gamma");

    auto* scenario = app.add_subcommand("scenario", "Run built-in or manifest scenarios");
    std::vector<std::string> names, sets;
    std::string range, manifest_path;
    bool list = false;
    add_common(scenario, c, false);
    scenario->add_option("names", names, "Scenario names (default: all)");
    scenario->add_option("--range", range, "N range for bratteli-fn, e.g. 3..17");
    scenario->add_option("--set", sets, "Parameter override key=value (value parsed as JSON when possible)");
    scenario->add_option("--manifest", manifest_path, "Manifest file replacing the built-in catalog");
    scenario->add_flag("--list", list, "List scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        std::vector<ScenarioReport> reports;
        if (*values) reports.push_back(run_values(c, bound));
        else if (*good) reports.push_back(run_good(c, search_depth));
        else if (*carve_cmd) reports.push_back(run_carve(c, region, target, max_depth));
        else if (*certify) reports.push_back(run_certify(c, region, target, static_cast<Prime>(max_q)));
        else if (*homeo) reports.push_back(run_homeo(c, stages, override_criterion));
        else if (*compactify) reports.push_back(run_compactify(c, classes, one_point, gamma, steps));
        else {
            Json manifest = default_manifest();
            if (!manifest_path.empty()) {
                std::ifstream in(manifest_path);
                if (!in) throw UsageError("cannot open manifest " + manifest_path);
                try {
                    in >> manifest;
                } catch (const Json::exception&) {
                    throw UsageError("manifest " + manifest_path + " is not valid JSON");
                }
                if (!manifest.is_array()) throw UsageError("a manifest must be a JSON array");
            }
            if (list) {
                for (const auto& e : manifest)
                    std::cout << e.value("name", std::string()) << "\t" << e.value("description", std::string()) << "\n";
                return 0;
            }
            Json overrides = Json::object();
            if (!range.empty()) overrides["range"] = range;
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
                overrides[s.substr(0, eq)] = loose_value(s.substr(eq + 1));
            }
            if (names.empty()) names = scenario_names(manifest);
            reports = run_scenarios(c, names, overrides, manifest);
        }
        return emit(reports, c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

#include "goodmeasure/report.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace goodmeasure {

namespace {

const char* kManifest = R"json([
  {"name": "bratteli-fn", "pipeline": "bratteli_table",
   "description": "Goodness of the stationary diagrams F_N over a range of N",
   "params": {"range": "3..17"}},
  {"name": "bernoulli-13-23", "pipeline": "bernoulli_certificate",
   "description": "Bernoulli(1/3, 2/3): certified failure of goodness",
   "params": {"weights": ["1/3", "2/3"], "search_depth": 2, "carve_depth": 8, "sample_depth": 4,
              "region": [{"piece": 0, "path": [1]}], "target": "1/3", "q": 2, "k": 1}},
  {"name": "example2-compactifications", "pipeline": "compactification_triple",
   "description": "One-point, odd/even and balanced two-point compactifications of dyadic forests",
   "params": {"forest": "dyadic-forest", "balanced": "dyadic-forest-balanced", "sample_depth": 2, "horizon": 8}},
  {"name": "cf-construction", "pipeline": "cf_values",
   "description": "Equidistributed (C,F) measure with |C_1| = 2, |C_2| = 3, |C_3| = 2",
   "params": {"f_sizes": [1], "c_sizes": [2, 3, 2], "depth": 3, "horizon": 1, "unit": "1/12"}},
  {"name": "padic-haar", "pipeline": "padic_membership",
   "description": "Haar measure on Q_p: value group and membership queries",
   "params": {"p": 5, "members": ["3/25"], "non_members": ["1/2"]}},
  {"name": "punctured-bernoulli", "pipeline": "punctured_values",
   "description": "Bernoulli(1/3, 2/3) with the all-zero point removed: values are 2k/3^n",
   "params": {"spec": "punctured-bernoulli", "depth": 3, "horizon": 4}},
  {"name": "back-and-forth-dyadic", "pipeline": "back_and_forth",
   "description": "Stage-wise matching of two dyadic probability forests",
   "params": {"a": "dyadic-forest", "b": "dyadic-forest-quarters", "stages": 6, "max_depth": 8}},
  {"name": "product-counting", "pipeline": "product_table",
   "description": "Products with counting measures on Z and periodic weights",
   "params": {"inner": "dyadic", "cycles": [["1", "2"], ["1", "1/4", "8"], ["1", "3"], ["1", "2", "5/2"]],
              "carve_depth": 4, "search_depth": 2, "carve_slack": 8}}
])json";

Json merged(const Json& base, const Json& over) {
    Json out = base.is_object() ? base : Json::object();
    if (over.is_object())
        for (auto it = over.begin(); it != over.end(); ++it) out[it.key()] = it.value();
    return out;
}

std::size_t size_param(const Json& p, const char* key, std::size_t dflt) {
    if (!p.contains(key)) return dflt;
    const auto& v = p.at(key);
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<long>() >= 0) return static_cast<std::size_t>(v.get<long>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::size_t pos = 0;
        try {
            auto n = std::stoul(s, &pos);
            if (pos == s.size()) return n;
        } catch (const std::exception&) {
        }
    }
    throw std::invalid_argument(std::string("parameter '") + key + "' must be a non-negative integer");
}

Rational rational_param(const Json& p, const char* key) {
    if (!p.contains(key)) throw std::invalid_argument(std::string("missing parameter '") + key + "'");
    return rational_from_json(p.at(key));
}

std::vector<Rational> rationals_param(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array of rationals");
    std::vector<Rational> out;
    for (const auto& e : j) out.push_back(rational_from_json(e));
    return out;
}

std::vector<long> longs_param(const Json& p, const char* key) {
    if (!p.contains(key) || !p.at(key).is_array())
        throw std::invalid_argument(std::string("parameter '") + key + "' must be an integer array");
    return p.at(key).get<std::vector<long>>();
}

MeasureSpec resolve_spec(const Json& j) {
    if (j.is_object()) return spec_from_json(j);
    if (!j.is_string()) throw std::invalid_argument("a spec must be a fixture name or a spec object");
    const auto name = j.get<std::string>();
    if (name == "dyadic") return fixtures::dyadic();
    if (name == "dyadic-forest") return fixtures::dyadic_forest();
    if (name == "dyadic-forest-balanced") return fixtures::dyadic_forest_balanced();
    if (name == "dyadic-forest-quarters") return fixtures::dyadic_forest_quarters();
    if (name == "punctured-bernoulli") return fixtures::punctured_bernoulli();
    if (name == "bratteli-infinite") return MeasureSpec::bratteli(fixtures::bratteli_infinite());
    throw std::invalid_argument("unknown fixture '" + name + "'");
}

MeasureSpec spec_param(const Json& p, const char* key) {
    if (!p.contains(key)) throw std::invalid_argument(std::string("missing parameter '") + key + "'");
    return resolve_spec(p.at(key));
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& s : parts) out += (out.empty() ? "" : ",") + s;
    return out;
}

bool is_power_of(BigInt n, unsigned long p) {
    if (n <= 0) return false;
    while (n % p == 0) n /= p;
    return n == 1;
}

Json values_block(std::size_t depth, std::size_t horizon, const std::vector<Rational>& values) {
    return Json{{"depth", depth}, {"horizon", horizon}, {"count", values.size()}, {"values", rationals_str(values)}};
}

// ---------------------------------------------------------------------------
// Pipelines

void bratteli_table(ScenarioReport& r, const Json& p) {
    const auto range = p.value("range", std::string("3..17"));
    const auto dots = range.find("..");
    long lo = 0, hi = 0;
    try {
        if (dots == std::string::npos) throw std::invalid_argument(range);
        std::size_t a = 0, b = 0;
        lo = std::stol(range.substr(0, dots), &a);
        hi = std::stol(range.substr(dots + 2), &b);
        if (a != dots || b != range.size() - dots - 2) throw std::invalid_argument(range);
    } catch (const std::exception&) {
        throw std::invalid_argument("range must look like 3..17, got '" + range + "'");
    }
    if (lo < 2 || hi < lo) throw std::invalid_argument("range must satisfy 2 <= lo <= hi");
    std::vector<std::string> kinds;
    bool law = true, certified = true;
    std::string mismatches;
    for (long n = lo; n <= hi; ++n) {
        auto data = fixtures::bratteli_fn(n, BratteliMode::FullDiagram);
        auto v = decide_bratteli_good(data);
        const std::string subject = "N=" + std::to_string(n);
        r.verdicts.push_back(verdict_json(subject, v));
        kinds.push_back(to_string(v.kind));
        const bool expect_good = is_power_of(BigInt(n - 1), 2);
        if ((v.kind == VerdictKind::Good) != expect_good || v.kind == VerdictKind::Unknown) {
            law = false;
            mismatches += " " + subject;
        }
        if (v.kind == VerdictKind::NotGood) {
            if (!v.certificate || !check_valuation_certificate(MeasureSpec::bratteli(data), *v.certificate))
                certified = false;
            if (v.certificate) {
                auto c = certificate_json(*v.certificate);
                c["subject"] = subject;
                r.certificates.push_back(c);
            }
        }
    }
    r.checks.push_back({"Good exactly when N - 1 is a power of two", law, mismatches.empty() ? "" : "mismatch:" + mismatches});
    r.checks.push_back({"every NotGood verdict carries a verified certificate", certified, ""});
    r.primary = join(kinds);
}

void bernoulli_certificate(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    auto spec = MeasureSpec::bernoulli(rationals_param(p.at("weights")));
    r.specs.push_back(spec);
    SearchOptions so;
    so.budget = std::max<std::uint64_t>(opts.budget, 100'000'000);
    auto v = find_nongood_witness(spec, size_param(p, "search_depth", 2), so);
    r.verdicts.push_back(verdict_json("search", v));
    r.primary = to_string(v.kind);
    std::vector<CellId> cells;
    for (const auto& c : p.at("region")) cells.push_back(cell_from_json(c));
    ValuationCertificate expected{static_cast<Prime>(size_param(p, "q", 2)), CompactOpen(cells),
                                  static_cast<long>(size_param(p, "k", 1)), rational_param(p, "target")};
    bool match = v.certificate && v.certificate->q == expected.q && v.certificate->region == expected.region &&
                 v.certificate->k == expected.k && v.certificate->target == expected.target;
    if (v.certificate) r.certificates.push_back(certificate_json(*v.certificate));
    r.checks.push_back({"verdict is NotGood", v.kind == VerdictKind::NotGood, ""});
    r.checks.push_back({"certificate matches (q, region, k, target)", match, ""});
    r.checks.push_back({"certificate verifies", v.certificate && check_valuation_certificate(spec, *v.certificate), ""});
    const std::size_t carve_depth = size_param(p, "carve_depth", 8);
    bool none = true;
    for (std::size_t d = 0; d <= carve_depth; ++d)
        if (carve(spec, expected.region, expected.target, d, so.budget).ok()) none = false;
    r.checks.push_back({"carve finds nothing at depths 0.." + std::to_string(carve_depth), none, ""});
    const std::size_t sd = size_param(p, "sample_depth", 4);
    auto sample = enumerate_values(spec, sd, 1, ExtMass(1), so.budget);
    bool triadic = true;
    for (const auto& x : sample.values()) triadic = triadic && is_power_of(x.den(), 3);
    r.values = sample_json(sample);
    r.checks.push_back({"depth-" + std::to_string(sd) + " values lie in {a/3^n}", triadic, ""});
}

void compactification_triple(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    auto forest = spec_param(p, "forest");
    auto balanced = spec_param(p, "balanced");
    r.specs = {forest, balanced};
    const CompactificationSpec two{{PieceClass::residue(2, {0}), PieceClass::residue(2, {1})}};
    auto one = decide_compactification_good(forest, CompactificationSpec::one_point());
    auto odd_even = decide_compactification_good(forest, two);
    auto bal = decide_compactification_good(balanced, two);
    r.verdicts = {verdict_json("one-point", one), verdict_json("odd/even", odd_even), verdict_json("balanced", bal)};
    if (odd_even.certificate) r.certificates.push_back(certificate_json(*odd_even.certificate));
    r.primary = join({to_string(one.kind), to_string(odd_even.kind), to_string(bal.kind)});
    r.checks.push_back({"one-point is Good", one.kind == VerdictKind::Good, ""});
    bool two_thirds = false;
    for (const auto& x : odd_even.new_values) two_thirds = two_thirds || x == Rational(2, 3);
    r.checks.push_back({"odd/even is NotGood with new value 2/3", odd_even.kind == VerdictKind::NotGood && two_thirds, ""});
    r.checks.push_back({"balanced is Good", bal.kind == VerdictKind::Good, ""});
    const std::size_t depth = size_param(p, "sample_depth", 2), horizon = size_param(p, "horizon", opts.horizon);
    auto values = compactified_values(balanced, two, depth, horizon, opts.budget);
    Rational unit = 1;
    for (const auto& c : cells_at_depth(balanced, depth, horizon)) unit = std::min(unit, c.mass.value());
    std::vector<Rational> grid;
    for (Rational x = 0; x <= Rational(1); x += unit) grid.push_back(x);
    r.values = values_block(depth, horizon, values);
    r.checks.push_back({"balanced sample equals the dyadic sample with 1 added", values == grid,
                        "step " + unit.str() + ", " + std::to_string(values.size()) + " values"});
}

void cf_values(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    auto spec = MeasureSpec::cf(longs_param(p, "f_sizes"), longs_param(p, "c_sizes"));
    r.specs.push_back(spec);
    auto v = decide_good(spec);
    r.verdicts.push_back(verdict_json("structural", v));
    r.primary = to_string(v.kind);
    const std::size_t depth = size_param(p, "depth", 3), horizon = size_param(p, "horizon", 1);
    const Rational unit = rational_param(p, "unit");
    auto sample = enumerate_values(spec, depth, horizon, ExtMass::infinite(), opts.budget);
    bool multiples = true;
    for (const auto& x : sample.values()) multiples = multiples && (x / unit).den() == 1;
    r.values = sample_json(sample);
    r.checks.push_back({"verdict is Good", v.kind == VerdictKind::Good, ""});
    r.checks.push_back({"depth-" + std::to_string(depth) + " values are multiples of " + unit.str(), multiples,
                        std::to_string(sample.values().size()) + " values"});
}

void padic_membership(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    const auto prime = static_cast<Prime>(size_param(p, "p", 5));
    auto spec = MeasureSpec::padic_haar(prime);
    r.specs.push_back(spec);
    auto v = decide_good(spec);
    r.verdicts.push_back(verdict_json("structural", v));
    r.primary = to_string(v.kind);
    r.checks.push_back({"verdict is Good", v.kind == VerdictKind::Good, ""});
    auto g = value_group(spec);
    r.checks.push_back({"value group is Z[1/" + std::to_string(prime) + "]",
                        g && *g == DivisibleGroup(1, {prime}), g ? g->str() : "unknown"});
    auto s = good_value_set(spec);
    Json queries = Json::array();
    for (const auto& x : rationals_param(p.value("members", Json::array()))) {
        bool in = s && s->contains(x);
        Json q{{"value", rational_str(x)}, {"member", in}};
        if (in && x < Rational(1)) {
            std::size_t depth = static_cast<std::size_t>(std::max(0L, -vq(prime, x)));
            auto sample = enumerate_values(spec, depth, 1, ExtMass(x), opts.budget);
            if (auto w = sample.witness(x)) q["witness"] = region_json(*w);
            in = in && q.contains("witness");
        }
        queries.push_back(q);
        r.checks.push_back({x.str() + " is a value", in, ""});
    }
    for (const auto& x : rationals_param(p.value("non_members", Json::array()))) {
        bool in = s && s->contains(x);
        queries.push_back(Json{{"value", rational_str(x)}, {"member", in}});
        r.checks.push_back({x.str() + " is not a value", !in, ""});
    }
    r.values = Json{{"queries", queries}};
}

void punctured_values(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    auto spec = spec_param(p, "spec");
    r.specs.push_back(spec);
    const std::size_t depth = size_param(p, "depth", 3), horizon = size_param(p, "horizon", 4);
    auto sample = enumerate_values(spec, depth, horizon, ExtMass::infinite(), opts.budget);
    bool ok = true;
    for (const auto& x : sample.values())
        ok = ok && is_power_of(x.den(), 3) && x.num() % 2 == 0 && x < Rational(1);
    r.values = sample_json(sample);
    r.checks.push_back({"values are of the form 2k/3^n below 1", ok, std::to_string(sample.values().size()) + " values"});
    r.verdicts.push_back(verdict_json("structural", decide_good(spec)));
    r.primary = ok ? "Pass" : "Fail";
}

void back_and_forth_pipeline(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    auto a = spec_param(p, "a");
    auto b = spec_param(p, "b");
    r.specs = {a, b};
    auto h = homeo_criterion(a, b);
    r.verdicts.push_back(homeo_json("criterion", h));
    r.primary = to_string(h.kind);
    const std::size_t stages = size_param(p, "stages", 6), max_depth = size_param(p, "max_depth", 8);
    const bool check = !p.value("override", false);
    try {
        auto ph = back_and_forth(a, b, stages, max_depth, check, opts.budget);
        r.artifacts = Json{{"partial_homeo", partial_homeo_json(ph)}};
        bool equal = true;
        for (const auto& s : ph.stages)
            equal = equal && mass_of(a, s.source) == ExtMass(s.mass) && mass_of(b, s.target) == ExtMass(s.mass);
        r.checks.push_back({"stage masses agree exactly on both sides", equal, ""});
        const Rational floor = Rational(1) - pow(Rational(2), -static_cast<long>(stages));
        const bool enough = total_mass(a) == ExtMass(1) ? !(ph.matched_mass() < floor) : true;
        r.checks.push_back({std::to_string(ph.stages.size()) + " stages completed, matched mass " +
                                ph.matched_mass().str(),
                            ph.stages.size() == stages || ph.exhausted, ""});
        r.checks.push_back({"matched mass at least 1 - 2^-" + std::to_string(stages), enough, ""});
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
        r.checks.push_back({"all stages completed", false, f.what()});
    }
}

void product_table(ScenarioReport& r, const Json& p, const RunOptions& opts) {
    auto inner = spec_param(p, "inner");
    auto g = value_group(inner);
    if (!g) throw std::invalid_argument("the inner spec has no known value group");
    const std::size_t carve_depth = size_param(p, "carve_depth", 4), search_depth = size_param(p, "search_depth", 2);
    std::vector<std::string> kinds;
    for (const auto& cj : p.at("cycles")) {
        auto cycle = rationals_param(cj);
        auto v = decide_product_good(*g, cycle, inner);
        std::string subject = "weights";
        for (const auto& w : cycle) subject += " " + w.str();
        r.verdicts.push_back(verdict_json(subject, v));
        kinds.push_back(to_string(v.kind));
        auto spec = MeasureSpec::product_counting(inner, cycle);
        r.specs.push_back(spec);
        if (v.kind == VerdictKind::NotGood) {
            bool confirmed = v.witness && !carve(spec, v.witness->region, v.witness->target, carve_depth, opts.budget).ok();
            if (v.certificate) {
                auto c = certificate_json(*v.certificate);
                c["subject"] = subject;
                r.certificates.push_back(c);
            }
            r.checks.push_back({subject + ": failure confirmed by carve at depth " + std::to_string(carve_depth),
                                confirmed, ""});
        } else if (v.kind == VerdictKind::Good) {
            SearchOptions so;
            so.horizon = 3;
            so.carve_slack = size_param(p, "carve_slack", 8);
            so.budget = opts.budget;
            auto s = find_nongood_witness(spec, search_depth, so);
            r.checks.push_back({subject + ": search finds no witness", s.kind == VerdictKind::ProbablyGood,
                                "search " + to_string(s.kind)});
        }
    }
    r.primary = join(kinds);
}

}  // namespace

bool ScenarioReport::all_checks_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

Json rational_str(const Rational& r) { return r.str(); }

Json rationals_str(const std::vector<Rational>& rs) {
    Json a = Json::array();
    for (const auto& r : rs) a.push_back(r.str());
    return a;
}

Json region_json(const CompactOpen& u) {
    Json a = Json::array();
    for (const auto& c : u.cells) a.push_back(cell_to_json(c));
    return a;
}

Json certificate_json(const ValuationCertificate& c) {
    return Json{{"q", c.q}, {"k", c.k}, {"target", rational_str(c.target)}, {"region", region_json(c.region)}};
}

Json verdict_json(const std::string& subject, const Verdict& v) {
    Json j{{"subject", subject}, {"kind", to_string(v.kind)}, {"reason", v.reason}};
    if (v.witness) j["witness"] = Json{{"target", rational_str(v.witness->target)}, {"region", region_json(v.witness->region)}};
    if (v.certificate) j["certificate"] = certificate_json(*v.certificate);
    if (v.kind == VerdictKind::ProbablyGood) j["depth"] = v.depth;
    if (v.exponent) j["exponent"] = *v.exponent;
    if (v.offending_index) j["offending_index"] = *v.offending_index;
    if (!v.new_values.empty()) j["new_values"] = rationals_str(v.new_values);
    return j;
}

Json homeo_json(const std::string& subject, const HomeoVerdict& v) {
    return Json{{"subject", subject}, {"kind", to_string(v.kind)}, {"reason", v.reason}};
}

Json sample_json(const ValueSample& s) {
    return Json{{"depth", s.depth()},
                {"horizon", s.horizon()},
                {"bound", s.bound().str()},
                {"count", s.values().size()},
                {"values", rationals_str(s.values())}};
}

Json partial_homeo_json(const PartialHomeo& h) {
    Json stages = Json::array();
    for (const auto& s : h.stages)
        stages.push_back(Json{{"source", region_json(s.source)}, {"target", region_json(s.target)}, {"mass", rational_str(s.mass)}});
    return Json{{"stages", stages},
                {"matched_mass", rational_str(h.matched_mass())},
                {"defective", h.defective.str()},
                {"exhausted", h.exhausted}};
}

Json gamma_json(const GammaCompactification& g) {
    Json parts = Json::array();
    for (const auto& u : g.parts) parts.push_back(region_json(u));
    return Json{{"gamma", rational_str(g.gamma)},
                {"gammas", rationals_str(g.gammas)},
                {"parts", parts},
                {"reached", g.reached},
                {"classes", compactification_to_json(g.classes)["classes"]}};
}

Json report_json(const ScenarioReport& r) {
    Json specs = Json::array();
    for (const auto& s : r.specs) specs.push_back(Json{{"digest", spec_digest(s)}, {"spec", spec_to_json(s)}});
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json cj{{"name", c.name}, {"pass", c.pass}};
        if (!c.detail.empty()) cj["detail"] = c.detail;
        checks.push_back(cj);
    }
    Json j{{"schema", kReportSchema},
           {"scenario", r.scenario},
           {"inputs", Json{{"params", r.params}, {"specs", specs}}},
           {"verdicts", r.verdicts},
           {"certificates", r.certificates},
           {"checks", checks},
           {"primary", r.primary},
           {"runtime_ms", r.runtime_ms}};
    if (r.values) j["values"] = *r.values;
    if (r.artifacts) j["artifacts"] = *r.artifacts;
    return j;
}

std::string report_text(const ScenarioReport& r) {
    std::ostringstream os;
    os << "scenario: " << r.scenario << "\n";
    for (const auto& s : r.specs) os << "  spec " << spec_digest(s) << " " << to_string(s.kind()) << "\n";
    for (const auto& v : r.verdicts) {
        os << "  " << v.at("subject").get<std::string>() << ": " << v.at("kind").get<std::string>();
        if (v.contains("exponent")) os << " (R = " << v.at("exponent").get<long>() << ")";
        if (v.contains("depth")) os << " (depth " << v.at("depth").get<std::size_t>() << ")";
        if (v.contains("reason") && !v.at("reason").get<std::string>().empty())
            os << " - " << v.at("reason").get<std::string>();
        os << "\n";
    }
    for (const auto& c : r.certificates)
        os << "  certificate: q = " << c.at("q").get<long>() << ", k = " << c.at("k").get<long>()
           << ", target " << c.at("target").get<std::string>() << "\n";
    if (r.values && r.values->contains("values")) {
        const auto& vs = r.values->at("values");
        os << "  values (" << vs.size() << "):";
        std::size_t shown = 0;
        for (const auto& v : vs) {
            if (++shown > 24) {
                os << " ...";
                break;
            }
            os << " " << v.get<std::string>();
        }
        os << "\n";
    }
    if (r.artifacts && r.artifacts->contains("partial_homeo")) {
        const auto& ph = r.artifacts->at("partial_homeo");
        std::size_t i = 0;
        for (const auto& s : ph.at("stages"))
            os << "  stage " << ++i << ": mass " << s.at("mass").get<std::string>() << ", " << s.at("source").size()
               << " cell(s) -> " << s.at("target").size() << " cell(s)\n";
        os << "  matched mass " << ph.at("matched_mass").get<std::string>() << "\n";
    }
    for (const auto& c : r.checks)
        os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    os << "primary: " << r.primary << "\n";
    return os.str();
}

const Json& default_manifest() {
    static const Json manifest = Json::parse(kManifest);
    return manifest;
}

std::vector<std::string> scenario_names(const Json& manifest) {
    std::vector<std::string> out;
    for (const auto& e : manifest) out.push_back(e.at("name").get<std::string>());
    return out;
}

ScenarioReport run_scenario(const std::string& name, const Json& overrides, const RunOptions& opts,
                            const Json& manifest) {
    const Json* entry = nullptr;
    if (manifest.is_array())
        for (const auto& e : manifest)
            if (e.value("name", std::string()) == name) entry = &e;
    if (!entry) throw std::invalid_argument("unknown scenario '" + name + "'");
    const auto pipeline = entry->value("pipeline", std::string());
    ScenarioReport r;
    r.scenario = name;
    r.params = merged(entry->value("params", Json::object()), overrides);
    const auto start = std::chrono::steady_clock::now();
    try {
        if (pipeline == "bratteli_table") bratteli_table(r, r.params);
        else if (pipeline == "bernoulli_certificate") bernoulli_certificate(r, r.params, opts);
        else if (pipeline == "compactification_triple") compactification_triple(r, r.params, opts);
        else if (pipeline == "cf_values") cf_values(r, r.params, opts);
        else if (pipeline == "padic_membership") padic_membership(r, r.params, opts);
        else if (pipeline == "punctured_values") punctured_values(r, r.params, opts);
        else if (pipeline == "back_and_forth") back_and_forth_pipeline(r, r.params, opts);
        else if (pipeline == "product_table") product_table(r, r.params, opts);
        else throw std::invalid_argument("unknown pipeline '" + pipeline + "'");
    } catch (const Json::exception& e) {
        throw std::invalid_argument("malformed parameters for '" + name + "': " + e.what());
    }
    r.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace goodmeasure

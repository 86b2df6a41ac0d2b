#include "goodmeasure/spec_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace goodmeasure {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    return j.at(key);
}

long as_long(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw ValidationError(std::string(what) + " must be an integer");
    return j.get<long>();
}

std::vector<long> long_list(const Json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
    std::vector<long> out;
    for (const auto& e : j) out.push_back(as_long(e, what));
    return out;
}

std::vector<std::size_t> index_list(const Json& j, const char* what) {
    std::vector<std::size_t> out;
    for (long v : long_list(j, what)) {
        if (v < 0) throw ValidationError(std::string(what) + " entries must be non-negative");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<Rational> rational_list(const Json& j) {
    if (!j.is_array()) throw ValidationError("expected an array of rationals");
    std::vector<Rational> out;
    for (const auto& e : j) out.push_back(rational_from_json(e));
    return out;
}

Json rational_list_json(const std::vector<Rational>& v) {
    Json a = Json::array();
    for (const auto& r : v) a.push_back(rational_to_json(r));
    return a;
}

}  // namespace

Json rational_to_json(const Rational& r) { return Json{{"num", r.num().get_str()}, {"den", r.den().get_str()}}; }

Rational rational_from_json(const Json& j) {
    try {
        if (j.is_object()) return Rational::from_strings(field(j, "num").get<std::string>(), field(j, "den").get<std::string>());
        if (j.is_string()) return Rational::parse(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long>());
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed rational: ") + e.what());
    }
    throw ValidationError("malformed rational: " + j.dump());
}

Json mass_to_json(const ExtMass& m) { return m.is_infinite() ? Json("inf") : rational_to_json(m.value()); }

ExtMass mass_from_json(const Json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return ExtMass::infinite();
    return ExtMass(rational_from_json(j));
}

Json cell_to_json(const CellId& c) { return Json{{"piece", c.piece}, {"path", c.path}}; }

CellId cell_from_json(const Json& j) {
    CellId c;
    long p = as_long(field(j, "piece"), "piece");
    if (p < 0) throw ValidationError("piece must be non-negative");
    c.piece = static_cast<std::size_t>(p);
    for (auto v : index_list(field(j, "path"), "path")) c.path.push_back(static_cast<std::uint32_t>(v));
    return c;
}

Json compact_open_to_json(const CompactOpen& u) {
    Json cells = Json::array();
    for (const auto& c : u.cells) cells.push_back(cell_to_json(c));
    Json j{{"cells", cells}};
    if (u.infinite_mass) j["infinite_mass"] = true;
    return j;
}

CompactOpen compact_open_from_json(const Json& j) {
    std::vector<CellId> cells;
    for (const auto& c : field(j, "cells")) cells.push_back(cell_from_json(c));
    bool inf = j.contains("infinite_mass") && j.at("infinite_mass").get<bool>();
    try {
        return CompactOpen(std::move(cells), inf);
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

Json piece_class_to_json(const PieceClass& c) {
    if (c.explicit_list) return Json{{"pieces", *c.explicit_list}};
    return Json{{"modulus", c.modulus}, {"residues", c.residues}};
}

PieceClass piece_class_from_json(const Json& j) {
    if (j.contains("pieces")) return PieceClass::listed(index_list(j.at("pieces"), "pieces"));
    long m = as_long(field(j, "modulus"), "modulus");
    if (m <= 0) throw ValidationError("modulus must be positive");
    try {
        return PieceClass::residue(static_cast<std::size_t>(m), index_list(field(j, "residues"), "residues"));
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

Json compactification_to_json(const CompactificationSpec& c) {
    Json a = Json::array();
    for (const auto& k : c.classes) a.push_back(piece_class_to_json(k));
    return Json{{"classes", a}};
}

CompactificationSpec compactification_from_json(const Json& j) {
    CompactificationSpec c;
    for (const auto& k : field(j, "classes")) c.classes.push_back(piece_class_from_json(k));
    c.validate();
    return c;
}

Json group_to_json(const DivisibleGroup& g) {
    return Json{{"scale", rational_to_json(g.scale())}, {"primes", g.primes()}};
}

Json grouplike_to_json(const GroupLikeSet& d) {
    return Json{{"group", group_to_json(d.group)}, {"bound", mass_to_json(d.bound)}, {"includes_bound", d.includes_bound}};
}

Json spec_to_json(const MeasureSpec& spec) {
    Json j;
    j["type"] = to_string(spec.kind());
    if (auto b = spec.as_bernoulli()) {
        j["weights"] = rational_list_json(b->weights);
    } else if (auto b = spec.as_bratteli()) {
        j["matrix"] = b->matrix;
        j["lambda"] = b->lambda;
        j["x"] = rational_list_json(b->x);
        j["defective"] = b->defective;
        j["mode"] = b->mode == BratteliMode::FullDiagram ? "FullDiagram" : "DistinguishedClass";
        j["distinguished"] = b->distinguished;
    } else if (auto c = spec.as_cf()) {
        j["f_sizes"] = c->f_sizes;
        j["c_sizes"] = c->c_sizes;
    } else if (auto p = spec.as_padic()) {
        j["p"] = p->p;
    } else if (auto s = spec.as_scaled()) {
        j["factor"] = rational_to_json(s->factor);
        j["inner"] = spec_to_json(s->inner);
    } else if (auto r = spec.as_restricted()) {
        j["inner"] = spec_to_json(r->inner);
        j["within"] = compact_open_to_json(r->within);
    } else if (auto u = spec.as_disjoint_union()) {
        Json comps = Json::array();
        for (const auto& c : u->components) comps.push_back(spec_to_json(c));
        j["components"] = comps;
        if (u->tail_base)
            j["tail"] = Json{{"base", spec_to_json(*u->tail_base)},
                             {"first", rational_to_json(u->tail_first)},
                             {"ratio", rational_to_json(u->tail_ratio)}};
    } else if (auto p = spec.as_product()) {
        j["inner"] = spec_to_json(p->inner);
        j["weights"] = rational_list_json(p->weight_cycle);
    } else if (auto c = spec.as_compactified()) {
        j["inner"] = spec_to_json(c->inner);
        j["classes"] = compactification_to_json(c->classes)["classes"];
    }
    return j;
}

MeasureSpec spec_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("spec must be a JSON object");
    const std::string type = field(j, "type").get<std::string>();
    try {
        if (type == "Bernoulli") return MeasureSpec::bernoulli(rational_list(field(j, "weights")));
        if (type == "StationaryBratteli") {
            BratteliData b;
            for (const auto& row : field(j, "matrix")) b.matrix.push_back(long_list(row, "matrix row"));
            b.lambda = as_long(field(j, "lambda"), "lambda");
            b.x = rational_list(field(j, "x"));
            if (j.contains("defective"))
                for (const auto& d : j.at("defective")) b.defective.push_back(d.get<bool>());
            std::string mode = j.value("mode", std::string("FullDiagram"));
            if (mode == "FullDiagram") b.mode = BratteliMode::FullDiagram;
            else if (mode == "DistinguishedClass") b.mode = BratteliMode::DistinguishedClass;
            else throw ValidationError("unknown Bratteli mode '" + mode + "'");
            if (j.contains("distinguished")) b.distinguished = index_list(j.at("distinguished"), "distinguished");
            return MeasureSpec::bratteli(std::move(b));
        }
        if (type == "CF") return MeasureSpec::cf(long_list(field(j, "f_sizes"), "f_sizes"), long_list(field(j, "c_sizes"), "c_sizes"));
        if (type == "PAdicHaar") {
            long p = as_long(field(j, "p"), "p");
            if (p < 2) throw ValidationError("p must be a prime");
            return MeasureSpec::padic_haar(static_cast<Prime>(p));
        }
        if (type == "Scaled")
            return MeasureSpec::scaled(rational_from_json(field(j, "factor")), spec_from_json(field(j, "inner")));
        if (type == "Restricted")
            return MeasureSpec::restricted(spec_from_json(field(j, "inner")), compact_open_from_json(field(j, "within")));
        if (type == "DisjointUnion") {
            std::vector<MeasureSpec> comps;
            for (const auto& c : field(j, "components")) comps.push_back(spec_from_json(c));
            if (!j.contains("tail")) return MeasureSpec::disjoint_union(std::move(comps));
            const auto& t = j.at("tail");
            return MeasureSpec::disjoint_union(std::move(comps), spec_from_json(field(t, "base")),
                                               rational_from_json(field(t, "first")),
                                               rational_from_json(field(t, "ratio")));
        }
        if (type == "ProductCounting")
            return MeasureSpec::product_counting(spec_from_json(field(j, "inner")), rational_list(field(j, "weights")));
        if (type == "Compactified")
            return MeasureSpec::compactified(spec_from_json(field(j, "inner")),
                                             compactification_from_json(Json{{"classes", field(j, "classes")}}));
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed spec: ") + e.what());
    }
    throw ValidationError("unknown spec type '" + type + "'");
}

std::string canonical_dump(const MeasureSpec& spec) { return spec_to_json(spec).dump(); }

std::string spec_digest(const MeasureSpec& spec) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_dump(spec)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

MeasureSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ValidationError("spec file " + path + " is not valid JSON: " + e.what());
    }
    return spec_from_json(j);
}

}  // namespace goodmeasure

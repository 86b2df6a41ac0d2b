#pragma once

/**
 * @file spec_io.hpp
 * @brief JSON encoding of measure specs, cells and compact open sets.
 *
 * Rationals are {"num": "...", "den": "..."} with decimal strings; specs are a
 * tagged union keyed by "type".  Encoding is canonical (sorted keys, reduced
 * rationals), so decode(encode(s)) re-encodes to identical bytes.
 */

#include <string>

#include <json.hpp>

#include "goodmeasure/space.hpp"

namespace goodmeasure {

using Json = nlohmann::json;

Json rational_to_json(const Rational& r);
/// Accepts {"num","den"}, a decimal string "a/b", or an integer.
Rational rational_from_json(const Json& j);
Json mass_to_json(const ExtMass& m);
ExtMass mass_from_json(const Json& j);

Json cell_to_json(const CellId& c);
CellId cell_from_json(const Json& j);
Json compact_open_to_json(const CompactOpen& u);
CompactOpen compact_open_from_json(const Json& j);

Json piece_class_to_json(const PieceClass& c);
PieceClass piece_class_from_json(const Json& j);
Json compactification_to_json(const CompactificationSpec& c);
CompactificationSpec compactification_from_json(const Json& j);

Json group_to_json(const DivisibleGroup& g);
Json grouplike_to_json(const GroupLikeSet& d);

Json spec_to_json(const MeasureSpec& spec);
/// Validates through the MeasureSpec builders; throws ValidationError on malformed input.
MeasureSpec spec_from_json(const Json& j);

std::string canonical_dump(const MeasureSpec& spec);
/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string spec_digest(const MeasureSpec& spec);

MeasureSpec load_spec_file(const std::string& path);

}  // namespace goodmeasure

#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sympath/collisions.hpp"
#include "sympath/fixtures.hpp"
#include "sympath/index.hpp"
#include "sympath/lemmas.hpp"

namespace sympath {

using Json = nlohmann::json;

// Malformed or inconsistent input files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Matrix: {"n": 2, "rows": [[...], ...]}; a bare array of rows is accepted.
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// NormalFormSpec: {"kind": "N2", "theta": 1.0, "b": [b1, b2, b3]};
// D and M2 use "lambda", N1 adds "a", M2 adds "c": [c1, c2].
NormalFormSpec normal_form_from_json(const Json& j);
Json to_json(const NormalFormSpec& s);

// Either a matrix or a normal form spec.
Matrix symplectic_from_json(const Json& j);

PathSpec path_spec_from_json(const Json& j);
TauSpec tau_from_json(const Json& j);

Json to_json(const SpectrumReport& r);
Json to_json(const PositivePath& p);
PositivePath positive_path_from_json(const Json& j);
Json to_json(const WindingRecord& w);
Json to_json(const LoopIndex& l);
Json to_json(const CollisionEvent& e);
Json to_json(const CollisionReport& r);
Json to_json(const ConstraintReport& r);
Json to_json(const ElementarySegment& s);
Json to_json(const LemmaReport& r);
Json to_json(const FixtureResult& r);

// Sorted keys, shortest round-trip floats, trailing newline.
std::string dump(const Json& j);
Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);

// Shortest round-trip decimal form of a double.
std::string format_double(double x);

std::string events_csv(const CollisionReport& r);
// t, re/im per eigenvalue matched for continuity, delta, stratum.
std::string trace_csv(const PositivePath& p);

// Temp file in the target directory, then rename; "-" or "" writes to stdout.
void write_output(const std::string& path, const std::string& content);

}  // namespace sympath

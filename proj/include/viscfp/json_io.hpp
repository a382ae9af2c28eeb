#pragma once

#include "json.hpp"
#include "viscfp/hilbert.hpp"
#include "viscfp/matrix.hpp"
#include "viscfp/operators.hpp"
#include "viscfp/schemes.hpp"
#include "viscfp/semigroup.hpp"

// JSON surfaces of the library. Every parser throws Error(InvalidSpec) with
// the offending field named in the message.
namespace viscfp::json_io {

Vector vector_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Vector& v);

/// Either a bare array of rows or {"kind": "linear", "matrix": [[...], ...]}.
Matrix matrix_from_json(const nlohmann::json& j);

/// {"kind": "linear" | "affine" | "projection_ball" | "projection_box" |
///  "rotation" | "averaged" | "constant" | "negation" | "identity" |
///  "composite", ...kind-specific fields}
Operator operator_from_json(const nlohmann::json& j);

/// {"kind": "power", "base": {...}, "grid"?: [...]}
/// {"kind": "rotation_flow", "rates": [...], "grid": [...], "generators"?: [...]}
/// {"kind": "custom", "index_kind"?: "naturals" | "reals",
///  "table": [{"index": t, "operator": {...}}, ...], "generators"?: [...]}
OperatorFamily family_from_json(const nlohmann::json& j);

/// {"kind": "harmonic", "p": 1, "n_max": 200} | {"kind": "geometric", "r": 0.5,
/// "n_max": 50} | {"kind": "explicit", "values": [...]} | {"kind": "anchored",
/// "n_max": 200} (eps_n = 1/n)
ScheduleSpec schedule_spec_from_json(const nlohmann::json& j);

/// {"outer_tol", "inner_tol_rule": {"kind": "coupled", "c"} | {"kind":
/// "fixed", "delta"}, "warm_start", "abs_tol", "rel_tol", "max_iter"}; all
/// fields optional.
SolveOptions options_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NACertificate& c);
nlohmann::json to_json(const RepresentationReport& r);
nlohmann::json to_json(const FixedPointResult& r);

} // namespace viscfp::json_io

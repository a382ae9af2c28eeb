#include "viscfp/json_io.hpp"

#include <fmt/format.h>

#include "viscfp/error.hpp"

namespace viscfp::json_io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::InvalidSpec, message); }

const json& field(const json& j, const char* key, const char* context) {
    if (!j.is_object()) fail(fmt::format("{}: expected an object", context));
    auto it = j.find(key);
    if (it == j.end()) fail(fmt::format("{}: missing field \"{}\"", context, key));
    return *it;
}

double number(const json& j, const char* key, const char* context) {
    const json& v = field(j, key, context);
    if (!v.is_number()) fail(fmt::format("{}: field \"{}\" must be a number", context, key));
    return v.get<double>();
}

std::size_t count(const json& j, const char* key, const char* context) {
    const json& v = field(j, key, context);
    if (!v.is_number_unsigned()) fail(fmt::format("{}: field \"{}\" must be a nonnegative integer", context, key));
    return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const char* context) {
    if (!v.is_array()) fail(fmt::format("{}: expected an array of numbers", context));
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) fail(fmt::format("{}: expected an array of numbers", context));
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace

Vector vector_from_json(const json& j) {
    auto values = numbers(j, "vector");
    if (values.empty()) fail("vector: must have at least one coordinate");
    return Vector(std::move(values));
}

json to_json(const Vector& v) { return v.values(); }

Matrix matrix_from_json(const json& j) {
    const json& rows = j.is_object() ? field(j, "matrix", "matrix") : j;
    if (!rows.is_array() || rows.empty()) fail("matrix: expected a nonempty array of rows");
    std::vector<std::vector<double>> data;
    for (const auto& r : rows) data.push_back(numbers(r, "matrix row"));
    return Matrix::from_rows(data);
}

Operator operator_from_json(const json& j) {
    const json& kind_field = field(j, "kind", "operator");
    if (!kind_field.is_string()) fail("operator: \"kind\" must be a string");
    const std::string kind = kind_field.get<std::string>();
    if (kind == "linear") return make_linear(matrix_from_json(field(j, "matrix", "linear operator")));
    if (kind == "affine") {
        return make_affine(matrix_from_json(field(j, "matrix", "affine operator")),
                           vector_from_json(field(j, "offset", "affine operator")));
    }
    if (kind == "projection_ball") {
        return make_ball_projection(vector_from_json(field(j, "center", "projection_ball")),
                                    number(j, "radius", "projection_ball"));
    }
    if (kind == "projection_box") {
        return make_box_projection(vector_from_json(field(j, "lower", "projection_box")),
                                   vector_from_json(field(j, "upper", "projection_box")));
    }
    if (kind == "rotation") {
        const json& plane = field(j, "plane", "rotation");
        if (!plane.is_array() || plane.size() != 2 || !plane[0].is_number_unsigned() || !plane[1].is_number_unsigned()) {
            fail("rotation: \"plane\" must be a pair of coordinate indices");
        }
        return make_rotation(count(j, "dim", "rotation"), plane[0].get<std::size_t>(), plane[1].get<std::size_t>(),
                             number(j, "angle", "rotation"));
    }
    if (kind == "averaged") {
        return make_averaged(operator_from_json(field(j, "inner", "averaged")), number(j, "lambda", "averaged"));
    }
    if (kind == "constant") return make_constant(vector_from_json(field(j, "value", "constant")));
    if (kind == "negation") return make_negation(count(j, "dim", "negation"));
    if (kind == "identity") return make_identity(count(j, "dim", "identity"));
    if (kind == "composite") {
        const json& parts = field(j, "operators", "composite");
        if (!parts.is_array()) fail("composite: \"operators\" must be an array");
        std::vector<Operator> ops;
        for (const auto& p : parts) ops.push_back(operator_from_json(p));
        return make_composite(std::move(ops));
    }
    fail(fmt::format("operator: unknown kind \"{}\"", kind));
}

OperatorFamily family_from_json(const json& j) {
    const json& kind_field = field(j, "kind", "family");
    if (!kind_field.is_string()) fail("family: \"kind\" must be a string");
    const std::string kind = kind_field.get<std::string>();
    auto optional_numbers = [&](const char* key) {
        return j.contains(key) ? numbers(j.at(key), key) : std::vector<double>{};
    };
    if (kind == "power") {
        const Operator base = operator_from_json(field(j, "base", "power family"));
        if (j.contains("grid")) return make_power_family(base, numbers(j.at("grid"), "grid"));
        return make_power_family(base);
    }
    if (kind == "rotation_flow") {
        return make_rotation_flow(numbers(field(j, "rates", "rotation_flow"), "rates"),
                                  numbers(field(j, "grid", "rotation_flow"), "grid"), optional_numbers("generators"));
    }
    if (kind == "custom") {
        const json& table = field(j, "table", "custom family");
        if (!table.is_array() || table.empty()) fail("custom family: \"table\" must be a nonempty array");
        std::map<double, Operator> ops;
        for (const auto& entry : table) {
            const double t = number(entry, "index", "custom family entry");
            if (!ops.emplace(t, operator_from_json(field(entry, "operator", "custom family entry"))).second) {
                fail(fmt::format("custom family: duplicate index {}", t));
            }
        }
        auto index_kind = IndexSemigroup::Kind::naturals_add;
        if (j.contains("index_kind")) {
            const std::string ik = j.at("index_kind").get<std::string>();
            if (ik == "reals") {
                index_kind = IndexSemigroup::Kind::nonneg_reals_add;
            } else if (ik != "naturals") {
                fail(fmt::format("custom family: unknown index_kind \"{}\"", ik));
            }
        }
        return make_custom_family(std::move(ops), index_kind, optional_numbers("generators"));
    }
    fail(fmt::format("family: unknown kind \"{}\"", kind));
}

ScheduleSpec schedule_spec_from_json(const json& j) {
    const json& kind_field = field(j, "kind", "schedule");
    if (!kind_field.is_string()) fail("schedule: \"kind\" must be a string");
    const std::string kind = kind_field.get<std::string>();
    ScheduleSpec spec;
    if (kind == "harmonic") {
        spec.kind = ScheduleKind::harmonic;
        spec.parameter = j.contains("p") ? number(j, "p", "schedule") : 1.0;
        spec.n_max = j.contains("n_max") ? count(j, "n_max", "schedule") : 200;
    } else if (kind == "geometric") {
        spec.kind = ScheduleKind::geometric;
        spec.parameter = number(j, "r", "schedule");
        spec.n_max = j.contains("n_max") ? count(j, "n_max", "schedule") : 200;
    } else if (kind == "anchored") {
        spec.kind = ScheduleKind::anchored;
        spec.n_max = j.contains("n_max") ? count(j, "n_max", "schedule") : 200;
    } else if (kind == "explicit") {
        spec.kind = ScheduleKind::explicit_list;
        spec.values = numbers(field(j, "values", "schedule"), "schedule values");
        spec.n_max = spec.values.size();
    } else {
        fail(fmt::format("schedule: unknown kind \"{}\"", kind));
    }
    return spec;
}

SolveOptions options_from_json(const json& j) {
    SolveOptions o;
    if (j.is_null()) return o;
    if (!j.is_object()) fail("options: expected an object");
    if (j.contains("outer_tol")) o.outer_tol = number(j, "outer_tol", "options");
    if (j.contains("warm_start")) {
        if (!j.at("warm_start").is_boolean()) fail("options: \"warm_start\" must be a boolean");
        o.warm_start = j.at("warm_start").get<bool>();
    }
    if (j.contains("abs_tol")) o.tolerance.abs_tol = number(j, "abs_tol", "options");
    if (j.contains("rel_tol")) o.tolerance.rel_tol = number(j, "rel_tol", "options");
    if (j.contains("max_iter")) o.tolerance.max_iter = count(j, "max_iter", "options");
    if (j.contains("inner_tol_rule")) {
        const json& rule = j.at("inner_tol_rule");
        const std::string kind = field(rule, "kind", "inner_tol_rule").get<std::string>();
        if (kind == "coupled") {
            o.inner_tol = InnerTolRule::coupled(rule.contains("c") ? number(rule, "c", "inner_tol_rule") : 1.0);
        } else if (kind == "fixed") {
            o.inner_tol = InnerTolRule::fixed(number(rule, "delta", "inner_tol_rule"));
        } else {
            fail(fmt::format("inner_tol_rule: unknown kind \"{}\"", kind));
        }
    }
    o.validate();
    return o;
}

json to_json(const NACertificate& c) {
    return {{"sigma", c.operator_norm},
            {"vector", c.attaining_vector.values()},
            {"residual", c.residual},
            {"iterations", c.iterations}};
}

json to_json(const RepresentationReport& r) {
    return {{"max_defect", r.max_defect},
            {"worst_pair", {r.worst_pair.first, r.worst_pair.second}},
            {"samples_checked", r.samples_checked},
            {"tol", r.tol},
            {"accepted", r.accepted}};
}

json to_json(const FixedPointResult& r) {
    return {{"point", r.point.values()},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

} // namespace viscfp::json_io

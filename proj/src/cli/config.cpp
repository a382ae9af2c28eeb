#include <fstream>
#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "viscfp/cli.hpp"
#include "viscfp/error.hpp"
#include "viscfp/json_io.hpp"

namespace viscfp::cli {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::ConfigInvalid, message); }

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* context) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) invalid(fmt::format("{}: unknown field \"{}\"", context, key));
    }
}

std::optional<Vector> optional_vector(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return json_io::vector_from_json(j.at(key));
}

} // namespace

std::string config_hash(const json& document) {
    const std::string canonical = document.dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) invalid(fmt::format("cannot open {}", path.string()));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        invalid(fmt::format("{}: {}", path.string(), e.what()));
    }
}

RunConfig parse_run_config(json document) {
    RunConfig cfg;
    try {
        if (!document.is_object()) invalid("config must be a JSON object");
        reject_unknown_keys(document, {"problem", "schedule", "options", "anchors", "seed", "output_dir"}, "config");
        if (!document.contains("problem")) invalid("config: missing \"problem\"");
        if (!document.contains("schedule")) invalid("config: missing \"schedule\"");

        const json& problem = document.at("problem");
        if (!problem.is_object()) invalid("problem must be an object");
        reject_unknown_keys(problem,
                            {"id", "scheme", "operator", "family", "family_indices", "contraction", "anchor",
                             "fixed_point", "reference_limit"},
                            "problem");
        cfg.problem_id = problem.value("id", "problem");
        const std::string scheme = problem.value("scheme", "viscosity");
        if (scheme == "viscosity") {
            cfg.scheme = Scheme::viscosity;
        } else if (scheme == "anchored") {
            cfg.scheme = Scheme::anchored;
        } else {
            invalid(fmt::format("problem: unknown scheme \"{}\"", scheme));
        }

        if (problem.contains("operator") == problem.contains("family")) {
            invalid("problem: exactly one of \"operator\" or \"family\" is required");
        }
        if (problem.contains("operator")) {
            cfg.step_operators.push_back(json_io::operator_from_json(problem.at("operator")));
        } else {
            const OperatorFamily family = json_io::family_from_json(problem.at("family"));
            if (problem.contains("family_indices")) {
                for (const auto& t : problem.at("family_indices")) cfg.step_operators.push_back(family.evaluate(t.get<double>()));
            } else {
                cfg.step_operators = family.generator_operators();
            }
            if (cfg.step_operators.empty()) invalid("problem: family_indices must not be empty");
        }
        const std::size_t dim = cfg.step_operators.front().dim();

        if (cfg.scheme == Scheme::viscosity) {
            if (!problem.contains("contraction")) invalid("problem: viscosity scheme needs \"contraction\"");
            cfg.contraction = json_io::operator_from_json(problem.at("contraction"));
            if (cfg.contraction->dim() != dim) invalid("problem: contraction and operator dimensions differ");
        } else {
            if (!problem.contains("anchor")) invalid("problem: anchored scheme needs \"anchor\"");
            cfg.anchor = json_io::vector_from_json(problem.at("anchor"));
            if (cfg.anchor->dim() != dim) invalid("problem: anchor and operator dimensions differ");
        }
        cfg.fixed_point = optional_vector(problem, "fixed_point");
        cfg.reference_limit = optional_vector(problem, "reference_limit");
        for (const auto* v : {&cfg.fixed_point, &cfg.reference_limit}) {
            if (*v && (*v)->dim() != dim) invalid("problem: reference vectors must match the operator dimension");
        }

        cfg.schedule = json_io::schedule_spec_from_json(document.at("schedule"));
        make_schedule(cfg.schedule); // reject bad schedules before any solve
        if (cfg.scheme == Scheme::anchored && cfg.schedule.kind != ScheduleKind::anchored) {
            invalid("problem: anchored scheme needs {\"kind\": \"anchored\", \"n_max\": N} as schedule");
        }

        cfg.options = json_io::options_from_json(document.value("options", json(nullptr)));
        if (document.contains("anchors")) {
            for (const auto& a : document.at("anchors")) {
                cfg.anchors.push_back(json_io::vector_from_json(a));
                if (cfg.anchors.back().dim() != dim) invalid("anchors must match the operator dimension");
            }
        }
        if (document.contains("seed")) {
            if (!document.at("seed").is_number_unsigned()) invalid("seed must be a nonnegative integer");
            cfg.seed = document.at("seed").get<std::uint64_t>();
        }
        cfg.options.seed = cfg.seed;
        if (document.contains("output_dir")) cfg.output_dir = document.at("output_dir").get<std::string>();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        invalid(e.what());
    } catch (const json::exception& e) {
        invalid(e.what());
    }
    cfg.document = std::move(document);
    json hashed = cfg.document;
    hashed.erase("output_dir"); // where results go is not part of the problem
    cfg.hash = config_hash(hashed);
    return cfg;
}

OperatorFamily parse_family_config(const json& document) {
    try {
        const json& spec = document.contains("family") ? document.at("family") : document;
        return json_io::family_from_json(spec);
    } catch (const Error& e) {
        invalid(e.what());
    } catch (const json::exception& e) {
        invalid(e.what());
    }
}

} // namespace viscfp::cli

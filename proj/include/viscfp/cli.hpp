#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "viscfp/operators.hpp"
#include "viscfp/schemes.hpp"
#include "viscfp/semigroup.hpp"

namespace viscfp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDiagnostic = 2;

enum class Scheme { viscosity, anchored };

/// Parsed and validated run configuration.
///
/// Document layout:
///   {
///     "problem": {
///       "id": "...", "scheme": "viscosity" | "anchored",
///       "operator": {...} | "family": {...}, "family_indices"?: [...],
///       "contraction": {...},             (viscosity)
///       "anchor": [...],                  (anchored)
///       "fixed_point"?: [...], "reference_limit"?: [...]
///     },
///     "schedule": {...}, "options"?: {...}, "anchors"?: [[...], ...],
///     "seed"?: 42, "output_dir"?: "out"
///   }
struct RunConfig {
    nlohmann::json document; // effective document, after overrides
    std::string hash;        // config_hash of the document without output_dir
    std::string problem_id;
    Scheme scheme = Scheme::viscosity;
    std::vector<Operator> step_operators;
    std::optional<Operator> contraction;
    std::optional<Vector> anchor;
    std::optional<Vector> fixed_point;
    std::optional<Vector> reference_limit;
    ScheduleSpec schedule;
    SolveOptions options;
    std::vector<Vector> anchors;
    std::uint64_t seed = kDefaultSeed;
    std::filesystem::path output_dir = "out";
};

/// SHA-256 (hex) of the canonical dump: sorted keys, no whitespace.
std::string config_hash(const nlohmann::json& document);

/// Throws Error(ConfigInvalid) for unreadable or malformed JSON.
nlohmann::json load_json_file(const std::filesystem::path& path);

/// Validates the whole document before anything is computed.
/// Throws Error(ConfigInvalid).
RunConfig parse_run_config(nlohmann::json document);

/// Family document: either {"family": {...}} or the family spec itself.
OperatorFamily parse_family_config(const nlohmann::json& document);

struct RunOutcome {
    int exit_code = kExitOk;
    std::string status;
    double final_fix_residual = 0.0;
    double step5_distance = 0.0;
    std::size_t total_inner_iterations = 0;
};

/// Solves, then writes trace.csv, trace.json and summary.json into
/// config.output_dir.
RunOutcome execute_run(const RunConfig& config, std::ostream& log, bool quiet);

struct RunArgs {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::filesystem::path> output_dir;
    bool quiet = false;
};
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);

struct CertifyArgs {
    std::filesystem::path matrix;
    double tol = 1e-10;
};
int cmd_certify_na(const CertifyArgs& args, std::ostream& out, std::ostream& err);

struct FamilyArgs {
    std::filesystem::path config;
    std::size_t pairs = 20;
    std::size_t vectors = 5;
    double tol = 1e-12;
    std::optional<std::uint64_t> seed;
};
int cmd_check_family(const FamilyArgs& args, std::ostream& out, std::ostream& err);

struct SweepArgs {
    std::filesystem::path config;
    std::string param; // dotted path into the config, e.g. schedule.p
    std::vector<std::string> values;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
    bool quiet = false;
};
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

/// Full command-line entry point. Only 0, 1 and 2 are ever returned.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace viscfp::cli

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "viscfp/cli.hpp"
#include "viscfp/diagnostics.hpp"
#include "viscfp/error.hpp"
#include "viscfp/json_io.hpp"

namespace viscfp::cli {

namespace {

using nlohmann::json;

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case ErrorCode::MaxIterExceeded:
    case ErrorCode::NoConvergence: return kExitDiagnostic;
    default: return kExitConfig;
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing {}", path.string()));
}

bool all_linear(const std::vector<Operator>& ops) {
    for (const auto& op : ops)
        if (!op.linear_matrix()) return false;
    return true;
}

ProofStepReport build_report(const RunConfig& cfg, const SolveOutcome& outcome, const Operator& f, double alpha,
                             std::vector<RetractionValue>& retraction_values, json& notes) {
    const ConvergenceTrace& trace = outcome.trace;
    ProofStepReport report;

    std::optional<Vector> p = cfg.fixed_point;
    if (!p && all_linear(cfg.step_operators)) p = Vector::zeros(f.dim());
    if (p) {
        try {
            report.step2 = check_step2_bound(trace, f, alpha, *p, cfg.step_operators, cfg.options.tolerance.abs_tol);
        } catch (const Error& e) {
            notes.push_back(e.what());
        }
    } else {
        notes.push_back("step2 skipped: no known fixed point (set problem.fixed_point)");
    }

    report.step3 = check_step3_decay(trace);

    const Vector limit = cfg.reference_limit ? *cfg.reference_limit : trace.last().point;
    const Vector anchor_x = cfg.scheme == Scheme::anchored ? *cfg.anchor : apply(f, limit);
    report.step4 = assess_step4(trace, anchor_x, limit);

    report.step5_distance = check_step5_convergence(trace, cfg.reference_limit);
    report.step5_uses_oracle = cfg.reference_limit.has_value();

    if (cfg.anchors.size() >= 2) {
        retraction_values = retraction_eval(cfg.step_operators, cfg.anchors, cfg.options, cfg.schedule.n_max);
        try {
            report.retraction = check_retraction_nonexpansive(retraction_values, 10.0 * cfg.options.outer_tol);
        } catch (const Error& e) {
            notes.push_back(e.what());
        }
    }
    return report;
}

json base_summary(const RunConfig& cfg) {
    return {{"schema", kTraceSchemaVersion},
            {"config_hash", cfg.hash},
            {"seed", cfg.seed},
            {"problem_id", cfg.problem_id},
            {"scheme", cfg.scheme == Scheme::viscosity ? "viscosity" : "anchored"}};
}

} // namespace

RunOutcome execute_run(const RunConfig& cfg, std::ostream& log, bool quiet) {
    RunOutcome result;
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) {
        result.exit_code = kExitConfig;
        result.status = fmt::format("IoError: cannot create {}: {}", cfg.output_dir.string(), ec.message());
        return result;
    }

    json summary = base_summary(cfg);
    SolveOutcome outcome;
    Operator f = cfg.scheme == Scheme::viscosity ? *cfg.contraction : make_constant(*cfg.anchor);
    double alpha = 0.0;
    try {
        if (cfg.scheme == Scheme::viscosity) {
            alpha = contraction_modulus(f, cfg.seed);
            outcome = viscosity_implicit_solve(f, cfg.step_operators, make_schedule(cfg.schedule), cfg.options);
        } else {
            outcome = anchored_implicit_solve(*cfg.anchor, cfg.step_operators, cfg.schedule.n_max, cfg.options);
        }
    } catch (const Error& e) {
        result.exit_code = exit_code_for(e);
        result.status = e.what();
        summary["error"] = e.what();
        summary["verdict"] = nullptr;
        try {
            write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
        } catch (const Error&) {
        }
        if (!quiet) fmt::print(log, "{}: {}\n", cfg.problem_id, e.what());
        return result;
    }

    outcome.trace.metadata.problem_id = cfg.problem_id;
    outcome.trace.metadata.config_hash = cfg.hash;
    outcome.trace.metadata.seed = cfg.seed;

    json notes = json::array();
    std::vector<RetractionValue> retraction_values;
    const ProofStepReport report = build_report(cfg, outcome, f, alpha, retraction_values, notes);

    const TraceRecord& last = outcome.trace.last();
    summary["verdict"] = std::string(to_string(outcome.verdict));
    summary["converged"] = outcome.result.converged;
    summary["limit"] = last.point.values();
    summary["final"] = {{"n", last.n},
                        {"eps", last.eps},
                        {"fix_residual", last.fix_residual},
                        {"implicit_residual", last.implicit_residual},
                        {"step_delta", last.step_delta}};
    summary["iterations"] = {{"outer", outcome.trace.steps.size()},
                             {"inner_total", outcome.trace.total_inner_iterations()}};
    summary["proof_steps"] = to_json(report);
    if (!retraction_values.empty()) {
        json rv = json::array();
        for (const auto& v : retraction_values) {
            rv.push_back({{"anchor", v.anchor.values()},
                          {"limit", v.limit ? json(v.limit->values()) : json(nullptr)},
                          {"error", v.error.empty() ? json(nullptr) : json(v.error)}});
        }
        summary["retraction_values"] = rv;
    }
    summary["notes"] = notes;

    try {
        export_trace(outcome.trace, TraceFormat::csv, cfg.output_dir / "trace.csv");
        export_trace(outcome.trace, TraceFormat::json, cfg.output_dir / "trace.json");
        write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
    } catch (const Error& e) {
        result.exit_code = kExitConfig;
        result.status = e.what();
        return result;
    }

    result.final_fix_residual = last.fix_residual;
    result.step5_distance = report.step5_distance;
    result.total_inner_iterations = outcome.trace.total_inner_iterations();
    result.status = std::string(to_string(outcome.verdict));
    result.exit_code = outcome.verdict == Verdict::no_common_fixed_point ? kExitDiagnostic : kExitOk;

    if (!quiet) {
        fmt::print(log, "{}: {} after {} outer steps ({} inner iterations)\n", cfg.problem_id, result.status,
                   outcome.trace.steps.size(), result.total_inner_iterations);
        fmt::print(log, "  limit = [{:.10g}]  fix residual = {:.3e}\n", fmt::join(last.point.values(), ", "),
                   last.fix_residual);
        if (outcome.verdict == Verdict::no_common_fixed_point) {
            fmt::print(log, "  NoCommonFixedPoint: fix residual did not decay over {} steps\n",
                       outcome.trace.steps.size());
        }
        fmt::print(log, "  wrote {}\n", cfg.output_dir.string());
    }
    return result;
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    try {
        json doc = load_json_file(args.config);
        if (args.seed && doc.is_object()) doc["seed"] = *args.seed;
        if (args.tol && doc.is_object()) doc["options"]["outer_tol"] = *args.tol;
        RunConfig cfg = parse_run_config(std::move(doc));
        if (args.output_dir) cfg.output_dir = *args.output_dir;
        const RunOutcome r = execute_run(cfg, out, args.quiet);
        if (r.exit_code != kExitOk && args.quiet) fmt::print(err, "{}\n", r.status);
        return r.exit_code;
    } catch (const Error& e) {
        fmt::print(err, "{}\n", e.what());
        return kExitConfig;
    }
}

int cmd_certify_na(const CertifyArgs& args, std::ostream& out, std::ostream& err) {
    Matrix m;
    try {
        m = json_io::matrix_from_json(load_json_file(args.matrix));
        if (!m.square()) {
            throw Error(ErrorCode::ConfigInvalid, fmt::format("matrix must be square, got {}x{}", m.rows(), m.cols()));
        }
        if (!(args.tol > 0.0)) throw Error(ErrorCode::ConfigInvalid, "--tol must be positive");
    } catch (const Error& e) {
        fmt::print(err, "{}\n", e.what());
        return kExitConfig;
    }
    try {
        const NACertificate cert = certify_norm_attainable(m, args.tol);
        out << json_io::to_json(cert).dump() << '\n';
        return cert.residual <= args.tol ? kExitOk : kExitDiagnostic;
    } catch (const Error& e) {
        fmt::print(err, "{}\n", e.what());
        return e.code() == ErrorCode::NoConvergence ? kExitDiagnostic : kExitConfig;
    }
}

int cmd_check_family(const FamilyArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const OperatorFamily family = parse_family_config(load_json_file(args.config));
        const RepresentationReport report =
            check_representation(family, args.pairs, args.vectors, args.tol, args.seed.value_or(kDefaultSeed));
        out << json_io::to_json(report).dump() << '\n';
        return report.accepted ? kExitOk : kExitDiagnostic;
    } catch (const Error& e) {
        fmt::print(err, "{}\n", e.what());
        return kExitConfig;
    }
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (const char c : s) {
        if (c == '"') quoted += '"';
        quoted += c == '\n' ? ' ' : c;
    }
    return quoted + "\"";
}

json parse_sweep_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return text;
    }
}

} // namespace

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> values;
    for (const auto& v : args.values)
        if (!v.empty()) values.push_back(v);
    if (values.empty()) {
        fmt::print(err, "sweep: --values must list at least one value\n");
        return kExitConfig;
    }
    if (args.param.empty()) {
        fmt::print(err, "sweep: --param is required\n");
        return kExitConfig;
    }
    json base;
    try {
        base = load_json_file(args.config);
        if (!base.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    } catch (const Error& e) {
        fmt::print(err, "{}\n", e.what());
        return kExitConfig;
    }
    if (args.seed) base["seed"] = *args.seed;

    std::string pointer_text = "/" + args.param;
    std::replace(pointer_text.begin(), pointer_text.end(), '.', '/');
    const json::json_pointer pointer(pointer_text);
    if (!base.contains(pointer.parent_pointer())) {
        fmt::print(err, "sweep: config has no object at {}\n", args.param);
        return kExitConfig;
    }
    const std::filesystem::path root =
        args.output_dir ? *args.output_dir : std::filesystem::path(base.value("output_dir", std::string("out")));

    std::vector<std::future<RunOutcome>> runs;
    runs.reserve(values.size());
    for (const auto& value : values) {
        json doc = base;
        doc[pointer] = parse_sweep_value(value);
        const std::filesystem::path dir = root / fmt::format("{}={}", args.param, value);
        runs.push_back(std::async(std::launch::async, [doc = std::move(doc), dir]() mutable {
            RunOutcome r;
            try {
                RunConfig cfg = parse_run_config(std::move(doc));
                cfg.output_dir = dir;
                std::ostringstream sink;
                return execute_run(cfg, sink, true);
            } catch (const Error& e) {
                r.exit_code = kExitConfig;
                r.status = e.what();
            }
            return r;
        }));
    }

    std::ostringstream csv;
    json hashed = base;
    hashed.erase("output_dir");
    fmt::print(csv, "# config_hash={}\n# seed={}\n# param={}\n", config_hash(hashed),
               base.value("seed", kDefaultSeed), args.param);
    csv << "value,final_fix_residual,step5_distance,total_inner_iterations,status\n";
    bool any_ok = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunOutcome r = runs[i].get();
        any_ok = any_ok || r.exit_code == kExitOk;
        fmt::print(csv, "{},{:.17g},{:.17g},{},{}\n", csv_field(values[i]), r.final_fix_residual,
                   r.step5_distance, r.total_inner_iterations, csv_field(r.status));
        if (!args.quiet) fmt::print(out, "{}={}: {}\n", args.param, values[i], r.status);
    }
    try {
        std::filesystem::create_directories(root);
        write_text(root / "sweep_summary.csv", csv.str());
    } catch (const std::exception& e) {
        fmt::print(err, "{}\n", e.what());
        return kExitConfig;
    }
    if (!args.quiet) fmt::print(out, "wrote {}\n", (root / "sweep_summary.csv").string());
    return any_ok ? kExitOk : kExitDiagnostic;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"viscfp: implicit viscosity fixed-point solver and operator checks"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Solve a configured problem and write trace/summary files");
    run->add_option("config,--config", run_args.config, "Run configuration JSON")->required();
    run->add_option("--seed", run_args.seed, "Override the configured seed");
    run->add_option("--tol", run_args.tol, "Override options.outer_tol");
    run->add_option("--output-dir", run_args.output_dir, "Override output_dir");
    run->add_flag("--quiet", run_args.quiet, "No progress output");

    CertifyArgs cert_args;
    auto* cert = app.add_subcommand("certify-na", "Certify norm attainability of a square matrix");
    cert->add_option("matrix,--config,--matrix", cert_args.matrix, "Matrix JSON")->required();
    cert->add_option("--tol", cert_args.tol, "Power-iteration and residual tolerance");
    bool cert_quiet = false;
    cert->add_flag("--quiet", cert_quiet, "Accepted for symmetry; the certificate is always printed");

    FamilyArgs fam_args;
    auto* fam = app.add_subcommand("check-family", "Check the composition law of an operator family");
    fam->add_option("config,--config", fam_args.config, "Family JSON")->required();
    fam->add_option("--pairs", fam_args.pairs, "Index pairs to sample");
    fam->add_option("--vectors", fam_args.vectors, "Unit vectors per pair");
    fam->add_option("--tol", fam_args.tol, "Maximum accepted defect");
    fam->add_option("--seed", fam_args.seed, "Sampling seed");
    bool fam_quiet = false;
    fam->add_flag("--quiet", fam_quiet, "Accepted for symmetry; the report is always printed");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Run one config per parameter value");
    sweep->add_option("config,--config", sweep_args.config, "Run configuration JSON")->required();
    sweep->add_option("--param", sweep_args.param, "Dotted config path, e.g. schedule.p")->required();
    sweep->add_option("--values", sweep_args.values, "Values to substitute")->expected(0, -1);
    sweep->add_option("--seed", sweep_args.seed, "Override the configured seed");
    sweep->add_option("--output-dir", sweep_args.output_dir, "Root directory for the runs");
    sweep->add_flag("--quiet", sweep_args.quiet, "No progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        fmt::print(err, "{}\n", e.what());
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_args, out, err);
        if (*cert) return cmd_certify_na(cert_args, out, err);
        if (*fam) return cmd_check_family(fam_args, out, err);
        if (*sweep) return cmd_sweep(sweep_args, out, err);
    } catch (const std::exception& e) {
        fmt::print(err, "unexpected error: {}\n", e.what());
    }
    return kExitConfig;
}

} // namespace viscfp::cli

#include "viscfp/trace.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "viscfp/error.hpp"

namespace viscfp {

void ConvergenceTrace::validate() const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        if (!(s.eps > 0.0 && s.eps <= 1.0)) {
            throw Error(ErrorCode::InvalidSpec, fmt::format("trace step {} has eps {} outside (0, 1]", s.n, s.eps));
        }
        if (i == 0) continue;
        const auto& prev = steps[i - 1];
        if (s.n <= prev.n) throw Error(ErrorCode::InvalidSpec, "trace step numbers must strictly increase");
        if (!(s.eps < prev.eps)) throw Error(ErrorCode::InvalidSpec, "trace eps values must strictly decrease");
        if (s.point.dim() != prev.point.dim()) throw Error(ErrorCode::InvalidSpec, "trace points change dimension");
    }
}

std::size_t ConvergenceTrace::total_inner_iterations() const {
    std::size_t total = 0;
    for (const auto& s : steps) total += s.inner_iters;
    return total;
}

const TraceRecord& ConvergenceTrace::last() const {
    if (steps.empty()) throw Error(ErrorCode::InvalidSpec, "trace is empty");
    return steps.back();
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
    const auto& m = trace.metadata;
    auto meta = [&](const char* key, const std::string& value) {
        if (!value.empty()) fmt::print(out, "# {}={}\n", key, value);
    };
    meta("problem_id", m.problem_id);
    meta("schedule_kind", m.schedule_kind);
    meta("config_hash", m.config_hash);
    if (!m.config_hash.empty() || !m.problem_id.empty()) fmt::print(out, "# seed={}\n", m.seed);
    meta("started_at", m.started_at);
    meta("finished_at", m.finished_at);

    out << "n,eps,implicit_residual,fix_residual,step_delta,inner_iters";
    const std::size_t d = trace.steps.empty() ? 0 : trace.steps.front().point.dim();
    for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
    out << '\n';
    for (const auto& s : trace.steps) {
        fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{}", s.n, s.eps, s.implicit_residual, s.fix_residual,
                   s.step_delta, s.inner_iters);
        for (const double x : s.point.coords()) fmt::print(out, ",{:.17g}", x);
        out << '\n';
    }
}

nlohmann::json trace_to_json(const ConvergenceTrace& trace) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : trace.steps) {
        steps.push_back({
            {"n", s.n},
            {"eps", s.eps},
            {"point", s.point.values()},
            {"implicit_residual", s.implicit_residual},
            {"fix_residual", s.fix_residual},
            {"inner_iters", s.inner_iters},
            {"step_delta", s.step_delta},
            {"inner_tol", s.inner_tol},
        });
    }
    nlohmann::json meta = {
        {"problem_id", trace.metadata.problem_id},
        {"schedule_kind", trace.metadata.schedule_kind},
        {"seed", trace.metadata.seed},
        {"config_hash", trace.metadata.config_hash},
    };
    if (!trace.metadata.started_at.empty()) meta["started_at"] = trace.metadata.started_at;
    if (!trace.metadata.finished_at.empty()) meta["finished_at"] = trace.metadata.finished_at;
    return {{"schema", kTraceSchemaVersion}, {"metadata", meta}, {"steps", steps}};
}

ConvergenceTrace trace_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("schema").get<int>() != kTraceSchemaVersion) {
            throw Error(ErrorCode::InvalidSpec, fmt::format("unsupported trace schema {}", doc.at("schema").dump()));
        }
        ConvergenceTrace trace;
        const auto& meta = doc.at("metadata");
        trace.metadata.problem_id = meta.value("problem_id", "");
        trace.metadata.schedule_kind = meta.value("schedule_kind", "");
        trace.metadata.seed = meta.value("seed", kDefaultSeed);
        trace.metadata.config_hash = meta.value("config_hash", "");
        trace.metadata.started_at = meta.value("started_at", "");
        trace.metadata.finished_at = meta.value("finished_at", "");
        for (const auto& s : doc.at("steps")) {
            TraceRecord r;
            r.n = s.at("n").get<std::size_t>();
            r.eps = s.at("eps").get<double>();
            r.point = Vector(s.at("point").get<std::vector<double>>());
            r.implicit_residual = s.at("implicit_residual").get<double>();
            r.fix_residual = s.at("fix_residual").get<double>();
            r.inner_iters = s.at("inner_iters").get<std::size_t>();
            r.step_delta = s.at("step_delta").get<double>();
            r.inner_tol = s.at("inner_tol").get<double>();
            trace.steps.push_back(std::move(r));
        }
        trace.validate();
        return trace;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, fmt::format("malformed trace JSON: {}", e.what()));
    }
}

void export_trace(const ConvergenceTrace& trace, TraceFormat format, const std::filesystem::path& destination) {
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot open {} for writing", destination.string()));
    if (format == TraceFormat::csv) {
        write_trace_csv(trace, out);
    } else {
        out << trace_to_json(trace).dump(2) << '\n';
    }
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing {}", destination.string()));
}

ConvergenceTrace load_trace_json(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", source.string()));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, fmt::format("{}: {}", source.string(), e.what()));
    }
    return trace_from_json(doc);
}

} // namespace viscfp

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "viscfp/hilbert.hpp"

namespace viscfp {

/// One outer step of an implicit solve.
struct TraceRecord {
    std::size_t n = 0;
    double eps = 0.0;
    Vector point = Vector::zeros(1);
    double implicit_residual = 0.0; // ||xi - (eps f(xi) + (1 - eps) T xi)||
    double fix_residual = 0.0;      // max over step operators of ||xi - T xi||
    std::size_t inner_iters = 0;
    double step_delta = 0.0;        // ||xi_n - xi_{n-1}||
    double inner_tol = 0.0;         // delta_n requested from the inner solve

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceMetadata {
    std::string problem_id;
    std::string schedule_kind;
    std::uint64_t seed = kDefaultSeed;
    std::string config_hash;
    // Wall-clock stamps; left empty by default so traces stay reproducible.
    std::string started_at;
    std::string finished_at;

    friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

struct ConvergenceTrace {
    TraceMetadata metadata;
    std::vector<TraceRecord> steps;

    /// n strictly increasing; eps strictly decreasing in (0, 1] (the
    /// anchored scheme starts at eps_1 = 1); one common dimension.
    /// Throws InvalidSpec.
    void validate() const;
    [[nodiscard]] std::size_t total_inner_iterations() const;
    [[nodiscard]] bool empty() const noexcept { return steps.empty(); }
    [[nodiscard]] const TraceRecord& last() const;

    friend bool operator==(const ConvergenceTrace&, const ConvergenceTrace&) = default;
};

enum class TraceFormat { csv, json };

inline constexpr int kTraceSchemaVersion = 1;

/// CSV columns: n, eps, implicit_residual, fix_residual, step_delta,
/// inner_iters, x0..x{d-1}; 17 significant digits. Non-empty metadata
/// fields are written first as `# key=value` comment lines.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);
nlohmann::json trace_to_json(const ConvergenceTrace& trace);
/// Throws InvalidSpec on schema mismatch or malformed records.
ConvergenceTrace trace_from_json(const nlohmann::json& doc);

/// Throws IoError when the destination cannot be written.
void export_trace(const ConvergenceTrace& trace, TraceFormat format, const std::filesystem::path& destination);
ConvergenceTrace load_trace_json(const std::filesystem::path& source);

} // namespace viscfp

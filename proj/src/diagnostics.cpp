#include "viscfp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "viscfp/error.hpp"
#include "viscfp/schemes.hpp"

namespace viscfp {

double residual(const Operator& t, const Vector& x) { return distance(x, apply(t, x)); }

std::size_t tail_window(std::size_t n_steps) noexcept {
    const auto tenth = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n_steps)));
    return std::min(n_steps, std::max<std::size_t>(5, tenth));
}

namespace {

void require_nonempty(const ConvergenceTrace& trace, const char* what) {
    if (trace.empty()) throw Error(ErrorCode::InvalidSpec, fmt::format("{} needs a nonempty trace", what));
}

} // namespace

Step2Report check_step2_bound(const ConvergenceTrace& trace, const Operator& f, double alpha, const Vector& p,
                              std::span<const Operator> step_operators, double abs_tol) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::NotAContraction, fmt::format("alpha {} is not below 1", alpha));
    }
    for (const auto& t : step_operators) {
        const double r = residual(t, p);
        if (r > 10.0 * abs_tol) {
            throw Error(ErrorCode::NotAFixedPoint, fmt::format("reference point is moved by {} (residual {})",
                                                               t.describe(), r));
        }
    }
    Step2Report report;
    report.bound = distance(apply(f, p), p) / (1.0 - alpha);
    report.margin = -std::numeric_limits<double>::infinity();
    for (const auto& s : trace.steps) {
        report.margin = std::max(report.margin, distance(s.point, p) - report.bound - 10.0 * s.inner_tol);
    }
    if (trace.empty()) report.margin = 0.0;
    report.ok = report.margin <= 0.0;
    return report;
}

Step2Report check_step2_bound(const ConvergenceTrace& trace, const Operator& f, double alpha, const Vector& p,
                              const Operator& t, double abs_tol) {
    return check_step2_bound(trace, f, alpha, p, std::span<const Operator>(&t, 1), abs_tol);
}

Step3Report check_step3_decay(const ConvergenceTrace& trace) {
    require_nonempty(trace, "check_step3_decay");
    const auto& steps = trace.steps;
    const std::size_t w = tail_window(steps.size());
    Step3Report r;
    r.final_residual = steps.back().fix_residual;
    r.head_max = 0.0;
    for (std::size_t i = 0; i < w; ++i) r.head_max = std::max(r.head_max, steps[i].fix_residual);
    r.tail_max = 0.0;
    r.tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = steps.size() - w; i < steps.size(); ++i) {
        r.tail_max = std::max(r.tail_max, steps[i].fix_residual);
        r.tail_min = std::min(r.tail_min, steps[i].fix_residual);
    }
    r.settling = r.tail_max <= 2.0 * r.tail_min;
    r.decayed = r.final_residual <= 0.5 * r.head_max;
    return r;
}

Verdict diagnose_convergence(const ConvergenceTrace& trace, double outer_tol) {
    const Step3Report r = check_step3_decay(trace);
    if (r.final_residual <= outer_tol) return Verdict::converged;
    if (r.decayed) return Verdict::settling;
    return Verdict::no_common_fixed_point;
}

double check_step4_vi(const ConvergenceTrace& trace, const Vector& anchor_x, const Vector& limit) {
    require_nonempty(trace, "check_step4_vi");
    const Vector direction = anchor_x - limit;
    const std::size_t w = tail_window(trace.steps.size());
    double value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = trace.steps.size() - w; i < trace.steps.size(); ++i)
        value = std::max(value, inner(direction, trace.steps[i].point - limit));
    return value;
}

Step4Assessment assess_step4(const ConvergenceTrace& trace, const Vector& anchor_x, const Vector& limit,
                             double vi_tol) {
    Step4Assessment a;
    a.value = check_step4_vi(trace, anchor_x, limit);
    const Vector direction = anchor_x - limit;
    const std::size_t n = trace.steps.size();
    double sve = 0.0, see = 0.0, svv = 0.0;
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = n / 2; i < n; ++i) {
        const double v = inner(direction, trace.steps[i].point - limit);
        const double e = trace.steps[i].eps;
        samples.emplace_back(v, e);
        sve += v * e;
        see += e * e;
        svv += v * v;
    }
    a.fit_rate = see > 0.0 ? sve / see : 0.0;
    double rss = 0.0;
    for (const auto& [v, e] : samples) rss += (v - a.fit_rate * e) * (v - a.fit_rate * e);
    a.fit_relative_residual = svv > 0.0 ? std::sqrt(rss / svv) : 0.0;
    a.accepted = a.value <= vi_tol || (a.fit_rate >= 0.0 && a.fit_relative_residual <= 0.2);
    return a;
}

RetractionCheck check_retraction_nonexpansive(const std::vector<RetractionValue>& values, double tol) {
    std::vector<const RetractionValue*> ok;
    for (const auto& v : values)
        if (v.limit) ok.push_back(&v);
    if (ok.size() < 2) throw Error(ErrorCode::InvalidSpec, "retraction check needs at least two solved anchors");
    RetractionCheck check;
    check.worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ok.size(); ++i) {
        for (std::size_t j = i + 1; j < ok.size(); ++j) {
            const double margin = distance(*ok[i]->limit, *ok[j]->limit) - distance(ok[i]->anchor, ok[j]->anchor);
            if (margin > check.worst_margin) {
                check.worst_margin = margin;
                check.worst_i = i;
                check.worst_j = j;
            }
            ++check.pairs_checked;
        }
    }
    check.ok = check.worst_margin <= tol;
    return check;
}

double check_step5_convergence(const ConvergenceTrace& trace, const std::optional<Vector>& oracle_limit) {
    require_nonempty(trace, "check_step5_convergence");
    if (oracle_limit) return distance(trace.last().point, *oracle_limit);
    const std::size_t w = tail_window(trace.steps.size());
    double worst = 0.0;
    for (std::size_t i = trace.steps.size() - w; i < trace.steps.size(); ++i)
        worst = std::max(worst, trace.steps[i].step_delta);
    return worst;
}

nlohmann::json to_json(const Step2Report& r) {
    return {{"ok", r.ok}, {"margin", r.margin}, {"bound", r.bound}};
}

nlohmann::json to_json(const Step3Report& r) {
    return {{"final_residual", r.final_residual}, {"head_max", r.head_max}, {"tail_max", r.tail_max},
            {"tail_min", r.tail_min},             {"settling", r.settling}, {"decayed", r.decayed}};
}

nlohmann::json to_json(const Step4Assessment& r) {
    return {{"value", r.value},
            {"fit_rate", r.fit_rate},
            {"fit_relative_residual", r.fit_relative_residual},
            {"accepted", r.accepted}};
}

nlohmann::json to_json(const RetractionCheck& r) {
    return {{"ok", r.ok},
            {"worst_pair", {r.worst_i, r.worst_j}},
            {"worst_margin", r.worst_margin},
            {"pairs_checked", r.pairs_checked}};
}

nlohmann::json to_json(const ProofStepReport& r) {
    nlohmann::json j;
    j["step2_bound"] = r.step2 ? to_json(*r.step2) : nlohmann::json(nullptr);
    j["step3_decay"] = to_json(r.step3);
    j["step4_vi"] = r.step4 ? to_json(*r.step4) : nlohmann::json(nullptr);
    j["step5_distance"] = r.step5_distance;
    j["step5_uses_oracle"] = r.step5_uses_oracle;
    j["retraction_nonexpansive"] = r.retraction ? to_json(*r.retraction) : nlohmann::json(nullptr);
    return j;
}

} // namespace viscfp

#include "viscfp/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "viscfp/diagnostics.hpp"
#include "viscfp/error.hpp"

namespace viscfp {

std::string_view to_string(ScheduleKind kind) noexcept {
    switch (kind) {
    case ScheduleKind::harmonic: return "harmonic";
    case ScheduleKind::geometric: return "geometric";
    case ScheduleKind::explicit_list: return "explicit";
    case ScheduleKind::anchored: return "anchored";
    }
    return "unknown";
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::settling: return "settling";
    case Verdict::no_common_fixed_point: return "NoCommonFixedPoint";
    }
    return "unknown";
}

EpsilonSchedule make_schedule(const ScheduleSpec& spec) {
    std::vector<double> values;
    switch (spec.kind) {
    case ScheduleKind::harmonic:
        if (!(spec.parameter > 0.0) || !std::isfinite(spec.parameter)) {
            throw Error(ErrorCode::InvalidSchedule, fmt::format("harmonic exponent must be positive, got {}", spec.parameter));
        }
        for (std::size_t n = 1; n <= spec.n_max; ++n)
            values.push_back(1.0 / std::pow(static_cast<double>(n + 1), spec.parameter));
        break;
    case ScheduleKind::geometric:
        if (!(spec.parameter > 0.0 && spec.parameter < 1.0)) {
            throw Error(ErrorCode::InvalidSchedule, fmt::format("geometric ratio must lie in (0, 1), got {}", spec.parameter));
        }
        for (std::size_t n = 1; n <= spec.n_max; ++n)
            values.push_back(std::pow(spec.parameter, static_cast<double>(n)));
        break;
    case ScheduleKind::explicit_list: values = spec.values; break;
    case ScheduleKind::anchored: return make_anchored_schedule(spec.n_max);
    }
    if (values.empty()) throw Error(ErrorCode::InvalidSchedule, "schedule needs n_max >= 1");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0 && values[i] < 1.0)) {
            throw Error(ErrorCode::InvalidSchedule, fmt::format("eps_{} = {} lies outside (0, 1)", i + 1, values[i]));
        }
        if (i > 0 && !(values[i] < values[i - 1])) {
            throw Error(ErrorCode::NonDecreasingSchedule,
                        fmt::format("schedule not strictly decreasing at n = {} ({} after {})", i + 1, values[i],
                                    values[i - 1]));
        }
    }
    EpsilonSchedule s;
    s.kind_ = spec.kind;
    s.values_ = std::move(values);
    return s;
}

EpsilonSchedule make_anchored_schedule(std::size_t n_max) {
    if (n_max < 1) throw Error(ErrorCode::InvalidSchedule, "anchored schedule needs n_max >= 1");
    EpsilonSchedule s;
    s.kind_ = ScheduleKind::anchored;
    s.values_.reserve(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) s.values_.push_back(1.0 / static_cast<double>(n));
    return s;
}

double InnerTolRule::delta(double eps, double outer_tol) const {
    return kind == Kind::fixed ? value : std::min(outer_tol, value * eps * eps);
}

void SolveOptions::validate() const {
    if (!(outer_tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "outer_tol must be positive");
    if (!(inner_tol.value > 0.0)) throw Error(ErrorCode::InvalidSpec, "inner tolerance parameter must be positive");
    tolerance.validate();
}

namespace {

struct PicardOutcome {
    std::size_t iterations = 0;
    bool converged = false;
    double last_step = 0.0;
};

/// Picard loop on caller-owned buffers. `x` holds the start point on entry
/// and the final iterate on exit. map(in, out) evaluates G.
template <class Map, class OnStep>
PicardOutcome picard_core(Map&& map, double alpha, std::vector<double>& x, double tol, std::size_t max_iter,
                          OnStep&& on_step) {
    std::vector<double> y(x.size());
    double previous = 0.0;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        map(std::span<const double>(x), std::span<double>(y));
        const double step = distance(std::span<const double>(x), std::span<const double>(y));
        on_step(k, step, previous);
        x.swap(y);
        if (alpha * step <= tol * (1.0 - alpha)) return {k, true, step};
        previous = step;
    }
    return {max_iter, false, previous};
}

void require_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::NotAContraction, fmt::format("contraction modulus {} is not below 1", alpha));
    }
}

ImplicitStep implicit_step_impl(const Operator& f, double alpha, const Operator& t, double eps, const Vector& warm,
                                double inner_tol, std::size_t max_iter, const InnerStepObserver& observer,
                                std::size_t outer_n) {
    if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidSpec, fmt::format("eps {} outside (0, 1]", eps));
    if (!(inner_tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "inner tolerance must be positive");
    require_same_dim(f.dim(), t.dim(), "implicit_step operators");
    require_same_dim(f.dim(), warm.dim(), "implicit_step start point");

    const std::size_t d = warm.dim();
    const double q = eps * alpha + (1.0 - eps);
    std::vector<double> fb(d), tb(d);
    auto map = [&](std::span<const double> in, std::span<double> out) {
        f.apply_into(in, fb);
        t.apply_into(in, tb);
        for (std::size_t i = 0; i < d; ++i) out[i] = eps * fb[i] + (1.0 - eps) * tb[i];
    };

    std::vector<double> x(warm.values());
    const PicardOutcome outcome = picard_core(map, q, x, inner_tol, max_iter, [&](std::size_t k, double step, double prev) {
        if (observer) observer(InnerStepEvent{outer_n, k, step, prev, q});
    });
    if (!outcome.converged) {
        throw Error(ErrorCode::MaxIterExceeded,
                    fmt::format("implicit step (n = {}, eps = {:.6g}) did not reach tolerance {:.3g} within {} inner "
                                "iterations; inner contraction factor q = {:.17g}",
                                outer_n, eps, inner_tol, max_iter, q));
    }
    std::vector<double> gx(d);
    map(x, gx);
    const double implicit_residual = distance(std::span<const double>(x), std::span<const double>(gx));
    return ImplicitStep{Vector(std::move(x)), outcome.iterations, implicit_residual, q};
}

double max_fix_residual(std::span<const Operator> ops, std::span<const double> x, std::vector<double>& scratch) {
    double worst = 0.0;
    for (const auto& t : ops) {
        t.apply_into(x, scratch);
        worst = std::max(worst, distance(x, std::span<const double>(scratch)));
    }
    return worst;
}

SolveOutcome outer_loop(const Operator& f, double alpha, std::span<const Operator> ops, const EpsilonSchedule& schedule,
                        const SolveOptions& opts, const InnerStepObserver& observer) {
    opts.validate();
    if (ops.empty()) throw Error(ErrorCode::InvalidSpec, "at least one step operator is required");
    for (const auto& t : ops) {
        require_same_dim(f.dim(), t.dim(), "step operator");
        require_nonexpansive(t, opts.seed);
    }

    const Vector origin = Vector::zeros(f.dim());
    SolveOutcome out;
    out.trace.metadata.schedule_kind = std::string(to_string(schedule.kind()));
    out.trace.metadata.seed = opts.seed;
    std::vector<double> scratch(f.dim());
    Vector previous = origin;

    for (std::size_t n = 1; n <= schedule.n_max(); ++n) {
        const double eps = schedule.eps(n);
        const double delta = opts.inner_tol.delta(eps, opts.outer_tol);
        const Operator& t = ops[(n - 1) % ops.size()];
        const Vector& start = opts.warm_start ? previous : origin;
        ImplicitStep step =
            implicit_step_impl(f, alpha, t, eps, start, delta, opts.tolerance.max_iter, observer, n);

        TraceRecord rec;
        rec.n = n;
        rec.eps = eps;
        rec.implicit_residual = step.implicit_residual;
        rec.fix_residual = max_fix_residual(ops, step.point.coords(), scratch);
        rec.inner_iters = step.inner_iterations;
        rec.step_delta = distance(step.point, previous);
        rec.inner_tol = delta;
        rec.point = std::move(step.point);
        previous = rec.point;
        const bool settled = rec.fix_residual <= opts.outer_tol && rec.step_delta <= opts.outer_tol;
        out.trace.steps.push_back(std::move(rec));
        if (settled) break;
    }

    const TraceRecord& last = out.trace.last();
    out.result = FixedPointResult{last.point, last.fix_residual, out.trace.steps.size(),
                                  last.fix_residual <= opts.outer_tol};
    out.verdict = diagnose_convergence(out.trace, opts.outer_tol);
    return out;
}

} // namespace

FixedPointResult picard_solve(const ContractionMap& g, double alpha, const Vector& x0, double tol,
                              std::size_t max_iter) {
    require_alpha(alpha);
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "Picard tolerance must be positive");
    const std::size_t d = x0.dim();
    auto map = [&](std::span<const double> in, std::span<double> out) {
        const Vector image = g(Vector(std::vector<double>(in.begin(), in.end())));
        require_same_dim(d, image.dim(), "contraction map image");
        std::copy(image.coords().begin(), image.coords().end(), out.begin());
    };
    std::vector<double> x(x0.values());
    const PicardOutcome outcome = picard_core(map, alpha, x, tol, max_iter, [](std::size_t, double, double) {});
    if (!outcome.converged) {
        throw Error(ErrorCode::MaxIterExceeded,
                    fmt::format("Picard iteration did not reach tolerance {:.3g} within {} iterations (alpha = {})",
                                tol, max_iter, alpha));
    }
    Vector point(std::move(x));
    const double res = distance(point, g(point));
    return FixedPointResult{std::move(point), res, outcome.iterations, true};
}

FixedPointResult picard_solve(const Operator& g, const Vector& x0, double tol, std::size_t max_iter) {
    require_same_dim(g.dim(), x0.dim(), "picard_solve");
    return picard_solve([&](const Vector& x) { return apply(g, x); }, contraction_modulus(g), x0, tol, max_iter);
}

double contraction_modulus(const Operator& f, std::uint64_t seed) {
    const auto& c = f.declared_class();
    if (c.is_contraction()) return c.alpha;
    if (c.tag == LipschitzClass::Tag::unknown) {
        const double estimate = estimate_lipschitz(f, 2000, 10.0, seed);
        if (estimate <= 1.0 - 1e-6) return estimate;
        throw Error(ErrorCode::NotAContraction,
                    fmt::format("{} has sampled Lipschitz ratio {} (needs <= 1 - 1e-6)", f.describe(), estimate));
    }
    throw Error(ErrorCode::NotAContraction, fmt::format("{} is not declared a contraction", f.describe()));
}

void require_nonexpansive(const Operator& t, std::uint64_t seed) {
    if (t.declared_class().is_nonexpansive()) return;
    const auto check = check_nonexpansive(t, 1000, 1e-9, 10.0, seed);
    if (!check.pass) {
        throw Error(ErrorCode::NotNonexpansive,
                    fmt::format("{} fails the nonexpansive check (sampled ratio {})", t.describe(), check.witness->ratio));
    }
}

ImplicitStep implicit_step(const Operator& f, const Operator& t, double eps, const Vector& warm, double inner_tol,
                           std::size_t max_iter) {
    const double alpha = contraction_modulus(f);
    require_nonexpansive(t);
    return implicit_step_impl(f, alpha, t, eps, warm, inner_tol, max_iter, {}, 0);
}

SolveOutcome viscosity_implicit_solve(const Operator& f, std::span<const Operator> step_operators,
                                      const EpsilonSchedule& schedule, const SolveOptions& opts,
                                      const InnerStepObserver& observer) {
    if (schedule.kind() != ScheduleKind::anchored) {
        for (std::size_t n = 2; n <= schedule.n_max(); ++n) {
            if (!(schedule.eps(n) < schedule.eps(n - 1))) {
                throw Error(ErrorCode::NonDecreasingSchedule, "schedule not strictly decreasing");
            }
        }
    }
    return outer_loop(f, contraction_modulus(f, opts.seed), step_operators, schedule, opts, observer);
}

SolveOutcome viscosity_implicit_solve(const Operator& f, const Operator& t, const EpsilonSchedule& schedule,
                                      const SolveOptions& opts, const InnerStepObserver& observer) {
    return viscosity_implicit_solve(f, std::span<const Operator>(&t, 1), schedule, opts, observer);
}

SolveOutcome viscosity_implicit_solve(const Operator& f, const OperatorFamily& family,
                                      const EpsilonSchedule& schedule, const SolveOptions& opts,
                                      const std::vector<double>& indices, const InnerStepObserver& observer) {
    std::vector<Operator> ops;
    if (indices.empty()) {
        ops = family.generator_operators();
    } else {
        for (const double t : indices) ops.push_back(family.evaluate(t));
    }
    return viscosity_implicit_solve(f, ops, schedule, opts, observer);
}

SolveOutcome anchored_implicit_solve(const Vector& anchor, std::span<const Operator> step_operators,
                                     std::size_t n_max, const SolveOptions& opts,
                                     const InnerStepObserver& observer) {
    const Operator f = make_constant(anchor);
    return outer_loop(f, 0.0, step_operators, make_anchored_schedule(n_max), opts, observer);
}

SolveOutcome anchored_implicit_solve(const Vector& anchor, const Operator& t, std::size_t n_max,
                                     const SolveOptions& opts, const InnerStepObserver& observer) {
    return anchored_implicit_solve(anchor, std::span<const Operator>(&t, 1), n_max, opts, observer);
}

std::vector<RetractionValue> retraction_eval(std::span<const Operator> step_operators,
                                             const std::vector<Vector>& anchors, const SolveOptions& opts,
                                             std::size_t n_max) {
    if (anchors.empty()) throw Error(ErrorCode::InvalidSpec, "retraction_eval needs at least one anchor");
    for (const auto& a : anchors) require_same_dim(anchors.front().dim(), a.dim(), "retraction anchors");
    std::vector<RetractionValue> values;
    values.reserve(anchors.size());
    for (const auto& a : anchors) {
        RetractionValue v{a, std::nullopt, {}};
        try {
            v.limit = anchored_implicit_solve(a, step_operators, n_max, opts).result.point;
        } catch (const Error& e) {
            v.error = e.what();
        }
        values.push_back(std::move(v));
    }
    return values;
}

std::vector<RetractionValue> retraction_eval(const Operator& t, const std::vector<Vector>& anchors,
                                             const SolveOptions& opts, std::size_t n_max) {
    return retraction_eval(std::span<const Operator>(&t, 1), anchors, opts, n_max);
}

} // namespace viscfp

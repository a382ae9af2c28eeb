#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viscfp/hilbert.hpp"
#include "viscfp/operators.hpp"
#include "viscfp/semigroup.hpp"
#include "viscfp/trace.hpp"

namespace viscfp {

enum class ScheduleKind { harmonic, geometric, explicit_list, anchored };

std::string_view to_string(ScheduleKind kind) noexcept;

/// harmonic: eps_n = 1/(n+1)^p; geometric: eps_n = r^n; explicit_list: the
/// given values. `parameter` is p or r.
struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::harmonic;
    double parameter = 1.0;
    std::vector<double> values;
    std::size_t n_max = 200;
};

/// Materialized eps_1..eps_{n_max}, strictly decreasing, each in (0, 1).
/// The anchored schedule eps_n = 1/n is the one exception: it starts at
/// eps_1 = 1, which makes the first step return the anchor.
class EpsilonSchedule {
public:
    [[nodiscard]] ScheduleKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t n_max() const noexcept { return values_.size(); }
    /// eps_n, 1-based.
    [[nodiscard]] double eps(std::size_t n) const { return values_.at(n - 1); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    friend EpsilonSchedule make_schedule(const ScheduleSpec&);
    friend EpsilonSchedule make_anchored_schedule(std::size_t);

    ScheduleKind kind_ = ScheduleKind::harmonic;
    std::vector<double> values_;
};

/// Throws InvalidSchedule for parameters out of range or a value outside
/// (0, 1); NonDecreasingSchedule when the sequence is not strictly
/// decreasing.
EpsilonSchedule make_schedule(const ScheduleSpec& spec);
EpsilonSchedule make_anchored_schedule(std::size_t n_max);

struct FixedPointResult {
    Vector point = Vector::zeros(1);
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Inner tolerance delta_n: fixed(delta) or coupled(c) giving
/// min(outer_tol, c * eps_n^2).
struct InnerTolRule {
    enum class Kind { fixed, coupled };

    Kind kind = Kind::coupled;
    double value = 1.0;

    static InnerTolRule fixed(double delta) { return {Kind::fixed, delta}; }
    static InnerTolRule coupled(double c) { return {Kind::coupled, c}; }
    [[nodiscard]] double delta(double eps, double outer_tol) const;
};

struct SolveOptions {
    double outer_tol = 1e-8;
    InnerTolRule inner_tol;
    bool warm_start = true;
    TolerancePolicy tolerance;
    std::uint64_t seed = kDefaultSeed; // drives the sampled operator checks

    /// Throws InvalidSpec.
    void validate() const;
};

/// Raw inner Picard step, reported as it happens.
struct InnerStepEvent {
    std::size_t outer_n = 0;
    std::size_t k = 0;          // 1-based inner iteration
    double step = 0.0;          // ||x_k - x_{k-1}||
    double previous_step = 0.0; // ||x_{k-1} - x_{k-2}||, 0 for k = 1
    double q = 0.0;             // contraction modulus of the inner map
};
using InnerStepObserver = std::function<void(const InnerStepEvent&)>;

using ContractionMap = std::function<Vector(const Vector&)>;

/// Banach/Picard iteration x_{k+1} = G(x_k) for a map with Lipschitz
/// modulus alpha < 1. Stops once alpha/(1-alpha) * ||x_{k+1} - x_k|| <= tol,
/// which bounds the distance to the fixed point by tol (alpha = 0 stops
/// after one application). `residual` is ||x - G(x)|| at the returned point.
/// Throws NotAContraction, MaxIterExceeded.
FixedPointResult picard_solve(const ContractionMap& g, double alpha, const Vector& x0, double tol,
                              std::size_t max_iter = TolerancePolicy{}.max_iter);
/// Uses the declared contraction modulus, or a sampled estimate when it is
/// at most 1 - 1e-6.
FixedPointResult picard_solve(const Operator& g, const Vector& x0, double tol,
                              std::size_t max_iter = TolerancePolicy{}.max_iter);

/// Declared contraction modulus of f, or a sampled estimate when that is
/// at most 1 - 1e-6. Throws NotAContraction.
double contraction_modulus(const Operator& f, std::uint64_t seed = kDefaultSeed);
/// Accepts declared nonexpansive operators or ones passing
/// check_nonexpansive at tol 1e-9. Throws NotNonexpansive.
void require_nonexpansive(const Operator& t, std::uint64_t seed = kDefaultSeed);

struct ImplicitStep {
    Vector point = Vector::zeros(1);
    std::size_t inner_iterations = 0;
    double implicit_residual = 0.0;
    double q = 0.0;
};

/// Solves xi = eps f(xi) + (1 - eps) T(xi) by Picard iteration from `warm`.
/// The inner map has modulus q = eps*alpha + (1 - eps) < 1.
/// eps must lie in (0, 1]. Throws MaxIterExceeded (message reports q).
ImplicitStep implicit_step(const Operator& f, const Operator& t, double eps, const Vector& warm, double inner_tol,
                           std::size_t max_iter = TolerancePolicy{}.max_iter);

/// Convergence verdict from the fix-residual history.
enum class Verdict { converged, settling, no_common_fixed_point };

std::string_view to_string(Verdict v) noexcept;

struct SolveOutcome {
    FixedPointResult result;
    ConvergenceTrace trace;
    Verdict verdict = Verdict::settling;
};

/// Outer viscosity loop: xi_n = implicit_step(f, T_n, eps_n, warm_n, delta_n)
/// for n = 1..n_max, T_n cycling round-robin through `step_operators`. Stops
/// early once both the fix residual and the step delta are <= outer_tol.
SolveOutcome viscosity_implicit_solve(const Operator& f, std::span<const Operator> step_operators,
                                      const EpsilonSchedule& schedule, const SolveOptions& opts,
                                      const InnerStepObserver& observer = {});
SolveOutcome viscosity_implicit_solve(const Operator& f, const Operator& t, const EpsilonSchedule& schedule,
                                      const SolveOptions& opts, const InnerStepObserver& observer = {});
/// Family form: step operators are T_t for t in `indices` (the family
/// generators when empty).
SolveOutcome viscosity_implicit_solve(const Operator& f, const OperatorFamily& family,
                                      const EpsilonSchedule& schedule, const SolveOptions& opts,
                                      const std::vector<double>& indices = {},
                                      const InnerStepObserver& observer = {});

/// xi_n = (1/n) x + (1 - 1/n) T xi_n, i.e. f = constant(anchor), eps_n = 1/n.
SolveOutcome anchored_implicit_solve(const Vector& anchor, std::span<const Operator> step_operators,
                                     std::size_t n_max, const SolveOptions& opts,
                                     const InnerStepObserver& observer = {});
SolveOutcome anchored_implicit_solve(const Vector& anchor, const Operator& t, std::size_t n_max,
                                     const SolveOptions& opts, const InnerStepObserver& observer = {});

struct RetractionValue {
    Vector anchor;
    std::optional<Vector> limit;
    std::string error; // set when the anchored solve failed
};

/// Anchored limit R(x) for each anchor; failures are reported per anchor.
std::vector<RetractionValue> retraction_eval(std::span<const Operator> step_operators,
                                             const std::vector<Vector>& anchors, const SolveOptions& opts,
                                             std::size_t n_max = 200);
std::vector<RetractionValue> retraction_eval(const Operator& t, const std::vector<Vector>& anchors,
                                             const SolveOptions& opts, std::size_t n_max = 200);

} // namespace viscfp

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "viscfp/hilbert.hpp"
#include "viscfp/operators.hpp"
#include "viscfp/trace.hpp"

namespace viscfp {

enum class Verdict;
struct RetractionValue;

/// ||x - T x||. Throws DimensionMismatch.
double residual(const Operator& t, const Vector& x);

/// Size of the tail window used by every tail statistic: 10% of the steps,
/// at least 5, never more than the trace holds.
std::size_t tail_window(std::size_t n_steps) noexcept;

struct Step2Report {
    bool ok = true;
    double margin = 0.0; // max_n ||xi_n - p|| - bound - 10 delta_n
    double bound = 0.0;  // ||f(p) - p|| / (1 - alpha)
};

/// Boundedness: ||xi_n - p|| <= ||f(p) - p|| / (1 - alpha) + 10 delta_n for
/// every recorded n. Throws NotAFixedPoint when p is moved by a step
/// operator by more than 10 * abs_tol.
Step2Report check_step2_bound(const ConvergenceTrace& trace, const Operator& f, double alpha, const Vector& p,
                              std::span<const Operator> step_operators,
                              double abs_tol = TolerancePolicy{}.abs_tol);
Step2Report check_step2_bound(const ConvergenceTrace& trace, const Operator& f, double alpha, const Vector& p,
                              const Operator& t, double abs_tol = TolerancePolicy{}.abs_tol);

struct Step3Report {
    double final_residual = 0.0;
    double head_max = 0.0; // max fix residual over the first window
    double tail_max = 0.0;
    double tail_min = 0.0;
    bool settling = true;  // tail_max <= 2 tail_min
    bool decayed = true;   // final_residual <= head_max / 2
};

/// Fix-residual decay statistics. Throws InvalidSpec on an empty trace.
Step3Report check_step3_decay(const ConvergenceTrace& trace);

/// converged when the final fix residual is <= outer_tol; settling when it
/// has at least halved relative to the opening window; otherwise the
/// residual is not decaying, which signals an empty fixed-point set.
Verdict diagnose_convergence(const ConvergenceTrace& trace, double outer_tol);

/// max over the tail window of <x - limit, xi_n - limit>.
double check_step4_vi(const ConvergenceTrace& trace, const Vector& anchor_x, const Vector& limit);

struct Step4Assessment {
    double value = 0.0;                 // check_step4_vi
    double fit_rate = 0.0;              // c in v_n ~ c eps_n over the last half
    double fit_relative_residual = 0.0; // ||v - c eps|| / ||v||
    bool accepted = false;
};

/// Accepts when the value is <= vi_tol, or when the pairings over the last
/// half of the trace fit c * eps_n with c >= 0 and relative residual <= 0.2.
Step4Assessment assess_step4(const ConvergenceTrace& trace, const Vector& anchor_x, const Vector& limit,
                             double vi_tol = 1e-6);

struct RetractionCheck {
    bool ok = true;
    std::size_t worst_i = 0;
    std::size_t worst_j = 0;
    double worst_margin = 0.0; // max ||Rx - Ry|| - ||x - y||
    std::size_t pairs_checked = 0;
};

/// ||R x - R y|| <= ||x - y|| + tol over all pairs of successful anchors.
/// Throws InvalidSpec with fewer than two successful anchors.
RetractionCheck check_retraction_nonexpansive(const std::vector<RetractionValue>& values, double tol);

/// ||xi_N - oracle|| with an oracle, else the max step delta over the tail
/// window (Cauchy tail).
double check_step5_convergence(const ConvergenceTrace& trace, const std::optional<Vector>& oracle_limit = {});

struct ProofStepReport {
    std::optional<Step2Report> step2;
    Step3Report step3;
    std::optional<Step4Assessment> step4;
    double step5_distance = 0.0;
    bool step5_uses_oracle = false;
    std::optional<RetractionCheck> retraction;
};

nlohmann::json to_json(const Step2Report& r);
nlohmann::json to_json(const Step3Report& r);
nlohmann::json to_json(const Step4Assessment& r);
nlohmann::json to_json(const RetractionCheck& r);
nlohmann::json to_json(const ProofStepReport& r);

} // namespace viscfp

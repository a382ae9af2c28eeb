#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "test_support.hpp"
#include "viscfp/diagnostics.hpp"
#include "viscfp/schemes.hpp"

using namespace viscfp;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Operator half_plus(const Vector& b) { return make_affine(0.5 * Matrix::identity(b.dim()), b); }

SolveOptions tight() {
    SolveOptions o;
    o.outer_tol = 1e-10;
    return o;
}

EpsilonSchedule harmonic(std::size_t n_max, double p = 1.0) {
    return make_schedule({ScheduleKind::harmonic, p, {}, n_max});
}

} // namespace

TEST_CASE("make_schedule examples") {
    const auto h = harmonic(4);
    CHECK(h.values() == std::vector<double>{1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5});
    CHECK(harmonic(100, 0.5).eps(100) == Approx(1.0 / std::sqrt(101.0)).epsilon(1e-15));
    CHECK(harmonic(100, 0.5).eps(100) == Approx(0.0995).epsilon(1e-3));
    CHECK_ERROR_CODE(ErrorCode::NonDecreasingSchedule, make_schedule({ScheduleKind::explicit_list, 0, {0.5, 0.6}, 2}));
    CHECK_ERROR_CODE(ErrorCode::InvalidSchedule, make_schedule({ScheduleKind::explicit_list, 0, {1.0, 0.5}, 2}));
    CHECK_ERROR_CODE(ErrorCode::InvalidSchedule, make_schedule({ScheduleKind::explicit_list, 0, {}, 0}));
    CHECK_ERROR_CODE(ErrorCode::InvalidSchedule, make_schedule({ScheduleKind::harmonic, 0.0, {}, 5}));
    CHECK_ERROR_CODE(ErrorCode::InvalidSchedule, make_schedule({ScheduleKind::geometric, 1.0, {}, 5}));
    const auto g = make_schedule({ScheduleKind::geometric, 0.5, {}, 3});
    CHECK(g.values() == std::vector<double>{0.5, 0.25, 0.125});
    const auto a = make_anchored_schedule(3);
    CHECK(a.values() == std::vector<double>{1.0, 0.5, 1.0 / 3});
    try {
        make_schedule({ScheduleKind::explicit_list, 0, {0.5, 0.6}, 2});
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("schedule not strictly decreasing") != std::string::npos);
    }
}

TEST_CASE("property: generated schedules satisfy the schedule invariants") {
    oracle::Gen gen(31);
    for (int trial = 0; trial < 100; ++trial) {
        const bool geo = gen.integer(0, 1) == 1;
        const double param = geo ? gen.real(0.05, 0.95) : gen.real(0.1, 3.0);
        const auto n_max = static_cast<std::size_t>(gen.integer(1, 300));
        const auto s = make_schedule({geo ? ScheduleKind::geometric : ScheduleKind::harmonic, param, {}, n_max});
        REQUIRE(s.n_max() == n_max);
        for (std::size_t n = 1; n <= n_max; ++n) {
            CHECK(s.eps(n) > 0.0);
            CHECK(s.eps(n) < 1.0);
            if (n > 1) CHECK(s.eps(n) < s.eps(n - 1));
        }
    }
}

TEST_CASE("picard_solve examples") {
    const auto affine = picard_solve(half_plus(Vector{1}), Vector{0}, 1e-12);
    CHECK(affine.point[0] == Approx(2.0).epsilon(1e-12));
    CHECK(affine.converged);

    const auto constant = picard_solve(make_constant(Vector{3, 4}), Vector{0, 0}, 1e-12);
    CHECK(constant.point == Vector{3, 4});
    CHECK(constant.iterations == 1);

    const ContractionMap cosine = [](const Vector& x) { return Vector{std::cos(x[0])}; };
    const auto dottie = picard_solve(cosine, std::sin(1.0), Vector{0.5}, 1e-10);
    CHECK(std::abs(dottie.point[0] - oracle::dottie()) <= 1e-8);
    CHECK(oracle::dottie() == Approx(0.7390851332).epsilon(1e-10));

    CHECK_ERROR_CODE(ErrorCode::NotAContraction, picard_solve(cosine, 1.0, Vector{0.5}, 1e-10));
    CHECK_ERROR_CODE(ErrorCode::NotAContraction, picard_solve(make_identity(1), Vector{0.5}, 1e-10));
    CHECK_ERROR_CODE(ErrorCode::MaxIterExceeded, picard_solve(cosine, 0.99999, Vector{0.5}, 1e-15, 3));
}

TEST_CASE("property: picard error bound holds on random affine contractions") {
    oracle::Gen gen(8);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = gen.real(0.0, 0.95);
        const double b = gen.real(-5, 5);
        const auto g = make_affine(a * Matrix::identity(1), Vector{b});
        const double tol = 1e-9;
        const auto r = picard_solve(g, Vector{gen.real(-10, 10)}, tol);
        CHECK(std::abs(r.point[0] - b / (1 - a)) <= tol);
        CHECK(r.converged);
        CHECK(r.residual <= tol);
    }
}

TEST_CASE("implicit_step examples") {
    const auto scalar = implicit_step(half_plus(Vector{1}), make_negation(1), 0.5, Vector{0}, 1e-12);
    CHECK(scalar.point[0] == Approx(0.4).epsilon(1e-11));
    CHECK(scalar.q == Approx(0.75));
    CHECK(scalar.implicit_residual <= 1e-12);

    for (double eps : {0.1, 0.5, 0.9}) {
        const auto collapsed = implicit_step(half_plus(Vector{1}), make_identity(1), eps, Vector{0}, 1e-12);
        CHECK(collapsed.point[0] == Approx(2.0).epsilon(1e-11));
    }

    const auto ball = implicit_step(make_constant(Vector{2, 0}), make_ball_projection(Vector{0, 0}, 1), 0.25,
                                    Vector{0, 0}, 1e-12);
    CHECK(ball.point[0] == Approx(1.25).epsilon(1e-12));
    CHECK(std::abs(ball.point[1]) <= 1e-15);

    CHECK_ERROR_CODE(ErrorCode::InvalidSpec, implicit_step(half_plus(Vector{1}), make_negation(1), 0.0, Vector{0}, 1e-12));
    CHECK_ERROR_CODE(ErrorCode::DimensionMismatch, implicit_step(half_plus(Vector{1}), make_negation(2), 0.5, Vector{0}, 1e-12));
    try {
        implicit_step(make_constant(Vector{1}), make_negation(1), 1e-6, Vector{0}, 1e-14, 10);
        FAIL("expected MaxIterExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MaxIterExceeded);
        CHECK(std::string(e.what()).find("q = 0.999998999") != std::string::npos);
    }
}

TEST_CASE("viscosity solve: ball projection closed form") {
    const auto out = viscosity_implicit_solve(make_constant(Vector{2, 0}), make_ball_projection(Vector{0, 0}, 1),
                                              harmonic(200), tight());
    REQUIRE(out.trace.steps.size() == 200);
    for (const auto& rec : out.trace.steps) {
        CHECK(std::abs(rec.point[0] - oracle::ball_iterate(rec.eps)) <= 1e-8);
        CHECK(std::abs(rec.point[1]) <= 1e-8);
    }
    CHECK(distance(out.result.point, Vector{1, 0}) == Approx(1.0 / 201).epsilon(1e-8));
    CHECK(out.verdict == Verdict::settling);
    CHECK(out.trace.metadata.schedule_kind == "harmonic");
}

TEST_CASE("viscosity solve: identity with constant f stops early") {
    const auto out = viscosity_implicit_solve(make_constant(Vector{3, -1}), make_identity(2), harmonic(200), tight());
    for (const auto& rec : out.trace.steps) CHECK(distance(rec.point, Vector{3, -1}) <= 1e-10);
    CHECK(out.trace.steps.size() <= 2);
    CHECK(out.verdict == Verdict::converged);
    CHECK(out.result.converged);
}

TEST_CASE("viscosity solve: rotation matches the per-step 2x2 oracle") {
    for (double theta : {kPi / 2, 1.0}) {
        const auto out = viscosity_implicit_solve(half_plus(Vector{1, 0}), make_rotation(2, 0, 1, theta),
                                                  harmonic(200), tight());
        for (const auto& rec : out.trace.steps) {
            const auto [x, y] = oracle::rotation_step(rec.eps, theta);
            CHECK(std::abs(rec.point[0] - x) <= 1e-8);
            CHECK(std::abs(rec.point[1] - y) <= 1e-8);
        }
        CHECK(norm(out.result.point) <= 1e-2);
    }
}

TEST_CASE("viscosity solve: family round robin and translation diagnosis") {
    const auto flow = make_rotation_flow({1, 2}, {0, 0.5, 1});
    const auto out =
        viscosity_implicit_solve(half_plus(Vector{1, 0, 0, 1}), flow, harmonic(200), tight(), {0.5, 1.0});
    CHECK(norm(out.result.point) <= 2e-2);
    CHECK(out.verdict != Verdict::no_common_fixed_point);

    const auto shift = make_affine(Matrix::identity(2), Vector{1, 0});
    const auto bad = viscosity_implicit_solve(make_constant(Vector{0, 0}), shift, harmonic(200), tight());
    CHECK(bad.verdict == Verdict::no_common_fixed_point);
    CHECK_FALSE(bad.result.converged);

    CHECK_ERROR_CODE(ErrorCode::NotNonexpansive, viscosity_implicit_solve(make_constant(Vector{0, 0}), make_linear(2.0 * Matrix::identity(2)),
                                              harmonic(10), tight()));
    CHECK_ERROR_CODE(ErrorCode::NotAContraction, viscosity_implicit_solve(make_identity(2), make_identity(2), harmonic(10), tight()));
}

TEST_CASE("anchored solve examples") {
    const auto scalar = anchored_implicit_solve(Vector{1}, make_negation(1), 200, tight());
    REQUIRE(scalar.trace.steps.size() == 200);
    for (const auto& rec : scalar.trace.steps) CHECK(std::abs(rec.point[0] - oracle::anchored_scalar_iterate(rec.n)) <= 1e-10);
    CHECK(scalar.trace.metadata.schedule_kind == "anchored");

    const auto ident = anchored_implicit_solve(Vector{2, -3}, make_identity(2), 50, tight());
    for (const auto& rec : ident.trace.steps) CHECK(rec.point == Vector{2, -3});

    const auto ball = anchored_implicit_solve(Vector{3, 0}, make_ball_projection(Vector{0, 0}, 1), 200, tight());
    for (const auto& rec : ball.trace.steps) {
        // on the ray: s = 3 eps + (1 - eps) * 1
        const double expected = 1.0 + 2.0 * rec.eps;
        CHECK(std::abs(rec.point[0] - expected) <= 1e-8);
    }
    CHECK(distance(ball.result.point, Vector{1, 0}) <= 1.1e-2);
}

TEST_CASE("retraction_eval examples") {
    const auto scalar = retraction_eval(make_negation(1), {Vector{1}, Vector{-2}, Vector{5}}, tight());
    REQUIRE(scalar.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(scalar[i].limit.has_value());
        CHECK(std::abs((*scalar[i].limit)[0]) <= std::abs(scalar[i].anchor[0]) / 399 + 1e-10);
    }
    const auto ident = retraction_eval(make_identity(2), {Vector{1, 2}, Vector{-4, 0}}, tight());
    CHECK(*ident[0].limit == Vector{1, 2});
    CHECK(*ident[1].limit == Vector{-4, 0});

    const auto ball =
        retraction_eval(make_ball_projection(Vector{0, 0}, 1), {Vector{3, 0}, Vector{0, -2}}, tight(), 2000);
    CHECK(distance(*ball[0].limit, Vector{1, 0}) <= 1.1e-3);
    CHECK(distance(*ball[1].limit, Vector{0, -1}) <= 1.1e-3);

    SolveOptions starved = tight();
    starved.tolerance.max_iter = 2;
    const auto failed = retraction_eval(make_negation(1), {Vector{1}}, starved);
    CHECK_FALSE(failed[0].limit.has_value());
    CHECK(failed[0].error.find("MaxIterExceeded") != std::string::npos);
}

TEST_CASE("property: inner contraction and implicit residual bounds") {
    struct Case {
        Operator f;
        Operator t;
    };
    const std::vector<Case> cases{
        {make_constant(Vector{2, 0}), make_ball_projection(Vector{0, 0}, 1)},
        {half_plus(Vector{1, 0}), make_rotation(2, 0, 1, 1.0)},
        {make_constant(Vector{1, 1}), make_negation(2)},
        {make_affine(0.9 * *make_rotation(2, 0, 1, 0.3).linear_matrix(), Vector{1, 1}), make_box_projection(Vector{-1, -1}, Vector{0.5, 0.5})},
    };
    const auto schedule = harmonic(200);
    for (const auto& c : cases) {
        const double alpha = contraction_modulus(c.f);
        std::size_t violations = 0, events = 0;
        const InnerStepObserver obs = [&](const InnerStepEvent& e) {
            ++events;
            const double q = 1.0 - schedule.eps(e.outer_n) * (1.0 - alpha);
            if (e.k > 1 && e.step > q * e.previous_step + 1e-12) ++violations;
        };
        const auto out = viscosity_implicit_solve(c.f, c.t, schedule, tight(), obs);
        CHECK(events > 0);
        CHECK(violations == 0);
        for (const auto& rec : out.trace.steps) CHECK(rec.implicit_residual <= rec.inner_tol);
    }
}

TEST_CASE("property: warm start does not change the limit") {
    const auto f = half_plus(Vector{1, 0});
    const auto t = make_rotation(2, 0, 1, 1.0);
    SolveOptions warm = tight(), cold = tight();
    cold.warm_start = false;
    const auto a = viscosity_implicit_solve(f, t, harmonic(200), warm);
    const auto b = viscosity_implicit_solve(f, t, harmonic(200), cold);
    CHECK(distance(a.result.point, b.result.point) <= 10 * warm.outer_tol);
    CHECK(a.trace.total_inner_iterations() < b.trace.total_inner_iterations());
}

TEST_CASE("property: solves are deterministic") {
    const auto f = half_plus(Vector{1, 0});
    const auto t = make_averaged(make_rotation(2, 0, 1, 2.0), 0.5);
    const auto a = viscosity_implicit_solve(f, t, harmonic(100), tight());
    const auto b = viscosity_implicit_solve(f, t, harmonic(100), tight());
    CHECK(a.trace == b.trace);
}

TEST_CASE("solve options validation") {
    SolveOptions o;
    o.outer_tol = 0.0;
    CHECK_ERROR_CODE(ErrorCode::InvalidSpec, o.validate());
    o = SolveOptions{};
    o.inner_tol = InnerTolRule::coupled(0.0);
    CHECK_ERROR_CODE(ErrorCode::InvalidSpec, o.validate());
    CHECK(InnerTolRule::coupled(1.0).delta(0.5, 1e-8) == 1e-8);
    CHECK(InnerTolRule::coupled(1.0).delta(1e-5, 1e-8) == Approx(1e-10));
    CHECK(InnerTolRule::fixed(1e-3).delta(0.5, 1e-8) == 1e-3);
}

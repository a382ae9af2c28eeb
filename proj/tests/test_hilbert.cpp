#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "test_support.hpp"
#include "viscfp/hilbert.hpp"
#include "viscfp/matrix.hpp"

using namespace viscfp;
using doctest::Approx;

TEST_CASE("vector construction validates dimension and finiteness") {
    CHECK(Vector({1.0, 2.0}).dim() == 2);
    CHECK_ERROR_CODE(ErrorCode::InvalidVector, Vector(std::vector<double>{}));
    CHECK_ERROR_CODE(ErrorCode::InvalidVector, Vector({1.0, std::numeric_limits<double>::quiet_NaN()}));
    CHECK_ERROR_CODE(ErrorCode::InvalidVector, Vector({std::numeric_limits<double>::infinity()}));
    CHECK(Vector::basis(3, 2) == Vector({0.0, 0.0, 1.0}));
    CHECK(Vector::zeros(2) == Vector({0.0, 0.0}));
    CHECK(Vector::ones(2) == Vector({1.0, 1.0}));
    CHECK_ERROR_CODE(ErrorCode::DimensionMismatch, Vector::basis(2, 2));
}

TEST_CASE("inner product examples") {
    CHECK(inner(Vector{1, 0}, Vector{0, 1}) == 0.0);
    CHECK(inner(Vector{3, 4}, Vector{3, 4}) == 25.0);
    CHECK(inner(Vector{1, 2, 3}, Vector{4, 5, 6}) == 32.0);
    CHECK_ERROR_CODE(ErrorCode::DimensionMismatch, inner(Vector{1, 2}, Vector{1, 2, 3}));
}

TEST_CASE("norm examples") {
    CHECK(norm(Vector{0, 0, 0}) == 0.0);
    CHECK(norm(Vector{3, 4}) == 5.0);
    CHECK(norm(Vector{1, 1, 1, 1}) == 2.0);
    CHECK(distance(Vector{1, 1}, Vector{4, 5}) == 5.0);
}

TEST_CASE("convex_combine examples") {
    CHECK(convex_combine(0.5, Vector{2, 0}, 0.5, Vector{0, 2}) == Vector{1, 1});
    const Vector u{3, -7, 2};
    CHECK(convex_combine(1.0, u, 0.0, Vector{9, 9, 9}) == u);
    CHECK(convex_combine(0.25, Vector{4, 8}, 0.75, Vector{0, 0}) == Vector{1, 2});
    CHECK_ERROR_CODE(ErrorCode::DimensionMismatch, (convex_combine(0.5, Vector{1}, 0.5, Vector{1, 2})));
}

TEST_CASE("vector arithmetic") {
    CHECK(Vector{1, 2} + Vector{3, 4} == Vector{4, 6});
    CHECK(Vector{1, 2} - Vector{3, 4} == Vector{-2, -2});
    CHECK(-Vector{1, -2} == Vector{-1, 2});
    CHECK(2.0 * Vector{1, -2} == Vector{2, -4});
    CHECK_ERROR_CODE(ErrorCode::DimensionMismatch, Vector{1} + Vector{1, 2});
}

TEST_CASE("property: Cauchy-Schwarz, parallelogram law and convex norm bound") {
    oracle::Gen gen(7);
    const TolerancePolicy tol;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t d = static_cast<std::size_t>(gen.integer(1, 12));
        const Vector u(gen.vec(d)), v(gen.vec(d));
        CHECK(std::abs(inner(u, v)) <= norm(u) * norm(v) + tol.abs_tol);

        const double lhs = std::pow(norm(u + v), 2) + std::pow(norm(u - v), 2);
        const double rhs = 2 * std::pow(norm(u), 2) + 2 * std::pow(norm(v), 2);
        CHECK(std::abs(lhs - rhs) <= tol.rel_tol * std::max(1.0, rhs));

        const double lambda = gen.real(0.0, 1.0);
        CHECK(norm(convex_combine(lambda, u, 1 - lambda, v)) <=
              lambda * norm(u) + (1 - lambda) * norm(v) + tol.abs_tol);
    }
}

TEST_CASE("tolerance policy validation") {
    TolerancePolicy p;
    CHECK(p.abs_tol == 1e-10);
    CHECK(p.rel_tol == 1e-8);
    CHECK(p.max_iter == 10000);
    CHECK_NOTHROW(p.validate());
    p.abs_tol = 0.0;
    CHECK_ERROR_CODE(ErrorCode::InvalidSpec, p.validate());
    p = TolerancePolicy{};
    p.max_iter = 0;
    CHECK_ERROR_CODE(ErrorCode::InvalidSpec, p.validate());
}

TEST_CASE("sampler is deterministic and respects its ranges") {
    Sampler a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 200; ++i) {
        const Vector x = a.in_ball(3, 2.5);
        CHECK(x == b.in_ball(3, 2.5));
        CHECK(norm(x) <= 2.5 + 1e-12);
        differs = differs || !(x == c.in_ball(3, 2.5));
        const Vector u = a.unit(4);
        b.unit(4);
        CHECK(norm(u) == Approx(1.0).epsilon(1e-12));
    }
    CHECK(differs);
}

TEST_CASE("matrix basics") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 2);
    CHECK_FALSE(a.square());
    CHECK(a.transpose().to_rows() == std::vector<std::vector<double>>{{1, 3, 5}, {2, 4, 6}});
    CHECK(a * Vector{1, -1} == Vector{-1, -1, -1});
    CHECK((a.transpose() * a).to_rows() == std::vector<std::vector<double>>{{35, 44}, {44, 56}});
    CHECK(a.frobenius_norm() == Approx(std::sqrt(91.0)));
    CHECK_ERROR_CODE(ErrorCode::InvalidSpec, (Matrix::from_rows({{1, 2}, {3}})));
    CHECK_ERROR_CODE(ErrorCode::DimensionMismatch, a * Vector{1, 2, 3});
    const std::vector<double> diag{2.0, 5.0};
    CHECK(Matrix::diagonal(diag) * Vector{1, 1} == Vector{2, 5});
}

TEST_CASE("null space against the brute-force rank oracle") {
    oracle::Gen gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t r = static_cast<std::size_t>(gen.integer(1, 4));
        const std::size_t c = static_cast<std::size_t>(gen.integer(1, 4));
        oracle::Mat m(r, std::vector<double>(c));
        // small integers make rank deficiency common and exactly decidable
        for (auto& row : m)
            for (auto& x : row) x = gen.integer(-1, 1);
        const std::size_t rank = oracle::rank_by_minors(m, 1e-9);
        const Matrix a = Matrix::from_rows(m);
        const auto basis = null_space(a, 1e-10);
        REQUIRE(basis.size() == c - rank);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            CHECK(norm(a * basis[i]) <= 1e-10);
            for (std::size_t j = 0; j < basis.size(); ++j)
                CHECK(inner(basis[i], basis[j]) == Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("stack_rows concatenates blocks") {
    const std::vector<Matrix> blocks{Matrix::identity(2), 2.0 * Matrix::identity(2)};
    const Matrix s = stack_rows(blocks);
    CHECK(s.rows() == 4);
    CHECK(s(3, 1) == 2.0);
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace viscfp {

/// Element of the finite-dimensional real Hilbert space R^d.
///
/// Immutable value: dim >= 1 and every coordinate finite, checked on
/// construction. Arithmetic returns fresh vectors.
class Vector {
public:
    explicit Vector(std::vector<double> coords);
    Vector(std::initializer_list<double> coords);

    static Vector zeros(std::size_t dim);
    static Vector ones(std::size_t dim);
    /// Unit coordinate vector e_k (0-based k).
    static Vector basis(std::size_t dim, std::size_t k);

    [[nodiscard]] std::size_t dim() const noexcept { return coords_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return coords_[i]; }
    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return coords_; }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> coords_;
};

Vector operator+(const Vector& u, const Vector& v);
Vector operator-(const Vector& u, const Vector& v);
Vector operator-(const Vector& u);
Vector operator*(double a, const Vector& u);

/// Euclidean pairing sum u_i v_i. Throws DimensionMismatch.
double inner(const Vector& u, const Vector& v);
double norm(const Vector& u);
double distance(const Vector& u, const Vector& v);
/// a*u + b*v coordinatewise. Throws DimensionMismatch.
Vector convex_combine(double a, const Vector& u, double b, const Vector& v);

// Span kernels used on hot paths (no allocation, no validation beyond sizes).
double inner(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);
double distance(std::span<const double> u, std::span<const double> v);

void require_same_dim(std::size_t a, std::size_t b, const char* what);

struct TolerancePolicy {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_iter = 10'000;

    /// Throws InvalidSpec unless abs_tol > 0, rel_tol >= 0 and max_iter >= 1.
    void validate() const;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Deterministic random source for the sampling-based checks.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed = kDefaultSeed) : engine_(seed) {}

    double uniform(double lo, double hi);
    std::size_t index(std::size_t n);
    double gaussian();
    Vector unit(std::size_t dim);
    /// Uniform draw from the closed ball of the given radius about the origin.
    Vector in_ball(std::size_t dim, double radius);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace viscfp

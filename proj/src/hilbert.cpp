#include "viscfp/hilbert.hpp"

#include <cmath>

#include <fmt/format.h>

#include "viscfp/error.hpp"

namespace viscfp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidVector: return "InvalidVector";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NotLinear: return "NotLinear";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotAContraction: return "NotAContraction";
    case ErrorCode::NotNonexpansive: return "NotNonexpansive";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::NonDecreasingSchedule: return "NonDecreasingSchedule";
    case ErrorCode::NotAFixedPoint: return "NotAFixedPoint";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)), code_(code) {}

Vector::Vector(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) {
        throw Error(ErrorCode::InvalidVector, "vector dimension must be at least 1");
    }
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (!std::isfinite(coords_[i])) {
            throw Error(ErrorCode::InvalidVector, fmt::format("coordinate {} is not finite", i));
        }
    }
}

Vector::Vector(std::initializer_list<double> coords) : Vector(std::vector<double>(coords)) {}

Vector Vector::zeros(std::size_t dim) { return Vector(std::vector<double>(dim, 0.0)); }

Vector Vector::ones(std::size_t dim) { return Vector(std::vector<double>(dim, 1.0)); }

Vector Vector::basis(std::size_t dim, std::size_t k) {
    if (k >= dim) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("basis index {} out of range for dim {}", k, dim));
    }
    std::vector<double> c(dim, 0.0);
    c[k] = 1.0;
    return Vector(std::move(c));
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("{}: dimensions {} and {} differ", what, a, b));
    }
}

Vector operator+(const Vector& u, const Vector& v) { return convex_combine(1.0, u, 1.0, v); }

Vector operator-(const Vector& u, const Vector& v) { return convex_combine(1.0, u, -1.0, v); }

Vector operator-(const Vector& u) {
    std::vector<double> c(u.values());
    for (auto& x : c) x = -x;
    return Vector(std::move(c));
}

Vector operator*(double a, const Vector& u) {
    std::vector<double> c(u.values());
    for (auto& x : c) x *= a;
    return Vector(std::move(c));
}

double inner(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(std::span<const double> u) { return std::sqrt(inner(u, u)); }

double distance(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double inner(const Vector& u, const Vector& v) {
    require_same_dim(u.dim(), v.dim(), "inner");
    return inner(u.coords(), v.coords());
}

double norm(const Vector& u) { return norm(u.coords()); }

double distance(const Vector& u, const Vector& v) {
    require_same_dim(u.dim(), v.dim(), "distance");
    return distance(u.coords(), v.coords());
}

Vector convex_combine(double a, const Vector& u, double b, const Vector& v) {
    require_same_dim(u.dim(), v.dim(), "convex_combine");
    std::vector<double> c(u.dim());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a * u[i] + b * v[i];
    return Vector(std::move(c));
}

void TolerancePolicy::validate() const {
    if (!(abs_tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "abs_tol must be positive");
    if (!(rel_tol >= 0.0)) throw Error(ErrorCode::InvalidSpec, "rel_tol must be nonnegative");
    if (max_iter < 1) throw Error(ErrorCode::InvalidSpec, "max_iter must be at least 1");
}

double Sampler::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::size_t Sampler::index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

double Sampler::gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

Vector Sampler::unit(std::size_t dim) {
    std::vector<double> c(dim);
    double n = 0.0;
    do {
        for (auto& x : c) x = gaussian();
        n = norm(std::span<const double>(c));
    } while (n < 1e-12);
    for (auto& x : c) x /= n;
    return Vector(std::move(c));
}

Vector Sampler::in_ball(std::size_t dim, double radius) {
    const Vector direction = unit(dim);
    const double r = radius * std::pow(uniform(0.0, 1.0), 1.0 / static_cast<double>(dim));
    return r * direction;
}

} // namespace viscfp

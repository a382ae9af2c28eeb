#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "viscfp/hilbert.hpp"
#include "viscfp/matrix.hpp"

namespace viscfp {

class Operator;

/// Lipschitz class an operator is known (analytically) to belong to.
///
/// Nonexpansive means ||Tx - Ty|| <= ||x - y||; the distance-preserving
/// variant is the separate `isometry` class.
struct LipschitzClass {
    enum class Tag { contraction, nonexpansive, isometry, unknown };

    Tag tag = Tag::unknown;
    double alpha = 0.0; // meaningful for contraction only

    static LipschitzClass contraction(double alpha);
    static LipschitzClass nonexpansive() { return {Tag::nonexpansive, 1.0}; }
    static LipschitzClass isometry() { return {Tag::isometry, 1.0}; }
    static LipschitzClass unknown() { return {Tag::unknown, 0.0}; }

    /// Known Lipschitz bound, or nullopt for `unknown`.
    [[nodiscard]] std::optional<double> bound() const;
    [[nodiscard]] bool is_contraction() const noexcept { return tag == Tag::contraction; }
    /// Contractions, nonexpansive maps and isometries all qualify.
    [[nodiscard]] bool is_nonexpansive() const noexcept { return tag != Tag::unknown; }

    friend bool operator==(const LipschitzClass&, const LipschitzClass&) = default;
};

std::string to_string(const LipschitzClass& c);

// Operator descriptions accepted by make_operator. Nested parts are already
// built operators.
struct LinearSpec {
    Matrix matrix;
};
struct AffineSpec {
    Matrix matrix;
    Vector offset;
};
struct BallProjectionSpec {
    Vector center;
    double radius;
};
struct BoxProjectionSpec {
    Vector lower;
    Vector upper;
};
/// Rotation by `angle` radians in the coordinate plane (first, second).
struct RotationSpec {
    std::size_t dim;
    std::size_t first;
    std::size_t second;
    double angle;
};
/// x -> (1 - lambda) x + lambda inner(x).
struct AveragedSpec {
    std::shared_ptr<const Operator> inner;
    double lambda;
};
struct ConstantSpec {
    Vector value;
};
struct NegationSpec {
    std::size_t dim;
};
struct IdentitySpec {
    std::size_t dim;
};
/// Applies the parts in sequence order, first element first.
struct CompositeSpec {
    std::vector<Operator> parts;
};

using OperatorSpec = std::variant<LinearSpec, AffineSpec, BallProjectionSpec, BoxProjectionSpec, RotationSpec,
                                  AveragedSpec, ConstantSpec, NegationSpec, IdentitySpec, CompositeSpec>;

enum class OperatorKind { linear, affine, projection_ball, projection_box, rotation, averaged, constant, negation,
                          identity, composite };

std::string_view to_string(OperatorKind kind) noexcept;

/// Self-map of R^d with a declared Lipschitz class. Immutable and cheap to
/// copy (shared representation).
class Operator {
public:
    [[nodiscard]] OperatorKind kind() const noexcept;
    [[nodiscard]] std::size_t dim() const noexcept;
    [[nodiscard]] const LipschitzClass& declared_class() const noexcept;
    [[nodiscard]] const OperatorSpec& spec() const noexcept;

    /// Matrix of the map when it is linear (linear, affine with zero offset,
    /// rotation, negation, identity, and averages/composites of those).
    [[nodiscard]] std::optional<Matrix> linear_matrix() const;

    /// out = T(in). Sizes must equal dim(); `out` must not alias `in`.
    void apply_into(std::span<const double> in, std::span<double> out) const;

    [[nodiscard]] std::string describe() const;

private:
    struct Impl;
    explicit Operator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    friend Operator make_operator(const OperatorSpec& spec);

    std::shared_ptr<const Impl> impl_;
};

/// Validates the description and assigns a conservative declared class:
/// projections, averages of nonexpansive maps and negation are nonexpansive;
/// rotations and the identity are isometries; constants are contraction(0);
/// linear/affine maps whose matrix norm is below one are contraction(norm);
/// composites multiply bounds; everything else is unknown.
/// Throws InvalidSpec.
Operator make_operator(const OperatorSpec& spec);

// Shorthands for the catalog.
Operator make_identity(std::size_t dim);
Operator make_negation(std::size_t dim);
Operator make_constant(const Vector& value);
Operator make_linear(const Matrix& m);
Operator make_affine(const Matrix& m, const Vector& offset);
Operator make_ball_projection(const Vector& center, double radius);
Operator make_box_projection(const Vector& lower, const Vector& upper);
Operator make_rotation(std::size_t dim, std::size_t first, std::size_t second, double angle);
Operator make_averaged(const Operator& inner, double lambda);
Operator make_composite(std::vector<Operator> parts);

/// T(x). Throws DimensionMismatch.
Vector apply(const Operator& t, const Vector& x);

/// Largest sampled ratio ||T x - T y|| / ||x - y|| over pairs drawn from the
/// ball of the given radius. Deterministic for a given seed.
double estimate_lipschitz(const Operator& t, std::size_t n_samples, double radius,
                          std::uint64_t seed = kDefaultSeed);

struct NonexpansiveWitness {
    Vector x;
    Vector y;
    double ratio;
};

struct NonexpansiveCheck {
    bool pass = true;
    double max_ratio = 0.0;
    std::optional<NonexpansiveWitness> witness; // first violating pair
};

NonexpansiveCheck check_nonexpansive(const Operator& t, std::size_t n_samples, double tol, double radius = 10.0,
                                     std::uint64_t seed = kDefaultSeed);

struct OperatorNorm {
    double sigma = 0.0;
    Vector vector = Vector::basis(1, 0);
    std::size_t iterations = 0;
};

/// Largest singular value and a right singular unit vector.
///
/// Power iteration on S^T S from the normalized all-ones vector (seeded
/// random restart if that start lies in the null space). Stops once
/// successive Rayleigh quotients differ by at most tol * max(1, quotient)
/// and the iterate itself has settled to within tol.
/// Throws NotLinear, NoConvergence.
OperatorNorm operator_norm(const Operator& s, double tol, std::size_t max_iter = TolerancePolicy{}.max_iter,
                           std::uint64_t seed = kDefaultSeed);
OperatorNorm operator_norm(const Matrix& m, double tol, std::size_t max_iter = TolerancePolicy{}.max_iter,
                           std::uint64_t seed = kDefaultSeed);

/// Checkable witness that ||S x|| = ||S|| for a unit vector x.
struct NACertificate {
    double operator_norm = 0.0;
    Vector attaining_vector = Vector::basis(1, 0);
    double residual = 0.0;
    std::size_t iterations = 0;
};

NACertificate certify_norm_attainable(const Operator& s, double tol,
                                      std::size_t max_iter = TolerancePolicy{}.max_iter);
NACertificate certify_norm_attainable(const Matrix& m, double tol,
                                      std::size_t max_iter = TolerancePolicy{}.max_iter);

struct FixedPointSet {
    std::vector<Vector> basis; // orthonormal, spans Fix(T)
    double tol_used = 0.0;
};

/// Orthonormal basis of ker(I - T) for a linear T. Throws NotLinear.
FixedPointSet fixed_points_linear(const Operator& t, double tol);

} // namespace viscfp

#include "viscfp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include <fmt/format.h>

#include "viscfp/error.hpp"

namespace viscfp {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

LipschitzClass LipschitzClass::contraction(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidSpec, fmt::format("contraction modulus {} outside [0, 1)", alpha));
    }
    return {Tag::contraction, alpha};
}

std::optional<double> LipschitzClass::bound() const {
    switch (tag) {
    case Tag::contraction: return alpha;
    case Tag::nonexpansive:
    case Tag::isometry: return 1.0;
    case Tag::unknown: return std::nullopt;
    }
    return std::nullopt;
}

std::string to_string(const LipschitzClass& c) {
    switch (c.tag) {
    case LipschitzClass::Tag::contraction: return fmt::format("contraction({})", c.alpha);
    case LipschitzClass::Tag::nonexpansive: return "nonexpansive";
    case LipschitzClass::Tag::isometry: return "isometry";
    case LipschitzClass::Tag::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(OperatorKind kind) noexcept {
    switch (kind) {
    case OperatorKind::linear: return "linear";
    case OperatorKind::affine: return "affine";
    case OperatorKind::projection_ball: return "projection_ball";
    case OperatorKind::projection_box: return "projection_box";
    case OperatorKind::rotation: return "rotation";
    case OperatorKind::averaged: return "averaged";
    case OperatorKind::constant: return "constant";
    case OperatorKind::negation: return "negation";
    case OperatorKind::identity: return "identity";
    case OperatorKind::composite: return "composite";
    }
    return "unknown";
}

struct Operator::Impl {
    OperatorSpec spec;
    std::size_t dim = 0;
    LipschitzClass cls;
    double cos_angle = 1.0;
    double sin_angle = 0.0;
};

OperatorKind Operator::kind() const noexcept { return static_cast<OperatorKind>(impl_->spec.index()); }

std::size_t Operator::dim() const noexcept { return impl_->dim; }

const LipschitzClass& Operator::declared_class() const noexcept { return impl_->cls; }

const OperatorSpec& Operator::spec() const noexcept { return impl_->spec; }

namespace {

LipschitzClass class_from_matrix_norm(const Matrix& m) {
    try {
        const double sigma = operator_norm(m, 1e-13).sigma;
        if (sigma < 1.0) return LipschitzClass::contraction(sigma);
    } catch (const Error&) {
        // an unsettled power iteration leaves the class undetermined
    }
    return LipschitzClass::unknown();
}

LipschitzClass compose_classes(const std::vector<Operator>& parts) {
    bool all_isometry = true;
    double product = 1.0;
    for (const auto& p : parts) {
        const auto& c = p.declared_class();
        if (c.tag == LipschitzClass::Tag::unknown) return LipschitzClass::unknown();
        all_isometry = all_isometry && c.tag == LipschitzClass::Tag::isometry;
        product *= *c.bound();
    }
    if (all_isometry) return LipschitzClass::isometry();
    if (product < 1.0) return LipschitzClass::contraction(product);
    return LipschitzClass::nonexpansive();
}

void require_square(const Matrix& m, const char* what) {
    if (!m.square()) {
        throw Error(ErrorCode::InvalidSpec, fmt::format("{} matrix must be square, got {}x{}", what, m.rows(), m.cols()));
    }
}

void require_dim(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw Error(ErrorCode::InvalidSpec, fmt::format("{}: dimension {} does not match {}", what, got, expected));
    }
}

} // namespace

Operator make_operator(const OperatorSpec& spec) {
    auto impl = std::make_shared<Operator::Impl>();
    impl->spec = spec;
    std::visit(
        overloaded{
            [&](const LinearSpec& s) {
                require_square(s.matrix, "linear");
                impl->dim = s.matrix.rows();
                impl->cls = class_from_matrix_norm(s.matrix);
            },
            [&](const AffineSpec& s) {
                require_square(s.matrix, "affine");
                require_dim(s.matrix.rows(), s.offset.dim(), "affine offset");
                impl->dim = s.matrix.rows();
                impl->cls = class_from_matrix_norm(s.matrix);
            },
            [&](const BallProjectionSpec& s) {
                if (!(s.radius > 0.0) || !std::isfinite(s.radius)) {
                    throw Error(ErrorCode::InvalidSpec, fmt::format("ball radius must be positive, got {}", s.radius));
                }
                impl->dim = s.center.dim();
                impl->cls = LipschitzClass::nonexpansive();
            },
            [&](const BoxProjectionSpec& s) {
                require_dim(s.lower.dim(), s.upper.dim(), "box bounds");
                for (std::size_t i = 0; i < s.lower.dim(); ++i) {
                    if (s.lower[i] > s.upper[i]) {
                        throw Error(ErrorCode::InvalidSpec, fmt::format("box lower bound exceeds upper at {}", i));
                    }
                }
                impl->dim = s.lower.dim();
                impl->cls = LipschitzClass::nonexpansive();
            },
            [&](const RotationSpec& s) {
                if (s.dim < 2 || s.first >= s.dim || s.second >= s.dim || s.first == s.second) {
                    throw Error(ErrorCode::InvalidSpec,
                                fmt::format("rotation plane ({}, {}) invalid for dim {}", s.first, s.second, s.dim));
                }
                if (!std::isfinite(s.angle)) throw Error(ErrorCode::InvalidSpec, "rotation angle must be finite");
                impl->dim = s.dim;
                impl->cos_angle = std::cos(s.angle);
                impl->sin_angle = std::sin(s.angle);
                impl->cls = LipschitzClass::isometry();
            },
            [&](const AveragedSpec& s) {
                if (!s.inner) throw Error(ErrorCode::InvalidSpec, "averaged operator needs an inner operator");
                if (!(s.lambda > 0.0 && s.lambda <= 1.0)) {
                    throw Error(ErrorCode::InvalidSpec, fmt::format("averaging lambda {} outside (0, 1]", s.lambda));
                }
                impl->dim = s.inner->dim();
                const auto& c = s.inner->declared_class();
                if (c.tag == LipschitzClass::Tag::contraction) {
                    impl->cls = LipschitzClass::contraction(1.0 - s.lambda + s.lambda * c.alpha);
                } else if (c.is_nonexpansive()) {
                    impl->cls = LipschitzClass::nonexpansive();
                } else {
                    impl->cls = LipschitzClass::unknown();
                }
            },
            [&](const ConstantSpec& s) {
                impl->dim = s.value.dim();
                impl->cls = LipschitzClass::contraction(0.0);
            },
            [&](const NegationSpec& s) {
                if (s.dim < 1) throw Error(ErrorCode::InvalidSpec, "negation dimension must be at least 1");
                impl->dim = s.dim;
                impl->cls = LipschitzClass::nonexpansive();
            },
            [&](const IdentitySpec& s) {
                if (s.dim < 1) throw Error(ErrorCode::InvalidSpec, "identity dimension must be at least 1");
                impl->dim = s.dim;
                impl->cls = LipschitzClass::isometry();
            },
            [&](const CompositeSpec& s) {
                if (s.parts.empty()) throw Error(ErrorCode::InvalidSpec, "composite needs at least one part");
                impl->dim = s.parts.front().dim();
                for (const auto& p : s.parts) require_dim(impl->dim, p.dim(), "composite part");
                impl->cls = compose_classes(s.parts);
            },
        },
        spec);
    return Operator(std::move(impl));
}

Operator make_identity(std::size_t dim) { return make_operator(IdentitySpec{dim}); }
Operator make_negation(std::size_t dim) { return make_operator(NegationSpec{dim}); }
Operator make_constant(const Vector& value) { return make_operator(ConstantSpec{value}); }
Operator make_linear(const Matrix& m) { return make_operator(LinearSpec{m}); }
Operator make_affine(const Matrix& m, const Vector& offset) { return make_operator(AffineSpec{m, offset}); }
Operator make_ball_projection(const Vector& center, double radius) {
    return make_operator(BallProjectionSpec{center, radius});
}
Operator make_box_projection(const Vector& lower, const Vector& upper) {
    return make_operator(BoxProjectionSpec{lower, upper});
}
Operator make_rotation(std::size_t dim, std::size_t first, std::size_t second, double angle) {
    return make_operator(RotationSpec{dim, first, second, angle});
}
Operator make_averaged(const Operator& inner, double lambda) {
    return make_operator(AveragedSpec{std::make_shared<const Operator>(inner), lambda});
}
Operator make_composite(std::vector<Operator> parts) { return make_operator(CompositeSpec{std::move(parts)}); }

void Operator::apply_into(std::span<const double> in, std::span<double> out) const {
    const std::size_t d = impl_->dim;
    std::visit(
        overloaded{
            [&](const LinearSpec& s) { multiply_into(s.matrix, in, out); },
            [&](const AffineSpec& s) {
                multiply_into(s.matrix, in, out);
                for (std::size_t i = 0; i < d; ++i) out[i] += s.offset[i];
            },
            [&](const BallProjectionSpec& s) {
                const auto c = s.center.coords();
                const double dist = distance(in, c);
                if (dist <= s.radius) {
                    std::copy(in.begin(), in.end(), out.begin());
                    return;
                }
                const double scale = s.radius / dist;
                for (std::size_t i = 0; i < d; ++i) out[i] = c[i] + (in[i] - c[i]) * scale;
            },
            [&](const BoxProjectionSpec& s) {
                for (std::size_t i = 0; i < d; ++i) out[i] = std::clamp(in[i], s.lower[i], s.upper[i]);
            },
            [&](const RotationSpec& s) {
                std::copy(in.begin(), in.end(), out.begin());
                const double a = in[s.first];
                const double b = in[s.second];
                out[s.first] = impl_->cos_angle * a - impl_->sin_angle * b;
                out[s.second] = impl_->sin_angle * a + impl_->cos_angle * b;
            },
            [&](const AveragedSpec& s) {
                s.inner->apply_into(in, out);
                for (std::size_t i = 0; i < d; ++i) out[i] = (1.0 - s.lambda) * in[i] + s.lambda * out[i];
            },
            [&](const ConstantSpec& s) { std::copy(s.value.coords().begin(), s.value.coords().end(), out.begin()); },
            [&](const NegationSpec&) {
                for (std::size_t i = 0; i < d; ++i) out[i] = -in[i];
            },
            [&](const IdentitySpec&) { std::copy(in.begin(), in.end(), out.begin()); },
            [&](const CompositeSpec& s) {
                if (s.parts.size() == 1) {
                    s.parts.front().apply_into(in, out);
                    return;
                }
                std::vector<double> scratch(2 * d);
                std::span<double> buffers[2] = {std::span<double>(scratch).first(d),
                                                std::span<double>(scratch).last(d)};
                std::span<const double> current = in;
                for (std::size_t k = 0; k + 1 < s.parts.size(); ++k) {
                    s.parts[k].apply_into(current, buffers[k % 2]);
                    current = buffers[k % 2];
                }
                s.parts.back().apply_into(current, out);
            },
        },
        impl_->spec);
}

std::optional<Matrix> Operator::linear_matrix() const {
    const std::size_t d = impl_->dim;
    return std::visit(
        overloaded{
            [&](const LinearSpec& s) -> std::optional<Matrix> { return s.matrix; },
            [&](const AffineSpec& s) -> std::optional<Matrix> {
                for (const double b : s.offset.coords())
                    if (b != 0.0) return std::nullopt;
                return s.matrix;
            },
            [&](const RotationSpec& s) -> std::optional<Matrix> {
                Matrix m = Matrix::identity(d);
                m(s.first, s.first) = impl_->cos_angle;
                m(s.first, s.second) = -impl_->sin_angle;
                m(s.second, s.first) = impl_->sin_angle;
                m(s.second, s.second) = impl_->cos_angle;
                return m;
            },
            [&](const AveragedSpec& s) -> std::optional<Matrix> {
                auto inner = s.inner->linear_matrix();
                if (!inner) return std::nullopt;
                Matrix m = s.lambda * *inner;
                for (std::size_t i = 0; i < d; ++i) m(i, i) += 1.0 - s.lambda;
                return m;
            },
            [&](const NegationSpec&) -> std::optional<Matrix> { return -1.0 * Matrix::identity(d); },
            [&](const IdentitySpec&) -> std::optional<Matrix> { return Matrix::identity(d); },
            [&](const CompositeSpec& s) -> std::optional<Matrix> {
                Matrix total = Matrix::identity(d);
                for (const auto& p : s.parts) {
                    auto m = p.linear_matrix();
                    if (!m) return std::nullopt;
                    total = *m * total;
                }
                return total;
            },
            [&](const auto&) -> std::optional<Matrix> { return std::nullopt; },
        },
        impl_->spec);
}

std::string Operator::describe() const {
    return fmt::format("{}(dim={}, class={})", to_string(kind()), dim(), to_string(declared_class()));
}

Vector apply(const Operator& t, const Vector& x) {
    require_same_dim(t.dim(), x.dim(), "apply");
    std::vector<double> out(x.dim());
    t.apply_into(x.coords(), out);
    return Vector(std::move(out));
}

namespace {

template <class Visitor>
void for_each_sampled_pair(const Operator& t, std::size_t n_samples, double radius, std::uint64_t seed,
                           Visitor&& visit) {
    if (n_samples < 1) throw Error(ErrorCode::InvalidSpec, "n_samples must be at least 1");
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidSpec, "sampling radius must be positive");
    Sampler sampler(seed);
    const std::size_t d = t.dim();
    std::vector<double> tx(d), ty(d);
    for (std::size_t k = 0; k < n_samples; ++k) {
        Vector x = sampler.in_ball(d, radius);
        Vector y = sampler.in_ball(d, radius);
        double dxy = distance(x, y);
        while (dxy == 0.0) {
            y = sampler.in_ball(d, radius);
            dxy = distance(x, y);
        }
        t.apply_into(x.coords(), tx);
        t.apply_into(y.coords(), ty);
        if (!visit(x, y, distance(std::span<const double>(tx), std::span<const double>(ty)) / dxy)) return;
    }
}

} // namespace

double estimate_lipschitz(const Operator& t, std::size_t n_samples, double radius, std::uint64_t seed) {
    double best = 0.0;
    for_each_sampled_pair(t, n_samples, radius, seed, [&](const Vector&, const Vector&, double ratio) {
        best = std::max(best, ratio);
        return true;
    });
    return best;
}

NonexpansiveCheck check_nonexpansive(const Operator& t, std::size_t n_samples, double tol, double radius,
                                     std::uint64_t seed) {
    NonexpansiveCheck result;
    for_each_sampled_pair(t, n_samples, radius, seed, [&](const Vector& x, const Vector& y, double ratio) {
        result.max_ratio = std::max(result.max_ratio, ratio);
        if (ratio > 1.0 + tol && !result.witness) {
            result.pass = false;
            result.witness = NonexpansiveWitness{x, y, ratio};
        }
        return true;
    });
    return result;
}

OperatorNorm operator_norm(const Matrix& m, double tol, std::size_t max_iter, std::uint64_t seed) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "operator_norm tolerance must be positive");
    const std::size_t n = m.cols();
    if (m.frobenius_norm() == 0.0) return OperatorNorm{0.0, Vector::basis(n, 0), 0};

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> mv(m.rows()), w(n);
    auto gram = [&](std::span<const double> x) {
        multiply_into(m, x, mv);
        multiply_transpose_into(m, mv, w);
    };

    gram(v);
    if (norm(std::span<const double>(w)) <= tol * norm(std::span<const double>(v))) {
        Sampler sampler(seed);
        v = sampler.unit(n).values();
        gram(v);
    }
    double q_prev = inner(std::span<const double>(v), std::span<const double>(w));
    double dv_prev = std::numeric_limits<double>::infinity();
    const double roundoff = 4.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(n));
    std::vector<double> next(n);
    for (std::size_t k = 1; k <= max_iter; ++k) {
        const double nw = norm(std::span<const double>(w));
        if (nw == 0.0) break;
        for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / nw;
        gram(next);
        const double q = inner(std::span<const double>(next), std::span<const double>(w));
        const double dv = distance(std::span<const double>(next), std::span<const double>(v));
        v.swap(next);
        // distance of v to the limiting direction, from the observed linear rate
        const double rho = dv / dv_prev;
        const double v_err = dv <= roundoff ? 0.0 : rho < 1.0 ? dv * rho / (1.0 - rho) + dv : dv_prev;
        if (std::abs(q - q_prev) <= tol * std::max(1.0, q) && v_err <= tol) {
            return OperatorNorm{std::sqrt(std::max(q, 0.0)), Vector(v), k};
        }
        q_prev = q;
        dv_prev = dv;
    }
    throw Error(ErrorCode::NoConvergence,
                fmt::format("power iteration did not settle within {} iterations (max_iter)", max_iter));
}

OperatorNorm operator_norm(const Operator& s, double tol, std::size_t max_iter, std::uint64_t seed) {
    auto m = s.linear_matrix();
    if (!m) throw Error(ErrorCode::NotLinear, fmt::format("operator_norm needs a linear operator, got {}", s.describe()));
    return operator_norm(*m, tol, max_iter, seed);
}

NACertificate certify_norm_attainable(const Matrix& m, double tol, std::size_t max_iter) {
    const OperatorNorm on = operator_norm(m, tol, max_iter);
    const Vector image = m * on.vector;
    return NACertificate{on.sigma, on.vector, std::abs(norm(image) - on.sigma), on.iterations};
}

NACertificate certify_norm_attainable(const Operator& s, double tol, std::size_t max_iter) {
    auto m = s.linear_matrix();
    if (!m) {
        throw Error(ErrorCode::NotLinear,
                    fmt::format("norm-attainability certificate needs a linear operator, got {}", s.describe()));
    }
    return certify_norm_attainable(*m, tol, max_iter);
}

FixedPointSet fixed_points_linear(const Operator& t, double tol) {
    auto m = t.linear_matrix();
    if (!m) throw Error(ErrorCode::NotLinear, fmt::format("fixed_points_linear needs a linear operator, got {}", t.describe()));
    return FixedPointSet{null_space(Matrix::identity(t.dim()) - *m, tol), tol};
}

} // namespace viscfp

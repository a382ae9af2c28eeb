#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "viscfp/hilbert.hpp"
#include "viscfp/operators.hpp"

namespace viscfp {

/// Additive index semigroup Q: (N, +) or a sampled (R_+, +).
///
/// `grid` is the finite set of indices that checks sample from;
/// `generators` are the indices whose operators determine the common
/// fixed-point set.
struct IndexSemigroup {
    enum class Kind { naturals_add, nonneg_reals_add };

    Kind kind = Kind::naturals_add;
    std::vector<double> grid;
    std::vector<double> generators;

    /// Throws InvalidSpec on an empty generator list, a non-ascending or
    /// negative grid, or non-integral indices for (N, +).
    void validate() const;
};

/// Indexed family {T_t : t in Q} claiming T_{s+t} = T_s o T_t.
class OperatorFamily {
public:
    enum class Kind { power, rotation_flow, custom };

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const IndexSemigroup& index() const noexcept { return index_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    /// Whether T_t can be evaluated: integral t >= 0 for power families,
    /// t >= 0 for rotation flows, table membership for custom families.
    [[nodiscard]] bool representable(double t) const;
    /// T_t. Throws InvalidSpec for an index that is not representable.
    [[nodiscard]] Operator evaluate(double t) const;
    /// Operators at the generator indices.
    [[nodiscard]] std::vector<Operator> generator_operators() const;

    [[nodiscard]] const Operator* power_base() const noexcept { return base_ ? &*base_ : nullptr; }
    [[nodiscard]] const std::vector<double>& rates() const noexcept { return rates_; }

private:
    friend OperatorFamily make_power_family(const Operator&, std::vector<double>);
    friend OperatorFamily make_rotation_flow(std::vector<double>, std::vector<double>, std::vector<double>);
    friend OperatorFamily make_custom_family(std::map<double, Operator>, IndexSemigroup::Kind, std::vector<double>);

    Kind kind_ = Kind::power;
    IndexSemigroup index_;
    std::size_t dim_ = 0;
    std::optional<Operator> base_;
    std::vector<double> rates_;
    std::map<double, Operator> table_;
};

/// Default sample grid for (N, +) families: 0, 1, ..., 8.
std::vector<double> default_natural_grid();

/// T_n = base applied n times, T_0 = identity. The base must be declared
/// nonexpansive (or stronger) or pass check_nonexpansive at tol 1e-9;
/// throws NotNonexpansive otherwise.
OperatorFamily make_power_family(const Operator& base, std::vector<double> grid = default_natural_grid());

/// T_t rotates plane (2i, 2i+1) by rates[i] * t. Generators default to the
/// positive grid points (or {1} when there are none). Throws InvalidSpec.
OperatorFamily make_rotation_flow(std::vector<double> rates, std::vector<double> grid,
                                  std::vector<double> generators = {});

/// Finite table of operators. Generators default to every nonzero key.
OperatorFamily make_custom_family(std::map<double, Operator> table,
                                  IndexSemigroup::Kind kind = IndexSemigroup::Kind::naturals_add,
                                  std::vector<double> generators = {});

struct RepresentationReport {
    double max_defect = 0.0;
    std::pair<double, double> worst_pair{0.0, 0.0};
    std::size_t samples_checked = 0;
    double tol = 0.0;
    bool accepted = true;
};

/// Max of ||T_{s+t} x - T_s T_t x|| over index pairs (s, t) drawn from the
/// grid (with s + t representable) and unit vectors x. Every valid pair is
/// checked when n_pairs covers them all.
RepresentationReport check_representation(const OperatorFamily& family, std::size_t n_pairs, std::size_t n_vectors,
                                          double tol, std::uint64_t seed = kDefaultSeed);

/// max_t ||x - T_t x|| over the given indices.
double common_fixed_residual(const OperatorFamily& family, const Vector& x, const std::vector<double>& indices);

/// Intersection of Fix(T_g) over the generators, via the joint null space
/// of the stacked (I - T_g) blocks. Throws NotLinear.
FixedPointSet common_fixed_set_linear(const OperatorFamily& family, double tol);

} // namespace viscfp

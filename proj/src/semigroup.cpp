#include "viscfp/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "viscfp/error.hpp"

namespace viscfp {

namespace {

bool is_natural(double t) { return t >= 0.0 && std::floor(t) == t && t < 1e9; }

} // namespace

void IndexSemigroup::validate() const {
    if (generators.empty()) throw Error(ErrorCode::InvalidSpec, "index semigroup needs at least one generator");
    if (grid.empty()) throw Error(ErrorCode::InvalidSpec, "index semigroup needs a nonempty sample grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
            throw Error(ErrorCode::InvalidSpec, fmt::format("grid index {} is not a finite nonnegative value", grid[i]));
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidSpec, "grid must be strictly ascending");
    }
    for (const double g : generators) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw Error(ErrorCode::InvalidSpec, fmt::format("generator {} is not a finite nonnegative value", g));
        }
    }
    if (kind == Kind::naturals_add) {
        for (const double t : grid)
            if (!is_natural(t)) throw Error(ErrorCode::InvalidSpec, fmt::format("index {} is not a natural number", t));
        for (const double t : generators)
            if (!is_natural(t)) throw Error(ErrorCode::InvalidSpec, fmt::format("generator {} is not a natural number", t));
    }
}

std::vector<double> default_natural_grid() {
    std::vector<double> grid(9);
    std::iota(grid.begin(), grid.end(), 0.0);
    return grid;
}

bool OperatorFamily::representable(double t) const {
    switch (kind_) {
    case Kind::power: return is_natural(t);
    case Kind::rotation_flow: return t >= 0.0 && std::isfinite(t);
    case Kind::custom: return table_.count(t) > 0;
    }
    return false;
}

Operator OperatorFamily::evaluate(double t) const {
    if (!representable(t)) throw Error(ErrorCode::InvalidSpec, fmt::format("index {} is not representable in this family", t));
    switch (kind_) {
    case Kind::power: {
        const auto n = static_cast<std::size_t>(t);
        if (n == 0) return make_identity(dim_);
        if (n == 1) return *base_;
        return make_composite(std::vector<Operator>(n, *base_));
    }
    case Kind::rotation_flow: {
        std::vector<Operator> blocks;
        blocks.reserve(rates_.size());
        for (std::size_t i = 0; i < rates_.size(); ++i)
            blocks.push_back(make_rotation(dim_, 2 * i, 2 * i + 1, rates_[i] * t));
        if (blocks.size() == 1) return blocks.front();
        return make_composite(std::move(blocks));
    }
    case Kind::custom: return table_.at(t);
    }
    throw Error(ErrorCode::InvalidSpec, "unknown family kind");
}

std::vector<Operator> OperatorFamily::generator_operators() const {
    std::vector<Operator> ops;
    ops.reserve(index_.generators.size());
    for (const double g : index_.generators) ops.push_back(evaluate(g));
    return ops;
}

OperatorFamily make_power_family(const Operator& base, std::vector<double> grid) {
    if (!base.declared_class().is_nonexpansive()) {
        const auto check = check_nonexpansive(base, 1000, 1e-9);
        if (!check.pass) {
            throw Error(ErrorCode::NotNonexpansive,
                        fmt::format("power family base is not nonexpansive (sampled ratio {})", check.witness->ratio));
        }
    }
    OperatorFamily f;
    f.kind_ = OperatorFamily::Kind::power;
    f.dim_ = base.dim();
    f.base_ = base;
    f.index_ = IndexSemigroup{IndexSemigroup::Kind::naturals_add, std::move(grid), {1.0}};
    f.index_.validate();
    return f;
}

OperatorFamily make_rotation_flow(std::vector<double> rates, std::vector<double> grid, std::vector<double> generators) {
    if (rates.empty()) throw Error(ErrorCode::InvalidSpec, "rotation flow needs at least one rate");
    for (const double r : rates)
        if (!std::isfinite(r)) throw Error(ErrorCode::InvalidSpec, "rotation rates must be finite");
    if (generators.empty()) {
        for (const double t : grid)
            if (t > 0.0) generators.push_back(t);
        if (generators.empty()) generators.push_back(1.0);
    }
    OperatorFamily f;
    f.kind_ = OperatorFamily::Kind::rotation_flow;
    f.dim_ = 2 * rates.size();
    f.rates_ = std::move(rates);
    f.index_ = IndexSemigroup{IndexSemigroup::Kind::nonneg_reals_add, std::move(grid), std::move(generators)};
    f.index_.validate();
    return f;
}

OperatorFamily make_custom_family(std::map<double, Operator> table, IndexSemigroup::Kind kind,
                                  std::vector<double> generators) {
    if (table.empty()) throw Error(ErrorCode::InvalidSpec, "custom family table is empty");
    const std::size_t dim = table.begin()->second.dim();
    std::vector<double> grid;
    for (const auto& [t, op] : table) {
        if (op.dim() != dim) throw Error(ErrorCode::InvalidSpec, "custom family operators must share one dimension");
        grid.push_back(t);
    }
    if (generators.empty()) {
        for (const double t : grid)
            if (t != 0.0) generators.push_back(t);
        if (generators.empty()) generators.push_back(grid.front());
    }
    OperatorFamily f;
    f.kind_ = OperatorFamily::Kind::custom;
    f.dim_ = dim;
    f.table_ = std::move(table);
    f.index_ = IndexSemigroup{kind, std::move(grid), std::move(generators)};
    f.index_.validate();
    for (const double g : f.index_.generators)
        if (!f.representable(g)) throw Error(ErrorCode::InvalidSpec, fmt::format("generator {} is not in the table", g));
    return f;
}

RepresentationReport check_representation(const OperatorFamily& family, std::size_t n_pairs, std::size_t n_vectors,
                                          double tol, std::uint64_t seed) {
    if (n_pairs < 1 || n_vectors < 1) throw Error(ErrorCode::InvalidSpec, "n_pairs and n_vectors must be at least 1");
    const auto& grid = family.index().grid;
    std::vector<std::pair<double, double>> valid;
    for (const double s : grid)
        for (const double t : grid)
            if (family.representable(s + t)) valid.emplace_back(s, t);

    Sampler sampler(seed);
    if (n_pairs < valid.size()) {
        std::shuffle(valid.begin(), valid.end(), sampler.engine());
        valid.resize(n_pairs);
    }

    RepresentationReport report;
    report.tol = tol;
    const std::size_t d = family.dim();
    std::vector<double> inner_image(d), composed(d), direct(d);
    std::vector<Vector> xs;
    xs.reserve(n_vectors);
    for (std::size_t k = 0; k < n_vectors; ++k) xs.push_back(sampler.unit(d));

    for (const auto& [s, t] : valid) {
        const Operator ts = family.evaluate(s);
        const Operator tt = family.evaluate(t);
        const Operator tst = family.evaluate(s + t);
        for (const auto& x : xs) {
            tt.apply_into(x.coords(), inner_image);
            ts.apply_into(inner_image, composed);
            tst.apply_into(x.coords(), direct);
            const double defect = distance(std::span<const double>(direct), std::span<const double>(composed));
            if (report.samples_checked == 0 || defect > report.max_defect) {
                report.max_defect = defect;
                report.worst_pair = {s, t};
            }
            ++report.samples_checked;
        }
    }
    report.accepted = report.max_defect <= tol;
    return report;
}

double common_fixed_residual(const OperatorFamily& family, const Vector& x, const std::vector<double>& indices) {
    if (indices.empty()) throw Error(ErrorCode::InvalidSpec, "common_fixed_residual needs at least one index");
    require_same_dim(family.dim(), x.dim(), "common_fixed_residual");
    double worst = 0.0;
    for (const double t : indices) worst = std::max(worst, distance(x, apply(family.evaluate(t), x)));
    return worst;
}

FixedPointSet common_fixed_set_linear(const OperatorFamily& family, double tol) {
    std::vector<Matrix> blocks;
    const Matrix eye = Matrix::identity(family.dim());
    for (const auto& op : family.generator_operators()) {
        auto m = op.linear_matrix();
        if (!m) throw Error(ErrorCode::NotLinear, fmt::format("family generator {} is not linear", op.describe()));
        blocks.push_back(eye - *m);
    }
    return FixedPointSet{null_space(stack_rows(blocks), tol), tol};
}

} // namespace viscfp

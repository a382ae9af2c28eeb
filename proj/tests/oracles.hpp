// Independent reference computations for the tests. Nothing here calls
// into the library's numerical routines.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

/// Root of g on [lo, hi] by bisection; g(lo) and g(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
    double glo = g(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm <= 0.0) == (glo <= 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Solution of x = cos x.
inline double dottie() {
    return bisect([](double x) { return x - std::cos(x); }, 0.0, 1.0);
}

inline Mat gram(const Mat& s) {
    const std::size_t r = s.size(), c = s.front().size();
    Mat g(c, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j)
            for (std::size_t k = 0; k < r; ++k) g[i][j] += s[k][i] * s[k][j];
    return g;
}

/// Largest singular value of S (d <= 3) from the characteristic polynomial of
/// S^T S: its largest root, located by a downward scan and bisection.
inline double top_singular_value_charpoly(const Mat& s) {
    const Mat a = gram(s);
    const std::size_t d = a.size();
    std::vector<double> c; // det(lambda I - A) = lambda^d + c[0] lambda^{d-1} + ... + c[d-1]
    if (d == 1) {
        c = {-a[0][0]};
    } else if (d == 2) {
        c = {-(a[0][0] + a[1][1]), a[0][0] * a[1][1] - a[0][1] * a[1][0]};
    } else {
        const double tr = a[0][0] + a[1][1] + a[2][2];
        const double m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] +
                          a[1][1] * a[2][2] - a[1][2] * a[2][1];
        const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        c = {-tr, m2, -det};
    }
    auto p = [&](double x) {
        double v = 1.0;
        for (double ci : c) v = v * x + ci;
        return v;
    };
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += a[i][i];
    const double top = trace + 1.0; // eigenvalues of a PSD matrix lie in [0, trace]
    const int grid = 20000;
    double hi = top;
    for (int i = grid - 1; i >= 0; --i) {
        const double lo = top * i / grid;
        if (p(lo) <= 0.0) return std::sqrt(std::max(0.0, bisect(p, lo, hi)));
        hi = lo;
    }
    return 0.0;
}

/// Determinant by cofactor expansion (small matrices only).
inline double det_laplace(const Mat& m) {
    const std::size_t n = m.size();
    if (n == 0) return 1.0;
    if (n == 1) return m[0][0];
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Mat minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<double> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(m[i][k]);
            minor.push_back(row);
        }
        sum += ((j % 2 == 0) ? 1.0 : -1.0) * m[0][j] * det_laplace(minor);
    }
    return sum;
}

/// Rank as the largest k with a nonvanishing k x k minor (d <= 4).
inline std::size_t rank_by_minors(const Mat& m, double tol) {
    const std::size_t r = m.size(), c = m.front().size();
    for (std::size_t k = std::min(r, c); k >= 1; --k) {
        std::vector<bool> rsel(r, false), csel(c, false);
        std::fill(rsel.begin(), rsel.begin() + static_cast<long>(k), true);
        do {
            std::fill(csel.begin(), csel.end(), false);
            std::fill(csel.begin(), csel.begin() + static_cast<long>(k), true);
            do {
                Mat sub;
                for (std::size_t i = 0; i < r; ++i) {
                    if (!rsel[i]) continue;
                    std::vector<double> row;
                    for (std::size_t j = 0; j < c; ++j)
                        if (csel[j]) row.push_back(m[i][j]);
                    sub.push_back(row);
                }
                if (std::abs(det_laplace(sub)) > tol) return k;
            } while (std::prev_permutation(csel.begin(), csel.end()));
        } while (std::prev_permutation(rsel.begin(), rsel.end()));
    }
    return 0;
}

/// xi solving ((1 - eps/2) I - (1 - eps) R(theta)) xi = eps e_1 by Cramer's rule.
inline std::pair<double, double> rotation_step(double eps, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double a11 = (1.0 - eps / 2.0) - (1.0 - eps) * c, a12 = (1.0 - eps) * s;
    const double a21 = -(1.0 - eps) * s, a22 = a11;
    const double det = a11 * a22 - a12 * a21;
    return {eps * a22 / det, -eps * a21 / det};
}

/// Ball problem iterate: (1 + eps) e_1.
inline double ball_iterate(double eps) { return 1.0 + eps; }

/// Anchored scalar iterate for T = -x, anchor 1.
inline double anchored_scalar_iterate(std::size_t n) { return 1.0 / (2.0 * static_cast<double>(n) - 1.0); }

/// Hand-rolled generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::vector<double> vec(std::size_t d, double scale = 10.0) {
        std::vector<double> v(d);
        for (auto& x : v) x = real(-scale, scale);
        return v;
    }
    Mat mat(std::size_t r, std::size_t c, double scale = 1.0) {
        Mat m(r);
        for (auto& row : m) row = vec(c, scale);
        return m;
    }

private:
    std::mt19937_64 rng_;
};

} // namespace oracle

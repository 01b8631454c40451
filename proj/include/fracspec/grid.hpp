// Uniform cell partition of an interval and piecewise-constant fields on it,
// with the h-weighted discrete L^r norms used by every other module.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "fracspec/common.hpp"

namespace fracspec {

// Cells I_i = [a + i*h, a + (i+1)*h), i = 0..n_cells-1, h = (b-a)/n_cells.
// Fields are represented by their midpoint values x_i = a + (i + 1/2) h.
struct Grid {
    double a = 0.0;
    double b = 1.0;
    int n_cells = 1;
    double h = 1.0;

    Grid() = default;
    Grid(double a_, double b_, int n) : a(a_), b(b_), n_cells(n) {
        detail::require(std::isfinite(a) && std::isfinite(b) && b > a, "Grid: need b > a");
        detail::require(n >= 1, "Grid: need at least one cell");
        h = (b - a) / n;
    }

    double midpoint(int i) const { return a + (i + 0.5) * h; }

    std::vector<double> midpoints() const {
        std::vector<double> x(static_cast<std::size_t>(n_cells));
        for (int i = 0; i < n_cells; ++i) x[static_cast<std::size_t>(i)] = midpoint(i);
        return x;
    }

    bool operator==(const Grid&) const = default;
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.n_cells), fill) {}
    ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        detail::require(static_cast<int>(values.size()) == g.n_cells,
                        "ScalarField: value count != cell count");
    }

    int size() const { return grid.n_cells; }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

    template <class Fn>
    static ScalarField sample(const Grid& g, Fn f) {
        ScalarField out(g);
        for (int i = 0; i < g.n_cells; ++i) out[i] = f(g.midpoint(i));
        return out;
    }
};

// (sum_i |f_i|^r h)^(1/r)
inline double lp_norm(const ScalarField& f, double r) {
    detail::require(std::isfinite(r) && r >= 1.0, "lp_norm: exponent r must satisfy 1 <= r < inf");
    double acc = 0.0;
    for (double v : f.values) acc += abs_pow(v, r);
    return std::pow(acc * f.grid.h, 1.0 / r);
}

inline ScalarField normalize_lp(const ScalarField& f, double r) {
    const double nrm = lp_norm(f, r);
    detail::require(nrm > 0.0, "normalize_lp: zero field");
    ScalarField out = f;
    for (double& v : out.values) v /= nrm;
    return out;
}

// sum_i f_i g_i h
inline double dot_h(const ScalarField& f, const ScalarField& g) {
    detail::require(f.grid == g.grid, "dot_h: grid mismatch");
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i) acc += f[i] * g[i];
    return acc * f.grid.h;
}

// Halve every cell. Piecewise-constant refinement: each value is duplicated,
// so the represented function is unchanged.
inline ScalarField refine(const ScalarField& f) {
    Grid fine(f.grid.a, f.grid.b, 2 * f.grid.n_cells);
    ScalarField out(fine);
    for (int i = 0; i < f.size(); ++i) {
        out[2 * i] = f[i];
        out[2 * i + 1] = f[i];
    }
    return out;
}

// |random| + floor, strictly positive; the stock start for eigensolves.
inline ScalarField random_positive_field(const Grid& g, std::uint64_t seed, double floor = 0.1) {
    UniformRng rng(seed);
    ScalarField out(g);
    for (int i = 0; i < g.n_cells; ++i) out[i] = std::abs(rng.next(-1.0, 1.0)) + floor;
    return out;
}

// Uniform values in [-amplitude, amplitude], deterministic per seed.
inline ScalarField random_field(const Grid& g, std::uint64_t seed, double amplitude) {
    UniformRng rng(seed);
    ScalarField out(g);
    for (int i = 0; i < g.n_cells; ++i) out[i] = rng.next(-amplitude, amplitude);
    return out;
}

} // namespace fracspec

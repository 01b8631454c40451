// Discrete interaction weights for the kernel |x-y|^{-(1+sigma)} on an interval.
//
// K_ij holds the Omega x Omega part of the pair interaction between cells i and
// j; rho_i holds the exact integral of the kernel from the cell midpoint into
// the exterior of the interval, where fields vanish identically. Both depend
// only on the offset |i-j| (resp. the distance to the endpoints), so assembly
// fills a symmetric Toeplitz matrix from a per-offset table.
#pragma once

#include <cmath>
#include <vector>

#include "fracspec/grid.hpp"
#include "fracspec/params.hpp"

namespace fracspec {

enum class KernelMode {
    Midpoint,       // K_ij = h^2 |x_i - x_j|^{-(1+sigma)}; valid for every sigma
    ExactCellPair,  // exact double integral over the cell pair; needs sigma < 1
};

// rho(x_i): integral of |x_i - y|^{-(1+sigma)} over y outside (a,b).
inline double exterior_tail(const FracParams& params, const Grid& grid, int i) {
    detail::require(i >= 0 && i < grid.n_cells, "exterior_tail: cell index out of range");
    const double x = grid.midpoint(i);
    return (std::pow(x - grid.a, -params.sigma) + std::pow(grid.b - x, -params.sigma)) /
           params.sigma;
}

struct KernelAssembly {
    FracParams params;
    Grid grid;
    KernelMode mode;
    std::vector<double> K;        // n x n row-major, symmetric, zero diagonal
    std::vector<double> rho;      // exterior tail per cell
    std::vector<double> row_sum;  // sum_j K_ij, cached for the p = 2 fast paths

    int n() const { return grid.n_cells; }
    double k(int i, int j) const {
        return K[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.n_cells) +
                 static_cast<std::size_t>(j)];
    }
    const double* row(int i) const {
        return K.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.n_cells);
    }
};

inline KernelAssembly assemble(const FracParams& params, const Grid& grid,
                               KernelMode mode = KernelMode::Midpoint) {
    detail::require(grid.n_cells >= 2, "assemble: grid must have at least 2 cells");
    const double sigma = params.sigma;
    if (mode == KernelMode::ExactCellPair)
        detail::require(sigma < 1.0,
                        "assemble: ExactCellPair requires sigma = s*p < 1 "
                        "(adjacent-cell integral diverges otherwise)");

    const int n = grid.n_cells;
    const double h = grid.h;

    // Weight for cell offset m = |i - j| >= 1.
    std::vector<double> offset(static_cast<std::size_t>(n), 0.0);
    if (mode == KernelMode::Midpoint) {
        for (int m = 1; m < n; ++m)
            offset[static_cast<std::size_t>(m)] = h * h * std::pow(m * h, -(1.0 + sigma));
    } else {
        // Exact integral of |x-y|^{-(1+sigma)} over [0,h] x [mh,(m+1)h]:
        // second difference of t -> t^{1-sigma} at m, scaled by h^{1-sigma}/(sigma(sigma-1)).
        const double e = 1.0 - sigma;
        const double scale = std::pow(h, e) / (sigma * (sigma - 1.0));
        for (int m = 1; m < n; ++m) {
            const double d2 =
                std::pow(m - 1.0, e) - 2.0 * std::pow(static_cast<double>(m), e) + std::pow(m + 1.0, e);
            offset[static_cast<std::size_t>(m)] = scale * d2;
        }
    }

    KernelAssembly out{params, grid, mode, {}, {}, {}};
    out.K.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    out.rho.resize(static_cast<std::size_t>(n));
    out.row_sum.resize(static_cast<std::size_t>(n));

    for_rows(n, [&](int i) {
        double* row = out.K.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = offset[static_cast<std::size_t>(std::abs(i - j))];
            row[j] = w;
            acc += w;
        }
        out.row_sum[static_cast<std::size_t>(i)] = acc;
        out.rho[static_cast<std::size_t>(i)] = exterior_tail(params, grid, i);
    });
    return out;
}

} // namespace fracspec

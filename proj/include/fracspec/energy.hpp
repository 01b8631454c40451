// Discrete nonlocal energy E(u), the symmetrized form H(u,v), the potential
// objective J(u;V) whose constrained minimum is the first eigenvalue, and the
// gradient of J. All pairwise sums are accumulated per row and combined in
// index order, so results do not depend on how rows are scheduled.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "fracspec/kernel.hpp"

namespace fracspec {

struct EnergyContext {
    const KernelAssembly* kernel = nullptr;
    ScalarField V;

    EnergyContext(const KernelAssembly& k, ScalarField potential)
        : kernel(&k), V(std::move(potential)) {
        detail::require(V.grid == k.grid, "EnergyContext: potential on a different grid");
    }

    const FracParams& params() const { return kernel->params; }
    const Grid& grid() const { return kernel->grid; }
};

namespace detail {

// sum over i of [ sum_j K_ij |u_i - u_j|^p ] + 2 rho_i h |u_i|^p, with the
// p-power passed as a callable so the inner loop stays branch-free.
template <class Pow>
double pair_energy(const ScalarField& u, const KernelAssembly& kernel, Pow pw) {
    const int n = kernel.n();
    const double h = kernel.grid.h;
    std::vector<double> partial(static_cast<std::size_t>(n));
    for_rows(n, [&](int i) {
        const double* row = kernel.row(i);
        const double ui = u[i];
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * pw(ui - u[j]);
        partial[static_cast<std::size_t>(i)] =
            acc + 2.0 * kernel.rho[static_cast<std::size_t>(i)] * h * pw(ui);
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

} // namespace detail

// E(u) = sum_{i != j} K_ij |u_i - u_j|^p + 2 sum_i rho_i h |u_i|^p.
// Zero exterior data make even constants pay energy through rho.
inline double gagliardo_energy(const ScalarField& u, const KernelAssembly& kernel) {
    detail::require(u.grid == kernel.grid, "gagliardo_energy: field on a different grid");
    const double p = kernel.params.p;
    if (p == 2.0)
        return detail::pair_energy(u, kernel, [](double t) { return t * t; });
    if (p == 3.0)
        return detail::pair_energy(u, kernel, [](double t) { return std::abs(t * t * t); });
    return detail::pair_energy(u, kernel, [p](double t) { return abs_pow(t, p); });
}

// H(u,v) = 1/2 sum_{i != j} K_ij Phi_p(u_i - u_j)(v_i - v_j) + sum_i rho_i h Phi_p(u_i) v_i.
// Satisfies H(u,u) = E(u)/2 and is linear in v.
inline double h_form(const ScalarField& u, const ScalarField& v, const KernelAssembly& kernel) {
    detail::require(u.grid == kernel.grid && v.grid == kernel.grid,
                    "h_form: fields on a different grid");
    const int n = kernel.n();
    const double p = kernel.params.p;
    const double h = kernel.grid.h;
    std::vector<double> partial(static_cast<std::size_t>(n));
    for_rows(n, [&](int i) {
        const double* row = kernel.row(i);
        const double ui = u[i];
        const double vi = v[i];
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * phi_p(ui - u[j], p) * (vi - v[j]);
        partial[static_cast<std::size_t>(i)] =
            0.5 * acc + kernel.rho[static_cast<std::size_t>(i)] * h * phi_p(ui, p) * vi;
    });
    double total = 0.0;
    for (double v_ : partial) total += v_;
    return total;
}

// J(u;V) = E(u)/2 + sum_i V_i |u_i|^p h. On the unit L^p sphere its minimum is
// the discrete first eigenvalue lambda(V).
inline double objective(const ScalarField& u, const EnergyContext& ctx) {
    const double p = ctx.params().p;
    const double h = ctx.grid().h;
    double pot = 0.0;
    for (int i = 0; i < u.size(); ++i) pot += ctx.V[i] * abs_pow(u[i], p);
    return 0.5 * gagliardo_energy(u, *ctx.kernel) + pot * h;
}

// g_i = p [ sum_j K_ij Phi_p(u_i - u_j) + rho_i h Phi_p(u_i) + V_i h Phi_p(u_i) ].
// The directional derivative of J at u along v is sum_i g_i v_i. For p < 2 the
// kinks at u_i = u_j use Phi_p(0) = 0 (pointwise subgradient).
inline void objective_gradient(const ScalarField& u, const EnergyContext& ctx,
                               std::vector<double>& g) {
    detail::require(u.grid == ctx.grid(), "objective_gradient: field on a different grid");
    const KernelAssembly& kernel = *ctx.kernel;
    const int n = kernel.n();
    const double p = kernel.params.p;
    const double h = kernel.grid.h;
    g.resize(static_cast<std::size_t>(n));
    if (p == 2.0) {
        // Row i reduces to row_sum_i u_i - (K u)_i plus the local terms.
        for_rows(n, [&](int i) {
            const double* row = kernel.row(i);
            double ku = 0.0;
            for (int j = 0; j < n; ++j) ku += row[j] * u[j];
            const std::size_t si = static_cast<std::size_t>(i);
            g[si] = 2.0 * (kernel.row_sum[si] * u[i] - ku + (kernel.rho[si] + ctx.V[i]) * h * u[i]);
        });
        return;
    }
    for_rows(n, [&](int i) {
        const double* row = kernel.row(i);
        const double ui = u[i];
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * phi_p(ui - u[j], p);
        const std::size_t si = static_cast<std::size_t>(i);
        g[si] = p * (acc + (kernel.rho[si] + ctx.V[i]) * h * phi_p(ui, p));
    });
}

inline ScalarField objective_gradient(const ScalarField& u, const EnergyContext& ctx) {
    ScalarField g(u.grid);
    objective_gradient(u, ctx, g.values);
    return g;
}

// Dual max-norm residual of the weak eigenvalue equation over the canonical
// basis directions, scaled by max(1, |lambda|). For basis tests the equation
// collapses to g_i / p = lambda h Phi_p(u_i).
inline double eigen_residual(const ScalarField& u, double lambda, const EnergyContext& ctx) {
    detail::require(std::abs(lp_norm(u, ctx.params().p) - 1.0) <= 1e-10,
                    "eigen_residual: field is not L^p-normalized");
    const double p = ctx.params().p;
    const double h = ctx.grid().h;
    std::vector<double> g;
    objective_gradient(u, ctx, g);
    double worst = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        const double r = std::abs(g[static_cast<std::size_t>(i)] / p - lambda * h * phi_p(u[i], p));
        if (r > worst) worst = r;
    }
    return worst / std::max(1.0, std::abs(lambda));
}

} // namespace fracspec

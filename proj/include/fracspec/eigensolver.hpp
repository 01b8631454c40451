// First eigenpair of the discrete operator: projected descent of J(.;V) over
// the L^p unit sphere with Armijo backtracking and per-step absolute value
// (which never increases J and steers to the positive ground state), plus an
// independent dense cyclic-Jacobi route for p = 2 used as a cross-check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fracspec/energy.hpp"

namespace fracspec {

struct SolverConfig {
    double tol_res = 1e-8;     // dual max-norm residual
    double tol_lambda = 1e-10; // relative lambda change per accepted step
    int max_iters = 50000;
    double step0 = 1.0;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    std::uint64_t seed = 0;
};

struct EigenPair {
    double lambda = 0.0;
    ScalarField u;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

struct IterationRecord {
    int iter;
    double j;
    double residual;
    double step;
};

namespace detail {

inline void validate(const SolverConfig& cfg) {
    require(cfg.tol_res > 0.0 && cfg.tol_lambda > 0.0, "SolverConfig: tolerances must be positive");
    require(cfg.max_iters > 0, "SolverConfig: max_iters must be positive");
    require(cfg.step0 > 0.0 && cfg.armijo_c > 0.0, "SolverConfig: step0/armijo_c must be positive");
    require(cfg.backtrack > 0.0 && cfg.backtrack < 1.0, "SolverConfig: backtrack must lie in (0,1)");
}

// max_i |g_i/p - lambda h Phi_p(u_i)| / max(1, |lambda|)
inline double residual_from_gradient(const std::vector<double>& g, const ScalarField& u,
                                     double lambda, double p, double h) {
    double worst = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        const double r =
            std::abs(g[static_cast<std::size_t>(i)] / p - lambda * h * phi_p(u[i], p));
        if (r > worst) worst = r;
    }
    return worst / std::max(1.0, std::abs(lambda));
}

} // namespace detail

// Minimizes J(.;V) over {||u||_p = 1}. Starts from |seeded random| + 0.1 unless
// an initial guess is supplied (it is abs-ed and renormalized, so warm starts
// from nearby problems are safe). Convergence requires the weak-equation
// residual and the relative lambda change to be small simultaneously.
inline EigenPair solve_first_eigenpair(const EnergyContext& ctx, const SolverConfig& cfg,
                                       const ScalarField* initial = nullptr,
                                       std::vector<IterationRecord>* trace = nullptr) {
    detail::validate(cfg);
    const double p = ctx.params().p;
    const double h = ctx.grid().h;
    const int n = ctx.grid().n_cells;

    ScalarField u(ctx.grid());
    if (initial != nullptr && initial->grid == ctx.grid()) {
        for (int i = 0; i < n; ++i) u[i] = std::abs((*initial)[i]);
        if (lp_norm(u, p) > 0.0)
            u = normalize_lp(u, p);
        else
            u = normalize_lp(random_positive_field(ctx.grid(), cfg.seed), p);
    } else {
        u = normalize_lp(random_positive_field(ctx.grid(), cfg.seed), p);
    }

    double j_val = objective(u, ctx);
    if (!std::isfinite(j_val))
        throw std::runtime_error("solve_first_eigenpair: energy is not finite");

    std::vector<double> g;
    objective_gradient(u, ctx, g);

    const double min_step = 1e-18 * cfg.step0;
    double tau = cfg.step0;
    double rel_change = std::numeric_limits<double>::infinity();
    double res = detail::residual_from_gradient(g, u, j_val, p, h);
    bool converged = false;
    int iter = 0;

    ScalarField trial(ctx.grid());
    for (; iter < cfg.max_iters; ++iter) {
        res = detail::residual_from_gradient(g, u, j_val, p, h);
        if (trace != nullptr) trace->push_back({iter, j_val, res, tau});
        if (res <= cfg.tol_res && rel_change <= cfg.tol_lambda) {
            converged = true;
            break;
        }

        // Tangential gradient norm: the constraint gradient is c_i = p h Phi_p(u_i).
        double gc = 0.0, cc = 0.0, gg = 0.0;
        for (int i = 0; i < n; ++i) {
            const double ci = p * h * phi_p(u[i], p);
            const double gi = g[static_cast<std::size_t>(i)];
            gc += gi * ci;
            cc += ci * ci;
            gg += gi * gi;
        }
        const double gtan2 = std::max(0.0, gg - (cc > 0.0 ? gc * gc / cc : 0.0));

        bool accepted = false;
        double j_new = j_val;
        for (double t = tau; t >= min_step; t *= cfg.backtrack) {
            double nrm_p = 0.0;
            for (int i = 0; i < n; ++i) {
                trial[i] = std::abs(u[i] - t * g[static_cast<std::size_t>(i)]);
                nrm_p += abs_pow(trial[i], p);
            }
            nrm_p = std::pow(nrm_p * h, 1.0 / p);
            if (!(nrm_p > 0.0)) continue;
            for (int i = 0; i < n; ++i) trial[i] /= nrm_p;
            const double j_try = objective(trial, ctx);
            if (std::isfinite(j_try) && j_try <= j_val - cfg.armijo_c * t * gtan2) {
                accepted = true;
                j_new = j_try;
                tau = 2.0 * t;
                break;
            }
        }
        if (!accepted) {
            // Stationary to line-search precision; the residual decides.
            converged = res <= cfg.tol_res;
            break;
        }

        rel_change = std::abs(j_new - j_val) / std::max(1.0, std::abs(j_new));
        std::swap(u.values, trial.values);
        j_val = j_new;
        objective_gradient(u, ctx, g);
    }

    EigenPair out;
    out.lambda = j_val;
    out.u = std::move(u);
    out.residual = res;
    out.iterations = iter;
    out.converged = converged;
    return out;
}

namespace detail {

// Cyclic Jacobi eigendecomposition of a dense symmetric matrix (row-major).
// On return a is (numerically) diagonal and the columns of q are the
// eigenvectors. Kept deliberately separate from the descent solver above.
inline void jacobi_eigen_symmetric(std::vector<double>& a, std::vector<double>& q, int n) {
    q.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i) * n + i] = 1.0;

    double norm_a = 0.0;
    for (double v : a) norm_a += v * v;
    norm_a = std::sqrt(norm_a);
    if (norm_a == 0.0) return;

    auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * n + c]; };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * at(i, j) * at(i, j);
        if (std::sqrt(off) <= 1e-15 * norm_a) return;

        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double apq = at(i, j);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (at(j, j) - at(i, i)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const double aii = at(i, i), ajj = at(j, j);
                at(i, i) = c * c * aii - 2.0 * s * c * apq + s * s * ajj;
                at(j, j) = s * s * aii + 2.0 * s * c * apq + c * c * ajj;
                at(i, j) = 0.0;
                at(j, i) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == i || k == j) continue;
                    const double aki = at(k, i), akj = at(k, j);
                    at(k, i) = c * aki - s * akj;
                    at(i, k) = at(k, i);
                    at(k, j) = s * aki + c * akj;
                    at(j, k) = at(k, j);
                }
                for (int k = 0; k < n; ++k) {
                    const std::size_t ki = static_cast<std::size_t>(k) * n + i;
                    const std::size_t kj = static_cast<std::size_t>(k) * n + j;
                    const double qki = q[ki], qkj = q[kj];
                    q[ki] = c * qki - s * qkj;
                    q[kj] = s * qki + c * qkj;
                }
            }
        }
    }
}

} // namespace detail

struct DenseOracleResult {
    double lambda = 0.0;
    ScalarField u;
};

// Builds A with A_ii = sum_j K_ij + (rho_i + V_i) h, A_ij = -K_ij, and solves
// the smallest eigenvalue of (1/h) A u = lambda u by cyclic Jacobi rotations.
// Independent verification path for p = 2; shares no code with the descent
// solver.
inline DenseOracleResult dense_p2_oracle(const EnergyContext& ctx) {
    detail::require(ctx.params().p == 2.0, "dense_p2_oracle: unsupported unless p = 2");
    const KernelAssembly& kernel = *ctx.kernel;
    const int n = kernel.n();
    const double h = kernel.grid.h;

    std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double* row = kernel.row(i);
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = -row[j];
        a[static_cast<std::size_t>(i) * n + i] =
            kernel.row_sum[static_cast<std::size_t>(i)] +
            (kernel.rho[static_cast<std::size_t>(i)] + ctx.V[i]) * h;
    }

    std::vector<double> q;
    detail::jacobi_eigen_symmetric(a, q, n);

    int best = 0;
    for (int i = 1; i < n; ++i)
        if (a[static_cast<std::size_t>(i) * n + i] < a[static_cast<std::size_t>(best) * n + best])
            best = i;

    DenseOracleResult out;
    out.lambda = a[static_cast<std::size_t>(best) * n + best] / h;
    out.u = ScalarField(kernel.grid);
    int peak = 0;
    for (int i = 0; i < n; ++i) {
        out.u[i] = q[static_cast<std::size_t>(i) * n + best];
        if (std::abs(out.u[i]) > std::abs(out.u[peak])) peak = i;
    }
    if (out.u[peak] < 0.0)
        for (int i = 0; i < n; ++i) out.u[i] = -out.u[i];
    out.u = normalize_lp(out.u, 2.0);
    return out;
}

struct SimplicityReport {
    bool conclusive = false; // every start converged
    bool pass = false;
    double max_pairwise_distance = 0.0; // L^p between normalized iterates
    double lambda_spread = 0.0;
    std::vector<double> lambdas;
};

// Re-solves from n_starts independent seeds; the first eigenvalue is simple,
// so all runs must land on the same positive eigenfunction.
inline SimplicityReport simplicity_probe(const EnergyContext& ctx, const SolverConfig& cfg,
                                         int n_starts) {
    detail::require(n_starts >= 2, "simplicity_probe: n_starts must be at least 2");
    const double p = ctx.params().p;

    SimplicityReport report;
    report.conclusive = true;
    std::vector<EigenPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n_starts));
    for (int k = 0; k < n_starts; ++k) {
        SolverConfig run = cfg;
        run.seed = cfg.seed + static_cast<std::uint64_t>(k);
        EigenPair pair = solve_first_eigenpair(ctx, run);
        if (!pair.converged) report.conclusive = false;
        report.lambdas.push_back(pair.lambda);
        pairs.push_back(std::move(pair));
    }

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            ScalarField diff = pairs[i].u;
            for (int c = 0; c < diff.size(); ++c) diff[c] -= pairs[j].u[c];
            report.max_pairwise_distance = std::max(report.max_pairwise_distance, lp_norm(diff, p));
        }
    }
    const auto [lo, hi] = std::minmax_element(report.lambdas.begin(), report.lambdas.end());
    report.lambda_spread = *hi - *lo;
    report.pass = report.conclusive && report.max_pairwise_distance <= 1e-6 &&
                  report.lambda_spread <= 1e-9;
    return report;
}

struct BoundednessReport {
    double max_u = 0.0;
    double refined_max_u = 0.0;
    double ratio = 0.0; // max_u / refined_max_u
    bool refined_converged = false;
    bool flagged = false; // sup grew by more than 2x across one refinement
};

// Discrete proxy for the sup bound on eigenfunctions: re-solves on a grid with
// doubled resolution (same potential, piecewise-constant refinement) and
// compares the peaks.
inline BoundednessReport boundedness_diagnostic(const EnergyContext& ctx, const SolverConfig& cfg,
                                                const EigenPair& pair) {
    detail::require(pair.converged, "boundedness_diagnostic: needs a converged pair");

    Grid fine(ctx.grid().a, ctx.grid().b, 2 * ctx.grid().n_cells);
    KernelAssembly fine_kernel = assemble(ctx.params(), fine, ctx.kernel->mode);
    EnergyContext fine_ctx(fine_kernel, refine(ctx.V));
    ScalarField guess = refine(pair.u);
    EigenPair fine_pair = solve_first_eigenpair(fine_ctx, cfg, &guess);

    BoundednessReport report;
    for (double v : pair.u.values) report.max_u = std::max(report.max_u, v);
    for (double v : fine_pair.u.values) report.refined_max_u = std::max(report.refined_max_u, v);
    report.ratio = report.max_u / report.refined_max_u;
    report.refined_converged = fine_pair.converged;
    report.flagged = report.refined_max_u > 2.0 * report.max_u;
    return report;
}

} // namespace fracspec

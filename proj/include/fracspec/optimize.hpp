// Optimization of V -> lambda(V) over admissible potential classes: L^q balls
// (min and max) and rearrangement classes (min). lambda is concave in V and
// |u_V|^p is a supergradient, which fixes the whole algorithmic structure:
// minimization alternates exact eigensolves with exact linear minimization
// over the set, maximization runs projected supergradient ascent with a
// fixed-point accelerator on the Hoelder-equality optimality condition.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "fracspec/eigensolver.hpp"

namespace fracspec {

struct BallSet {
    double q = 2.0; // must match FracParams.q of the kernel in use
    double M = 1.0; // radius in the h-weighted q-norm
};

struct RearrangementSet {
    ScalarField V0;
};

using AdmissibleSet = std::variant<BallSet, RearrangementSet>;

struct OuterConfig {
    double tol_lambda = 1e-9; // lambda stagnation, relative to max(1, |lambda|)
    double tol_V = 1e-8;      // V change in the h-weighted q-norm
    double tol_fp = 1e-5;     // fixed-point optimality residual
    double tol_mono = 1e-9;   // comonotonicity tolerance (rearrangement)
    int max_iters = 500;
    double t0 = 1.0;            // ascent step scale, steps are t0/sqrt(k+1)
    double potential_shift = 0.0; // inner eigensolves see V + shift (diagnostics)
};

enum class OptDirection { Max, Min };

struct OptHistoryEntry {
    int k;
    double lambda;
    double opt_residual;
    double v_norm;
};

struct OptResult {
    ScalarField V_opt;
    EigenPair pair;
    std::vector<OptHistoryEntry> history;
    double optimality_residual = std::numeric_limits<double>::infinity();
    OptDirection direction = OptDirection::Min;
    bool converged = false;
    int iterations = 0;
};

// d/dt lambda(V + tW) at t = 0: sum_i W_i |u_V,i|^p h, with u_V the positive
// normalized eigenfunction at V. On the q-sphere this is the derivative along
// any curve with velocity W tangent at V.
inline double lambda_derivative(const KernelAssembly& kernel, const ScalarField& V,
                                const ScalarField& W, const SolverConfig& cfg,
                                const ScalarField* warm = nullptr) {
    detail::require(W.grid == kernel.grid, "lambda_derivative: direction on a different grid");
    EnergyContext ctx(kernel, V);
    EigenPair pair = solve_first_eigenpair(ctx, cfg, warm);
    if (!pair.converged)
        throw std::runtime_error("lambda_derivative: eigensolve did not converge");
    const double p = kernel.params.p;
    double acc = 0.0;
    for (int i = 0; i < W.size(); ++i) acc += W[i] * abs_pow(pair.u[i], p);
    return acc * kernel.grid.h;
}

struct LinearMinimizeResult {
    ScalarField V;
    bool degenerate = false; // w was identically zero (ball case)
};

// Minimizes sum_i V_i w_i h over the admissible set, for w >= 0 (w plays |u|^p).
// Ball: Hoelder equality case, V = -M w^{1/(q-1)} / ||w^{1/(q-1)}||_q.
// Rearrangement: values of V0 placed in opposite order to w (largest value on
// the cell with smallest w; ties in w broken by ascending cell index).
inline LinearMinimizeResult linear_minimize_over_set(const ScalarField& w,
                                                     const AdmissibleSet& set) {
    for (double v : w.values)
        detail::require(v >= 0.0, "linear_minimize_over_set: w must be nonnegative");

    LinearMinimizeResult out;
    if (const BallSet* ball = std::get_if<BallSet>(&set)) {
        const double expo = 1.0 / (ball->q - 1.0);
        ScalarField z(w.grid);
        for (int i = 0; i < w.size(); ++i) z[i] = std::pow(w[i], expo);
        const double nz = lp_norm(z, ball->q);
        out.V = ScalarField(w.grid, 0.0);
        if (nz == 0.0) {
            out.degenerate = true;
            return out;
        }
        for (int i = 0; i < w.size(); ++i) out.V[i] = -ball->M * z[i] / nz;
        return out;
    }

    const RearrangementSet& rearr = std::get<RearrangementSet>(set);
    detail::require(rearr.V0.grid == w.grid,
                    "linear_minimize_over_set: V0 on a different grid");
    const int n = w.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] < w[b]; });
    std::vector<double> vals = rearr.V0.values;
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    out.V = ScalarField(w.grid, 0.0);
    for (int k = 0; k < n; ++k) out.V[order[static_cast<std::size_t>(k)]] = vals[static_cast<std::size_t>(k)];
    return out;
}

namespace detail {

inline ScalarField with_shift(const ScalarField& V, double shift) {
    if (shift == 0.0) return V;
    ScalarField out = V;
    for (double& v : out.values) v += shift;
    return out;
}

inline ScalarField power_field(const ScalarField& u, double p) {
    ScalarField w(u.grid);
    for (int i = 0; i < u.size(); ++i) w[i] = abs_pow(u[i], p);
    return w;
}

inline double q_distance(const ScalarField& a, const ScalarField& b, double q) {
    ScalarField d = a;
    for (int i = 0; i < d.size(); ++i) d[i] -= b[i];
    return lp_norm(d, q);
}

// Ordered pairs (i,j) with (w_i - w_j)(V_i - V_j) > tol: V fails to be a
// decreasing function of w at those pairs.
inline int comonotonicity_violations(const ScalarField& w, const ScalarField& V, double tol) {
    int count = 0;
    const int n = w.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((w[i] - w[j]) * (V[i] - V[j]) > tol) ++count;
    return count;
}

} // namespace detail

// Alternating minimization of lambda over the set: eigensolve at V_k, then
// exact linear minimization of the supporting functional to get V_{k+1}.
// Either half-step is an exact minimization, so the lambda history is
// nonincreasing up to inner-solver noise. The fixed-point residual
// ||V_k - linmin(|u_k|^p)||_q doubles as the optimality certificate.
inline OptResult minimize_over_set(const AdmissibleSet& set, const KernelAssembly& kernel,
                                   const SolverConfig& cfg, const OuterConfig& outer,
                                   const ScalarField* V_init = nullptr) {
    const double q = kernel.params.q;
    if (const BallSet* ball = std::get_if<BallSet>(&set)) {
        detail::require(ball->M > 0.0, "minimize_over_set: ball radius must be positive");
        detail::require(ball->q == q, "minimize_over_set: ball exponent differs from params.q");
    }

    ScalarField V(kernel.grid, 0.0);
    if (const RearrangementSet* rearr = std::get_if<RearrangementSet>(&set)) {
        detail::require(rearr->V0.grid == kernel.grid,
                        "minimize_over_set: V0 on a different grid");
        V = rearr->V0;
    }
    if (V_init != nullptr) {
        detail::require(V_init->grid == kernel.grid, "minimize_over_set: V_init grid mismatch");
        if (const BallSet* ball = std::get_if<BallSet>(&set)) {
            detail::require(lp_norm(*V_init, ball->q) <= ball->M * (1.0 + 1e-12),
                            "minimize_over_set: V_init outside the ball");
        } else {
            const RearrangementSet& rearr = std::get<RearrangementSet>(set);
            std::vector<double> a = V_init->values, b = rearr.V0.values;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            detail::require(a == b, "minimize_over_set: V_init is not a rearrangement of V0");
        }
        V = *V_init;
    }

    OptResult result;
    result.direction = OptDirection::Min;

    const ScalarField* warm = nullptr;
    EigenPair pair;
    double prev_lambda = std::numeric_limits<double>::quiet_NaN();
    const bool is_rearr = std::holds_alternative<RearrangementSet>(set);

    for (int k = 0; k < outer.max_iters; ++k) {
        EnergyContext ctx(kernel, detail::with_shift(V, outer.potential_shift));
        pair = solve_first_eigenpair(ctx, cfg, warm);
        result.iterations = k + 1;
        if (!pair.converged) break; // abort with partial history

        const ScalarField w = detail::power_field(pair.u, kernel.params.p);
        LinearMinimizeResult next = linear_minimize_over_set(w, set);
        const double v_change = detail::q_distance(next.V, V, q);
        const double opt_res =
            is_rearr ? static_cast<double>(detail::comonotonicity_violations(w, V, outer.tol_mono))
                     : v_change;
        result.history.push_back({k, pair.lambda, opt_res, lp_norm(V, q)});

        const bool lambda_stalled =
            k > 0 &&
            std::abs(pair.lambda - prev_lambda) <= outer.tol_lambda * std::max(1.0, std::abs(pair.lambda));
        const bool fixed_point = is_rearr ? (v_change == 0.0) : (v_change <= outer.tol_fp);
        if (fixed_point || lambda_stalled || v_change <= outer.tol_V) {
            result.converged = is_rearr ? (v_change == 0.0 || opt_res == 0.0) : fixed_point;
            result.optimality_residual = opt_res;
            result.V_opt = V;
            result.pair = pair;
            return result;
        }

        prev_lambda = pair.lambda;
        V = std::move(next.V);
        warm = &pair.u;
    }

    // Ran out of iterations or the inner solve failed; report the last state.
    result.V_opt = V;
    result.pair = pair;
    if (!result.history.empty()) result.optimality_residual = result.history.back().opt_residual;
    return result;
}

// Maximization of lambda over the q-ball of radius M: projected supergradient
// ascent V <- Pi_ball(V + t_k |u_V|^p), t_k = t0/sqrt(k+1), with a fixed-point
// accelerator candidate M z/||z||_q (z = w^{1/(q-1)}) accepted only when it
// improves lambda. Stops when the fixed-point residual meets tol_fp; the final
// iterate is projected onto the nonnegative q-sphere of radius M.
inline OptResult maximize_over_ball(const BallSet& ball, const KernelAssembly& kernel,
                                    const SolverConfig& cfg, const OuterConfig& outer,
                                    const ScalarField* V_init = nullptr) {
    detail::require(ball.M > 0.0, "maximize_over_ball: radius must be positive");
    detail::require(ball.q == kernel.params.q,
                    "maximize_over_ball: ball exponent differs from params.q");
    const double q = ball.q;
    const double M = ball.M;
    const double p = kernel.params.p;

    auto project_ball = [&](ScalarField V) {
        const double nrm = lp_norm(V, q);
        if (nrm > M)
            for (double& v : V.values) v *= M / nrm;
        return V;
    };
    // Fixed-point candidate from the optimality condition |u|^p = C |V|^{q-1}.
    auto fixed_point_map = [&](const ScalarField& w) -> std::optional<ScalarField> {
        ScalarField z(w.grid);
        for (int i = 0; i < w.size(); ++i) z[i] = std::pow(w[i], 1.0 / (q - 1.0));
        const double nz = lp_norm(z, q);
        if (nz == 0.0) return std::nullopt;
        for (double& v : z.values) v *= M / nz;
        return z;
    };

    ScalarField V(kernel.grid, 0.0);
    if (V_init != nullptr) {
        detail::require(V_init->grid == kernel.grid, "maximize_over_ball: V_init grid mismatch");
        V = project_ball(*V_init);
    }

    OptResult result;
    result.direction = OptDirection::Max;

    auto solve_at = [&](const ScalarField& Vx, const ScalarField* warm) {
        EnergyContext ctx(kernel, detail::with_shift(Vx, outer.potential_shift));
        return solve_first_eigenpair(ctx, cfg, warm);
    };

    EigenPair pair = solve_at(V, nullptr);
    if (!pair.converged) {
        result.V_opt = V;
        result.pair = pair;
        result.iterations = 1;
        return result;
    }

    ScalarField best_V = V;
    EigenPair best_pair = pair;
    bool fp_met = false;

    for (int k = 0; k < outer.max_iters; ++k) {
        const ScalarField w = detail::power_field(pair.u, p);
        const std::optional<ScalarField> fp = fixed_point_map(w);
        const double fp_res = fp ? detail::q_distance(V, *fp, q)
                                 : std::numeric_limits<double>::infinity();
        result.history.push_back({k, pair.lambda, fp_res, lp_norm(V, q)});
        result.iterations = k + 1;

        if (pair.lambda > best_pair.lambda) {
            best_V = V;
            best_pair = pair;
        }
        if (fp_res <= outer.tol_fp) {
            best_V = V;
            best_pair = pair;
            fp_met = true;
            break;
        }

        bool stepped = false;
        if (fp) {
            EigenPair fp_pair = solve_at(*fp, &pair.u);
            if (fp_pair.converged && fp_pair.lambda > pair.lambda) {
                V = *fp;
                pair = std::move(fp_pair);
                stepped = true;
            }
        }
        if (!stepped) {
            ScalarField next = V;
            const double t = outer.t0 / std::sqrt(static_cast<double>(k) + 1.0);
            for (int i = 0; i < next.size(); ++i) next[i] += t * w[i];
            next = project_ball(std::move(next));
            EigenPair next_pair = solve_at(next, &pair.u);
            if (!next_pair.converged) break; // abort with partial history
            V = std::move(next);
            pair = std::move(next_pair);
        }
    }

    // Ascent directions are nonnegative, so negative parts can only come from
    // the initialization; clamp and rescale onto the nonnegative sphere.
    ScalarField V_final = best_V;
    for (double& v : V_final.values) v = std::max(v, 0.0);
    const double nrm = lp_norm(V_final, q);
    if (nrm > 0.0) {
        for (double& v : V_final.values) v *= M / nrm;
        if (detail::q_distance(V_final, best_V, q) > 0.0) {
            best_pair = solve_at(V_final, &best_pair.u);
        }
    }

    result.V_opt = std::move(V_final);
    result.pair = std::move(best_pair);
    const ScalarField w_final = detail::power_field(result.pair.u, p);
    if (const std::optional<ScalarField> fp = fixed_point_map(w_final)) {
        result.optimality_residual = detail::q_distance(result.V_opt, *fp, q);
    }
    result.converged = fp_met && result.pair.converged &&
                       result.optimality_residual <= outer.tol_fp;
    return result;
}

struct ConcavityReport {
    int n_checked = 0;
    int n_violations = 0;
    double worst_gap = 0.0; // most negative slack seen
    bool pass = false;
};

// Samples (V, W, t) and checks lambda(tV + (1-t)W) >= t lambda(V) + (1-t) lambda(W)
// up to 10x the inner residual tolerance.
inline ConcavityReport concavity_check(const KernelAssembly& kernel, const SolverConfig& cfg,
                                       int n_pairs, std::uint64_t seed, double amplitude = 2.0) {
    detail::require(n_pairs >= 1, "concavity_check: n_pairs must be at least 1");
    const double tol_cc = 10.0 * cfg.tol_res;
    UniformRng rng(seed);

    ConcavityReport report;
    for (int c = 0; c < n_pairs; ++c) {
        ScalarField V(kernel.grid), W(kernel.grid), mix(kernel.grid);
        for (int i = 0; i < V.size(); ++i) V[i] = rng.next(-amplitude, amplitude);
        for (int i = 0; i < W.size(); ++i) W[i] = rng.next(-amplitude, amplitude);
        const double t = rng.next(0.05, 0.95);
        for (int i = 0; i < mix.size(); ++i) mix[i] = t * V[i] + (1.0 - t) * W[i];

        EnergyContext ctx_v(kernel, V), ctx_w(kernel, W), ctx_m(kernel, mix);
        const double lam_v = solve_first_eigenpair(ctx_v, cfg).lambda;
        const double lam_w = solve_first_eigenpair(ctx_w, cfg).lambda;
        const double lam_m = solve_first_eigenpair(ctx_m, cfg).lambda;

        const double slack = lam_m - (t * lam_v + (1.0 - t) * lam_w);
        report.worst_gap = std::min(report.worst_gap, slack);
        if (slack < -tol_cc) ++report.n_violations;
        ++report.n_checked;
    }
    report.pass = report.n_violations == 0;
    return report;
}

struct ContinuityReport {
    std::vector<double> t_values;
    std::vector<double> differences; // |lambda(V + tD) - lambda(V)|
    bool pass = false;
};

// lambda(V + tD) for shrinking t; differences must decrease to zero up to
// solver noise.
inline ContinuityReport continuity_probe(const KernelAssembly& kernel, const ScalarField& V,
                                         const ScalarField& D, const SolverConfig& cfg) {
    detail::require(std::abs(lp_norm(D, kernel.params.q) - 1.0) <= 1e-8,
                    "continuity_probe: direction must have unit q-norm");
    const double noise = 10.0 * cfg.tol_res;

    EnergyContext ctx(kernel, V);
    EigenPair base = solve_first_eigenpair(ctx, cfg);

    ContinuityReport report;
    report.t_values = {1e-1, 1e-2, 1e-3};
    for (double t : report.t_values) {
        ScalarField Vt = V;
        for (int i = 0; i < Vt.size(); ++i) Vt[i] += t * D[i];
        EnergyContext ctx_t(kernel, Vt);
        EigenPair shifted = solve_first_eigenpair(ctx_t, cfg, &base.u);
        report.differences.push_back(std::abs(shifted.lambda - base.lambda));
    }
    report.pass = true;
    for (std::size_t i = 1; i < report.differences.size(); ++i)
        if (report.differences[i] > report.differences[i - 1] + noise) report.pass = false;
    return report;
}

} // namespace fracspec

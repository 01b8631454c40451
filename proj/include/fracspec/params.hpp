// Fractional problem parameters and derived exponents.
#pragma once

#include <cmath>

#include "fracspec/common.hpp"

namespace fracspec {

// Order s in (0,1), integrability p in (1,inf), potential exponent q with
// q > max(1, 1/(s*p)). sigma = s*p is the kernel decay exponent: the pair
// interaction density is |x-y|^{-(1+sigma)}.
struct FracParams {
    double s;
    double p;
    double q;
    double sigma;   // s * p
    double q_conj;  // q / (q - 1)

    FracParams(double s_, double p_, double q_) : s(s_), p(p_), q(q_) {
        detail::require(std::isfinite(s) && 0.0 < s && s < 1.0, "FracParams: s must lie in (0,1)");
        detail::require(std::isfinite(p) && p > 1.0, "FracParams: p must exceed 1");
        sigma = s * p;
        detail::require(std::isfinite(q) && q > 1.0 && q > 1.0 / sigma,
                        "FracParams: q must exceed max(1, 1/(s*p))");
        q_conj = q / (q - 1.0);
    }
};

} // namespace fracspec

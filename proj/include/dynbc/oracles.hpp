#pragma once

#include <cmath>
#include <stdexcept>

#include "dynbc/special.hpp"

// Closed-form reference solutions, written directly from the erf reductions
// and kept independent of the operator code (the only shared primitive is
// erf itself). They serve as ground truth for the generic semigroup action,
// the solver and the rate experiments.

namespace dynbc {
namespace oracle {

struct StepResponse {
    double value = 0.0; // the semigroup value itself
    double scale = 0.0; // the sqrt(eps/t)-type prefactor
    double shape = 0.0; // value / scale; tends to 1 as eps -> 0
};

// Half-line, heat semigroup at time t/eps applied to the step datum 1_{x>b}:
//
//   value = (1/sqrt(pi)) ∫ e^{-z^2} dz  over  z in sqrt(eps/4t)·(b-x, b+x)
//         = x sqrt(eps/(pi t)) · shape
inline StepResponse step_response_halfline(double eps, double t, double x, double b) {
    if (!(t > 0.0) || !(b > 0.0) || x < 0.0) throw std::domain_error("step response: bad arguments");
    StepResponse r;
    const double a = std::sqrt(eps / (4.0 * t));
    r.value = 0.5 * (erf(a * (b + x)) - erf(a * (b - x)));
    r.scale = x * std::sqrt(eps / (pi * t));
    r.shape = x > 0.0 ? r.value / r.scale
                      : exp_clamped(-a * a * b * b); // limiting ratio as x -> 0
    return r;
}

// Exterior ball, semigroup at t/eps applied to (1/rho)·1_{rho>b}:
//
//   value = (1/(r sqrt(pi))) ∫ e^{-z^2} dz over z in ((b-r)/2, (b+r-2)/2)·sqrt(eps/t)
//         = ((r-1)/(r sqrt(pi))) sqrt(eps/t) · shape
inline StepResponse step_response_ball(double eps, double t, double r, double b) {
    if (!(t > 0.0) || !(b > 1.0) || r < 1.0) throw std::domain_error("step response: bad arguments");
    StepResponse o;
    const double a = std::sqrt(eps / (4.0 * t));
    o.value = std::sqrt(pi) / 2.0 * (erf(a * (b + r - 2.0)) - erf(a * (b - r))) / (r * std::sqrt(pi));
    o.scale = (r - 1.0) / (r * std::sqrt(pi)) * std::sqrt(eps / t);
    o.shape = r > 1.0 ? o.value / o.scale : exp_clamped(-a * a * (b - 1.0) * (b - 1.0));
    return o;
}

// Exterior ball, step datum 1_{rho>b}: the full finite-time expression and its
// long-time limit 1 - 1/r.
inline double step_ball_finite_time(double t, double r, double b) {
    if (!(t > 0.0) || !(b > 1.0) || !(r >= 1.0)) throw std::domain_error("bad arguments");
    const double s = 2.0 * std::sqrt(t);
    const double g1 = exp_clamped(-(b - r) * (b - r) / (4.0 * t));
    const double g2 = exp_clamped(-(b + r - 2.0) * (b + r - 2.0) / (4.0 * t));
    return std::sqrt(t) / (r * std::sqrt(pi)) * (g1 - g2) + 0.5 * erfc((b - r) / s) +
           (r - 2.0) / (2.0 * r) * erfc((b + r - 2.0) / s);
}

inline double long_time_exterior_limit(double r) {
    if (!(r >= 1.0)) throw std::domain_error("bad radius");
    return 1.0 - 1.0 / r;
}

// Exterior ball, constant datum 1: 1 - erfc((r-1)/(2 sqrt(t)))/r
inline double const_data_ball(double t, double r) {
    if (!(t > 0.0) || !(r >= 1.0)) throw std::domain_error("bad arguments");
    return 1.0 - erfc((r - 1.0) / (2.0 * std::sqrt(t))) / r;
}

} // namespace oracle
} // namespace dynbc

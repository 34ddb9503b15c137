#pragma once

#include <cmath>
#include <stdexcept>

#include "dynbc/domain.hpp"
#include "dynbc/special.hpp"

// Pointwise closed-form kernels.
//
// Half-line Dirichlet heat kernel (method of images):
//
//   G(t; x, y) = (4 pi t)^{-1/2} ( exp(-(x-y)^2/4t) - exp(-(x+y)^2/4t) )
//
// Radial exterior-ball heat kernel, from the fact that r·u(r,t) solves the
// one-dimensional heat equation on (1, inf) with a Dirichlet condition at 1:
//
//   G_B(t; r, rho) = (rho / (r sqrt(4 pi t))) ( exp(-(r-rho)^2/4t)
//                                             - exp(-(r+rho-2)^2/4t) )
//
// Boundary semigroup (the solution operator of the harmonic problem with the
// dynamical boundary condition): psi/(r e^t) on the exterior ball; constants
// are fixed on the half-space (lateral data are constant in scope).

namespace dynbc {

inline double heat_kernel_halfline(double t, double x, double y) {
    if (!(t > 0.0)) throw std::domain_error("heat kernel needs t > 0");
    if (x < 0.0 || y < 0.0) throw std::domain_error("heat kernel arguments outside the half-line");
    const double a = exp_clamped(-(x - y) * (x - y) / (4.0 * t));
    const double b = exp_clamped(-(x + y) * (x + y) / (4.0 * t));
    return (a - b) / std::sqrt(4.0 * pi * t);
}

inline double heat_kernel_ball_radial(double t, double r, double rho) {
    if (!(t > 0.0)) throw std::domain_error("heat kernel needs t > 0");
    if (r < 1.0 || rho < 1.0) throw std::domain_error("heat kernel arguments outside the exterior ball");
    const double a = exp_clamped(-(r - rho) * (r - rho) / (4.0 * t));
    const double b = exp_clamped(-(r + rho - 2.0) * (r + rho - 2.0) / (4.0 * t));
    return rho * (a - b) / (r * std::sqrt(4.0 * pi * t));
}

inline double s2_kernel_ball(double psi, double r, double t) {
    if (r < 1.0) throw std::domain_error("exterior-ball point needs r >= 1");
    if (t < 0.0) throw std::domain_error("boundary semigroup needs t >= 0");
    return psi / (r * std::exp(t));
}

inline double s2_halfspace_constant(double psi, double /*t*/) {
    return psi; // normalized so that constants are fixed
}

inline double boundary_semigroup_at(const Geometry& g, double psi, double x, double t) {
    return g.is_ball() ? s2_kernel_ball(psi, x, t) : s2_halfspace_constant(psi, t);
}

// harmonic lift of the constant boundary datum 1 (the t = 0 boundary
// semigroup profile): 1/r on the ball, 1 on the half-space
inline double lift_profile(const Geometry& g, double x) { return g.is_ball() ? 1.0 / x : 1.0; }

} // namespace dynbc

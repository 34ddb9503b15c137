#pragma once

#include <cmath>
#include <limits>

// Scalar building blocks shared by every kernel evaluation: the error
// function, a hard-underflow exponential, and the Gaussian segment moments
//
//     M_k(a,b;t) = / b
//                  |   z^k exp( -z^2 / (4t) ) dz ,   k = 0..3,  b may be +inf,
//                  / a
//
// through which every heat-kernel integral against piecewise-linear data
// reduces to closed form.

namespace dynbc {

inline constexpr double pi = 3.14159265358979323846;

// Exponential with the underflow policy: arguments below -745 give exactly 0.
inline double exp_clamped(double q) { return q < -745.0 ? 0.0 : std::exp(q); }

inline double erf(double x) { return std::erf(x); }
inline double erfc(double x) { return std::erfc(x); }

struct GaussSegmentMoments {
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
};

// Moments over [a, b], a <= b. The m0 path switches to erfc when both
// endpoints sit on one side of the origin, which keeps far-tail segments
// accurate instead of cancelling two erf values near 1.
inline GaussSegmentMoments gauss_segment_moments(double a, double b, double t) {
    GaussSegmentMoments m;
    if (!(b > a)) return m;
    const double s = 2.0 * std::sqrt(t);
    const double root_pi_t = std::sqrt(pi * t);
    const bool b_inf = std::isinf(b);

    const double ea = exp_clamped(-a * a / (4.0 * t));
    const double eb = b_inf ? 0.0 : exp_clamped(-b * b / (4.0 * t));

    if (a >= 0.0) {
        m.m0 = root_pi_t * (erfc(a / s) - (b_inf ? 0.0 : erfc(b / s)));
    } else if (!b_inf && b <= 0.0) {
        m.m0 = root_pi_t * (erfc(-b / s) - erfc(-a / s));
    } else {
        m.m0 = root_pi_t * ((b_inf ? 1.0 : erf(b / s)) - erf(a / s));
    }

    const double b_eb = b_inf ? 0.0 : b * eb;
    const double b2_eb = b_inf ? 0.0 : b * b * eb;
    m.m1 = 2.0 * t * (ea - eb);
    m.m2 = 2.0 * t * m.m0 - 2.0 * t * (b_eb - a * ea);
    m.m3 = 4.0 * t * m.m1 - 2.0 * t * (b2_eb - a * a * ea);
    return m;
}

} // namespace dynbc

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynbc/special.hpp"

// Composite Gauss–Legendre quadrature for the time integrals.
//
// Every time integral in this project has at most the two endpoint weights
// s^{-1/2} (at s = 0) and structure in t - s (at s = t). They are removed by
// the substitutions s = sigma^2 on [0, t/2] and s = t - w^2 on [t/2, t]; the
// substituted integrands are piecewise smooth, with breakpoints only at the
// trace-grid cells and at the multiplicative scale of erf(c/w)-type factors,
// which the dyadic panels toward w = 0 resolve at every scale.
//
// `QuadratureConfig::refinement` doubles the per-panel node count and tightens
// the dyadic floor; reported values must move by < 1e-8 under one refinement.

namespace dynbc {

struct QuadratureConfig {
    int nodes_per_panel = 16;
    int refinement = 0;

    int nodes() const { return nodes_per_panel << refinement; }

    QuadratureConfig refined() const {
        QuadratureConfig c = *this;
        c.refinement += 1;
        return c;
    }
};

struct GaussRule {
    std::vector<double> x; // nodes on (-1, 1)
    std::vector<double> w;
};

// Classic Newton-on-Legendre construction, cached per order.
inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

template <class F>
double gl_integrate(const F& f, double a, double b, int n) {
    const GaussRule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += r.w[i] * f(mid + half * r.x[i]);
    return acc * half;
}

// GL on each [breaks[i], breaks[i+1]]
template <class F>
double gl_panels(const F& f, std::span<const double> breaks, int n) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) acc += gl_integrate(f, breaks[i], breaks[i + 1], n);
    return acc;
}

// Smooth integrand on [a, b]: panels capped at max_width.
template <class F>
double integrate_smooth(const F& f, double a, double b, const QuadratureConfig& cfg, double max_width = 0.25) {
    if (!(b > a)) return 0.0;
    std::vector<double> breaks;
    const int pieces = std::max(1, int(std::ceil((b - a) / max_width)));
    breaks.reserve(pieces + 1);
    for (int i = 0; i <= pieces; ++i) breaks.push_back(a + (b - a) * double(i) / pieces);
    return gl_panels(f, breaks, cfg.nodes());
}

namespace detail {

// ascending breakpoints in (lo, hi), clipped, deduplicated, endpoints added
inline std::vector<double> assemble_breaks(double lo, double hi, std::vector<double> pts) {
    std::vector<double> b;
    b.push_back(lo);
    std::sort(pts.begin(), pts.end());
    for (double p : pts)
        if (p > lo * (1.0 + 1e-14) + 1e-300 && p < hi && (b.empty() || p > b.back() * (1.0 + 1e-14)))
            b.push_back(p);
    b.push_back(hi);
    return b;
}

} // namespace detail

// Weight applied at time lag tau = t - s.
enum class LagWeightKind {
    One,          // 1
    ErfOfInvSqrt, // erf( c / sqrt(tau) )
    GaussOverSqrt // exp( -c^2 / tau ) / sqrt(tau)
};

struct LagWeight {
    LagWeightKind kind = LagWeightKind::One;
    double c = 0.0;

    double at_lag(double tau) const {
        switch (kind) {
            case LagWeightKind::One: return 1.0;
            case LagWeightKind::ErfOfInvSqrt: return erf(c / std::sqrt(tau));
            case LagWeightKind::GaussOverSqrt: return exp_clamped(-c * c / tau) / std::sqrt(tau);
        }
        return 0.0;
    }

    // W(w^2) with the 1/w factor of GaussOverSqrt pre-multiplied by the
    // substitution Jacobian: integrand on the right half is 2 g(t-w^2) Wbar(w)
    // with Wbar(w) = w·W(w^2).
    double wbar(double w) const {
        switch (kind) {
            case LagWeightKind::One: return w;
            case LagWeightKind::ErfOfInvSqrt: return w * erf(c / w);
            case LagWeightKind::GaussOverSqrt: return exp_clamped(-c * c / (w * w));
        }
        return 0.0;
    }
};

// / t
// |   g(s) · W(t-s) ds        g may blow up like s^{-1/2} at 0; g_sqrt(u) must
// / 0                         return  g(u^2)·u  (finite at u = 0).
//
// kinks_u: breakpoints of g in the u = sqrt(s) variable (may be empty).
template <class GSqrt>
double convolve_lag(const GSqrt& g_sqrt, std::span<const double> kinks_u, double t, const LagWeight& w,
                    const QuadratureConfig& cfg) {
    if (!(t > 0.0)) return 0.0;
    const double u_t = std::sqrt(t);
    const double u_mid = std::sqrt(0.5 * t);
    const int n = cfg.nodes();
    double acc = 0.0;

    // left half, s = sigma^2: integrand 2·g_sqrt(sigma)·W(t - sigma^2)
    {
        std::vector<double> pts;
        for (double k : kinks_u)
            if (k > 0.0 && k < u_mid) pts.push_back(k);
        // cap panel width so the lag weight is resolved even without kinks
        const double cap = u_mid / 8.0;
        std::vector<double> base = detail::assemble_breaks(0.0, u_mid, std::move(pts));
        std::vector<double> breaks;
        for (std::size_t i = 0; i + 1 < base.size(); ++i) {
            const int pieces = std::max(1, int(std::ceil((base[i + 1] - base[i]) / cap)));
            for (int p = 0; p < pieces; ++p)
                breaks.push_back(base[i] + (base[i + 1] - base[i]) * double(p) / pieces);
        }
        breaks.push_back(u_mid);
        auto f = [&](double sig) { return 2.0 * g_sqrt(sig) * w.at_lag(t - sig * sig); };
        acc += gl_panels(f, breaks, n);
    }

    // right half, s = t - w^2: integrand 2·g(t - w^2)·Wbar(w)/w·w = 2·g(t-w^2)·Wbar(w)
    {
        const double floor = u_t * (cfg.refinement > 0 ? 0.5e-12 : 1e-12);
        std::vector<double> pts;
        for (double k : kinks_u) {
            const double s = k * k;
            if (s > 0.5 * t && s < t) {
                const double wk = std::sqrt(t - s);
                if (wk > floor) pts.push_back(wk);
            }
        }
        for (double d = 0.5 * u_mid; d > floor; d *= 0.5) pts.push_back(d);
        std::vector<double> breaks = detail::assemble_breaks(floor, u_mid, std::move(pts));
        auto f = [&](double ww) {
            const double s = t - ww * ww;
            const double u = std::sqrt(std::max(s, 0.0));
            const double g = u > 0.0 ? g_sqrt(u) / u : 0.0;
            return 2.0 * g * w.wbar(ww);
        };
        acc += gl_panels(f, breaks, n);
    }
    return acc;
}

// Closed-form Abel transform of a trace given by weighted nodal values:
//
//   A(t_i) = / t_i
//            |     h(s) (t_i - s)^{-1/2} ds ,    h(s) = m(sqrt(s)) / sqrt(s),
//            / 0
//
// with m piecewise linear on the u-grid (m frozen below the first node).
// Per cell, with m = alpha + beta·nu,
//
//   / q                                       [ asin(nu/u) ]q           [ sqrt(u^2-nu^2) ]q
//   |  2 (alpha + beta nu) / sqrt(u^2-nu^2) d nu = 2 alpha [          ]  - 2 beta [                ]
//   / p                                       [            ]p           [                ]p
//
// evaluated in cancellation-free form.
struct AbelTransform {
    // u_grid: 0 < u_1 < ... < u_n; m: weighted values at u_grid; head0: the
    // anchor of m at u = 0 (linear head cell from (0, head0) to (u_1, m[0])).
    static std::vector<double> at_nodes(std::span<const double> u_grid, std::span<const double> m,
                                        double head0) {
        const std::size_t n = u_grid.size();
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = u_grid[i];
            double acc = cell(0.0, u_grid[0], head0, m[0], u);
            for (std::size_t j = 0; j + 1 <= i; ++j)
                acc += cell(u_grid[j], u_grid[j + 1], m[j], m[j + 1], u);
            out[i] = acc;
        }
        return out;
    }

    static double cell(double p, double q, double mp, double mq, double u) {
        // asin(q/u) - asin(p/u) without cancellation near the upper endpoint
        const double sp = std::sqrt(std::max((u - p) * (u + p), 0.0));
        const double sq = std::sqrt(std::max((u - q) * (u + q), 0.0));
        const double num = u * u * (q - p) * (q + p);
        const double den = q * sp + p * sq;
        double dasin;
        if (den > 0.0) {
            dasin = std::asin(std::clamp(num / (den * u * u), -1.0, 1.0));
        } else { // p = 0, q = u
            dasin = std::asin(std::clamp(q / u, -1.0, 1.0));
        }
        const double beta = (q > p) ? (mq - mp) / (q - p) : 0.0;
        const double alpha = mp - beta * p;
        const double dsqrt = (sp + sq > 0.0) ? (q - p) * (q + p) / (sp + sq) : 0.0; // sp - sq
        return 2.0 * alpha * dasin + 2.0 * beta * dsqrt;
    }
};

} // namespace dynbc

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynbc/domain.hpp"
#include "dynbc/kernels.hpp"
#include "dynbc/quadrature.hpp"
#include "dynbc/special.hpp"

// Integral operators on sampled data.
//
// The Dirichlet heat semigroup acts on piecewise-linear data in closed form:
// on the ball every integral reduces, with z = rho - r (direct part) and
// z = rho + r - 2 (image part), to
//
//   / .
//   |  (c0 + c1 z + c2 z^2) exp(-z^2/(4 tau)) dz
//   / .
//
// i.e. to Gaussian segment moments, so there is no spatial quadrature at all;
// the analytic tails (f = c or f = K/x past the last node) contribute
// half-infinite segments of the same shape. The half-line case is identical
// with z = y -/+ x and first-order polynomials.
//
// Time integrals (the Duhamel terms below) are one-dimensional convolutions
// against erf / Gaussian lag weights and are handled by convolve_lag.
//
// Conventions: the boundary trace h(t) stores the *normal* derivative
// (∂_ν = -d/dr on the ball, -d/dx on the half-line). The trace forcing is
//
//   F2(x,t) = -H(t) · lift_profile(x),   H(t) = h(t) - ∫_0^t h(s) e^{s-t} ds
//
// on the ball (the exponential term drops on the half-line, where the
// boundary semigroup fixes constants, so H = h).

namespace dynbc {

namespace detail {

// ∫ (c0 + c1 z + c2 z^2) exp(-z^2/4tau) dz over (lo, hi)
struct Piece {
    double c0 = 0, c1 = 0, c2 = 0;
    double lo = 0, hi = 0;

    double value(double tau) const {
        auto m = gauss_segment_moments(lo, hi, tau);
        return c0 * m.m0 + c1 * m.m1 + c2 * m.m2;
    }
    // same polynomial times an extra factor z
    double z_value(double tau) const {
        auto m = gauss_segment_moments(lo, hi, tau);
        return c0 * m.m1 + c1 * m.m2 + c2 * m.m3;
    }
};

inline void line_coeffs(const SampledFunction& f, std::size_t j, double& alpha, double& beta) {
    const double r0 = f.grid.nodes[j], r1 = f.grid.nodes[j + 1];
    beta = (f.values[j + 1] - f.values[j]) / (r1 - r0);
    alpha = f.values[j] - beta * r0;
}

template <class Emit>
void ball_pieces(const SampledFunction& f, double r, const Emit& emit) {
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < f.grid.size(); ++j) {
        double alpha, beta;
        line_coeffs(f, j, alpha, beta);
        const double r0 = f.grid.nodes[j], r1 = f.grid.nodes[j + 1];
        // rho f(rho) = alpha rho + beta rho^2 rewritten in z
        emit(Piece{alpha * r + beta * r * r, alpha + 2.0 * beta * r, beta, r0 - r, r1 - r}, +1);
        const double q = 2.0 - r;
        emit(Piece{alpha * q + beta * q * q, alpha + 2.0 * beta * q, beta, r0 + r - 2.0, r1 + r - 2.0}, -1);
    }
    const double R = f.grid.r_max();
    switch (f.tail.kind) {
        case TailKind::Zero: break;
        case TailKind::Constant: {
            const double c = f.tail.value;
            emit(Piece{c * r, c, 0.0, R - r, inf}, +1);
            emit(Piece{c * (2.0 - r), c, 0.0, R + r - 2.0, inf}, -1);
            break;
        }
        case TailKind::DecayLikeOneOverR: {
            const double k = f.tail.value; // rho f = K on the tail
            emit(Piece{k, 0.0, 0.0, R - r, inf}, +1);
            emit(Piece{k, 0.0, 0.0, R + r - 2.0, inf}, -1);
            break;
        }
    }
}

template <class Emit>
void halfline_pieces(const SampledFunction& f, double x, const Emit& emit) {
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < f.grid.size(); ++j) {
        double alpha, beta;
        line_coeffs(f, j, alpha, beta);
        const double y0 = f.grid.nodes[j], y1 = f.grid.nodes[j + 1];
        emit(Piece{alpha + beta * x, beta, 0.0, y0 - x, y1 - x}, +1);
        emit(Piece{alpha - beta * x, beta, 0.0, y0 + x, y1 + x}, -1);
    }
    const double R = f.grid.r_max();
    switch (f.tail.kind) {
        case TailKind::Zero: break;
        case TailKind::Constant: {
            const double c = f.tail.value;
            emit(Piece{c, 0.0, 0.0, R - x, inf}, +1);
            emit(Piece{c, 0.0, 0.0, R + x, inf}, -1);
            break;
        }
        case TailKind::DecayLikeOneOverR:
            throw std::invalid_argument("decay tails are exterior-ball data; sample them explicitly on the half-line");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Dirichlet heat semigroup on sampled data (value, spatial slope, trace)
// ---------------------------------------------------------------------------

inline double dirichlet_heat_at(const Geometry& g, double tau, const SampledFunction& f, double x) {
    if (!(tau > 0.0)) throw std::domain_error("heat semigroup needs t > 0");
    if (!g.contains(x)) throw std::domain_error("point outside the domain");
    double acc = 0.0;
    auto emit = [&](const detail::Piece& p, int sign) { acc += sign * p.value(tau); };
    if (g.is_ball()) {
        detail::ball_pieces(f, x, emit);
        return acc / (x * std::sqrt(4.0 * pi * tau));
    }
    detail::halfline_pieces(f, x, emit);
    return acc / std::sqrt(4.0 * pi * tau);
}

// d/dr (ball) or d/dx (half-line) of the semigroup action
inline double dirichlet_heat_slope_at(const Geometry& g, double tau, const SampledFunction& f, double x) {
    if (!(tau > 0.0)) throw std::domain_error("heat semigroup needs t > 0");
    if (!g.contains(x)) throw std::domain_error("point outside the domain");
    double zacc = 0.0;
    auto emit_z = [&](const detail::Piece& p, int) { zacc += p.z_value(tau); }; // both parts enter with +
    if (g.is_ball()) {
        double vacc = 0.0;
        auto emit_v = [&](const detail::Piece& p, int sign) { vacc += sign * p.value(tau); };
        detail::ball_pieces(f, x, emit_v);
        detail::ball_pieces(f, x, emit_z);
        const double norm = x * std::sqrt(4.0 * pi * tau);
        const double value = vacc / norm;
        return -value / x + zacc / (2.0 * tau * norm);
    }
    detail::halfline_pieces(f, x, emit_z);
    return zacc / (2.0 * tau * std::sqrt(4.0 * pi * tau));
}

// ∂_ν at the boundary (the trace the fixed point iterates on)
inline double dirichlet_heat_normal_derivative(const Geometry& g, double tau, const SampledFunction& f) {
    return -dirichlet_heat_slope_at(g, tau, f, g.boundary());
}

inline SampledFunction apply_dirichlet_heat(const Geometry& g, double tau, const SampledFunction& f,
                                            const SpatialGrid& out) {
    std::vector<double> vals(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) vals[i] = dirichlet_heat_at(g, tau, f, out.nodes[i]);
    Tail tail = f.tail;
    if (tail.kind == TailKind::DecayLikeOneOverR) {
        // |x (S f)(x)| <= sup |rho f| is preserved; keep the same coefficient
        tail = Tail::decay(std::max(f.tail.value, f.sup_weighted()));
    }
    return SampledFunction(out, std::move(vals), tail);
}

// heat semigroup applied to the harmonic lift profile (1/r resp. 1)
inline double lift_heat_at(const Geometry& g, double tau, double x) {
    if (!(tau > 0.0)) throw std::domain_error("heat semigroup needs t > 0");
    if (g.is_ball()) return erf((x - 1.0) / (2.0 * std::sqrt(tau))) / x;
    return erf(x / (2.0 * std::sqrt(tau)));
}

inline double lift_heat_slope_at(const Geometry& g, double tau, double x) {
    const double root = std::sqrt(pi * tau);
    if (g.is_ball()) {
        const double d = x - 1.0;
        return -erf(d / (2.0 * std::sqrt(tau))) / (x * x) + exp_clamped(-d * d / (4.0 * tau)) / (x * root);
    }
    return exp_clamped(-x * x / (4.0 * tau)) / root;
}

// ---------------------------------------------------------------------------
// Problem data
// ---------------------------------------------------------------------------

struct ProblemData {
    Geometry geometry;
    double eps = 0.1;
    SampledFunction phi; // interior datum
    double phi_b = 0.0;  // constant boundary datum

    ProblemData() = default;
    ProblemData(Geometry g, double e, SampledFunction f, double pb)
        : geometry(g), eps(e), phi(std::move(f)), phi_b(pb) {
        const double cap = g.is_ball() ? 1.0 / std::sqrt(pi) : 1.0;
        if (!(eps > 0.0) || !(eps < cap))
            throw std::invalid_argument("diffusion parameter outside the admissible range");
        if (phi.grid.nodes.front() != g.boundary())
            throw std::invalid_argument("data grid must start at the boundary");
    }

    // harmonic lift of the boundary datum, = boundary semigroup at time 0
    double lift_at(double x) const { return phi_b * lift_profile(geometry, x); }

    // shifted interior datum phi - lift (the heat part starts from this)
    double phi_shifted_at(double x) const { return phi(x) - lift_at(x); }

    double sup_phi_shifted() const {
        return phi.sup_norm() + std::abs(phi_b); // cheap upper bound, exact enough for the ball constant
    }

    double sup_weighted_phi_shifted() const { return phi.sup_weighted() + std::abs(phi_b); }

    // S(t/eps) applied to the shifted datum
    double initial_term_at(double t, double x) const {
        const double tau = t / eps;
        return dirichlet_heat_at(geometry, tau, phi, x) - phi_b * lift_heat_at(geometry, tau, x);
    }

    double initial_term_slope_at(double t, double x) const {
        const double tau = t / eps;
        return dirichlet_heat_slope_at(geometry, tau, phi, x) - phi_b * lift_heat_slope_at(geometry, tau, x);
    }

    // ∂_ν of the initial term at the boundary — the first Picard iterate
    double initial_trace_at(double t) const { return -initial_term_slope_at(t, geometry.boundary()); }

    // limit of the initial term as x -> inf (tail constant survives, lift dies on the ball)
    double initial_term_limit() const {
        return phi.limit_at_infinity() - (geometry.is_ball() ? 0.0 : phi_b);
    }
};

// ---------------------------------------------------------------------------
// Trace workspace: the inner exponential convolution and weighted interpolants
// ---------------------------------------------------------------------------

class TraceWorkspace {
  public:
    TraceWorkspace(Geometry g, BoundaryTrace tr, const QuadratureConfig& cfg = {})
        : geom_(g), trace_(std::move(tr)) {
        const auto& t = trace_.grid.times;
        const std::size_t n = t.size();
        u_.resize(n);
        m_h_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            u_[i] = std::sqrt(t[i]);
            m_h_[i] = u_[i] * trace_.values[i];
        }
        if (geom_.is_ball()) march_inner(cfg);
    }

    const Geometry& geometry() const { return geom_; }
    const BoundaryTrace& trace() const { return trace_; }
    std::span<const double> kinks_u() const { return u_; }
    double horizon() const { return trace_.horizon(); }

    double h_at(double s) const { return trace_(s); }

    double mh_head() const { return trace_.weighted_head(); }

    // m_h(u) = u·h(u^2)
    double mh_at(double u) const { return interp(m_h_, u, mh_head()); }

    // J(t) = ∫_0^t h(s) e^{s-t} ds
    double exp_convolution(double t) const {
        if (!(t > 0.0)) return 0.0;
        const double ut = std::sqrt(t);
        auto f = [&](double nu) { return 2.0 * mh_at(nu) * std::exp(nu * nu - t); };
        if (!j_.empty() && ut >= u_[0]) {
            std::size_t k = 0;
            while (k + 1 < u_.size() && u_[k + 1] <= ut) ++k;
            const double base = j_[k] * std::exp(trace_.grid.times[k] - t);
            return base + (ut > u_[k] ? gl_integrate(f, u_[k], ut, 16) : 0.0);
        }
        // below the first node, or a workspace without the marched table:
        // integrate cell by cell from the origin
        double acc = 0.0, lo = 0.0;
        for (std::size_t i = 0; i < u_.size() && u_[i] < ut; ++i) {
            acc += gl_integrate(f, lo, u_[i], 16);
            lo = u_[i];
        }
        if (ut > lo) acc += gl_integrate(f, lo, ut, 16);
        return acc;
    }

    // ∫_0^t h(s) ds, exact for the weighted-linear interpolant
    double plain_integral(double t) const {
        if (!(t > 0.0)) return 0.0;
        const double ut = std::sqrt(t);
        double acc = 0.0, prev_u = 0.0, prev_m = mh_head();
        for (std::size_t i = 0; i < u_.size() && u_[i] <= ut; ++i) {
            acc += (prev_m + m_h_[i]) * (u_[i] - prev_u);
            prev_u = u_[i];
            prev_m = m_h_[i];
        }
        if (ut > prev_u) acc += (prev_m + mh_at(ut)) * (ut - prev_u);
        return acc;
    }

    // H(t) = h(t) - J(t): the trace forcing amplitude
    double big_h_at(double t) const {
        return h_at(t) - (geom_.is_ball() ? j_interp(t) : 0.0);
    }

    // u·H(u^2): the weighted integrand handed to convolve_lag
    double gH_sqrt(double u) const {
        double m = mh_at(u);
        if (geom_.is_ball()) m -= interp(m_j_, u, 0.0);
        return m;
    }

    double j_at_node(std::size_t i) const { return j_.empty() ? 0.0 : j_[i]; }

  private:
    void march_inner(const QuadratureConfig& cfg) {
        const auto& t = trace_.grid.times;
        const std::size_t n = t.size();
        j_.assign(n, 0.0);
        m_j_.assign(n, 0.0);
        const int gn = std::max(8, cfg.nodes() / 2);
        double prev_u = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = i == 0 ? 0.0 : j_[i - 1] * std::exp(t[i - 1] - t[i]);
            auto f = [&](double nu) { return 2.0 * mh_at(nu) * std::exp(nu * nu - t[i]); };
            acc += gl_integrate(f, prev_u, u_[i], gn);
            j_[i] = acc;
            m_j_[i] = u_[i] * acc;
            prev_u = u_[i];
        }
    }

    double j_interp(double t) const {
        if (j_.empty() || !(t > 0.0)) return 0.0;
        const double u = std::sqrt(t);
        return interp(m_j_, u, 0.0) / u;
    }

    double interp(const std::vector<double>& m, double u, double head0) const {
        if (m.empty()) return 0.0;
        if (u >= u_.back()) return m.back();
        if (u <= u_.front()) return head0 + (m.front() - head0) * (u / u_.front());
        auto it = std::upper_bound(u_.begin(), u_.end(), u);
        const std::size_t j = std::size_t(it - u_.begin());
        const double w = (u - u_[j - 1]) / (u_[j] - u_[j - 1]);
        return (1.0 - w) * m[j - 1] + w * m[j];
    }

    Geometry geom_;
    BoundaryTrace trace_;
    std::vector<double> u_, m_h_, j_, m_j_;
};

// ---------------------------------------------------------------------------
// Forcings and Duhamel integrals
// ---------------------------------------------------------------------------

// F1 = time derivative of the boundary semigroup of the datum
inline double forcing_datum(const Geometry& g, double phi_b, double x, double t) {
    if (!g.contains(x)) throw std::domain_error("point outside the domain");
    if (t < 0.0) throw std::domain_error("forcing needs t >= 0");
    return g.is_ball() ? -phi_b / (x * std::exp(t)) : 0.0;
}

// F2 assembled from the trace history
inline double forcing_trace(const Geometry& g, const TraceWorkspace& tw, double x, double t) {
    if (!(t > 0.0)) throw std::domain_error("forcing needs t > 0");
    if (t > tw.horizon() * (1.0 + 1e-12)) throw std::domain_error("trace shorter than requested time");
    return -tw.big_h_at(t) * lift_profile(g, x);
}

// D: Duhamel integral of the datum forcing through the heat semigroup
inline double duhamel_datum(const Geometry& g, double phi_b, double eps, double x, double t,
                            const QuadratureConfig& cfg = {}) {
    if (!(t > 0.0)) throw std::domain_error("Duhamel integral needs t > 0");
    if (!(eps > 0.0)) throw std::domain_error("Duhamel integral needs eps > 0");
    if (!g.contains(x)) throw std::domain_error("point outside the domain");
    if (!g.is_ball() || phi_b == 0.0) return 0.0;
    const LagWeight w{LagWeightKind::ErfOfInvSqrt, (x - 1.0) * std::sqrt(eps) / 2.0};
    auto g_sqrt = [](double u) { return u * std::exp(-u * u); };
    return -(phi_b / x) * convolve_lag(g_sqrt, {}, t, w, cfg);
}

inline double duhamel_datum_slope(const Geometry& g, double phi_b, double eps, double x, double t,
                                  const QuadratureConfig& cfg = {}) {
    if (!g.is_ball() || phi_b == 0.0) return 0.0;
    const double c = (x - 1.0) * std::sqrt(eps) / 2.0;
    auto g_sqrt = [](double u) { return u * std::exp(-u * u); };
    const double value = duhamel_datum(g, phi_b, eps, x, t, cfg);
    const double gauss = convolve_lag(g_sqrt, {}, t, LagWeight{LagWeightKind::GaussOverSqrt, c}, cfg);
    return -value / x - (phi_b * std::sqrt(eps) / (x * std::sqrt(pi))) * gauss;
}

// D-tilde: Duhamel integral of the trace forcing
inline double duhamel_trace(const Geometry& g, const TraceWorkspace& tw, double eps, double x, double t,
                            const QuadratureConfig& cfg = {}) {
    if (!(t > 0.0)) throw std::domain_error("Duhamel integral needs t > 0");
    if (!(eps > 0.0)) throw std::domain_error("Duhamel integral needs eps > 0");
    if (!g.contains(x)) throw std::domain_error("point outside the domain");
    if (t > tw.horizon() * (1.0 + 1e-12)) throw std::domain_error("trace shorter than requested time");
    const double d = x - g.boundary();
    const LagWeight w{LagWeightKind::ErfOfInvSqrt, d * std::sqrt(eps) / 2.0};
    auto g_sqrt = [&](double u) { return tw.gH_sqrt(u); };
    const double conv = convolve_lag(g_sqrt, tw.kinks_u(), t, w, cfg);
    return g.is_ball() ? -conv / x : -conv;
}

inline double duhamel_trace_slope(const Geometry& g, const TraceWorkspace& tw, double eps, double x, double t,
                                  const QuadratureConfig& cfg = {}) {
    if (!(t > 0.0)) throw std::domain_error("Duhamel integral needs t > 0");
    const double d = x - g.boundary();
    auto g_sqrt = [&](double u) { return tw.gH_sqrt(u); };
    const double gauss =
        convolve_lag(g_sqrt, tw.kinks_u(), t, LagWeight{LagWeightKind::GaussOverSqrt, d * std::sqrt(eps) / 2.0}, cfg);
    const double grad = -(std::sqrt(eps) / std::sqrt(pi)) * gauss;
    if (!g.is_ball()) return grad;
    const double value = duhamel_trace(g, tw, eps, x, t, cfg);
    return -value / x + grad / x;
}

// The fixed-point map: initial term minus the two Duhamel corrections.
// Its fixed point (as a map on boundary traces) defines the heat component v.
inline double fixed_point_map(const TraceWorkspace& v_trace, const ProblemData& d, double x, double t,
                              const QuadratureConfig& cfg = {}) {
    return d.initial_term_at(t, x) - duhamel_datum(d.geometry, d.phi_b, d.eps, x, t, cfg) -
           duhamel_trace(d.geometry, v_trace, d.eps, x, t, cfg);
}

inline double fixed_point_map_slope(const TraceWorkspace& v_trace, const ProblemData& d, double x, double t,
                                    const QuadratureConfig& cfg = {}) {
    return d.initial_term_slope_at(t, x) - duhamel_datum_slope(d.geometry, d.phi_b, d.eps, x, t, cfg) -
           duhamel_trace_slope(d.geometry, v_trace, d.eps, x, t, cfg);
}

} // namespace dynbc

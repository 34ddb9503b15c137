#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbc/operators.hpp"

// Fixed-point solution of the boundary-trace equation.
//
// The heat component v is the fixed point of
//
//   Q[v](x,t) = (initial term)(x,t) - D(x,t) - Dtilde[v](x,t),
//
// and both Duhamel corrections depend on v only through the boundary trace
// h(t) = ∂_ν v(boundary, t). Taking the normal derivative of Q at the
// boundary turns the problem into a scalar weakly-singular Volterra equation
//
//   h(t) = b(t) - sqrt(eps/pi) ∫_0^t H(s) (t-s)^{-1/2} ds,
//
//   b(t) = ∂_ν(initial term)(t)  [ - (phi_b sqrt(eps)/sqrt(pi)) W(t) on the ball ],
//   W(t) = ∫_0^t e^{-s} (t-s)^{-1/2} ds,
//   H    = h - ∫_0^t h(s) e^{s-t} ds   (ball),   H = h   (half-line),
//
// solved by Picard iteration on a grid graded like t_i = T (i/n)^2. The Abel
// convolution of the weighted-linear interpolant is evaluated in closed form,
// so the iteration itself carries no quadrature error. The harmonic component
// w and the full field u = v + w are reconstructed on demand.

namespace dynbc {

// contraction factor of the trace map on (0, T)
inline double contraction_factor(const Geometry& g, double eps, double horizon) {
    const double t = horizon;
    if (g.is_ball())
        return (eps * (1.0 + t) +
                std::sqrt(eps) * (std::sqrt(t) + 2.0 * t + 2.0 * t * std::sqrt(t))) *
               std::sqrt(pi);
    return (2.0 + std::sqrt(pi)) * std::sqrt(eps * t);
}

// a-priori bound for the weighted solution norm on the ball (valid for
// horizons <= min(1, T*) with q = contraction_factor < 1); c_duhamel is the
// calibrated constant of the Duhamel-datum bound ||D(.,t)|| <= C sqrt(eps t)|psi|
inline double ball_norm_bound(const ProblemData& d, double horizon, double c_duhamel) {
    const double q = contraction_factor(d.geometry, d.eps, horizon);
    if (!(q < 1.0)) throw std::domain_error("horizon too long for the a-priori bound");
    const double two_over_root_pi = 2.0 / std::sqrt(pi);
    return (d.phi.sup_norm() + (1.0 + two_over_root_pi + 2.0 * c_duhamel) * std::abs(d.phi_b) +
            two_over_root_pi * d.phi.sup_weighted()) /
           (1.0 - q);
}

struct SolverConfig {
    double horizon = 0.2;
    std::size_t trace_nodes = 256;
    int max_iterations = 200;
    double tolerance_xt = 1e-9;
    bool continuation = true;
    double forced_segment = 0.0; // > 0: chain horizons of at most this length
    bool start_from_zero = false;
    QuadratureConfig quad;
};

struct SolutionPair {
    ProblemData data;
    SolverConfig config;
    std::shared_ptr<const TraceWorkspace> workspace; // converged trace + inner convolution
    double q_bound = 0.0;                            // closed-form contraction factor (worst segment)
    double q_observed = 0.0;                         // max measured successive-residual ratio
    int iterations = 0;
    std::vector<double> residual_history;

    const BoundaryTrace& v_trace() const { return workspace->trace(); }

    double v(double x, double t) const { return fixed_point_map(*workspace, data, x, t, config.quad); }

    double v_slope(double x, double t) const {
        return fixed_point_map_slope(*workspace, data, x, t, config.quad);
    }

    // ∂_ν v at the boundary (interpolated converged trace)
    double dv_boundary(double t) const { return workspace->trace()(t); }

    double w(double x, double t) const {
        if (data.geometry.is_ball())
            return (data.phi_b * std::exp(-t) - workspace->exp_convolution(t)) / x;
        return data.phi_b - workspace->plain_integral(t);
    }

    double u(double x, double t) const { return v(x, t) + w(x, t); }

    // limit of v(x,t) as x -> infinity (enters the sup norms)
    double v_limit(double t) const {
        double lim = data.initial_term_limit();
        if (!data.geometry.is_ball()) lim += workspace->plain_integral(t); // Duhamel trace term survives
        return lim;
    }

    // ||v(.,t)||_inf over the probe radii (plus the infinity limit) and the
    // weighted energy record at time t
    EnergyRecord energy_at(double t, std::span<const double> probes) const {
        double sup_v = std::abs(v_limit(t));
        for (double x : probes) sup_v = std::max(sup_v, std::abs(v(x, t)));
        return make_energy_record(t, data.eps, sup_v, std::abs(dv_boundary(t)));
    }

    std::vector<EnergyRecord> energy_records(std::span<const double> times, std::span<const double> probes) const {
        std::vector<EnergyRecord> out;
        out.reserve(times.size());
        for (double t : times) out.push_back(energy_at(t, probes));
        return out;
    }

    double xt(std::span<const double> times, std::span<const double> probes) const {
        auto rec = energy_records(times, probes);
        return xt_norm(rec);
    }
};

namespace detail {

inline std::vector<double> abel_of_trace(const Geometry& g, const TimeGrid& grid,
                                         const std::vector<double>& h, const QuadratureConfig& quad) {
    const std::size_t n = grid.size();
    std::vector<double> u(n), m_h(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = std::sqrt(grid.times[i]);
        m_h[i] = u[i] * h[i];
    }
    BoundaryTrace tr(grid, h);
    std::vector<double> abel = AbelTransform::at_nodes(u, m_h, tr.weighted_head());
    if (g.is_ball()) {
        TraceWorkspace ws(g, std::move(tr), quad);
        std::vector<double> m_j(n);
        for (std::size_t i = 0; i < n; ++i) m_j[i] = u[i] * ws.j_at_node(i);
        std::vector<double> abel_j = AbelTransform::at_nodes(u, m_j, 0.0);
        for (std::size_t i = 0; i < n; ++i) abel[i] -= abel_j[i];
    }
    return abel;
}

} // namespace detail

inline SolutionPair solve(const ProblemData& data, const SolverConfig& cfg) {
    const Geometry& g = data.geometry;
    const double eps = data.eps;
    const double T = cfg.horizon;
    if (!(T > 0.0)) throw std::invalid_argument("solver horizon must be positive");

    TimeGrid grid = TimeGrid::graded(T, cfg.trace_nodes);
    const auto& times = grid.times;
    const std::size_t n = times.size();

    // segmentation: chain horizons when the full-interval factor is not safely < 1
    double segment_len = cfg.forced_segment > 0.0 ? cfg.forced_segment : T;
    if (cfg.forced_segment <= 0.0 && contraction_factor(g, eps, T) >= 0.9) {
        if (!cfg.continuation) throw std::runtime_error("horizon too long");
        while (segment_len > 1e-6 && contraction_factor(g, eps, segment_len) >= 0.5) segment_len *= 0.5;
    }

    // drive term b(t_i)
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = data.initial_trace_at(times[i]);
    if (g.is_ball() && data.phi_b != 0.0) {
        const double scale = data.phi_b * std::sqrt(eps / pi);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = times[i];
            auto ew = [&](double w) { return std::exp(w * w); };
            const double wt = 2.0 * std::exp(-t) * integrate_smooth(ew, 0.0, std::sqrt(t), cfg.quad, 0.2);
            b[i] -= scale * wt;
        }
    }

    std::vector<double> h(n, 0.0);
    if (!cfg.start_from_zero) h = b; // first Picard term (with the datum drive folded in)

    SolutionPair out;
    out.data = data;
    out.config = cfg;
    out.q_bound = 0.0;
    const double lag_scale = std::sqrt(eps / pi);

    std::size_t seg_lo = 0;
    double seg_start = 0.0;
    int total_iterations = 0;
    while (seg_lo < n) {
        const double seg_end = std::min(seg_start + segment_len, T);
        std::size_t seg_hi = seg_lo;
        while (seg_hi < n && times[seg_hi] <= seg_end * (1.0 + 1e-12)) ++seg_hi;
        if (seg_hi == seg_lo) seg_hi = seg_lo + 1;
        out.q_bound = std::max(out.q_bound, contraction_factor(g, eps, times[seg_hi - 1]));

        double prev_res = -1.0;
        bool converged = false;
        for (int it = 0; it < cfg.max_iterations; ++it) {
            std::vector<double> abel = detail::abel_of_trace(g, grid, h, cfg.quad);
            double res = 0.0;
            for (std::size_t i = seg_lo; i < seg_hi; ++i) {
                const double next = b[i] - lag_scale * abel[i];
                res = std::max(res, std::sqrt(times[i] / eps) * std::abs(next - h[i]));
                h[i] = next;
            }
            ++total_iterations;
            out.residual_history.push_back(res);
            if (prev_res > 100.0 * cfg.tolerance_xt && res > 0.0)
                out.q_observed = std::max(out.q_observed, res / prev_res);
            prev_res = res;
            if (res < cfg.tolerance_xt) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw std::runtime_error("fixed point did not converge; last residual " +
                                     std::to_string(out.residual_history.back()));
        seg_lo = seg_hi;
        seg_start = seg_end;
    }

    out.iterations = total_iterations;
    out.workspace = std::make_shared<TraceWorkspace>(g, BoundaryTrace(grid, h), cfg.quad);
    return out;
}

// w from the boundary semigroup and the trace history
inline double harmonic_component_at(const Geometry& g, const TraceWorkspace& tw, double phi_b, double x,
                                    double t) {
    if (!g.contains(x)) throw std::domain_error("point outside the domain");
    if (g.is_ball()) return (phi_b * std::exp(-t) - tw.exp_convolution(t)) / x;
    return phi_b - tw.plain_integral(t);
}

// -----------------------------------------------------------------------
// finite-difference consistency report for a solved pair
// -----------------------------------------------------------------------

struct ResidualProbes {
    double x_lo = 1.2, x_hi = 1.8;
    double t_lo = 0.1, t_hi = 0.2;
    int nx = 5, nt = 5;
    double h = 1e-3; // spatial step
    double k = 1e-4; // time step
};

struct ResidualReport {
    double max_interior = 0.0; // eps v_t - Lap v + eps(F1 + F2)
    double max_boundary = 0.0; // u_t + du/dnu at the boundary
    double max_w_harmonic = 0.0; // ball: deviation of r·w(r,t) from constancy in r
};

inline ResidualReport residual_check(const SolutionPair& p, const ResidualProbes& probes = {}) {
    const Geometry& g = p.data.geometry;
    const double eps = p.data.eps;
    const double h = probes.h, k = probes.k;
    // keep the time stencil inside the solved horizon
    const double t_hi = std::min(probes.t_hi, p.v_trace().horizon() - 2.0 * k);
    ResidualReport rep;

    for (int i = 0; i < probes.nx; ++i) {
        const double x = probes.x_lo + (probes.x_hi - probes.x_lo) * (probes.nx == 1 ? 0.5 : double(i) / (probes.nx - 1));
        for (int j = 0; j < probes.nt; ++j) {
            const double t =
                probes.t_lo + (t_hi - probes.t_lo) * (probes.nt == 1 ? 0.5 : double(j) / (probes.nt - 1));
            const double vm = p.v(x - h, t), v0 = p.v(x, t), vp = p.v(x + h, t);
            const double vt = (p.v(x, t + k) - p.v(x, t - k)) / (2.0 * k);
            double lap = (vp - 2.0 * v0 + vm) / (h * h);
            if (g.is_ball()) lap += (vp - vm) / (2.0 * h) * (2.0 / x);
            const double f1 = forcing_datum(g, p.data.phi_b, x, t);
            const double f2 = forcing_trace(g, *p.workspace, x, t);
            rep.max_interior = std::max(rep.max_interior, std::abs(eps * vt - lap + eps * (f1 + f2)));
        }
    }

    const double xb = g.boundary();
    for (int j = 0; j < probes.nt; ++j) {
        const double t =
            probes.t_lo + (t_hi - probes.t_lo) * (probes.nt == 1 ? 0.5 : double(j) / (probes.nt - 1));
        const double ut = (p.u(xb, t + k) - p.u(xb, t - k)) / (2.0 * k);
        const double ux = (-3.0 * p.u(xb, t) + 4.0 * p.u(xb + h, t) - p.u(xb + 2.0 * h, t)) / (2.0 * h);
        rep.max_boundary = std::max(rep.max_boundary, std::abs(ut - ux)); // ∂_ν = -∂_x
        if (g.is_ball()) {
            const double ref = 1.5 * p.w(1.5, t);
            for (double r : {1.0, 2.0, 3.0, 5.0})
                rep.max_w_harmonic = std::max(rep.max_w_harmonic, std::abs(r * p.w(r, t) - ref));
        }
    }
    return rep;
}

} // namespace dynbc

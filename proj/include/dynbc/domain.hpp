#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbc/special.hpp"

// Geometries, grids, sampled data and the weighted energy norms.
//
// Two settings are supported:
//   * the exterior of the unit ball in R^3, radially symmetric data
//     (spatial variable r >= 1, outward normal derivative = -d/dr), and
//   * the half-space with data independent of the lateral variables,
//     reduced to the half-line (spatial variable x >= 0, normal = -d/dx).
//
// Sampled functions are piecewise linear between strictly increasing nodes
// plus an analytic tail descriptor past the last node; the operators in
// operators.hpp integrate them against Gaussian kernels in closed form.

namespace dynbc {

enum class GeometryKind { ExteriorBallRadial, HalfSpaceReduced };

struct Geometry {
    GeometryKind kind = GeometryKind::ExteriorBallRadial;
    int dimension = 3;

    static Geometry exterior_ball() { return {GeometryKind::ExteriorBallRadial, 3}; }

    static Geometry half_space(int n = 3) {
        if (n < 2) throw std::invalid_argument("half-space geometry needs dimension >= 2");
        return {GeometryKind::HalfSpaceReduced, n};
    }

    bool is_ball() const { return kind == GeometryKind::ExteriorBallRadial; }
    double boundary() const { return is_ball() ? 1.0 : 0.0; }

    bool contains(double x) const { return x >= boundary(); }
};

struct SpatialGrid {
    std::vector<double> nodes; // strictly increasing, nodes[0] = boundary coordinate

    SpatialGrid() = default;
    explicit SpatialGrid(std::vector<double> n) : nodes(std::move(n)) { validate(); }

    double r_max() const { return nodes.back(); }
    std::size_t size() const { return nodes.size(); }

    // boundary + geometrically refined cells toward the boundary (finest cell
    // h0 at the wall, cell ratio `ratio` outward) up to r_max.
    static SpatialGrid graded(double boundary, double r_max, double h0 = 1e-3, double ratio = 1.05) {
        if (!(r_max > boundary) || !(h0 > 0.0) || !(ratio > 1.0))
            throw std::invalid_argument("bad graded grid parameters");
        std::vector<double> n{boundary};
        double h = h0;
        while (n.back() + h < r_max) {
            n.push_back(n.back() + h);
            h *= ratio;
        }
        n.push_back(r_max);
        return SpatialGrid(std::move(n));
    }

    static SpatialGrid uniform(double boundary, double r_max, std::size_t count) {
        if (count < 2 || !(r_max > boundary)) throw std::invalid_argument("bad uniform grid parameters");
        std::vector<double> n(count);
        for (std::size_t i = 0; i < count; ++i)
            n[i] = boundary + (r_max - boundary) * double(i) / double(count - 1);
        n.back() = r_max;
        return SpatialGrid(std::move(n));
    }

  private:
    void validate() const {
        if (nodes.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("grid nodes must be strictly increasing");
    }
};

enum class TailKind {
    Zero,             // f = 0 past r_max
    Constant,         // f = c past r_max
    DecayLikeOneOverR // f = K / x past r_max
};

struct Tail {
    TailKind kind = TailKind::Zero;
    double value = 0.0; // c or K

    static Tail zero() { return {TailKind::Zero, 0.0}; }
    static Tail constant(double c) { return {TailKind::Constant, c}; }
    static Tail decay(double k) { return {TailKind::DecayLikeOneOverR, k}; }
};

struct SampledFunction {
    SpatialGrid grid;
    std::vector<double> values;
    Tail tail;

    SampledFunction() = default;
    SampledFunction(SpatialGrid g, std::vector<double> v, Tail t)
        : grid(std::move(g)), values(std::move(v)), tail(t) {
        if (values.size() != grid.size())
            throw std::invalid_argument("sampled function: values/nodes length mismatch");
        if (tail.kind == TailKind::DecayLikeOneOverR) {
            // the tail coefficient must dominate |x f(x)| where the samples end
            const std::size_t n = grid.size();
            for (std::size_t i = n - std::min<std::size_t>(3, n); i < n; ++i)
                if (std::abs(grid.nodes[i] * values[i]) > std::abs(tail.value) * (1.0 + 1e-12) + 1e-300)
                    throw std::invalid_argument("decay tail coefficient below sampled |x f(x)|");
        }
    }

    static SampledFunction constant(const Geometry& g, double c, double r_max = 10.0) {
        SpatialGrid grid = SpatialGrid::uniform(g.boundary(), r_max, 2);
        return SampledFunction(grid, {c, c}, Tail::constant(c));
    }

    static SampledFunction zero(const Geometry& g) { return constant(g, 0.0, 1.0 + g.boundary()); }

    // indicator of {x > b}: exact via a constant tail starting at b
    static SampledFunction indicator(const Geometry& g, double b) {
        if (!(b > g.boundary())) throw std::invalid_argument("indicator threshold must lie inside the domain");
        SpatialGrid grid = SpatialGrid::uniform(g.boundary(), b, 2);
        return SampledFunction(grid, {0.0, 0.0}, Tail::constant(1.0));
    }

    // (1/x)·indicator{x > b}: exact via the decay tail
    static SampledFunction scaled_indicator(const Geometry& g, double b) {
        if (!(b > g.boundary())) throw std::invalid_argument("indicator threshold must lie inside the domain");
        SpatialGrid grid = SpatialGrid::uniform(g.boundary(), b, 2);
        return SampledFunction(grid, {0.0, 0.0}, Tail::decay(1.0));
    }

    double tail_at(double x) const {
        switch (tail.kind) {
            case TailKind::Zero: return 0.0;
            case TailKind::Constant: return tail.value;
            case TailKind::DecayLikeOneOverR: return tail.value / x;
        }
        return 0.0;
    }

    double operator()(double x) const {
        const auto& n = grid.nodes;
        if (x >= n.back()) return tail_at(x);
        if (x <= n.front()) return values.front();
        auto it = std::upper_bound(n.begin(), n.end(), x);
        std::size_t j = std::size_t(it - n.begin());
        const double w = (x - n[j - 1]) / (n[j] - n[j - 1]);
        return values[j - 1] * (1.0 - w) + values[j] * w;
    }

    // sup |f| over the closure of the domain, tail included
    double sup_norm() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        switch (tail.kind) {
            case TailKind::Zero: break;
            case TailKind::Constant: m = std::max(m, std::abs(tail.value)); break;
            case TailKind::DecayLikeOneOverR: m = std::max(m, std::abs(tail.value) / grid.r_max()); break;
        }
        return m;
    }

    // sup |x f(x)| (finite only when the tail decays or vanishes)
    double sup_weighted() const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            m = std::max(m, std::abs(grid.nodes[i] * values[i]));
        switch (tail.kind) {
            case TailKind::Zero: return m;
            case TailKind::Constant:
                return tail.value == 0.0 ? m : std::numeric_limits<double>::infinity();
            case TailKind::DecayLikeOneOverR: return std::max(m, std::abs(tail.value));
        }
        return m;
    }

    // limit of f at infinity per the tail descriptor
    double limit_at_infinity() const { return tail.kind == TailKind::Constant ? tail.value : 0.0; }
};

struct TimeGrid {
    std::vector<double> times; // strictly increasing, all > 0
    bool includes_origin_limit = false;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> t, bool origin_limit = false)
        : times(std::move(t)), includes_origin_limit(origin_limit) {
        if (times.empty()) throw std::invalid_argument("time grid is empty");
        if (!(times.front() > 0.0)) throw std::invalid_argument("time grid must start after 0");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
    }

    double horizon() const { return times.back(); }
    std::size_t size() const { return times.size(); }

    // t_i = T (i/n)^2, i = 1..n: uniform in u = sqrt(t), refined toward 0 where
    // the boundary trace behaves like t^{-1/2}.
    static TimeGrid graded(double horizon, std::size_t n) {
        if (!(horizon > 0.0) || n < 2) throw std::invalid_argument("bad graded time grid");
        std::vector<double> t(n);
        for (std::size_t i = 1; i <= n; ++i) {
            const double f = double(i) / double(n);
            t[i - 1] = horizon * f * f;
        }
        t.back() = horizon;
        return TimeGrid(std::move(t));
    }
};

// Time-sampled boundary trace h(t_i) = (normal derivative of v)(boundary, t_i).
//
// Interpolation acts on the weighted values m(u) = sqrt(t)·h(t), u = sqrt(t),
// linearly in u; this is exact for the canonical t^{-1/2} singular profile and
// second order for its smooth modulations. Below the first node m is frozen.
struct BoundaryTrace {
    TimeGrid grid;
    std::vector<double> values;
    double weighted_sup = 0.0; // max_i |sqrt(t_i)·h_i|

    BoundaryTrace() = default;
    BoundaryTrace(TimeGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("boundary trace: values/times length mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            weighted_sup = std::max(weighted_sup, std::abs(std::sqrt(grid.times[i]) * values[i]));
    }

    static BoundaryTrace zero(const TimeGrid& g) { return BoundaryTrace(g, std::vector<double>(g.size(), 0.0)); }

    double horizon() const { return grid.horizon(); }

    // value of m(u) = sqrt(t) h(t) extrapolated to u = 0 through the first two
    // nodes; exact for h ~ c/sqrt(t) (m constant) and for smooth h (m ~ u h(0))
    double weighted_head() const {
        const auto& t = grid.times;
        const double u1 = std::sqrt(t.front());
        const double m1 = u1 * values.front();
        if (t.size() < 2) return m1;
        const double u2 = std::sqrt(t[1]);
        const double m2 = u2 * values[1];
        return m1 - (m2 - m1) / (u2 - u1) * u1;
    }

    // m(u) = sqrt(t) h(t) at u = sqrt(t)
    double weighted_at(double u) const {
        const auto& t = grid.times;
        const std::size_t n = t.size();
        const double u0 = std::sqrt(t.front());
        if (u <= u0) {
            const double m0 = weighted_head(), m1 = u0 * values.front();
            return m0 + (m1 - m0) * (u / u0);
        }
        const double un = std::sqrt(t.back());
        if (u >= un) return std::sqrt(t.back()) * values.back();
        const double tt = u * u;
        auto it = std::upper_bound(t.begin(), t.end(), tt);
        std::size_t j = std::min<std::size_t>(std::size_t(it - t.begin()), n - 1);
        const double ua = std::sqrt(t[j - 1]), ub = std::sqrt(t[j]);
        const double w = (u - ua) / (ub - ua);
        return (1.0 - w) * std::sqrt(t[j - 1]) * values[j - 1] + w * std::sqrt(t[j]) * values[j];
    }

    double operator()(double t) const {
        if (!(t > 0.0)) throw std::domain_error("trace evaluated at t <= 0");
        return weighted_at(std::sqrt(t)) / std::sqrt(t);
    }
};

struct EnergyRecord {
    double t = 0.0;
    double sup_v = 0.0;  // ||v(.,t)||_inf over the domain
    double sup_dv = 0.0; // |normal derivative of v| at the boundary
    double e_eps = 0.0;  // sup_v + sqrt(t/eps)·sup_dv
};

inline EnergyRecord make_energy_record(double t, double eps, double sup_v, double sup_dv) {
    return {t, sup_v, sup_dv, sup_v + std::sqrt(t / eps) * sup_dv};
}

inline double xt_norm(std::span<const EnergyRecord> records) {
    if (records.empty()) throw std::invalid_argument("no records");
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.e_eps);
    return m;
}

inline double sup_norm(const SampledFunction& f) { return f.sup_norm(); }

} // namespace dynbc

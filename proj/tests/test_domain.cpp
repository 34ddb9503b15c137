#include <doctest.h>

#include <cmath>

#include "dynbc/domain.hpp"

using namespace dynbc;

TEST_CASE("geometry invariants") {
    auto ball = Geometry::exterior_ball();
    CHECK(ball.dimension == 3);
    CHECK(ball.boundary() == 1.0);
    auto hs = Geometry::half_space(4);
    CHECK(hs.boundary() == 0.0);
    CHECK_THROWS_AS(Geometry::half_space(1), std::invalid_argument);
}

TEST_CASE("sampled function: interpolation, tails, norms") {
    auto g = Geometry::exterior_ball();

    SUBCASE("constant one") {
        auto f = SampledFunction::constant(g, 1.0);
        CHECK(f.sup_norm() == 1.0);
        CHECK(f(3.7) == 1.0);
        CHECK(f(1e6) == 1.0);
    }
    SUBCASE("zero with zero tail") {
        auto f = SampledFunction::zero(g);
        CHECK(f.sup_norm() == 0.0);
    }
    SUBCASE("1/r on [1,10] with decay tail, K = 1") {
        SpatialGrid grid = SpatialGrid::uniform(1.0, 10.0, 200);
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = 1.0 / grid.nodes[i];
        SampledFunction f(grid, vals, Tail::decay(1.0));
        CHECK(f.sup_norm() == doctest::Approx(1.0)); // max at r = 1
        CHECK(f(20.0) == doctest::Approx(0.05));
        CHECK(f.sup_weighted() == doctest::Approx(1.0));
    }
    SUBCASE("decay tail must dominate the sampled values") {
        SpatialGrid grid = SpatialGrid::uniform(1.0, 4.0, 4);
        CHECK_THROWS_AS(SampledFunction(grid, {1.0, 1.0, 1.0, 1.0}, Tail::decay(0.5)), std::invalid_argument);
    }
    SUBCASE("scaled indicator sup norms") {
        auto f = SampledFunction::scaled_indicator(g, 2.0);
        CHECK(f.sup_norm() == doctest::Approx(0.5));
        CHECK(f.sup_weighted() == doctest::Approx(1.0));
        CHECK(f(3.0) == doctest::Approx(1.0 / 3.0));
        CHECK(f(1.5) == 0.0);
    }
}

TEST_CASE("xt_norm") {
    std::vector<EnergyRecord> rec;
    CHECK_THROWS_WITH_AS(xt_norm(rec), "no records", std::invalid_argument);
    rec.push_back({0.1, 1.0, 0.0, 1.0});
    rec.push_back({0.2, 2.0, 0.0, 2.0});
    rec.push_back({0.3, 0.5, 0.0, 0.5});
    CHECK(xt_norm(rec) == 2.0);

    // zero trace
    std::vector<EnergyRecord> zero{{0.1, 0.0, 0.0, 0.0}};
    CHECK(xt_norm(zero) == 0.0);

    // monotone under horizon extension
    std::vector<EnergyRecord> shorter(rec.begin(), rec.begin() + 2);
    CHECK(xt_norm(shorter) <= xt_norm(rec) + 1e-300);
}

TEST_CASE("energy record composition") {
    auto r = make_energy_record(0.09, 0.01, 2.0, 0.5);
    CHECK(r.e_eps == doctest::Approx(2.0 + 3.0 * 0.5));
    CHECK(r.e_eps >= r.sup_v);
}

TEST_CASE("boundary trace weighted interpolation") {
    TimeGrid grid = TimeGrid::graded(1.0, 64);
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = 1.0 / std::sqrt(grid.times[i]);
    BoundaryTrace tr(grid, vals);
    CHECK(tr.weighted_sup == doctest::Approx(1.0));
    // the weighted interpolant reproduces 1/sqrt(t) exactly, also off the nodes
    CHECK(tr(0.37) == doctest::Approx(1.0 / std::sqrt(0.37)).epsilon(1e-13));
    CHECK(tr(1e-4) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("sup over grid converges at second order for a smooth interior maximum") {
    // v(r) = (r-1)/r^2 has its maximum 0.25 at r = 2
    auto sup_on = [](std::size_t n) {
        SpatialGrid grid = SpatialGrid::uniform(1.0, 4.0, n);
        double m = 0.0;
        for (double r : grid.nodes) m = std::max(m, (r - 1.0) / (r * r));
        return m;
    };
    const double e1 = 0.25 - sup_on(33);
    const double e2 = 0.25 - sup_on(65);
    CHECK(e1 >= 0.0);
    CHECK(e2 <= e1 / 2.5); // roughly O(h^2)
}

TEST_CASE("graded time grid is uniform in sqrt(t)") {
    TimeGrid g = TimeGrid::graded(0.2, 16);
    const double du = std::sqrt(g.times[1]) - std::sqrt(g.times[0]);
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(std::sqrt(g.times[i]) - std::sqrt(g.times[i - 1]) == doctest::Approx(du).epsilon(1e-12));
    CHECK(g.horizon() == 0.2);
}

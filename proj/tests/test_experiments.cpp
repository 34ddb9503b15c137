#include <doctest.h>

#include <cmath>

#include "dynbc/experiments.hpp"

using namespace dynbc;

TEST_CASE("log-log fit recovers an exact power law") {
    std::vector<RatePoint> pts;
    for (int k = 2; k <= 8; ++k) {
        const double eps = std::pow(2.0, -k);
        pts.push_back({eps, std::sqrt(eps), 0.0});
    }
    auto fit = fit_loglog(pts);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.max_residual < 1e-12);
    CHECK(std::exp(fit.intercept) == doctest::Approx(1.0).epsilon(1e-10));

    std::vector<RatePoint> few(pts.begin(), pts.begin() + 3);
    CHECK_THROWS_AS(fit_loglog(few), std::invalid_argument);
}

TEST_CASE("rate study: deviations decrease monotonically and fit near 1/2 in the deep sweep") {
    RateStudy study;
    study.geometry = Geometry::exterior_ball();
    study.phi = SampledFunction::scaled_indicator(study.geometry, 2.0);
    study.phi_b = 0.0;
    for (int k = 8; k <= 12; ++k) study.eps_list.push_back(std::pow(2.0, -k));
    study.tau1 = 0.05;
    study.tau2 = 0.2;
    study.k_lo = 1.0;
    study.k_hi = 3.0;
    study.probes_x = 16;
    study.probes_t = 16;
    auto rep = run_rate_study(study, 2);
    for (std::size_t i = 1; i < rep.points.size(); ++i)
        CHECK(rep.points[i].deviation < rep.points[i - 1].deviation);
    CHECK(rep.fit.slope > 0.4);
    CHECK(rep.fit.slope < 0.55);
    CHECK(rep.fit.max_residual < 0.1);
}

TEST_CASE("rate study rejects non-decaying ball data") {
    RateStudy study;
    study.geometry = Geometry::exterior_ball();
    study.phi = SampledFunction::indicator(study.geometry, 2.0); // constant tail: sup|rho phi| = inf
    for (int k = 4; k <= 8; ++k) study.eps_list.push_back(std::pow(2.0, -k));
    CHECK_THROWS_WITH_AS(run_rate_study(study),
                         "exterior-ball rate runs need decaying data: sup_{rho>=1} |rho phi(rho)| must be finite",
                         std::invalid_argument);
}

TEST_CASE("probe doubling moves the measured sup by less than one percent") {
    auto hs = Geometry::half_space();
    ProblemData d(hs, 0.01, SampledFunction::indicator(hs, 1.0), 0.0);
    SolverConfig cfg;
    cfg.horizon = 0.2;
    auto sol = solve(d, cfg);
    const double coarse = sup_deviation(sol, 0.0, 3.0, 0.05, 0.2, 32, 32);
    const double fine = sup_deviation(sol, 0.0, 3.0, 0.05, 0.2, 63, 63);
    CHECK(std::abs(fine - coarse) / coarse < 0.01);
}

TEST_CASE("contraction study: measured gains below the closed-form factor") {
    auto ball = Geometry::exterior_ball();
    const std::vector<double> eps{0.01, 0.1};
    const std::vector<double> horizons{0.01, 0.1};
    auto cases = run_contraction_study(ball, eps, horizons, 5);
    CHECK(cases.size() == 4);
    for (const auto& c : cases) {
        CAPTURE(c.eps);
        CAPTURE(c.horizon);
        CHECK(c.worst_gain > 0.0);
        CHECK(c.pass);
    }
}

TEST_CASE("bound suite passes with the frozen constants") {
    for (auto kind : {GeometryKind::ExteriorBallRadial, GeometryKind::HalfSpaceReduced}) {
        Geometry g{kind, 3};
        auto checks = run_bound_suite(g, default_seed, 6);
        for (const auto& c : checks) {
            CAPTURE(c.id);
            CHECK(c.pass);
            CHECK(c.worst_margin >= 1.0);
        }
    }
}

TEST_CASE("lower-bound study: half-space recipe holds, ball recipe is degenerate but floored") {
    auto hs = Geometry::half_space();
    auto study = canonical_lower_bound_study(hs);
    study.eps_list = {std::pow(2.0, -6), std::pow(2.0, -9)};
    study.probes_x = 8;
    study.probes_t = 8;
    auto rep = run_lower_bound_check(study, canonical_lower_correction(hs), 2);
    CHECK(rep.prerequisite_ok);
    CHECK(!rep.degenerate);
    CHECK(rep.recipe_c > 0.9);
    CHECK(rep.min_u_ratio > rep.recipe_c);
    CHECK(rep.min_shape > 0.5);
    CHECK(rep.all_pass);

    auto ball = Geometry::exterior_ball();
    auto bstudy = canonical_lower_bound_study(ball);
    bstudy.eps_list = {std::pow(2.0, -6), std::pow(2.0, -9)};
    bstudy.probes_x = 8;
    bstudy.probes_t = 8;
    auto brep = run_lower_bound_check(bstudy, canonical_lower_correction(ball), 2);
    CHECK(brep.degenerate); // the stated probe box violates the recipe's horizon smallness
    CHECK(brep.min_u_ratio > 0.3); // the sqrt(eps) floor is nevertheless there
    CHECK(brep.min_shape > 0.5);
    CHECK(brep.all_pass);
}

TEST_CASE("lower-bound violations surface a witness") {
    // a zero correction constant inflates the threshold beyond the measured
    // floor; the report must carry the first offending probe
    auto hs = Geometry::half_space();
    auto study = canonical_lower_bound_study(hs);
    study.eps_list = {std::pow(2.0, -8)};
    study.probes_x = 6;
    study.probes_t = 6;
    auto rep = run_lower_bound_check(study, 0.0, 1);
    CHECK(rep.recipe_c > 2.5);
    CHECK(!rep.all_pass);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->u < rep.witness->threshold);
}

TEST_CASE("zero data leave a zero field for the lower bound to skip") {
    auto hs = Geometry::half_space();
    ProblemData d(hs, 0.05, SampledFunction::zero(hs), 0.0);
    SolverConfig cfg;
    cfg.horizon = 0.1;
    auto sol = solve(d, cfg);
    CHECK(sol.u(1.5, 0.07) == 0.0);
}

TEST_CASE("calibration regression: measured constants stay below the frozen ones") {
    auto m = measure_constants(default_seed, 6);
    CHECK(m.heat_interior_smallness_l3 <= calibrated::heat_interior_smallness_l3);
    CHECK(m.duhamel_trace_halfline <= calibrated::duhamel_trace_halfline);
    CHECK(m.duhamel_datum_ball <= calibrated::duhamel_datum_ball);
    CHECK(m.duhamel_datum_slope_ball <= calibrated::duhamel_datum_slope_ball);
    CHECK(m.solution_norm_halfline <= calibrated::solution_norm_halfline);
    CHECK(m.lower_correction_halfline <= calibrated::lower_correction_halfline);
    CHECK(m.lower_correction_ball <= calibrated::lower_correction_ball);
}

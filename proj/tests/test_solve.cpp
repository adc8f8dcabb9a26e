#include <catch2/catch.hpp>

#include "nehari/solve.hpp"
#include "nehari/verify.hpp"
#include "oracle.hpp"

using namespace nehari;

namespace {

GridField constant_field(const std::shared_ptr<const Grid>& g, double c) {
    return GridField(g, Eigen::VectorXd::Constant(g->size(), c));
}

} // namespace

TEST_CASE("ground state on the interval") {
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 11);

    SolveOptions o;
    o.keep_trace = true;
    GroundStateReport r = ground_state(P, se, o);

    REQUIRE(r.status == SolveStatus::converged);
    CHECK(r.c_N > 0.0);
    CHECK(r.dual_residual <= 1e-8);
    CHECK(r.nehari_residual <= 1e-8);
    CHECK(r.sign != Sign::sign_changing);
    CHECK(r.sign_audit_ok);

    // the eigen-direction bounds the level from above
    const double psi_e1 = P.psi(se.eigenfunction(0));
    CHECK(r.c_N <= psi_e1 + 1e-12);

    // energy decreases monotonically along the accepted backtracking steps
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : r.trace) {
        if (row.phase != 0) break;
        CHECK(row.psi <= prev + 1e-12 * std::fabs(prev));
        prev = row.psi;
    }

    // the odd pair carries the same energy
    GridField mirrored(g, -r.u_star.values());
    CHECK(P.energy(mirrored) == Approx(r.c_N).epsilon(1e-12));

    // starting from the mirrored eigen-direction lands on the mirror solution
    GroundStateSolver solver(P, se, o);
    GridField minus_e1(g, -se.eigenfunction(0).values());
    GroundStateReport rm = solver.solve_from(minus_e1);
    REQUIRE(rm.status == SolveStatus::converged);
    CHECK(rm.c_N == Approx(r.c_N).epsilon(1e-10));
    CHECK(rm.sign != r.sign);
}

TEST_CASE("ground state on the square") {
    auto g = build_grid(2, {{0.0, 1.0}, {0.0, 1.0}}, {31, 31});
    Problem P(piecewise_model(5.0, 60.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 60.0), 4);
    REQUIRE(se.lambda(0) < 1.0);

    SolveOptions o;
    o.keep_trace = false;
    GroundStateReport r = ground_state(P, se, o);
    REQUIRE(r.status == SolveStatus::converged);
    CHECK(r.c_N > 0.0);
    CHECK(r.dual_residual <= 1e-8);
    CHECK(r.nehari_residual <= 1e-8);
    CHECK(r.sign != Sign::sign_changing);
}

TEST_CASE("multistart agrees at the ground level") {
    auto g = build_grid(1, {{0.0, 1.0}}, {127});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 11);
    SolveOptions o;
    o.restarts = 3;
    o.keep_trace = false;
    GroundStateReport r = ground_state(P, se, o);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.start_values.size() == 3);
    for (double v : r.start_values) {
        REQUIRE(std::isfinite(v));
        CHECK(v == Approx(r.c_N).epsilon(1e-6));
    }

    // threading does not change the merged result
    SolveOptions o2 = o;
    o2.threads = 2;
    GroundStateReport r2 = ground_state(P, se, o2);
    CHECK(r2.c_N == r.c_N);
    for (std::size_t i = 0; i < r.start_values.size(); ++i)
        CHECK(r2.start_values[i] == r.start_values[i]);
}

TEST_CASE("sign classification") {
    auto g = build_grid(1, {{0.0, 1.0}}, {63});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum s = weighted_eigs(P.stiffness(), constant_field(g, 1.0), 2);

    CHECK(classify_sign(s.eigenfunction(0), 1e-10) == Sign::nonnegative);
    GridField neg(g, -s.eigenfunction(0).values());
    CHECK(classify_sign(neg, 1e-10) == Sign::nonpositive);
    CHECK(classify_sign(s.eigenfunction(1), 1e-10) == Sign::sign_changing);

    const SignReport zero = sign_of(P, GridField(g));
    CHECK(zero.sign == Sign::nonnegative);
    CHECK(zero.degenerate);

    const SignReport sr = sign_of(P, s.eigenfunction(1));
    CHECK(sr.I_plus != 0.0);
    CHECK(sr.I_minus != 0.0);
}

TEST_CASE("tau over eigenspace spheres") {
    auto g = build_grid(1, {{0.0, 1.0}}, {127});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 11);

    // one-dimensional ground sphere: tau is the eigen-direction scale
    TauResult t1 = tau_m(P, se, 1);
    CHECK(t1.dimension == 1);
    CHECK(t1.tau == Approx(P.project_fiber(se.eigenfunction(0)).t).epsilon(1e-9));
    CHECK(t1.tau > 0.0);

    // the basis points are feasible, so tau can only improve on them
    TauResult t3 = tau_m(P, se, 3);
    CHECK(t3.dimension == 3);
    double best_basis = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j)
        best_basis = std::min(best_basis, P.project_fiber(se.eigenfunction(j)).t);
    CHECK(t3.tau <= best_basis + 1e-9);
    CHECK(t3.tau > 0.0);

    // spans that cross the unit eigenvalue leave the admissible cone
    CHECK_THROWS_AS(tau_m(P, se, 11), PreconditionError);
}

TEST_CASE("coercive minimization") {
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    Problem P(coercive_model(20.0, 5.0), g);
    Spectrum sa = weighted_eigs(P.stiffness(), constant_field(g, 20.0), 1);

    GroundStateReport r = coercive_min(P, sa);
    REQUIRE(r.status == SolveStatus::converged);
    CHECK(r.c_N < 0.0);
    CHECK(r.dual_residual <= 1e-8);

    // small-t expansion: I(t e1)/t^2 approaches (1 - 20/lambda_1)/2 < 0
    GridField e1 = sa.eigenfunction(0);
    const double t = 1e-4;
    GridField te(g, t * e1.values());
    const double expansion = 0.5 * (1.0 - 20.0 / oracle::discrete_lambda(1, 255));
    CHECK(P.energy(te) / (t * t) == Approx(expansion).margin(1e-4));

    // a nonlinearity with vanishing slope at zero has no negative start
    Problem Pr(rational_model(0.0, 20.0), g);
    Spectrum s1 = weighted_eigs(Pr.stiffness(), constant_field(g, 1.0), 1);
    CHECK_THROWS_AS(coercive_min(Pr, s1), FailedNegativeStartError);
}

TEST_CASE("boundary escape detector") {
    // The detector itself: with the margin threshold rigged high and no
    // growth requirement, any descent trips it and reports the sampled
    // beta integral over the support.
    auto g = build_grid(1, {{0.0, 1.0}}, {63});
    Problem P(piecewise_model(12.0, 1000.0), g);
    Spectrum se = weighted_eigs(P.stiffness(), constant_field(g, 1000.0), 4);

    SolveOptions o;
    o.escape_delta_ratio = 1e6; // every margin counts as collapsed
    o.escape_t_growth = 0.0;
    o.escape_window = 3;
    o.tol = 1e-30; // never converge first
    GroundStateReport r = ground_state(P, se, o);
    CHECK(r.status == SolveStatus::boundary_escape);
    CHECK(r.beta_floor_estimate > 0.0);
    // beta is constant here; the support integral cannot exceed beta |Omega|
    CHECK(r.beta_floor_estimate <=
          *P.model().beta_closed * g->domain_measure() * (1.0 + 1e-12));
}

TEST_CASE("mirror start for the coercive path") {
    auto g = build_grid(1, {{0.0, 1.0}}, {127});
    Problem P(coercive_model(20.0, 5.0), g);
    Spectrum sa = weighted_eigs(P.stiffness(), constant_field(g, 20.0), 1);
    GroundStateReport r = coercive_min(P, sa);
    REQUIRE(r.converged);
    GridField mirrored(g, -r.u_star.values());
    CHECK(P.energy(mirrored) == Approx(r.c_N).epsilon(1e-12));
}

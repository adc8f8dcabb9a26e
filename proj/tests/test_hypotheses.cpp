#include <catch2/catch.hpp>

#include "nehari/hypotheses.hpp"

using namespace nehari;

namespace {

GridField constant_field(const std::shared_ptr<const Grid>& g, double c) {
    return GridField(g, Eigen::VectorXd::Constant(g->size(), c));
}

struct Setup {
    std::shared_ptr<const Grid> grid = build_grid(1, {{0.0, 1.0}}, {127});
    StiffnessForm K{grid};
    Spectrum eta_spectrum(double eta, int m) {
        return weighted_eigs(K, constant_field(grid, eta), m);
    }
};

} // namespace

TEST_CASE("piecewise example passes the ground-state hypotheses") {
    Setup s;
    NonlinearModel m = piecewise_model(12.0, 1000.0);
    Spectrum se = s.eta_spectrum(1000.0, 12);
    HypothesisReport h = check_hypotheses(m, nullptr, se);

    CHECK(h.f1 == Verdict::pass);
    CHECK(h.f2 == Verdict::pass);
    CHECK(h.alpha_plus_zero); // the vanishing slope at zero is flagged, not hidden
    CHECK(std::isinf(h.lambda1_alpha));
    CHECK(h.m_eta == 10); // ten eigenvalues of the eta weight sit below 1
    CHECK(h.lambda_m_eta < 1.0);
    CHECK(h.fF == Verdict::fail); // beta is finite for this family
    REQUIRE_FALSE(h.witnesses.empty());
    REQUIRE_FALSE(h.notes.empty());

    // consequences of the monotonicity hypothesis
    CHECK(h.b_monotone == Verdict::pass);
    CHECK(h.Fq_monotone == Verdict::pass);
    CHECK(h.slope_gap == Verdict::pass);
    CHECK(h.slope_gap_margin > 0.0);

    // (f2') cannot hold when the slope at zero has no positive part
    CHECK(h.f2p == Verdict::fail);
}

TEST_CASE("rational family satisfies the divergence hypothesis") {
    Setup s;
    NonlinearModel m = rational_model(0.0, 20.0);
    Spectrum se = s.eta_spectrum(20.0, 4);
    HypothesisReport h = check_hypotheses(m, nullptr, se);
    CHECK(h.f1 == Verdict::pass);
    CHECK(h.f2 == Verdict::pass);
    CHECK(h.m_eta == 1); // 20 sits between the first two eigenvalues
    CHECK(h.fF == Verdict::pass);
}

TEST_CASE("coercive family fails monotonicity but passes the primed pair") {
    Setup s;
    NonlinearModel m = coercive_model(20.0, 5.0);
    Spectrum se = s.eta_spectrum(5.0, 3);
    Spectrum sa = s.eta_spectrum(20.0, 3);
    HypothesisReport h = check_hypotheses(m, &sa, se);
    CHECK(h.f1 == Verdict::fail);
    CHECK(h.f2 == Verdict::fail); // lambda_1(eta) = pi^2/5 > 1
    CHECK(h.f1p == Verdict::pass);
    CHECK(h.f2p == Verdict::pass); // lambda_1(alpha) = pi^2/20 < 1 < lambda_1(eta)
    CHECK(h.lambda1_alpha == Approx(M_PI * M_PI / 20.0).epsilon(1e-4));
    CHECK(h.lambda1_eta == Approx(M_PI * M_PI / 5.0).epsilon(1e-4));
    REQUIRE_FALSE(h.witnesses.empty());
}

TEST_CASE("a linear slope ratio is undecided, not passed") {
    Setup s;
    ExprModelOptions o;
    o.alpha = 20.0;
    o.eta = 20.0;
    NonlinearModel lin = parse_model("20*t", o);
    Spectrum se = s.eta_spectrum(20.0, 3);
    HypothesisReport h = check_hypotheses(lin, nullptr, se);
    CHECK(h.f1 == Verdict::undecided);
}

TEST_CASE("resonance classification") {
    Setup s;
    const double tol = 1e-6;

    // eta = 1000: ten eigenvalues below 1, the eleventh above, none at 1
    {
        Spectrum se = s.eta_spectrum(1000.0, 12);
        ResonanceReport r = classify_resonance(piecewise_model(12.0, 1000.0), se, tol);
        CHECK(r.cls == ResonanceClass::non_resonant);
        CHECK(r.nearest_gap > tol);
    }

    // weight tuned to the computed ground eigenvalue: exactly resonant
    {
        Spectrum s1 = s.eta_spectrum(1.0, 1);
        const double lam1 = s1.lambda(0);
        Spectrum se = s.eta_spectrum(lam1, 3);
        CHECK(se.lambda(0) == Approx(1.0).epsilon(1e-12));

        ResonanceReport strong = classify_resonance(piecewise_model(1.0, lam1), se, 1e-9);
        CHECK(strong.cls == ResonanceClass::strongly_resonant);
        CHECK(strong.beta_finite);
        CHECK(strong.resonant_index == 0);

        ResonanceReport weak = classify_resonance(rational_model(0.0, lam1), se, 1e-9);
        CHECK(weak.cls == ResonanceClass::resonant);
        CHECK_FALSE(weak.beta_finite);
    }

    // a spectrum that never passes 1 cannot certify non-resonance
    {
        Spectrum se = s.eta_spectrum(1000.0, 3);
        CHECK_THROWS_AS(classify_resonance(piecewise_model(12.0, 1000.0), se, tol),
                        PreconditionError);
    }
}

#include <catch2/catch.hpp>

#include "nehari/spectrum.hpp"
#include "oracle.hpp"

using namespace nehari;

namespace {

GridField constant_field(const std::shared_ptr<const Grid>& g, double c) {
    return GridField(g, Eigen::VectorXd::Constant(g->size(), c));
}

} // namespace

TEST_CASE("interval eigenvalues match the stencil formula") {
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    StiffnessForm K(g);
    Spectrum s = weighted_eigs(K, constant_field(g, 1.0), 5);
    for (int k = 1; k <= 5; ++k)
        CHECK(s.lambda(k - 1) == Approx(oracle::discrete_lambda(k, 255)).epsilon(1e-9));
    CHECK(s.lambda(0) == Approx(M_PI * M_PI).epsilon(1e-4));
}

TEST_CASE("constant weight scaling is exact") {
    auto g = build_grid(1, {{0.0, 1.0}}, {255});
    StiffnessForm K(g);
    Spectrum s1 = weighted_eigs(K, constant_field(g, 1.0), 5);
    for (double c : {0.5, 2.0, M_PI * M_PI}) {
        Spectrum sc = weighted_eigs(K, constant_field(g, c), 5);
        for (int j = 0; j < 5; ++j)
            CHECK(sc.lambda(j) * c == Approx(s1.lambda(j)).epsilon(1e-12));
    }
}

TEST_CASE("weight preconditions") {
    auto g = build_grid(1, {{0.0, 1.0}}, {15});
    StiffnessForm K(g);
    CHECK_THROWS_AS(weighted_eigs(K, constant_field(g, -1.0), 1), PreconditionError);
    CHECK_THROWS_AS(weighted_eigs(K, constant_field(g, 0.0), 1), PreconditionError);

    // a weight positive on a single node carries few positive eigenvalues
    Eigen::VectorXd w = Eigen::VectorXd::Constant(g->size(), -1.0);
    w[7] = 1.0;
    CHECK_THROWS_AS(weighted_eigs(K, GridField(g, w), 5), PreconditionError);
}

TEST_CASE("eigenpair invariants") {
    auto g = build_grid(1, {{0.0, 1.0}}, {127});
    StiffnessForm K(g);
    GridField w(g, Eigen::VectorXd::Constant(g->size(), 3.0));
    Spectrum s = weighted_eigs(K, w, 6);
    const double vol = g->volume_element();
    for (int j = 0; j < 6; ++j) {
        GridField e = s.eigenfunction(j);
        // energy normalization and the Rayleigh identity
        CHECK(K.energy_norm2(e) == Approx(1.0).epsilon(1e-10));
        CHECK(weighted_l2(w, e) == Approx(1.0 / s.lambda(j)).epsilon(1e-10));
        // dual-pairing residual
        CHECK(s.residual(j) <= 1e-8 * s.lambda(j));
        // weighted orthogonality across distinct eigenvalues
        for (int i = 0; i < j; ++i) {
            const double b = (s.eigenvectors().col(i).cwiseProduct(w.values()))
                                 .dot(s.eigenvectors().col(j)) * vol;
            CHECK(std::fabs(b) <= 1e-8);
        }
    }
    // deterministic sign convention: the ground mode is nonnegative
    CHECK(s.eigenvectors().col(0).minCoeff() >= -1e-12);
}

TEST_CASE("square multiplicities and chi") {
    auto g = build_grid(2, {{0.0, 1.0}, {0.0, 1.0}}, {31, 31});
    StiffnessForm K(g);
    Spectrum s = weighted_eigs(K, constant_field(g, 1.0), 5);
    // modes (1,2) and (2,1) share the second distinct eigenvalue
    REQUIRE(s.clusters().size() >= 2);
    CHECK(s.clusters()[0].size == 1);
    CHECK(s.clusters()[1].size == 2);
    CHECK(s.clusters()[1].lambda == Approx(5.0 * M_PI * M_PI).epsilon(1e-2));
    // tensor structure of the stencil: eigenvalues are per-axis sums
    CHECK(s.lambda(0) ==
          Approx(2.0 * oracle::discrete_lambda(1, 31)).epsilon(1e-10));
    CHECK(s.clusters()[1].lambda ==
          Approx(oracle::discrete_lambda(1, 31) + oracle::discrete_lambda(2, 31)).epsilon(1e-10));
    CHECK(chi(s, 1).chi == 1);
    CHECK(chi(s, 2).chi == 3);
    CHECK(chi(s, 2).s_m == 3);
    CHECK_THROWS_AS(chi(s, 10), PreconditionError);
    CHECK_THROWS_AS(chi(s, 0), PreconditionError);
}

TEST_CASE("1D weights have simple spectrum") {
    auto g = build_grid(1, {{0.0, 1.0}}, {63});
    StiffnessForm K(g);
    Spectrum s = weighted_eigs(K, constant_field(g, 1.0), 6);
    CHECK(static_cast<int>(s.clusters().size()) == 6);
    CHECK(chi(s, 4).chi == 4);
}

TEST_CASE("subspace iteration path agrees with the formula") {
    auto g = build_grid(1, {{0.0, 1.0}}, {3200});
    StiffnessForm K(g);
    Spectrum s = weighted_eigs(K, constant_field(g, 1.0), 4);
    for (int k = 1; k <= 4; ++k)
        CHECK(s.lambda(k - 1) == Approx(oracle::discrete_lambda(k, 3200)).epsilon(1e-8));
    for (int j = 0; j < 4; ++j) CHECK(s.residual(j) <= 1e-8 * s.lambda(j));
}

TEST_CASE("requesting beyond the positive spectrum fails") {
    auto g = build_grid(1, {{0.0, 1.0}}, {5});
    StiffnessForm K(g);
    CHECK_THROWS_AS(weighted_eigs(K, constant_field(g, 1.0), 6), PreconditionError);
}

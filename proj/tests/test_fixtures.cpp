#include <numbers>

#include "doctest.h"
#include "sympath/fixtures.hpp"

using namespace sympath;

TEST_CASE("fixture registry") {
    const auto& reg = fixture_registry();
    CHECK(reg.size() == 6);
    for (const auto& f : reg) {
        const FixtureResult r = f.run();
        INFO(f.name);
        CHECK(r.passed());
        for (const auto& c : r.checks) {
            INFO(c.name << " " << c.detail);
            CHECK(c.passed);
        }
    }
    CHECK_THROWS_AS(run_fixture("nope"), std::invalid_argument);
}

TEST_CASE("half turn pair") {
    const PositivePath p = half_turn_pair_path();
    const Matrix A0 = direct_sum(make_D(2.0), make_D(3.0));
    CHECK(max_abs_diff(p.gamma.front(), A0) <= 1e-9);
    CHECK(max_abs_diff(p.gamma.back(), -1.0 * A0) <= 1e-9);
    CHECK(p.positive());
}

TEST_CASE("cone witness") {
    const Matrix A = direct_sum(make_D(2.0), make_D(3.0));
    const Matrix Q = Matrix::diag({-5.0, 1.0, 2.0, -7.0});
    const ConeWitness w = fixture_cone_surjectivity(A, Q);
    CHECK(w.min_eig > 0.0);
    const Matrix Ai = symp_inverse(A);
    CHECK(max_abs_diff(w.D, symmetrize(Ai.transpose() * w.Y * Ai - w.Y)) < 1e-12);
    CHECK(symplectic_defect(w.X) < 1e-10);
    REQUIRE(w.k.has_value());
    CHECK(sym_min_eig(symmetrize(Q + *w.k * w.D)) > 0.0);
    CHECK_THROWS_AS(fixture_cone_surjectivity(direct_sum(rot2(0.5), make_D(2.0))), ConstraintError);
    // the interleaved sum D(2) and D(2) is not symplectic for the pairwise J
    CHECK_THROWS_AS(fixture_cone_surjectivity(diamond(make_D(2.0), make_D(2.0))), SymplecticDefect);
}

TEST_CASE("collide-out preconditions") {
    const double pi = std::numbers::pi;
    CHECK_THROWS_AS(fixture_elementary_collide_out(pi / 2, pi / 4, 2.0), ConstraintError);
    CHECK_THROWS_AS(fixture_elementary_collide_out(pi / 4, pi / 2, 0.5), ConstraintError);
    const ElementaryPath e = fixture_elementary_collide_out(pi / 4, pi / 2, 2.0);
    // smoothing stays inside the window scale
    CHECK(e.c0_distance < 0.05);
    CHECK(e.derivative_jump < 1e-3);
    CHECK(e.path.positive());
}

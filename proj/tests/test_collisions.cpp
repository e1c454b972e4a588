#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sympath/collisions.hpp"
#include "sympath/fixtures.hpp"
#include "sympath/lemmas.hpp"

using namespace sympath;

namespace {

constexpr double kPi = std::numbers::pi;

PathModel n2_alpha_path() { return alpha_path(make_N2(1.0, 0.1, 0.5, -0.5), -0.1, 0.1); }

// diag(R(ct) D(3), R(pi t) D(2)): the second block reaches +1 at acos(0.8) / pi.
PositivePath crossing_pair(const Matrix& X) {
    PathModel m;
    m.n = 2;
    m.kind = "crossing_pair";
    m.gamma = [](double t) { return direct_sum(rot2(0.2 * t) * make_D(3.0), rot2(kPi * t) * make_D(2.0)); };
    m.P = [](double) { return Matrix::diag({0.2, 0.2, kPi, kPi}); };
    m.gamma0 = m.gamma(0.0);
    const PositivePath p = sample(m);
    return conjugate_path(p, exp_family(Matrix(4, 4), X)).path;
}

}  // namespace

TEST_CASE("delta_trace: rotation loop touches zero") {
    const DeltaTrace tr = delta_trace(rotation_loop({1, 2}), 2048);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const double c = std::cos(2 * kPi * tr.t[k]) - std::cos(4 * kPi * tr.t[k]);
        worst = std::max(worst, std::abs(tr.delta[k] - 4 * c * c));
    }
    CHECK(worst < 1e-10);
    int interior = 0;
    for (const auto& r : tr.roots) {
        CHECK(r.kind == RootKind::Touch);
        if (r.t > 0.1 && r.t < 0.9) {
            ++interior;
            const double third = std::abs(r.t - 1.0 / 3.0) < 0.1 ? 1.0 / 3.0 : 2.0 / 3.0;
            CHECK(std::abs(r.t - third) < 1e-6);
        }
    }
    CHECK(interior == 2);
}

TEST_CASE("delta_trace: hyperbolic path has no roots") {
    const DeltaTrace tr = delta_trace(alpha_path(direct_sum(make_D(3.0), make_D(5.0)), 0.0, 0.2), 512);
    CHECK(tr.roots.empty());
    for (double d : tr.delta) CHECK(d > 0.0);
}

TEST_CASE("delta_trace: N2 alpha family has a simple zero at alpha = 0") {
    const DeltaTrace tr = delta_trace(n2_alpha_path(), 400);
    REQUIRE(tr.roots.size() == 1);
    CHECK(tr.roots[0].kind == RootKind::SignChange);
    CHECK(std::abs(tr.roots[0].t) < 1e-9);
    // leading term 8 (b2 - b3) sin(theta) alpha is positive for alpha > 0
    CHECK(tr.roots[0].before < 0.0);
    CHECK(tr.roots[0].after > 0.0);
}

TEST_CASE("alpha_family") {
    NormalFormSpec s{NormalKind::N2, {1.0, 0.2, 0.3, -0.4}};
    const AlphaFamily f = alpha_family(s, -0.1, 0.1, 41);
    CHECK(f.values.size() == 41);
    for (const auto& v : f.values) CHECK(symplectic_defect(v) < 1e-12);
    for (std::size_t k = 0; k < f.alpha.size(); ++k) {
        const double want = delta_N2_formula(1.0, 0.2, 0.3, -0.4, f.alpha[k]);
        CHECK(std::abs(delta_from_eigenvalues(f.values[k]) - want) <= 1e-7 * (1 + std::abs(want)));
    }
    const AlphaFamily g = alpha_family(NormalFormSpec{NormalKind::M2, {2.0, 0.3, -0.7}}, -0.1, 0.1, 21);
    for (std::size_t k = 0; k < g.alpha.size(); ++k) {
        const double want = delta_M2_formula(2.0, 0.3, -0.7, g.alpha[k]);
        CHECK(std::abs(discriminant(g.values[k]) - want) <= 1e-9 * (1 + std::abs(want)));
    }
    CHECK_THROWS_AS(alpha_family(NormalFormSpec{NormalKind::D, {2.0}}, -0.1, 0.1, 5), ConstraintError);
}

TEST_CASE("find_collisions: collision-free rotation loop") {
    const CollisionReport r = find_collisions(rotation_loop({1, 2}));
    CHECK(r.events.empty());
    CHECK(!r.passes.empty());
    CHECK(check_collision_constraints(r, 2).satisfied());
    CHECK(detect_elementary(r).empty());
}

TEST_CASE("find_collisions: N2 family crosses B_U") {
    const CollisionReport r = find_collisions(n2_alpha_path());
    REQUIRE(r.events.size() == 1);
    const CollisionEvent& e = r.events[0];
    CHECK(stratum_family(e.stratum) == "B_U");
    CHECK(e.location == Location::U);
    CHECK(std::abs(e.location_value - 1.0) < 1e-6);
    CHECK(e.multiplicity == 2);
    CHECK(e.stratum_before == "O_C");
    CHECK(e.stratum_after == "O_U");
    CHECK(e.delta_sign_change == SignChange::MinusToPlus);
    CHECK(e.adjacent == std::optional<bool>(true));
}

TEST_CASE("find_collisions: N3 family gives a triple collision") {
    const CollisionReport r = find_collisions(alpha_path(make_N3(1.2, 0.1, 0.2, 0.3), -0.05, 0.05));
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].multiplicity == 3);
    CHECK(std::abs(r.events[0].t_star) < 1e-6);
    CHECK(r.events[0].location == Location::U);
}

TEST_CASE("find_collisions: events follow a partial retiming") {
    Rng rng(23);
    const PositivePath p = crossing_pair(random_symplectic(2, rng));
    // 2.5 cos(pi t) = 2 and = -2
    const double t1 = std::acos(0.8) / kPi, t2 = 1.0 - t1;
    const CollisionReport r = find_collisions(p);
    REQUIRE(r.events.size() == 2);
    CHECK(std::abs(r.events[0].t_star - t1) < 1e-6);
    CHECK(r.events[0].location == Location::PlusOne);
    CHECK(std::abs(r.events[1].t_star - t2) < 1e-6);
    CHECK(r.events[1].location == Location::MinusOne);
    for (const auto& e : r.events) CHECK(stratum_family(e.stratum) == "B_R_pm1");

    // only a retimed crossing block moves the events
    const BlockDecomposition bd = block_decompose(p);
    bool second_crosses = false;
    for (const auto& g : bd.second.gamma)
        if (std::abs(g(0, 0) + g(1, 1)) < 2.0) second_crosses = true;
    const TauSpec tau = TauSpec::through(0, 1, 0.5, t1);
    auto preimage = [&](double v) {
        double lo = 0.0, hi = 1.0;
        for (int k = 0; k < 200; ++k) (tau((lo + hi) / 2) < v ? lo : hi) = (lo + hi) / 2;
        return (lo + hi) / 2;
    };
    const CollisionReport moved = find_collisions(part_retime(p, tau));
    REQUIRE(moved.events.size() == 2);
    CHECK(std::abs(moved.events[0].t_star - (second_crosses ? preimage(t1) : t1)) < 1e-5);
    CHECK(std::abs(moved.events[1].t_star - (second_crosses ? preimage(t2) : t2)) < 1e-5);
}

TEST_CASE("strata adjacency table") {
    CHECK(strata_adjacent("B_U", "O_U", "O_C", 2) == std::optional<bool>(true));
    CHECK(strata_adjacent("B_U_plus", "O_C", "O_U", 2) == std::optional<bool>(true));
    CHECK(strata_adjacent("B_U", "O_R", "O_C", 2) == std::optional<bool>(false));
    CHECK(strata_adjacent("B_R_pm1", "O_R", "O_UR", 2) == std::optional<bool>(true));
    CHECK(strata_adjacent("B_U_pm1", "O_UR", "O_U", 2) == std::optional<bool>(true));
    CHECK(strata_adjacent("B_pm1", "O_U", "O_R", 1) == std::optional<bool>(true));
    CHECK(!strata_adjacent("B_pm1", "O_U", "O_R", 2).has_value());
}

TEST_CASE("closed forms agree with eigenvalues") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double th = rng.uniform(0.3, 2.8), b1 = rng.uniform(-1, 1), b2 = rng.uniform(-1, 1),
                     b3 = rng.uniform(-1, 1), a = rng.uniform(-0.1, 0.1);
        const double want = delta_N2_formula(th, b1, b2, b3, a);
        CHECK(std::abs(delta_from_eigenvalues(make_N2(th, b1, b2, b3) * rot2n(2, a)) - want) <=
              1e-7 * (1 + std::abs(want)));
    }
    for (double lam : {1.0, -1.0, 2.0, -0.5, 3.0}) {
        const double c1 = 0.4, c2 = -0.3, a = 0.07;
        const double want = delta_M2_formula(lam, c1, c2, a);
        CHECK(std::abs(delta_from_eigenvalues(make_M2(lam, c1, c2) * rot2n(2, a)) - want) <= 1e-7 * (1 + want));
        // the opposite sign of the c2 term disagrees
        CHECK(std::abs(delta_from_eigenvalues(make_M2(lam, c1, c2) * rot2n(2, a)) -
                       delta_M2_formula(lam, c1, c2, a, -1.0)) > 1e-3);
    }
}

TEST_CASE("kocak discriminant") {
    for (double beta : {-1.0, 0.3, 2.0}) CHECK(kocak_discriminant(beta, 0, 0).expanded == 0.0);
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const double b = rng.uniform(-1, 1), l1 = rng.uniform(-1, 1), l2 = rng.uniform(-1, 1);
        const KocakValue v = kocak_discriminant(b, l1, l2);
        CHECK(v.residual <= 1e-6 * (1 + std::abs(v.expanded)));
        // minus the discriminant of the cubic in x^2 from the characteristic polynomial
        const auto c = char_poly(kocak_matrix(b, l1, l2));
        const double p = c[2], q = c[4], r = c[6];
        const double disc = p * p * q * q - 4 * q * q * q - 4 * p * p * p * r - 27 * r * r + 18 * p * q * r;
        CHECK(std::abs(v.expanded + disc) <= 1e-9 * (1 + std::abs(disc)));
    }
    for (int var : {1, 2})
        for (const auto& m : differentiate(kocak_terms(), var))
            if (m.l1 == 0 && m.l2 == 0) CHECK(m.coeff == 0.0);
}

TEST_CASE("elementary collide-out and collide-in") {
    const ElementaryPath out = fixture_elementary_collide_out(kPi / 4, kPi / 2, 2.0);
    CHECK(out.path.positive());
    const CollisionReport r = find_collisions(out.model);
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].stratum_before == "O_UR");
    CHECK(stratum_family(r.events[0].stratum) == "B_U_pm1");
    CHECK(r.events[0].stratum_after == "O_U");
    CHECK(stratum_family(r.events[1].stratum) == "B_U");
    CHECK(r.events[1].stratum_after == "O_C");
    // smoothing perturbs the designed collision time slightly
    CHECK(std::abs(r.events[1].t_star - out.t_collision) < 1e-4);
    CHECK(r.events[1].delta_sign_change == SignChange::PlusToMinus);
    for (const auto& e : r.events) CHECK(e.adjacent == std::optional<bool>(true));
    const ConstraintReport cr = check_collision_constraints(r, 2);
    REQUIRE(cr.checks.size() == 1);
    CHECK(cr.checks[0].clause == "exit_U");
    CHECK(cr.satisfied());
    const auto seg = detect_elementary(r);
    REQUIRE(seg.size() == 1);
    CHECK(seg[0].kind == ElementaryKind::CollideOut);

    const ElementaryPath in = fixture_elementary_collide_in(kPi / 4, kPi / 2, 2.0);
    const CollisionReport ri = find_collisions(in.model);
    REQUIRE(ri.events.size() == 2);
    CHECK(ri.events[0].stratum_before == "O_C");
    CHECK(ri.events[1].stratum_after == "O_UR");
    const ConstraintReport ci = check_collision_constraints(ri, 2);
    REQUIRE(ci.checks.size() == 1);
    CHECK(ci.checks[0].clause == "enter_U");
    CHECK(ci.satisfied());
    const auto si = detect_elementary(ri);
    REQUIRE(si.size() == 1);
    CHECK(si[0].kind == ElementaryKind::CollideIn);
}

TEST_CASE("constraint violations are reported") {
    // a lone B_U exit with nothing before it cannot be confirmed
    const CollisionReport r = find_collisions(reverse(n2_alpha_path()));
    REQUIRE(r.events.size() == 1);
    const ConstraintReport cr = check_collision_constraints(r, 2);
    REQUIRE(cr.checks.size() == 1);
    CHECK(cr.checks[0].status == ConstraintStatus::Inconclusive);
    CHECK(!cr.satisfied());
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sympath/index.hpp"

using namespace sympath;

namespace {

constexpr double kPi = std::numbers::pi;

PositivePath conjugated_loop(const std::vector<int>& ks, std::uint64_t seed) {
    PathSpec cs;
    cs.kind = "conjugated";
    cs.X0 = random_symplectic(static_cast<int>(ks.size()), seed);
    cs.children.push_back(PathSpec{});
    cs.children[0].kind = "rotation_loop";
    cs.children[0].ks = ks;
    return sample(build(cs));
}

}  // namespace

TEST_CASE("sp2_polar") {
    const PolarSp2 p = sp2_polar(rot2(1.0));
    CHECK(std::abs(p.theta - 1.0) < 1e-14);
    CHECK(std::abs(p.r - 1.0) < 1e-14);
    CHECK(std::abs(p.z) < 1e-14);
    const PolarSp2 d = sp2_polar(make_D(2.0));
    CHECK(d.theta == 0.0);
    CHECK(d.r == 2.0);
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const Matrix m = random_symplectic(1, rng);
        const PolarSp2 q = sp2_polar(m);
        CHECK(q.theta >= 0.0);
        CHECK(q.theta < 2 * kPi);
        CHECK(q.r > 0.0);
        CHECK(max_abs_diff(reconstruct(q), m) < 1e-12 * std::max(1.0, m.norm_max()));
    }
    CHECK(std::abs(sp2_polar(rot2(-0.5)).theta - (2 * kPi - 0.5)) < 1e-14);
    CHECK_THROWS_AS(sp2_polar(Matrix::identity(4)), DimensionError);
}

TEST_CASE("sp2_winding") {
    for (int k = 1; k <= 5; ++k) {
        const WindingRecord w = sp2_winding(sample(rotation_loop({k})));
        CHECK(w.loop);
        CHECK(w.increasing);
        CHECK(std::abs(w.winding - k) < 1e-12);
        REQUIRE(w.index.has_value());
        CHECK(*w.index == 2 * k);
    }
    // half turn of R(pi t) D(2) is not a loop
    PathModel m;
    m.n = 1;
    m.gamma = [](double t) { return Matrix(rot2(kPi * t) * make_D(2.0)); };
    m.P = [](double) { return Matrix(kPi * Matrix::identity(2)); };
    m.gamma0 = make_D(2.0);
    const WindingRecord h = sp2_winding(sample(m));
    CHECK(!h.loop);
    CHECK(!h.index.has_value());
    CHECK(std::abs(h.winding - 0.5) < 1e-12);
    // a coarse grid cannot be lifted reliably
    const PositivePath coarse = sample(rotation_loop({3}), 4);
    CHECK_THROWS_AS(sp2_winding(coarse), LiftError);
}

TEST_CASE("loop_index of rotation loops") {
    for (int k = 1; k <= 5; ++k) CHECK(loop_index(sample(rotation_loop({k}))) == 2 * k);
    const LoopIndex li = loop_index_report(sample(rotation_loop({1, 2})));
    CHECK(li.index == 6);
    CHECK(li.determinant_index == 6);
    REQUIRE(li.block_windings.size() == 2);
    CHECK(std::abs(li.block_windings[0] + li.block_windings[1] - 3.0) < 1e-9);
}

TEST_CASE("loop_index is conjugation invariant") {
    const LoopIndex a = loop_index_report(conjugated_loop({1, 2}, 5));
    CHECK(a.index == 6);
    CHECK(a.method == "blocks");
    // equal windings keep the blocks coincident; only the determinant winding applies
    const LoopIndex b = loop_index_report(conjugated_loop({1, 1}, 6));
    CHECK(b.index == 4);
    CHECK(b.method == "determinant");
    CHECK(loop_index(conjugated_loop({1, 2, 3}, 7)) == 12);
    CHECK(loop_index(conjugated_loop({1, 1, 1}, 8)) == 6);
}

TEST_CASE("loop_index rejects open paths") {
    PathModel open = rotation_loop({1});
    open.t1 = 0.5;
    CHECK_THROWS_AS(loop_index(sample(open)), PathError);
}

TEST_CASE("realize_index") {
    for (int n = 1; n <= 3; ++n)
        for (int m = n; m <= n + 3; ++m) {
            const Realization r = realize_index(n, m);
            CHECK(r.realizable);
            CHECK(r.loop.positive());
            CHECK(verify_positive(r.loop).ok);
            CHECK(r.index == 2 * m);
            CHECK(loop_index(r.loop) == 2 * m);
        }
    const Realization u = realize_index(3, 2);
    CHECK(!u.realizable);
    CHECK(!u.explanation.empty());
    CHECK_THROWS_AS(realize_index(5, 6), DimensionError);
}

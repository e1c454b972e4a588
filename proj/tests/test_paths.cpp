#include <cmath>

#include "doctest.h"
#include "sympath/paths.hpp"
#include "sympath/spectra.hpp"

using namespace sympath;

namespace {

PathModel sp2_hyperbolic_arc() {
    // D(2) R(t): trace stays above 2 for t in [0, 0.5]
    const Matrix d2 = make_D(2.0);
    PathModel m = alpha_path(d2, 0.0, 0.5);
    return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("integrate: constant generators") {
    PathModel m = constant_generator(Matrix::identity(2), Matrix::identity(2), 0.0, 2 * M_PI);
    m.gamma = nullptr;
    const PositivePath p = integrate(m, 4096);
    CHECK(max_abs_diff(p.gamma.back(), Matrix::identity(2)) < 1e-12);
    CHECK(p.positive());

    PathModel m4 = constant_generator(Matrix::identity(4), Matrix::identity(4), 0.0, M_PI);
    m4.gamma = nullptr;
    CHECK(max_abs_diff(integrate(m4, 2048).gamma.back(), -Matrix::identity(4)) < 1e-12);

    const PositivePath loop = sample(rotation_loop({1, 2}));
    CHECK(loop.size() == 2049);
    CHECK(max_abs_diff(loop.P[100], Matrix::diag({2 * M_PI, 2 * M_PI, 4 * M_PI, 4 * M_PI})) == 0.0);
    CHECK(verify_positive(loop).ok);
    // the integrator reproduces the closed form
    PathModel gen = rotation_loop({1, 2});
    gen.gamma = nullptr;
    const PositivePath num = integrate(gen, 2048);
    for (std::size_t k = 0; k < num.size(); k += 256) CHECK(max_abs_diff(num.gamma[k], loop.gamma[k]) < 1e-12);

    PathModel bad = constant_generator(Matrix::diag({1.0, -1.0}), Matrix::identity(2));
    bad.gamma = nullptr;
    CHECK_THROWS_AS(integrate(bad, 64), PositivityViolation);
}

TEST_CASE("integrate: generator-only random paths self-certify") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        PathSpec s;
        s.kind = "samples";
        s.gamma0 = random_symplectic(2, rng);
        s.knot_t = {0.0, 0.4, 1.0};
        for (int i = 0; i < 3; ++i) {
            const Matrix a = random_symmetric(4, rng);
            Matrix q = a * a.transpose();
            for (int j = 0; j < 4; ++j) q(j, j) += 0.3;
            s.knot_P.push_back(q);
        }
        const PositivePath p = integrate(build(s), 2048);
        CHECK(p.positive());
        CHECK(p.symp_defect < 1e-9);
        CHECK(verify_positive(p).ok);
    }
}

TEST_CASE("verify_positive") {
    CHECK(verify_positive(sample(rotation_loop({1}))).ok);
    PositivePath still;
    still.n = 1;
    still.t = uniform_grid(0, 1, 16);
    for (std::size_t k = 0; k < still.t.size(); ++k) {
        still.gamma.push_back(Matrix::identity(2));
        still.P.push_back(Matrix(2, 2));
    }
    const auto c = verify_positive(still);
    CHECK_FALSE(c.ok);
    CHECK(c.min_eig == 0.0);
}

TEST_CASE("product") {
    const PositivePath a = sample(rotation_loop({1}));
    const PositivePath ab = product(a, a);
    const PositivePath ref = sample(rotation_loop({2}));
    for (std::size_t k = 0; k < ab.size(); k += 128) {
        CHECK(max_abs_diff(ab.gamma[k], ref.gamma[k]) < 1e-12);
        CHECK(max_abs_diff(ab.P[k], ref.P[k]) < 1e-12);
    }
    PositivePath still = a;
    for (auto& g : still.gamma) g = Matrix::identity(2);
    for (auto& P : still.P) P = Matrix(2, 2);
    certify(still);
    CHECK_THROWS_AS(product(a, still), PathError);
    PositivePath shifted = a;
    shifted.t[3] += 1e-3;
    CHECK_THROWS_AS(product(a, shifted), PathError);

    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const PositivePath p1 = sample(random_positive_path(2, rng));
        const PositivePath p2 = sample(random_positive_path(2, rng));
        const PositivePath q = product(p1, p2);
        CHECK(q.positive());
        const auto cert = verify_positive(q);
        CHECK(cert.ok);
        // assembled minimum eigenvalue against the finite-difference one
        double assembled = 1e300;
        for (std::size_t k = 1; k + 1 < q.size(); ++k) assembled = std::min(assembled, sym_min_eig(q.P[k]));
        CHECK(rel(cert.min_eig, assembled) < 1e-6);
    }
}

TEST_CASE("join") {
    const JoinResult r = join(Matrix::identity(4), Matrix::identity(4), 1);
    CHECK(r.k == 1);
    for (double t : {0.0, 0.3, 0.77, 1.0})
        CHECK(max_abs_diff(r.model.gamma(t), rot2n(2, 2 * M_PI * t)) < 1e-12);
    CHECK(r.path.positive());

    const JoinResult h = join(make_D(0.5), make_D(2.0));
    CHECK(h.k >= 1);
    CHECK(max_abs_diff(h.path.gamma.front(), make_D(0.5)) < 1e-9);
    CHECK(max_abs_diff(h.path.gamma.back(), make_D(2.0)) < 1e-9);
    bool unit = false;
    for (const auto& g : h.path.gamma) unit = unit || has_unit_spectrum(g);
    CHECK(unit);

    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix A = random_symplectic(2, rng), B = random_symplectic(2, rng);
        const JoinResult q = join(A, B);
        CHECK(max_abs_diff(q.path.gamma.front(), A) < 1e-9);
        CHECK(max_abs_diff(q.path.gamma.back(), B) < 1e-9);
        CHECK(verify_positive(q.path).ok);
        CHECK(q.k <= 8);
    }
}

TEST_CASE("rotation perturbation") {
    const PositivePath a = sample(rotation_loop({1}));
    CHECK(max_abs_diff(perturb_rotation(a, 0.0).gamma[500], a.gamma[500]) == 0.0);
    const PositivePath b = perturb_rotation(a, -M_PI);
    CHECK(max_abs_diff(b.P[700], M_PI * Matrix::identity(2)) < 1e-12);
    CHECK(max_abs_diff(b.gamma.back(), rot2(M_PI)) < 1e-12);
    CHECK(find_epsilon(a).lower == doctest::Approx(-2 * M_PI).epsilon(1e-8));
    CHECK_THROWS_AS(perturb_rotation(a, -7.0), PositivityViolation);

    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const PositivePath p = sample(random_positive_path(2, rng));
        const ThetaInterval iv = find_epsilon(p);
        CHECK(iv.lower < 0.0);
        CHECK(perturb_rotation(p, 0.5 * iv.lower).positive());
        CHECK(perturb_rotation(p, 1.0).positive());
    }
}

TEST_CASE("conjugate_path") {
    Rng rng(13);
    const PositivePath p = sample(random_positive_path(2, rng));
    const Matrix X = random_symplectic(2, rng);
    const ConjugatedPath c = conjugate_path(p, exp_family(Matrix(4, 4), X));
    CHECK(c.positive);
    CHECK(c.generator_residual < 1e-9);

    // a constant path is never made positive by conjugation
    PositivePath fixed;
    fixed.n = 2;
    fixed.t = uniform_grid(0, 1, 64);
    const Matrix A = direct_sum(rot2(1.0), make_D(2.0));
    for (std::size_t k = 0; k < fixed.t.size(); ++k) {
        fixed.gamma.push_back(A);
        fixed.P.push_back(Matrix(4, 4));
    }
    for (int trial = 0; trial < 20; ++trial) {
        const ConjugatedPath q = conjugate_path(fixed, exp_family(random_symmetric(4, rng), random_symplectic(2, rng)));
        CHECK_FALSE(q.positive);
    }

    // wrong generator is caught
    XFamily wrong = exp_family(random_symmetric(4, rng), X);
    wrong.Y = [](double) { return Matrix(4, 4); };
    CHECK_THROWS_AS(conjugate_path(p, wrong), PathError);

    // formula against a finite-difference derivative of X^{-1} gamma X
    const PathModel g = random_positive_path(2, rng);
    const XFamily xf = exp_family(random_symmetric(4, rng), random_symplectic(2, rng));
    const Matrix J = standard_J(2);
    for (double t : {0.2, 0.5, 0.8}) {
        auto conj = [&](double s) { return Matrix(symp_inverse(xf.X(s)) * g.gamma(s) * xf.X(s)); };
        const double h = 1e-3;
        const Matrix d1 = (1.0 / (2 * h)) * (conj(t + h) - conj(t - h));
        const Matrix d2 = (1.0 / h) * (conj(t + h / 2) - conj(t - h / 2));
        const Matrix fd = (1.0 / 3.0) * (4.0 * d2 - d1);
        const Matrix formula = J * conjugated_generator(g.gamma(t), g.P(t), xf.X(t), xf.Y(t)) * conj(t);
        CHECK((fd - formula).norm_max() / formula.norm_max() < 1e-6);
    }
}

TEST_CASE("retime") {
    const PathModel base = rotation_loop({1, 2});
    const PathModel same = retime(base, TauSpec::identity(0, 1));
    CHECK(max_abs_diff(same.gamma(0.37), base.gamma(0.37)) == 0.0);

    const TauSpec sq{{0.0, 1.0}, {0.0, 1.0}, {0.0, 2.0}};  // tau(t) = t^2
    CHECK(sq(0.5) == doctest::Approx(0.25));
    const PathModel r = retime(base, sq);
    const PositivePath p = sample(r);
    CHECK(sym_min_eig(p.P[0]) == doctest::Approx(0.0));
    CHECK(sym_min_eig(p.P[1]) > 0.0);
    CHECK(verify_positive(p).ok);
    for (double s : {0.0, 0.25, 0.5, 1.0}) CHECK(verify_positive(sample(homotopy_slice(base, sq, s))).ok);

    const TauSpec unit = TauSpec::through(0.0, 1.0, 0.5, 0.3);
    CHECK(unit.unit_end_slopes());
    const PathModel u = retime(base, unit);
    CHECK(max_abs_diff(u.gamma(0), base.gamma(0)) == 0.0);
    CHECK(max_abs_diff(u.gamma(1), base.gamma(1)) < 1e-15);
    CHECK(max_abs_diff(u.P(0), base.P(0)) < 1e-12);
    CHECK(max_abs_diff(u.P(1), base.P(1)) < 1e-12);

    // eigenvalue sets are carried to matched times
    Rng r3(3);
    const PathModel rnd = random_positive_path(2, r3);
    const PathModel rr = retime(rnd, unit);
    for (double t : {0.1, 0.45, 0.9}) {
        auto e1 = eigenvalues(rr.gamma(t)), e2 = eigenvalues(rnd.gamma(unit(t)));
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(e1[i] - e2[i]) < 1e-8 * std::max(1.0, std::abs(e1[i])));
    }

    CHECK_THROWS_AS(retime(base, TauSpec{{0.0, 1.0}, {0.0, 1.0}, {1.0, -1.0}}), PathError);
    CHECK_THROWS_AS(retime(base, TauSpec{{0.0, 0.5, 1.0}, {0.0, 0.6, 1.0}, {1.0, -0.5, 1.0}}), PathError);
}

TEST_CASE("block_decompose") {
    const PositivePath loop = sample(rotation_loop({1, 2}));
    const BlockDecomposition d = block_decompose(loop);
    CHECK(d.constant_basis);
    CHECK(max_abs_diff(d.first.gamma[300], rot2(2 * M_PI * loop.t[300])) < 1e-14);
    CHECK(max_abs_diff(d.second.gamma[300], rot2(4 * M_PI * loop.t[300])) < 1e-14);

    // hidden by a constant symplectic change of basis
    Rng rng(17);
    const Matrix X = random_symplectic(2, rng);
    PathSpec cs;
    cs.kind = "conjugated";
    cs.X0 = X;
    cs.children.push_back(PathSpec{});
    cs.children[0].kind = "rotation_loop";
    cs.children[0].ks = {1, 2};
    const PositivePath hidden = sample(build(cs));
    CHECK(hidden.positive());
    const BlockDecomposition h = block_decompose(hidden);
    CHECK_FALSE(h.constant_basis);
    CHECK(h.spectrum_error < 1e-6);
    CHECK(h.offdiag_residual < 1e-6);
    CHECK(h.first.positive());
    CHECK(h.second.positive());
    CHECK(std::abs(h.first.gamma[100].trace() - 2 * std::cos(2 * M_PI * hidden.t[100])) < 1e-8);

    // rotating block next to a hyperbolic one
    const PathModel arc = sp2_hyperbolic_arc();
    PathModel rot = constant_generator(2 * M_PI * Matrix::identity(2), Matrix::identity(2), 0.0, 0.5);
    auto blocks = [arc, rot](double t) { return direct_sum(rot.gamma(t), arc.gamma(t)); };
    PathModel mixed;
    mixed.n = 2;
    mixed.t0 = 0.0;
    mixed.t1 = 0.5;
    mixed.gamma0 = blocks(0.0);
    mixed.gamma = [blocks, X](double t) { return Matrix(symp_inverse(X) * blocks(t) * X); };
    mixed.P = [rot, arc, X](double t) { return Matrix(X.transpose() * direct_sum(rot.P(t), arc.P(t)) * X); };
    const PositivePath mp = sample(mixed);
    CHECK(mp.positive());
    const BlockDecomposition md = block_decompose(mp);
    CHECK(md.first.positive());
    CHECK(md.second.positive());
    CHECK(md.spectrum_error < 1e-6);
    CHECK(verify_positive(md.first).ok);
    CHECK(verify_positive(md.second).ok);

    // an N2-type collision between the groups cannot be split
    const PositivePath col = sample(alpha_path(make_N2(1.0, 0.1, 0.5, -0.5), -0.1, 0.1));
    CHECK_THROWS_AS(block_decompose(col), NotDecomposable);
}

TEST_CASE("part_retime") {
    Rng rng(19);
    const Matrix X = random_symplectic(2, rng);
    PathSpec cs;
    cs.kind = "conjugated";
    cs.X0 = X;
    cs.children.push_back(PathSpec{});
    cs.children[0].kind = "rotation_loop";
    cs.children[0].ks = {1, 2};
    const PositivePath p = sample(build(cs));
    const PositivePath same = part_retime(p, TauSpec::identity(0, 1));
    for (std::size_t k = 0; k < p.size(); k += 97) CHECK(max_abs_diff(same.gamma[k], p.gamma[k]) < 1e-8);
    const PositivePath moved = part_retime(p, TauSpec::through(0, 1, 0.5, 0.3));
    CHECK(moved.positive());
    CHECK(verify_positive(moved).ok);
    CHECK(max_abs_diff(moved.gamma.front(), p.gamma.front()) < 1e-6);
    CHECK(max_abs_diff(moved.gamma.back(), p.gamma.back()) < 1e-6);
    CHECK(max_abs_diff(moved.P.front(), p.P.front()) < 1e-6 * p.P.front().norm_max());
    CHECK(max_abs_diff(moved.P.back(), p.P.back()) < 1e-6 * p.P.back().norm_max());
    CHECK_THROWS_AS(part_retime(p, TauSpec{{0.0, 1.0}, {0.0, 1.0}, {0.0, 2.0}}), PathError);
}

TEST_CASE("smooth_concat") {
    PathModel a = constant_generator(Matrix::identity(2), Matrix::identity(2), 0.0, 0.5);
    PathModel b = constant_generator(Matrix::identity(2), Matrix::identity(2), 0.0, 1.0);
    b.t0 = 0.5;
    const ConcatResult same = smooth_concat(a, b, 0.1);
    CHECK(same.c0_distance < 1e-9);
    CHECK(same.path.positive());

    // two speeds: 1 then 3
    PathModel fast = constant_generator(3.0 * Matrix::identity(2), a.gamma(0.5), 0.5, 1.0);
    const ConcatResult two = smooth_concat(a, fast, 0.05);
    CHECK(two.path.positive());
    CHECK(verify_positive(two.path).ok);
    CHECK(two.derivative_jump < 1e-6);
    CHECK(two.c0_distance < 0.2);

    PathModel back = reverse(a);
    back.t0 = 0.5;
    back.t1 = 1.0;
    const PathModel a_copy = a;
    back.gamma = [a_copy](double t) { return a_copy.gamma(1.0 - t); };
    back.P = [a_copy](double t) { return Matrix(-1.0 * a_copy.P(1.0 - t)); };
    CHECK_THROWS_AS(smooth_concat(a, back, 0.05), PositivityViolation);

    PathModel off = fast;
    off.gamma = [fast](double t) { return Matrix(fast.gamma(t) * rot2(0.1)); };
    CHECK_THROWS_AS(smooth_concat(a, off, 0.05), PathError);
}

TEST_CASE("reverse_inverse stays positive") {
    Rng rng(23);
    const PathModel m = random_positive_path(2, rng);
    const PositivePath p = sample(reverse_inverse(m));
    CHECK(p.positive());
    CHECK(verify_positive(p).ok);
    CHECK(max_abs_diff(p.gamma.front(), symp_inverse(m.gamma(1.0))) < 1e-12);
}

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sympath/fixtures.hpp"

namespace sympath {

bool FixtureResult::passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const FixtureCheck& c) { return c.passed; });
}

namespace {

FixtureCheck check(const std::string& name, bool ok, double value = 0.0, const std::string& detail = "") {
    return FixtureCheck{name, ok, value, detail};
}

// Real and imaginary parts of a null vector of m - lambda I.
void complex_null_vector(const Matrix& m, Complex lambda, std::vector<double>& x, std::vector<double>& y) {
    const std::size_t d = m.rows();
    Matrix A(2 * d, 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = m(i, j) - (i == j ? lambda.real() : 0.0);
            A(i, j) = v;
            A(d + i, d + j) = v;
        }
        A(i, d + i) = lambda.imag();
        A(d + i, i) = -lambda.imag();
    }
    const SymEig e = sym_eig(symmetrize(A.transpose() * A));
    x.assign(d, 0.0);
    y.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        x[i] = e.vectors(i, 0);
        y[i] = e.vectors(d + i, 0);
    }
}

double omega(const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); i += 2) s += u[i] * v[i + 1] - u[i + 1] * v[i];
    return s;
}

struct RotationBlock {
    std::vector<double> e, f;
    double phi = 0.0;
    int sign = 1;  // the block acts as R(sign * phi)
};

// Symplectic rotation blocks of an elliptic matrix with simple spectrum.
std::vector<RotationBlock> rotation_blocks(const Matrix& m) {
    std::vector<RotationBlock> out;
    for (Complex z : eigenvalues(m)) {
        if (z.imag() <= 1e-9) continue;
        if (std::abs(std::abs(z) - 1.0) > 1e-7) throw NumericalError("matrix is not elliptic");
        std::vector<double> x, y;
        complex_null_vector(m, z, x, y);
        const double w = omega(x, y);
        if (std::abs(w) < 1e-10) throw NumericalError("degenerate eigenvector pairing");
        RotationBlock b;
        b.phi = std::arg(z);
        const double s = 1.0 / std::sqrt(std::abs(w));
        b.e = x;
        b.f = y;
        for (auto& v : b.e) v *= s;
        for (auto& v : b.f) v *= (w > 0 ? s : -s);
        b.sign = w > 0 ? -1 : 1;
        out.push_back(b);
    }
    return out;
}

Matrix columns(const std::vector<std::vector<double>>& cols) {
    Matrix m(cols.front().size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < cols[j].size(); ++i) m(i, j) = cols[j][i];
    return m;
}

// Orthonormal basis of the generalized eigenspace for eigenvalues with |z| < 1 (or > 1).
Matrix hyperbolic_subspace(const Matrix& a, bool contracting) {
    const std::size_t d = a.rows();
    Matrix q = Matrix::identity(d);
    for (Complex z : eigenvalues(a)) {
        const bool inside = std::abs(z) < 1.0;
        if (inside == contracting) continue;  // keep these, kill the others
        if (z.imag() < -1e-12) continue;
        Matrix f;
        if (std::abs(z.imag()) <= 1e-12)
            f = a - z.real() * Matrix::identity(d);
        else
            f = a * a - 2.0 * z.real() * a + std::norm(z) * Matrix::identity(d);
        q = f * q;
        q = (1.0 / std::max(1e-300, q.norm_max())) * q;
    }
    const std::size_t n = d / 2;
    const SymEig e = sym_eig(symmetrize(q * q.transpose()));
    Matrix v(d, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) v(i, j) = e.vectors(i, d - n + j);
    return v;
}

// Acts as r R(phi) on (x1, x2) and by the inverse transpose on (y1, y2).
Matrix loxodromic(double r, double phi) {
    const Matrix a = r * rot2(phi), b = (1.0 / r) * rot2(phi);
    Matrix m(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            m(2 * i, 2 * j) = a(i, j);
            m(2 * i + 1, 2 * j + 1) = b(i, j);
        }
    return m;
}

PathModel with_P(PathModel m, std::function<Matrix(double)> gamma, std::function<Matrix(double)> P) {
    m.gamma = std::move(gamma);
    m.P = std::move(P);
    m.gamma0 = m.gamma(m.t0);
    return m;
}

}  // namespace

FixtureResult fixture_hyperbolic_join_witness(const std::vector<int>& ks) {
    FixtureResult r;
    r.name = "hyperbolic_join_witness";
    const Matrix A = make_D(0.5), B = make_D(2.0);
    auto witness = [](const PositivePath& p) {
        for (const auto& g : p.gamma)
            if (has_unit_spectrum(g)) return true;
        return false;
    };
    for (int k : ks) {
        const JoinResult j = join(A, B, k);
        std::ostringstream name;
        name << "join D(1/2) to D(2), k = " << k;
        r.checks.push_back(check(name.str(), j.path.positive() && witness(j.path), j.path.min_eig_P));
    }
    const JoinResult back = join(B, A, 0);
    r.checks.push_back(check("join D(2) to D(1/2), auto k", back.path.positive() && witness(back.path),
                             back.path.min_eig_P, "k = " + std::to_string(back.k)));
    return r;
}

PositivePath half_turn_pair_path() {
    const double pi = std::numbers::pi;
    PathModel m;
    m.n = 2;
    m.kind = "half_turn_pair";
    m = with_P(
        m, [pi](double t) { return direct_sum(rot2(pi * t) * make_D(2.0), rot2(pi * t) * make_D(3.0)); },
        [pi](double) { return Matrix(pi * Matrix::identity(4)); });
    return sample(m);
}

FixtureResult fixture_half_turn_pair() {
    FixtureResult r;
    r.name = "half_turn_pair";
    const Matrix A0 = direct_sum(make_D(2.0), make_D(3.0));
    const PositivePath p = half_turn_pair_path();
    const double e0 = max_abs_diff(p.gamma.front(), A0);
    const double e1 = max_abs_diff(p.gamma.back(), -1.0 * A0);
    r.checks.push_back(check("starts at diag(D(2), D(3))", e0 <= 1e-9, e0));
    r.checks.push_back(check("ends at -diag(D(2), D(3))", e1 <= 1e-9, e1));
    const PositivityCertificate c = verify_positive(p);
    r.checks.push_back(check("positive", p.positive() && c.ok, c.min_eig));
    for (int b = 0; b < 2; ++b) {
        std::vector<Matrix> g;
        for (const auto& x : p.gamma) g.push_back(x.block(2 * b, 2 * b, 2, 2));
        const WindingRecord w = sp2_winding(p.t, g);
        r.checks.push_back(check("block " + std::to_string(b + 1) + " winding 1/2",
                                 std::abs(w.winding - 0.5) <= 1e-9 && w.increasing, w.winding));
    }
    return r;
}

ConeWitness fixture_cone_surjectivity(const Matrix& A, const std::optional<Matrix>& Q) {
    validate(A);
    if (!truly_hyperbolic(A)) throw ConstraintError("cone witness needs a truly hyperbolic matrix");
    const int n = half_dim(A);
    const std::size_t d = 2 * static_cast<std::size_t>(n), nn = static_cast<std::size_t>(n);
    const Matrix J = standard_J(n);
    const Matrix Es = hyperbolic_subspace(A, true), Eu = hyperbolic_subspace(A, false);
    const Matrix W = -1.0 * (Es.transpose() * J * Eu);  // omega pairing
    if (singular_values(W).back() < 1e-8 * singular_values(W).front())
        throw ConditioningError("stable and unstable subspaces are badly paired");
    const Matrix F = Eu * inverse(W);
    const Matrix Bs = Es.transpose() * A * Es;
    // G = sum (Bs^k)^T Bs^k makes Bs a strict contraction
    Matrix G = Matrix::identity(nn), term = Matrix::identity(nn);
    for (int k = 0; k < 100000; ++k) {
        term = Bs.transpose() * term * Bs;
        G += term;
        if (term.norm_max() <= 1e-16 * G.norm_max()) break;
        if (k == 99999) throw ConditioningError("contraction series does not converge");
    }
    G = symmetrize(G);
    const Matrix Gi = sym_inv_sqrt(G), Gs = sym_sqrt(G);
    const Matrix E2 = Es * Gi, F2 = F * Gs;
    ConeWitness w;
    w.X = Matrix(d, d);
    w.Z = Matrix(d, d);
    for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t r = 0; r < d; ++r) {
            w.X(r, 2 * i) = E2(r, i);
            w.X(r, 2 * i + 1) = F2(r, i);
        }
    for (std::size_t i = 0; i < nn; ++i) {
        w.Z(2 * i, 2 * i) = 1.0;
        w.Z(2 * i + 1, 2 * i + 1) = -1.0;
    }
    if (symplectic_defect(w.X) > 1e-8 * std::max(1.0, w.X.norm_max() * w.X.norm_max()))
        throw ConditioningError("adapted basis is not symplectic");
    const Matrix Xi = symp_inverse(w.X);
    w.Y = symmetrize(Xi.transpose() * w.Z * Xi);
    const Matrix Ai = symp_inverse(A);
    w.D = symmetrize(Ai.transpose() * w.Y * Ai - w.Y);
    w.min_eig = sym_min_eig(w.D);
    if (!(w.min_eig > 0.0)) throw NumericalError("cone witness is not positive definite");
    if (Q) {
        const Matrix Dh = sym_inv_sqrt(w.D);
        const double lo = sym_min_eig(symmetrize(Dh * symmetrize(*Q) * Dh));
        double k = std::max(0.0, -lo) + 1.0;
        while (!(sym_min_eig(symmetrize(*Q + k * w.D)) > 0.0)) k *= 2.0;
        w.k = k;
    }
    return w;
}

ElementaryPath fixture_elementary_collide_out(double theta_c, double theta_o, double lambda_start, double eps,
                                              double window) {
    const double pi = std::numbers::pi;
    if (!(0.0 < theta_c && theta_c < theta_o && theta_o < pi))
        throw ConstraintError("collide-out needs 0 < theta_collision < theta_other < pi");
    if (!(lambda_start > 1.0)) throw ConstraintError("collide-out needs lambda_start > 1");
    if (!(0.0 < window && window < eps)) throw ConstraintError("window must lie inside the collision margin");

    // second leg: alpha family through a B_U point at t = 1 + eps
    const Matrix N = make_N2(theta_c, 0.0, -0.5, 0.5);
    const Matrix J4 = standard_J(2);
    const Matrix S2 = symmetrize(J4.transpose() * N * N.transpose() * J4);
    const double tc = 1.0 + eps;
    const PathModel leg2 = constant_generator(S2, N * rot2n(2, -eps), 1.0, 1.0 + 2.0 * eps);
    const Matrix E = leg2.gamma0;

    auto blocks = rotation_blocks(E);
    if (blocks.size() != 2 || blocks[0].sign == blocks[1].sign)
        throw NumericalError("collision pairs do not carry opposite rotation senses");
    if (blocks[0].sign > 0) std::swap(blocks[0], blocks[1]);
    const double phi1 = blocks[0].phi, phi2 = blocks[1].phi;
    if (!(theta_o > phi1)) throw ConstraintError("theta_other must exceed the collision angles");
    const Matrix Y = columns({blocks[0].e, blocks[0].f, blocks[1].e, blocks[1].f});
    const Matrix Yi = symp_inverse(Y);

    // first leg: block 1 turns from theta_other, block 2 leaves a hyperbolic start through +1
    const double L = lambda_start + 1.0 / lambda_start;
    const double kappa = std::acos(2.0 * std::cos(phi2) / L);
    const Matrix D = make_D(lambda_start);
    const Matrix F = D * rot2(kappa);
    auto fb = rotation_blocks(F);
    if (fb.size() != 1 || fb[0].sign != 1) throw NumericalError("hyperbolic leg ends with the wrong rotation sense");
    const Matrix Wm = columns({fb[0].e, fb[0].f});
    const Matrix Wi = symp_inverse(Wm);
    const double c = theta_o - phi1;
    const Matrix J2 = standard_J(1);
    PathModel leg1;
    leg1.n = 2;
    leg1.t0 = 0.0;
    leg1.t1 = 1.0;
    leg1.kind = "collide_out_leg";
    leg1 = with_P(
        leg1,
        [=](double t) {
            const Matrix a = rot2(-theta_o + c * t);
            const Matrix b = Wi * D * rot2(kappa * t) * Wm;
            return Matrix(Y * direct_sum(a, b) * Yi);
        },
        [=](double) {
            const Matrix pa = c * Matrix::identity(2);
            const Matrix pb = symmetrize(-1.0 * (J2 * Wi * D * (kappa * J2) * symp_inverse(D) * Wm));
            return symmetrize(Yi.transpose() * direct_sum(pa, pb) * Yi);
        });

    const ConcatResult cat = smooth_concat(leg1, leg2, window);
    ElementaryPath out;
    out.model = cat.model;
    out.path = cat.path;
    out.t_collision = tc;
    out.c0_distance = cat.c0_distance;
    out.derivative_jump = cat.derivative_jump;
    return out;
}

ElementaryPath fixture_elementary_collide_in(double theta_c, double theta_o, double lambda_start) {
    const ElementaryPath fwd = fixture_elementary_collide_out(theta_c, theta_o, lambda_start);
    ElementaryPath out;
    out.model = reverse_inverse(fwd.model);
    out.path = sample(out.model, static_cast<int>(fwd.path.size()) - 1);
    out.t_collision = fwd.model.t0 + fwd.model.t1 - fwd.t_collision;
    return out;
}

ElementaryPath fixture_two_double_collisions(double theta, double eps, std::uint64_t seed) {
    Rng rng(seed);
    const Matrix S = random_symmetric(6, rng);
    const Matrix N3 = make_N3(theta, 0.1, 0.2, 0.3);
    const Matrix J = standard_J(3);
    const double a0 = -0.1, a1 = 0.1;
    for (double e : {eps, -eps}) {
        const Matrix base = expm(e * (J * S)) * N3;
        const Matrix P = symmetrize(J.transpose() * base * base.transpose() * J);
        PathModel m = constant_generator(P, base * rot2n(3, a0), a0, a1);
        m.kind = "two_double_collisions";
        const CollisionReport r = find_collisions(m);
        const auto seg = detect_elementary(r);
        if (r.events.size() == 2 && seg.size() == 1 && seg[0].kind == ElementaryKind::TwoDoubleCollisions) {
            ElementaryPath out;
            out.model = m;
            out.path = sample(m);
            out.t_collision = 0.5 * (r.events[0].t_star + r.events[1].t_star);
            return out;
        }
    }
    throw NumericalError("neither perturbation side crosses the cusp interior");
}

namespace {

FixtureResult collide_out_result(bool reversed) {
    FixtureResult r;
    r.name = reversed ? "collide_in" : "collide_out";
    const double pi = std::numbers::pi;
    const ElementaryPath e = reversed ? fixture_elementary_collide_in(pi / 4, pi / 2, 2.0)
                                      : fixture_elementary_collide_out(pi / 4, pi / 2, 2.0);
    const PositivityCertificate cert = verify_positive(e.path);
    r.checks.push_back(check("positive", e.path.positive() && cert.ok, cert.min_eig));
    const CollisionReport rep = find_collisions(e.model);
    const auto& ev = rep.events;
    std::ostringstream seq;
    for (const auto& x : ev) seq << x.stratum_before << " >" << x.stratum << "> " << x.stratum_after << "; ";
    r.checks.push_back(check("two events", ev.size() == 2, static_cast<double>(ev.size()), seq.str()));
    if (ev.size() == 2) {
        const auto& first = reversed ? ev[1] : ev[0];
        const auto& second = reversed ? ev[0] : ev[1];
        const bool a = stratum_family(first.stratum) == "B_U_pm1" && first.location == Location::PlusOne;
        const bool b = stratum_family(second.stratum) == "B_U";
        r.checks.push_back(check("B_U_pm1 then B_U events", a && b));
        const auto seg = detect_elementary(rep);
        const ElementaryKind want = reversed ? ElementaryKind::CollideIn : ElementaryKind::CollideOut;
        r.checks.push_back(check("elementary segment", seg.size() == 1 && seg[0].kind == want));
        const bool delta_pattern = reversed ? second.delta_sign_change == SignChange::MinusToPlus
                                            : second.delta_sign_change == SignChange::PlusToMinus;
        r.checks.push_back(check("delta sign across the U collision", delta_pattern));
        const ConstraintReport cr = check_collision_constraints(rep, 2);
        r.checks.push_back(check("exit constraint satisfied", !cr.checks.empty() && cr.satisfied(),
                                 static_cast<double>(cr.checks.size())));
    }
    return r;
}

FixtureResult two_double_result() {
    FixtureResult r;
    r.name = "two_double_collisions";
    const ElementaryPath e = fixture_two_double_collisions();
    r.checks.push_back(check("positive", e.path.positive(), e.path.min_eig_P));
    const CollisionReport rep = find_collisions(e.model);
    const auto seg = detect_elementary(rep);
    r.checks.push_back(check("two B_U2 events", rep.events.size() == 2, static_cast<double>(rep.events.size())));
    r.checks.push_back(check("two double collisions segment",
                             seg.size() == 1 && seg[0].kind == ElementaryKind::TwoDoubleCollisions));
    return r;
}

FixtureResult cone_result() {
    FixtureResult r;
    r.name = "cone_surjectivity";
    Rng rng(11);
    const std::vector<std::pair<std::string, Matrix>> cases = {
        {"diag(D(2), D(3))", direct_sum(make_D(2.0), make_D(3.0))},
        {"conjugated diag(D(2), D(-3))", conjugate(direct_sum(make_D(2.0), make_D(-3.0)), random_symplectic(2, rng))},
        {"complex quadruple", conjugate(loxodromic(2.0, 0.7), random_symplectic(2, rng))},
    };
    for (const auto& [name, A] : cases) {
        const Matrix Q = random_symmetric(4, rng, 5.0);
        const ConeWitness w = fixture_cone_surjectivity(A, Q);
        const bool ok = w.min_eig > 0.0 && w.k && sym_min_eig(symmetrize(Q + *w.k * w.D)) > 0.0;
        r.checks.push_back(check(name, ok, w.min_eig));
    }
    bool rejected = false;
    try {
        fixture_cone_surjectivity(direct_sum(rot2(1.0), make_D(2.0)));
    } catch (const ConstraintError&) {
        rejected = true;
    }
    r.checks.push_back(check("unit-circle input rejected", rejected));
    return r;
}

}  // namespace

const std::vector<FixtureEntry>& fixture_registry() {
    static const std::vector<FixtureEntry> reg = {
        {"hyperbolic_join_witness", "joins between D(1/2) and D(2) meet the unit circle",
         [] { return fixture_hyperbolic_join_witness({1, 3}); }},
        {"half_turn_pair", "diag(e^{pi J t} D(2), e^{pi J t} D(3)) endpoints, positivity, windings",
         fixture_half_turn_pair},
        {"cone_surjectivity", "positive cone witness for truly hyperbolic matrices", cone_result},
        {"collide_out", "elementary collide-out path", [] { return collide_out_result(false); }},
        {"collide_in", "elementary collide-in path", [] { return collide_out_result(true); }},
        {"two_double_collisions", "Sp(6) path crossing B_U2 twice near a triple point", two_double_result},
    };
    return reg;
}

FixtureResult run_fixture(const std::string& name) {
    for (const auto& f : fixture_registry())
        if (f.name == name) return f.run();
    throw std::invalid_argument("unknown fixture: " + name);
}

}  // namespace sympath

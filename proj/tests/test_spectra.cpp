#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sympath/spectra.hpp"
#include "sympath/symplectic.hpp"

using namespace sympath;

namespace {

bool has_mu(const std::vector<Complex>& mu, double v, double tol) {
    return std::any_of(mu.begin(), mu.end(), [&](Complex z) { return std::abs(z - v) <= tol; });
}

// Count of real mu values from raw eigenvalues, without the discriminant.
int real_mu_count(const Matrix& m) {
    int units = 0, reals = 0;
    for (auto z : eigenvalues(m)) {
        if (std::abs(std::abs(z) - 1.0) <= 1e-7) ++units;
        else if (std::abs(z.imag()) <= 1e-7) ++reals;
    }
    return (units + reals) / 2;
}

}  // namespace

TEST_CASE("mu_reduce") {
    auto r = mu_reduce(Matrix::identity(4));
    CHECK(r.sigma[0] == doctest::Approx(4.0));
    CHECK(r.sigma[1] == doctest::Approx(6.0));
    for (auto z : r.mu) CHECK(std::abs(z - 2.0) < 1e-6);

    r = mu_reduce(direct_sum(rot2(M_PI / 2), rot2(M_PI / 6)));
    CHECK(has_mu(r.mu, 0.0, 1e-12));
    CHECK(has_mu(r.mu, std::sqrt(3.0), 1e-12));

    const double th = 0.9;
    r = mu_reduce(make_N3(th, 0.1, 0.2, 0.3));
    CHECK(r.mu.size() == 3);
    for (auto z : r.mu) CHECK(std::abs(z - 2 * std::cos(th)) < 1e-4);
    CHECK_THROWS_AS(mu_reduce(Matrix::identity(2)), DimensionError);
}

TEST_CASE("discriminant") {
    CHECK(discriminant(Matrix::identity(4)) == doctest::Approx(0.0));
    for (double a : {0.3, 1.2}) {
        const double b = 2.0;
        const double d = discriminant(direct_sum(rot2(a), rot2(b)));
        const double expect = 4 * std::pow(std::cos(a) - std::cos(b), 2);
        CHECK(d == doctest::Approx(expect).epsilon(1e-12));
    }
    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
        const double th = rng.uniform(0.2, 3.0);
        CHECK(std::abs(discriminant(make_N2(th, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)))) <
              1e-12);
    }
    CHECK_THROWS_AS(discriminant(Matrix::identity(2)), DimensionError);
}

TEST_CASE("discriminant sign agrees with eigenvalue placement") {
    Rng rng(77);
    for (int k = 0; k < 500; ++k) {
        const Matrix m4 = random_symplectic(2, rng);
        const double d4 = discriminant(m4);
        const int real4 = real_mu_count(m4);
        if (d4 > 1e-8) CHECK(real4 == 2);
        if (d4 < -1e-8) CHECK(real4 == 0);
        const Matrix m6 = random_symplectic(3, rng);
        const double d6 = discriminant(m6);
        const int real6 = real_mu_count(m6);
        if (d6 < -1e-8) CHECK(real6 == 3);
        if (d6 > 1e-8) CHECK(real6 == 1);
    }
}

TEST_CASE("D_omega") {
    CHECK(d_omega(Matrix::identity(4), 1.0) == doctest::Approx(0.0));
    CHECK(d_omega(Matrix::identity(2), -1.0) == doctest::Approx(-4.0));
    const double th = 1.3;
    CHECK(std::abs(d_omega(make_N3(th, 0.1, 0.2, 0.3), std::polar(1.0, th))) < 1e-10);
    CHECK(d_plus_one(Matrix::identity(2)) == doctest::Approx(0.0));
    CHECK(d_minus_one(Matrix::identity(2)) == doctest::Approx(-4.0));
    CHECK_THROWS(d_omega(Matrix::identity(2), Complex(2.0, 0.0)));
    // zero exactly at eigenvalues on U
    const Matrix m = direct_sum(rot2(0.7), make_D(2.0));
    CHECK(std::abs(d_omega(m, std::polar(1.0, 0.7))) < 1e-12);
    CHECK(std::abs(d_omega(m, std::polar(1.0, 1.7))) > 1e-3);
    // product form: (-1)^{n-1} prod (2 cos th - mu_i)
    const Matrix q = direct_sum(rot2(0.4), rot2(2.1));
    const double w = 1.0;
    const double expect = -(2 * std::cos(w) - 2 * std::cos(0.4)) * (2 * std::cos(w) - 2 * std::cos(2.1));
    CHECK(d_omega(q, std::polar(1.0, w)) == doctest::Approx(expect));
}

TEST_CASE("classify: open strata in Sp(4)") {
    auto rep = classify(direct_sum(rot2(M_PI / 3), make_D(2.0)));
    CHECK(rep.stratum.name == "O_UR");
    CHECK(rep.stratum.detail == "R+");
    CHECK(classify(direct_sum(rot2(0.4), rot2(2.0))).stratum.name == "O_U");
    CHECK(classify(direct_sum(make_D(2.0), make_D(-3.0))).stratum.name == "O_R");
    CHECK(classify(direct_sum(make_D(-2.0), make_D(-3.0))).stratum.detail == "R-R-");
    const Matrix oc = make_N2(1.0, 0.1, 0.5, -0.5) * rot2n(2, -0.05);
    CHECK(classify(oc).stratum.name == "O_C");
}

TEST_CASE("classify: boundary strata in Sp(4)") {
    const double th = 1.0;
    // b2 - b3 != 0 gives a collision; its sign selects the side
    auto rep = classify(make_N2(th, 0.1, 0.5, -0.5));
    CHECK(rep.stratum.name == "B_U_plus");
    rep = classify(make_N2(th, 0.1, -0.5, 0.5));
    CHECK(rep.stratum.name == "B_U_minus");
    // b2 = b3 is diagonalizable; under J = diag(J2, J2) the two coincident
    // eigenvalues move in opposite directions along M R(alpha)
    CHECK(classify(make_N2(th, 0.0, 0.0, 0.0)).stratum.name == "B_UD");
    CHECK(classify(make_N2(th, 0.3, 0.4, 0.4)).stratum.name == "B_UD");
    CHECK(classify(rot2n(2, th)).stratum.name == "O_U");
    CHECK(classify(direct_sum(rot2(th), rot2(-th))).stratum.name == "B_UD");
    rep = classify(make_M2(1.0, 0.3, -0.6));
    CHECK(rep.stratum.name == "B_pm1");
    CHECK(classify(make_M2(-1.0, 0.3, -0.6)).stratum.name == "B_pm1");
    CHECK(classify(direct_sum(rot2(0.5), make_N1(1.0, 1.0))).stratum.name == "B_U_pm1");
    CHECK(classify(direct_sum(make_D(3.0), make_N1(-1.0, 1.0))).stratum.name == "B_R_pm1");
    CHECK(classify(make_M2(2.0, 0.3, -0.6)).stratum.name == "B_R");
    CHECK(classify(direct_sum(make_D(2.0), make_D(2.0))).stratum.name == "B_RD");
    rep = classify(Matrix::identity(4));
    CHECK(rep.stratum.name == "generic_other");
    CHECK(rep.stratum.detail.find("isolated") != std::string::npos);
}

TEST_CASE("classify: Sp(2) and Sp(6)") {
    CHECK(classify(rot2(1.0)).stratum.name == "O_U");
    CHECK(classify(make_D(-2.0)).stratum.detail == "R-");
    CHECK(classify(make_N1(1.0, 1.0)).stratum.name == "B_pm1");
    const double th = 1.2;
    CHECK(classify(make_N3(th, 0.1, 0.2, 0.3)).stratum.name == "B_U3");
    CHECK(classify(make_N3tilde(th, 0.1, 0.2, 0.3)).stratum.name == "B_U3");
    CHECK(classify(direct_sum(make_N2(th, 0.1, 0.5, -0.5), rot2(2.5))).stratum.name == "B_U2");
    CHECK(classify(direct_sum(rot2(0.3), direct_sum(rot2(1.3), rot2(2.3)))).stratum.name == "O_U");
    const Matrix oc = make_N2(1.0, 0.1, 0.5, -0.5) * rot2n(2, -0.05);
    CHECK(classify(direct_sum(oc, rot2(2.0))).stratum.name == "O_CU");
    CHECK(classify(direct_sum(oc, make_D(2.0))).stratum.name == "O_CR");
}

TEST_CASE("classify is conjugation invariant") {
    Rng rng(123);
    for (int k = 0; k < 200; ++k) {
        const int n = 2 + k % 2;
        const Matrix m = random_symplectic(n, rng);
        const Matrix x = random_symplectic(n, rng);
        CHECK(classify(m).stratum.name == classify(conjugate(m, x)).stratum.name);
    }
    // boundary points as well
    const Matrix x = random_symplectic(2, 9);
    CHECK(classify(conjugate(make_N2(1.0, 0.1, 0.5, -0.5), x)).stratum.name == "B_U_plus");
    CHECK(classify(conjugate(make_N2(1.0, 0.1, -0.5, 0.5), x)).stratum.name == "B_U_minus");
    CHECK(classify(conjugate(direct_sum(rot2(1.0), rot2(-1.0)), x)).stratum.name == "B_UD");
    CHECK(classify(conjugate(direct_sum(rot2(1.0), rot2(1.0)), x)).stratum.name == "O_U");
}

TEST_CASE("truly hyperbolic predicate") {
    Rng rng(8);
    for (int k = 0; k < 50; ++k) {
        const double a = rng.uniform(1.1, 3.0) * (rng.uniform() < 0.5 ? -1 : 1);
        const double b = rng.uniform(1.1, 3.0) * (rng.uniform() < 0.5 ? -1 : 1);
        const Matrix m = direct_sum(make_D(a), make_D(b));
        CHECK(truly_hyperbolic(m));
        const auto name = classify(m).stratum.name;
        CHECK((name == "O_R" || name == "B_RD"));
    }
    CHECK_FALSE(truly_hyperbolic(direct_sum(make_D(2.0), rot2(0.3))));
}

TEST_CASE("diagonalizable doubles: perturbation evidence") {
    // small generic perturbations of N2(theta, 0) reach O_C, those of R_4(theta) never do
    Rng rng(31);
    int into_c_n2 = 0, into_c_r4 = 0;
    for (int k = 0; k < 100; ++k) {
        const Matrix e = mat_exp(1e-3 * (standard_J(2) * random_symmetric(4, rng)));
        if (discriminant(e * make_N2(1.0, 0.0, 0.0, 0.0)) < 0) ++into_c_n2;
        if (discriminant(e * rot2n(2, 1.0)) < 0) ++into_c_r4;
    }
    CHECK(into_c_n2 > 10);
    CHECK(into_c_r4 == 0);
}

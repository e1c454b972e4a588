#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sympath/linalg.hpp"
#include "sympath/symplectic.hpp"

using namespace sympath;

namespace {

bool contains(const std::vector<Complex>& v, Complex z, double tol) {
    return std::any_of(v.begin(), v.end(), [&](Complex w) { return std::abs(w - z) <= tol; });
}

}  // namespace

TEST_CASE("char_poly of small matrices") {
    auto p = char_poly(Matrix::identity(2));
    CHECK(p.size() == 3);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(-2.0));
    CHECK(p[2] == doctest::Approx(1.0));

    p = char_poly(standard_J(1));
    CHECK(p[1] == doctest::Approx(0.0));
    CHECK(p[2] == doctest::Approx(1.0));

    // (x - 2)(x - 1/2) = x^2 - 2.5 x + 1
    p = char_poly(make_D(2.0));
    CHECK(p[1] == doctest::Approx(-2.5));
    CHECK(p[2] == doctest::Approx(1.0));
}

TEST_CASE("char_poly rejects bad shapes") {
    CHECK_THROWS_AS(char_poly(Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(char_poly(Matrix::identity(9)), DimensionError);
}

TEST_CASE("eigenvalues of normal forms") {
    auto ev = eigenvalues(rot2(M_PI / 2));
    CHECK(contains(ev, Complex(0, 1), 1e-12));
    CHECK(contains(ev, Complex(0, -1), 1e-12));

    ev = eigenvalues(Matrix::diag({2.0, 0.5}));
    CHECK(contains(ev, 2.0, 1e-12));
    CHECK(contains(ev, 0.5, 1e-12));

    ev = eigenvalues(make_N1(1.0, 1.0));
    CHECK(ev.size() == 2);
    for (auto z : ev) CHECK(std::abs(z - 1.0) < 1e-7);
}

TEST_CASE("eigenvalue sums and products on random matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.next() % 8);
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.uniform(-1, 1);
        const auto ev = eigenvalues(a);
        Complex s = 0.0, p = 1.0;
        for (auto z : ev) {
            s += z;
            p *= z;
        }
        CHECK(std::abs(s - a.trace()) <= 1e-8);
        const double d = det(a);
        CHECK(std::abs(p - d) <= 1e-8 * std::max(1.0, std::abs(d)));
        const auto c = char_poly(a);
        const double bound = 1e-9 * std::max(1.0, std::pow(a.norm_fro(), static_cast<double>(n)));
        for (auto z : ev) CHECK(std::abs(poly_eval(c, z)) <= bound);
    }
}

TEST_CASE("sym_min_eig") {
    CHECK(sym_min_eig(Matrix::identity(4)) == doctest::Approx(1.0));
    CHECK(sym_min_eig(Matrix::diag({3.0, -1.0})) == doctest::Approx(-1.0));
    // roots of x^2 - 4x + 3
    CHECK(sym_min_eig(Matrix{{2, 1}, {1, 2}}) == doctest::Approx(1.0).epsilon(1e-12));
    // only the symmetric part counts
    CHECK(sym_min_eig(Matrix{{1, 5}, {-5, 1}}) == doctest::Approx(1.0));
}

TEST_CASE("mat_exp") {
    CHECK(max_abs_diff(mat_exp(Matrix(3, 3)), Matrix::identity(3)) == 0.0);
    const Matrix j = standard_J(1);
    CHECK(max_abs_diff(mat_exp((M_PI / 2) * j), rot2(M_PI / 2)) < 1e-14);
    CHECK(max_abs_diff(mat_exp(j * Matrix::identity(2)), rot2(1.0)) < 1e-14);
    CHECK_THROWS_AS(mat_exp(Matrix::diag({60.0, 0.0})), NumericalError);

    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix a(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 4; ++k) a(i, k) = rng.uniform(-1, 1);
        a *= 5.0 / std::max(1.0, a.norm_fro());
        CHECK(max_abs_diff(mat_exp(a) * mat_exp(-a), Matrix::identity(4)) < 1e-10);
    }
}

TEST_CASE("singular values and nullity") {
    const auto sv = singular_values(Matrix::diag({3.0, -2.0, 0.0}));
    CHECK(sv[0] == doctest::Approx(3.0));
    CHECK(sv[1] == doctest::Approx(2.0));
    CHECK(sv[2] == doctest::Approx(0.0));
    // R(1) - e^{i} I has a one-dimensional kernel
    CHECK(nullity(rot2(1.0), std::polar(1.0, 1.0), 1e-7) == 1);
    CHECK(nullity(make_N1(1.0, 1.0), 1.0, 1e-7) == 1);
    CHECK(nullity(Matrix::identity(2), 1.0, 1e-7) == 2);
}

TEST_CASE("inverse, det and symmetric functions") {
    const Matrix a{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
    CHECK(max_abs_diff(a * inverse(a), Matrix::identity(3)) < 1e-14);
    CHECK(det(a) == doctest::Approx(18.0));
    const Matrix r = sym_sqrt(a);
    CHECK(max_abs_diff(r * r, a) < 1e-12);
    CHECK(max_abs_diff(mat_exp(sym_log(a)), a) < 1e-12);
    CHECK_THROWS_AS(inverse(Matrix(2, 2)), SingularMatrix);
}

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sympath/config.hpp"
#include "sympath/linalg.hpp"

namespace sympath {

class SymplecticDefect : public std::invalid_argument {
public:
    SymplecticDefect(const std::string& what, double value)
        : std::invalid_argument(what), value(value) {}
    double value;
};

class ConstraintError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SymplecticMatrix {
    int n = 0;
    Matrix m;
};

struct ValidationReport {
    bool valid = false;
    double defect = 0.0;       // ||M^T J M - J||_max
    double det_error = 0.0;    // |det M - 1|
    double pairing_error = 0.0;
    std::string reason;
};

Matrix standard_J(int n);
Matrix rot2(double theta);
Matrix rot2n(int n, double theta);  // diag(R(theta), ..., R(theta))
int half_dim(const Matrix& m);      // throws unless square of even size

double symplectic_defect(const Matrix& m);
// Inverse of a symplectic matrix: -J M^T J.
Matrix symp_inverse(const Matrix& m);

ValidationReport check_symplectic(const Matrix& m, const Tolerances& tol = default_tolerances());
SymplecticMatrix validate(const Matrix& m, const Tolerances& tol = default_tolerances());

enum class NormalKind { D, R, N1, N2, M2, N3, N3tilde };

struct NormalFormSpec {
    NormalKind kind = NormalKind::R;
    // D, N1, M2: params[0] = lambda.  R, N2, N3, N3tilde: params[0] = theta.
    // N1: params[1] = a.  N2, N3, N3tilde: params[1..3] = b1, b2, b3 (b4 completed,
    // or given as params[4] and checked).  M2: params[1..2] = c1, c2.
    std::vector<double> params;
};

std::string kind_name(NormalKind k);
NormalKind parse_kind(const std::string& s);

// b4 solving (b2 - b3) cos(theta) + (b1 + b4) sin(theta) = rhs.
double complete_b4(double theta, double b1, double b2, double b3, double rhs);

Matrix make_D(double lambda);
Matrix make_N1(double lambda, double a);
Matrix make_N2(double theta, double b1, double b2, double b3);
Matrix make_M2(double lambda, double c1, double c2);
Matrix make_N3(double theta, double b1, double b2, double b3);
Matrix make_N3tilde(double theta, double b1, double b2, double b3);
SymplecticMatrix make_normal(const NormalFormSpec& spec);

// Interleaved sum in split coordinates (x_1..x_n, y_1..y_n).  It preserves the
// form [[0, -I], [I, 0]]; for the pairwise J used here use direct_sum.
Matrix diamond(const Matrix& m1, const Matrix& m2);
// Block-diagonal sum; symplectic for J = diag(J_2, ..., J_2).
Matrix direct_sum(const Matrix& m1, const Matrix& m2);
Matrix block_diag(const std::vector<Matrix>& blocks);
// X^{-1} M X
Matrix conjugate(const Matrix& m, const Matrix& x);

// Deterministic uniform source; bits taken straight from mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0);
    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

Matrix random_symmetric(int dim, Rng& rng, double scale = 1.0);
Matrix random_symplectic(int n, std::uint64_t seed);
Matrix random_symplectic(int n, Rng& rng);

}  // namespace sympath

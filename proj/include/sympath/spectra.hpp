#pragma once

#include <string>
#include <vector>

#include "sympath/config.hpp"
#include "sympath/linalg.hpp"

namespace sympath {

class ClassificationAmbiguity : public std::runtime_error {
public:
    ClassificationAmbiguity(const std::string& what, std::vector<std::string> candidates)
        : std::runtime_error(what), candidates(std::move(candidates)) {}
    std::vector<std::string> candidates;
};

enum class Location { U, R, C, PlusOne, MinusOne };
std::string location_name(Location l);

// One orbit of eigenvalues under lambda -> 1/lambda and complex conjugation.
struct EigenGroup {
    Location location = Location::C;
    Complex lambda;      // representative: Im >= 0, and |lambda| >= 1 off the unit circle
    int algebraic = 1;   // multiplicity of the representative
    int geometric = 1;   // dim ker(M - lambda I)
    Complex mu;          // lambda + 1/lambda
};

struct StratumLabel {
    std::string name;
    std::string detail;
};

struct SpectrumReport {
    int n = 0;
    std::vector<Complex> eigenvalues;
    std::vector<EigenGroup> groups;
    std::vector<double> sigma;
    std::vector<Complex> mu;
    bool has_delta = false;
    double delta = 0.0;
    StratumLabel stratum;
};

struct MuReduction {
    std::vector<double> sigma;  // sigma_1 .. sigma_n
    std::vector<Complex> mu;
};

struct ClassifyOptions {
    Tolerances tol = default_tolerances();
    double cluster_tol = 1e-6;  // base single-linkage merge distance (relative)
    bool ambiguity_check = true;
};

// sigma_k = (-1)^k c_k of the characteristic polynomial.
std::vector<double> sigma_from_matrix(const Matrix& m);
MuReduction mu_reduce(const Matrix& m);
double discriminant_from_sigma(int n, const std::vector<double>& sigma);
double discriminant(const Matrix& m);
double d_omega(const Matrix& m, Complex omega);
double d_plus_one(const Matrix& m);   // D_1 via a real determinant
double d_minus_one(const Matrix& m);  // D_{-1} via a real determinant


SpectrumReport classify(const Matrix& m, const ClassifyOptions& opt = ClassifyOptions{});

// Sign of dDelta/dalpha for M R_4(alpha) at alpha = 0.
double alpha_slope(const Matrix& m, double h = 1e-5);

bool truly_hyperbolic(const Matrix& m, const Tolerances& tol = default_tolerances());
bool has_unit_spectrum(const Matrix& m, const Tolerances& tol = default_tolerances());

}  // namespace sympath

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sympath {

using Complex = std::complex<double>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double worst)
        : NumericalError(what), worst_residual(worst) {}
    double worst_residual;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }
    static Matrix diag(const std::vector<double>& d);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<double>& data() const { return data_; }

    Matrix transpose() const;
    double trace() const;
    double norm_fro() const;
    double norm_max() const;   // max |a_ij|
    double norm_inf() const;   // max row sum
    bool finite() const;
    std::vector<std::vector<double>> to_rows() const;

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);
std::vector<double> operator*(const Matrix& a, const std::vector<double>& v);

double max_abs_diff(const Matrix& a, const Matrix& b);
Matrix symmetrize(const Matrix& s);

// Monic coefficients, highest degree first: p(x) = x^n + c[1] x^{n-1} + ... + c[n].
std::vector<double> char_poly(const Matrix& m);
Complex poly_eval(const std::vector<double>& coeffs, Complex x);
std::vector<Complex> poly_roots(const std::vector<double>& coeffs);

std::vector<Complex> eigenvalues(const Matrix& m);

struct SymEig {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns
};
SymEig sym_eig(const Matrix& s);
double sym_min_eig(const Matrix& s);
Matrix sym_sqrt(const Matrix& s);
Matrix sym_inv_sqrt(const Matrix& s);
Matrix sym_log(const Matrix& s);

std::vector<double> singular_values(const Matrix& m);  // descending
// Singular values of the complex matrix M - lambda I.
std::vector<double> shifted_singular_values(const Matrix& m, Complex lambda);
std::size_t nullity(const Matrix& m, Complex lambda, double rel_tol);

struct EigenCluster {
    std::vector<Complex> members;
    Complex center;  // refined as a simple root of p^(k-1)
};

// Groups of numerically coincident eigenvalues, sizes adapted to multiplicity.
std::vector<EigenCluster> cluster_eigenvalues(const Matrix& m, const std::vector<Complex>& ev, double base_tol);

double det(const Matrix& m);
Matrix inverse(const Matrix& m);
Matrix solve(const Matrix& a, const Matrix& b);
Matrix mat_exp(const Matrix& a);

}  // namespace sympath

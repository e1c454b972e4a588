#include "sympath/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sympath/config.hpp"

namespace sympath {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DimensionError("empty matrix");
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols_) throw DimensionError("ragged matrix rows");
        for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
}

double Matrix::norm_fro() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::norm_max() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
}

double Matrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

bool Matrix::finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
    return out;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Matrix& Matrix::operator+=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("shape mismatch in +");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("shape mismatch in -");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("shape mismatch in *");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

std::vector<double> operator*(const Matrix& a, const std::vector<double>& v) {
    if (a.cols() != v.size()) throw DimensionError("shape mismatch in matrix-vector product");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).norm_max(); }

Matrix symmetrize(const Matrix& s) {
    if (!s.square()) throw DimensionError("symmetrize needs a square matrix");
    return 0.5 * (s + s.transpose());
}

namespace {

void require_eigen_size(const Matrix& m) {
    if (!m.square()) throw DimensionError("matrix is not square");
    if (m.rows() == 0 || m.rows() > 8) throw DimensionError("eigen operations support 1..8 rows");
}

// Power of two near the norm so that scaling is exact.
double pow2_scale(const Matrix& m) {
    const double nrm = m.norm_fro();
    if (nrm == 0.0 || !std::isfinite(nrm)) return 1.0;
    return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(nrm))));
}

std::vector<double> faddeev_leverrier(const Matrix& a) {
    const std::size_t n = a.rows();
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix mk(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix next = a * mk;
        for (std::size_t i = 0; i < n; ++i) next(i, i) += c[k - 1];
        mk = next;
        c[k] = -(a * mk).trace() / static_cast<double>(k);
    }
    return c;
}

using LComplex = std::complex<long double>;

LComplex poly_eval_l(const std::vector<double>& c, LComplex x) {
    LComplex p = 0.0L;
    for (double v : c) p = p * x + static_cast<long double>(v);
    return p;
}

void poly_eval_with_deriv(const std::vector<double>& c, Complex x, Complex& p, Complex& dp) {
    p = 0.0;
    dp = 0.0;
    for (double v : c) {
        dp = dp * x + p;
        p = p * x + v;
    }
}

void pair_conjugates(std::vector<Complex>& roots) {
    const std::size_t n = roots.size();
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i] || roots[i].imag() <= 0.0) continue;
        std::size_t best = n;
        double best_d = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || used[j] || roots[j].imag() > 0.0) continue;
            const double d = std::abs(roots[j] - std::conj(roots[i]));
            if (best == n || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        if (best == n) continue;
        if (best_d <= 1e-6 * (1.0 + std::abs(roots[i]))) {
            const Complex avg = 0.5 * (roots[i] + std::conj(roots[best]));
            roots[i] = avg;
            roots[best] = std::conj(avg);
            used[i] = used[best] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!used[i] && std::abs(roots[i].imag()) <= 1e-6 * (1.0 + std::abs(roots[i])))
            roots[i] = Complex(roots[i].real(), 0.0);
}

// trace((M - z I)^{-1}) by complex Gauss-Jordan; false when singular.
bool resolvent_trace(const Matrix& m, Complex z, Complex& out) {
    const std::size_t n = m.rows();
    std::vector<Complex> a(n * n), inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j) - (i == j ? z : Complex(0.0));
        inv[i * n + i] = 1.0;
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (std::abs(a[piv * n + k]) == 0.0) return false;
        if (piv != k)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a[k * n + j], a[piv * n + j]);
                std::swap(inv[k * n + j], inv[piv * n + j]);
            }
        const Complex d = a[k * n + k];
        for (std::size_t j = 0; j < n; ++j) {
            a[k * n + j] /= d;
            inv[k * n + j] /= d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const Complex f = a[i * n + k];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[i * n + j] -= f * a[k * n + j];
                inv[i * n + j] -= f * inv[k * n + j];
            }
        }
    }
    out = 0.0;
    for (std::size_t i = 0; i < n; ++i) out += inv[i * n + i];
    return std::isfinite(out.real()) && std::isfinite(out.imag());
}

// Newton on det(M - z I), evaluated through the matrix rather than the
// coefficients; restores relative accuracy of small isolated roots.
void polish_isolated(const Matrix& m, std::vector<Complex>& roots) {
    const std::size_t n = roots.size();
    for (std::size_t i = 0; i < n; ++i) {
        double sep = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sep = std::min(sep, std::abs(roots[i] - roots[j]));
        if (sep < 1e-3 * std::max(std::abs(roots[i]), 1e-300)) continue;
        Complex z = roots[i];
        const bool real = z.imag() == 0.0;
        for (int it = 0; it < 3; ++it) {
            Complex tr;
            if (!resolvent_trace(m, z, tr) || std::abs(tr) == 0.0) break;
            Complex step = 1.0 / tr;
            if (real) step = Complex(step.real(), 0.0);
            if (std::abs(step) > 0.1 * sep) break;
            z += step;
            if (std::abs(step) <= 1e-17 * std::abs(z)) break;
        }
        roots[i] = z;
    }
}

}  // namespace

std::vector<double> char_poly(const Matrix& m) {
    require_eigen_size(m);
    const double s = pow2_scale(m);
    std::vector<double> c = faddeev_leverrier((1.0 / s) * m);
    double f = 1.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        f *= s;
        c[k] *= f;
    }
    return c;
}

Complex poly_eval(const std::vector<double>& coeffs, Complex x) {
    Complex p = 0.0;
    for (double v : coeffs) p = p * x + v;
    return p;
}

std::vector<Complex> poly_roots(const std::vector<double>& coeffs) {
    if (coeffs.empty() || coeffs[0] == 0.0) throw DimensionError("leading coefficient must be nonzero");
    std::vector<double> c(coeffs);
    for (double& v : c) v /= coeffs[0];
    const std::size_t n = c.size() - 1;
    if (n == 0) return {};
    double radius = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
        radius = std::max(radius, std::pow(std::abs(c[k]), 1.0 / static_cast<double>(k)));
    radius = std::max(radius, 1e-3);
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ang = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n) + 0.4;
        z[k] = radius * Complex(std::cos(ang), std::sin(ang));
    }
    for (int iter = 0; iter < 800; ++iter) {
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            Complex p, dp;
            poly_eval_with_deriv(c, z[k], p, dp);
            if (p == 0.0) continue;
            Complex sum = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            const Complex w = p / dp;
            const Complex corr = (dp == 0.0) ? Complex(1e-8, 1e-8) : w / (1.0 - w * sum);
            if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) continue;
            z[k] -= corr;
            worst = std::max(worst, std::abs(corr) / (1.0 + std::abs(z[k])));
        }
        if (worst < 1e-16) break;
    }
    // Newton polish in extended precision; kept only when the residual drops.
    for (auto& r : z) {
        LComplex x(r.real(), r.imag());
        LComplex px = poly_eval_l(c, x);
        for (int it = 0; it < 6; ++it) {
            LComplex p = 0.0L, dp = 0.0L;
            for (double v : c) {
                dp = dp * x + p;
                p = p * x + static_cast<long double>(v);
            }
            if (std::abs(dp) == 0.0L) break;
            const LComplex xn = x - p / dp;
            const LComplex pn = poly_eval_l(c, xn);
            if (std::abs(pn) < std::abs(px)) {
                x = xn;
                px = pn;
            } else {
                break;
            }
        }
        r = Complex(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    }
    pair_conjugates(z);
    std::sort(z.begin(), z.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return z;
}

std::vector<Complex> eigenvalues(const Matrix& m) {
    require_eigen_size(m);
    const double s = pow2_scale(m);
    const Matrix b = (1.0 / s) * m;
    const std::vector<double> c = faddeev_leverrier(b);
    std::vector<Complex> roots = poly_roots(c);
    const double bound = default_tolerances().eig_residual *
                         std::max(1.0, std::pow(b.norm_fro(), static_cast<double>(b.rows())));
    double worst = 0.0;
    for (const auto& r : roots) worst = std::max(worst, std::abs(poly_eval(c, r)));
    if (!(worst <= bound)) throw ConvergenceError("eigenvalue iteration did not converge", worst);
    for (auto& r : roots) r *= s;
    polish_isolated(m, roots);
    pair_conjugates(roots);
    return roots;
}

SymEig sym_eig(const Matrix& s_in) {
    if (!s_in.square()) throw DimensionError("sym_eig needs a square matrix");
    Matrix a = symmetrize(s_in);
    const std::size_t n = a.rows();
    Matrix v = Matrix::identity(n);
    const double scale = std::max(a.norm_fro(), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-17 * scale) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymEig out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

double sym_min_eig(const Matrix& s) { return sym_eig(s).values.front(); }

namespace {

template <class F>
Matrix sym_apply(const Matrix& s, F f) {
    const SymEig e = sym_eig(s);
    const std::size_t n = s.rows();
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = f(e.values[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out(i, j) += fk * e.vectors(i, k) * e.vectors(j, k);
    }
    return out;
}

void require_positive(const Matrix& s) {
    if (sym_min_eig(s) <= 0.0) throw NumericalError("matrix is not positive definite");
}

}  // namespace

Matrix sym_sqrt(const Matrix& s) {
    require_positive(s);
    return sym_apply(s, [](double x) { return std::sqrt(x); });
}

Matrix sym_inv_sqrt(const Matrix& s) {
    require_positive(s);
    return sym_apply(s, [](double x) { return 1.0 / std::sqrt(x); });
}

Matrix sym_log(const Matrix& s) {
    require_positive(s);
    return sym_apply(s, [](double x) { return std::log(x); });
}

std::vector<double> singular_values(const Matrix& m) {
    Matrix a = m.rows() >= m.cols() ? m : m.transpose();
    const std::size_t r = a.rows(), c = a.cols();
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < c; ++p)
            for (std::size_t q = p + 1; q < c; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < r; ++i) {
                    alpha += a(i, p) * a(i, p);
                    beta += a(i, q) * a(i, q);
                    gamma += a(i, p) * a(i, q);
                }
                if (std::abs(gamma) <= 1e-16 * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < r; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    a(i, p) = cs * ap - sn * aq;
                    a(i, q) = sn * ap + cs * aq;
                }
            }
        if (!rotated) break;
    }
    std::vector<double> sv(c);
    for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < r; ++i) s += a(i, j) * a(i, j);
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

std::vector<double> shifted_singular_values(const Matrix& m, Complex lambda) {
    if (!m.square()) throw DimensionError("shifted singular values need a square matrix");
    const std::size_t n = m.rows();
    if (lambda.imag() == 0.0) {
        Matrix a = m;
        for (std::size_t i = 0; i < n; ++i) a(i, i) -= lambda.real();
        return singular_values(a);
    }
    Matrix e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double re = m(i, j) - (i == j ? lambda.real() : 0.0);
            const double im = (i == j ? -lambda.imag() : 0.0);
            e(i, j) = re;
            e(i + n, j + n) = re;
            e(i, j + n) = -im;
            e(i + n, j) = im;
        }
    std::vector<double> sv = singular_values(e);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = 0.5 * (sv[2 * k] + sv[2 * k + 1]);
    return out;
}

std::size_t nullity(const Matrix& m, Complex lambda, double rel_tol) {
    const double scale = singular_values(m).front();
    const std::vector<double> sv = shifted_singular_values(m, lambda);
    return static_cast<std::size_t>(
        std::count_if(sv.begin(), sv.end(), [&](double s) { return s < rel_tol * scale; }));
}

double det(const Matrix& m) {
    if (!m.square()) throw DimensionError("det needs a square matrix");
    Matrix a = m;
    const std::size_t n = a.rows();
    double d = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            d = -d;
        }
        d *= a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return d;
}

Matrix solve(const Matrix& a_in, const Matrix& b_in) {
    if (!a_in.square() || a_in.rows() != b_in.rows()) throw DimensionError("solve shape mismatch");
    Matrix a = a_in, b = b_in;
    const std::size_t n = a.rows(), m = b.cols();
    const double scale = std::max(a.norm_max(), 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= 1e-14 * scale) throw SingularMatrix("matrix is numerically singular");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) b(i, j) /= a(i, i);
    return b;
}

Matrix inverse(const Matrix& m) { return solve(m, Matrix::identity(m.rows())); }

Matrix mat_exp(const Matrix& a) {
    if (!a.square()) throw DimensionError("mat_exp needs a square matrix");
    if (!a.finite()) throw NumericalError("mat_exp argument is not finite");
    const double nrm = a.norm_inf();
    if (nrm > default_tolerances().exp_max_norm) throw NumericalError("mat_exp overflow: norm exceeds 50");
    int squarings = 0;
    if (nrm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.25)));
    const Matrix b = std::ldexp(1.0, -squarings) * a;
    const std::size_t n = a.rows();
    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 20; ++k) {
        term = (1.0 / k) * (term * b);
        result += term;
        if (term.norm_max() <= 1e-18 * result.norm_max()) break;
    }
    for (int k = 0; k < squarings; ++k) result = result * result;
    return result;
}

namespace {

Complex cluster_mean(const std::vector<Complex>& c) {
    Complex s = 0.0;
    for (auto z : c) s += z;
    return s / static_cast<double>(c.size());
}

double cluster_diameter(const std::vector<Complex>& c) {
    double d = 0.0;
    for (auto a : c)
        for (auto b : c) d = std::max(d, std::abs(a - b));
    return d;
}

// A multiple root of multiplicity k is a simple root of p^(k-1).
Complex refine_multiple_root(const std::vector<double>& coeffs, Complex start, std::size_t k, double radius) {
    if (k < 2) return start;
    using LC = std::complex<long double>;
    std::vector<long double> c(coeffs.begin(), coeffs.end());
    for (std::size_t d = 0; d + 1 < k; ++d) {
        std::vector<long double> next;
        const std::size_t deg = c.size() - 1;
        for (std::size_t i = 0; i < deg; ++i) next.push_back(c[i] * static_cast<long double>(deg - i));
        c = next;
    }
    const bool real_start = start.imag() == 0.0;
    LC x(start.real(), start.imag());
    for (int it = 0; it < 50; ++it) {
        LC p = 0.0L, dp = 0.0L;
        for (long double v : c) {
            dp = dp * x + p;
            p = p * x + v;
        }
        if (std::abs(dp) == 0.0L) break;
        const LC step = p / dp;
        x -= step;
        if (real_start) x = LC(x.real(), 0.0L);
        if (std::abs(step) <= 1e-19L * (1.0L + std::abs(x))) break;
    }
    const Complex out(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) return start;
    if (std::abs(out - start) > std::max(radius, 1e-12)) return start;
    return out;
}

}  // namespace

std::vector<EigenCluster> cluster_eigenvalues(const Matrix& m, const std::vector<Complex>& ev, double base_tol) {
    const std::size_t n = ev.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(ev[i] - ev[j]) <= base_tol * std::max(1.0, std::abs(ev[i]))) parent[find(i)] = find(j);
    std::vector<std::vector<Complex>> groups;
    {
        std::vector<std::vector<Complex>> by_root(n);
        for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(ev[i]);
        for (auto& c : by_root)
            if (!c.empty()) groups.push_back(std::move(c));
    }
    const double scale = singular_values(m).front();
    const std::vector<double> coeffs = char_poly(m);
    // A multiple root of size k scatters like eps^(1/k): grow each seed cluster by
    // its nearest neighbours while the spread fits that scale and the merged
    // center is a numerical eigenvalue.
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < groups.size() && !merged; ++i) {
            const Complex seed = cluster_mean(groups[i]);
            std::vector<std::size_t> others;
            for (std::size_t j = 0; j < groups.size(); ++j)
                if (j != i) others.push_back(j);
            std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(cluster_mean(groups[a]) - seed) < std::abs(cluster_mean(groups[b]) - seed);
            });
            std::vector<Complex> u = groups[i];
            std::size_t best_count = 0;
            for (std::size_t t = 0; t < others.size(); ++t) {
                u.insert(u.end(), groups[others[t]].begin(), groups[others[t]].end());
                const double k = static_cast<double>(u.size());
                Complex c = cluster_mean(u);
                const double allowed = 50.0 * std::pow(2.2e-16, 1.0 / k) * std::max(1.0, std::abs(c));
                const double diam = cluster_diameter(u);
                if (diam > allowed) continue;
                if (std::abs(c.imag()) <= 1e-12 * std::max(1.0, std::abs(c))) c = Complex(c.real(), 0.0);
                c = refine_multiple_root(coeffs, c, u.size(), diam + 1e-9);
                if (shifted_singular_values(m, c).back() < 1e-7 * scale) best_count = t + 1;
            }
            if (best_count > 0) {
                std::vector<std::size_t> take(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(best_count));
                std::sort(take.rbegin(), take.rend());
                for (std::size_t j : take) {
                    groups[i].insert(groups[i].end(), groups[j].begin(), groups[j].end());
                    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
                    if (j < i) --i;
                }
                merged = true;
            }
        }
    }
    std::vector<EigenCluster> out;
    for (auto& g : groups) {
        EigenCluster c;
        c.members = g;
        c.center = cluster_mean(g);
        // a cluster symmetric about the real axis has a real exact root
        if (std::abs(c.center.imag()) <= 1e-12 * std::max(1.0, std::abs(c.center))) c.center = Complex(c.center.real(), 0.0);
        c.center = refine_multiple_root(coeffs, c.center, g.size(), cluster_diameter(g) + 1e-9);
        out.push_back(c);
    }
    return out;
}

}  // namespace sympath

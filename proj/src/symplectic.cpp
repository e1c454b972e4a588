#include "sympath/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sympath {

Matrix standard_J(int n) {
    if (n < 1 || n > 4) throw DimensionError("standard_J supports 1 <= n <= 4");
    Matrix j(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        j(2 * k, 2 * k + 1) = -1.0;
        j(2 * k + 1, 2 * k) = 1.0;
    }
    return j;
}

Matrix rot2(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Matrix{{c, -s}, {s, c}};
}

Matrix rot2n(int n, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix r(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        r(2 * k, 2 * k) = c;
        r(2 * k, 2 * k + 1) = -s;
        r(2 * k + 1, 2 * k) = s;
        r(2 * k + 1, 2 * k + 1) = c;
    }
    return r;
}

int half_dim(const Matrix& m) {
    if (!m.square() || m.rows() == 0 || m.rows() % 2 != 0)
        throw DimensionError("symplectic matrices are square of even size");
    return static_cast<int>(m.rows() / 2);
}

double symplectic_defect(const Matrix& m) {
    const Matrix j = standard_J(half_dim(m));
    return (m.transpose() * j * m - j).norm_max();
}

Matrix symp_inverse(const Matrix& m) {
    const Matrix j = standard_J(half_dim(m));
    return -(j * m.transpose() * j);
}

namespace {

// Minimum-weight perfect matching of eigenvalues to reciprocals (bitmask DP).
double reciprocal_pairing_error(const std::vector<Complex>& ev) {
    const std::size_t n = ev.size();
    const std::size_t full = (std::size_t{1} << n);
    std::vector<double> best(full, std::numeric_limits<double>::infinity());
    best[0] = 0.0;
    for (std::size_t mask = 0; mask < full; ++mask) {
        if (!std::isfinite(best[mask])) continue;
        const std::size_t i = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (i >= n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask & (std::size_t{1} << j)) continue;
            const double d = std::abs(ev[i] - 1.0 / ev[j]) / std::max(1.0, std::abs(ev[i]));
            const std::size_t nm = mask | (std::size_t{1} << j);
            best[nm] = std::min(best[nm], std::max(best[mask], d));
        }
    }
    return best[full - 1];
}

}  // namespace

ValidationReport check_symplectic(const Matrix& m, const Tolerances& tol) {
    ValidationReport r;
    if (!m.square() || m.rows() == 0 || m.rows() % 2 != 0) {
        r.reason = "matrix must be square of even size";
        r.defect = std::numeric_limits<double>::infinity();
        return r;
    }
    if (m.rows() > 8) {
        r.reason = "half-dimension must be at most 4";
        r.defect = std::numeric_limits<double>::infinity();
        return r;
    }
    if (!m.finite()) {
        r.reason = "matrix has non-finite entries";
        r.defect = std::numeric_limits<double>::infinity();
        return r;
    }
    r.defect = symplectic_defect(m);
    r.det_error = std::abs(det(m) - 1.0);
    if (r.defect > tol.symp) {
        r.reason = "M^T J M differs from J";
        return r;
    }
    if (r.det_error > tol.det) {
        r.reason = "determinant differs from 1";
        return r;
    }
    std::vector<Complex> ev;
    for (const auto& c : cluster_eigenvalues(m, eigenvalues(m), 1e-6))
        for (std::size_t k = 0; k < c.members.size(); ++k) ev.push_back(c.center);
    r.pairing_error = reciprocal_pairing_error(ev);
    if (r.pairing_error > tol.pairing_rel) {
        r.reason = "spectrum is not closed under lambda -> 1/lambda";
        return r;
    }
    r.valid = true;
    return r;
}

SymplecticMatrix validate(const Matrix& m, const Tolerances& tol) {
    const ValidationReport r = check_symplectic(m, tol);
    if (!r.valid) throw SymplecticDefect("not symplectic: " + r.reason, r.defect);
    return SymplecticMatrix{half_dim(m), m};
}

std::string kind_name(NormalKind k) {
    switch (k) {
        case NormalKind::D: return "D";
        case NormalKind::R: return "R";
        case NormalKind::N1: return "N1";
        case NormalKind::N2: return "N2";
        case NormalKind::M2: return "M2";
        case NormalKind::N3: return "N3";
        case NormalKind::N3tilde: return "N3tilde";
    }
    return "?";
}

NormalKind parse_kind(const std::string& s) {
    if (s == "D") return NormalKind::D;
    if (s == "R") return NormalKind::R;
    if (s == "N1") return NormalKind::N1;
    if (s == "N2") return NormalKind::N2;
    if (s == "M2") return NormalKind::M2;
    if (s == "N3") return NormalKind::N3;
    if (s == "N3tilde") return NormalKind::N3tilde;
    throw ConstraintError("unknown normal form kind: " + s);
}

double complete_b4(double theta, double b1, double b2, double b3, double rhs) {
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-12) throw ConstraintError("b4 completion needs sin(theta) != 0");
    return (rhs - (b2 - b3) * std::cos(theta)) / s - b1;
}

Matrix make_D(double lambda) {
    if (lambda == 0.0) throw ConstraintError("D(lambda) needs lambda != 0");
    return Matrix{{lambda, 0.0}, {0.0, 1.0 / lambda}};
}

Matrix make_N1(double lambda, double a) {
    if (lambda == 0.0) throw ConstraintError("N1 needs lambda != 0");
    return Matrix{{lambda, a}, {0.0, lambda}};
}

Matrix make_N2(double theta, double b1, double b2, double b3) {
    const double b4 = complete_b4(theta, b1, b2, b3, 0.0);
    const double c = std::cos(theta), s = std::sin(theta);
    return Matrix{{c, b1, -s, b2}, {0, c, 0, -s}, {s, b3, c, b4}, {0, s, 0, c}};
}

Matrix make_M2(double lambda, double c1, double c2) {
    if (lambda == 0.0) throw ConstraintError("M2 needs lambda != 0");
    const double l = lambda;
    return Matrix{{l, c1, 1, 0}, {0, 1 / l, 0, 0}, {0, c2, l, -l * c2}, {0, -1 / (l * l), 0, 1 / l}};
}

Matrix make_N3(double theta, double b1, double b2, double b3) {
    const double b4 = complete_b4(theta, b1, b2, b3, 1.0);
    const double c = std::cos(theta), s = std::sin(theta);
    const double f1 = std::sin(2 * theta), f2 = std::cos(2 * theta);
    const double g1 = -std::cos(2 * theta), g2 = std::sin(2 * theta);
    return Matrix{{c, b1, -s, b2, 1, 0}, {0, c, 0, -s, 0, 0}, {s, b3, c, b4, 0, 1},
                  {0, s, 0, c, 0, 0},    {0, f1, 0, f2, c, -s}, {0, g1, 0, g2, s, c}};
}

Matrix make_N3tilde(double theta, double b1, double b2, double b3) {
    const double b4 = complete_b4(theta, b1, b2, b3, -1.0);
    const double c = std::cos(theta), s = std::sin(theta);
    const double f1 = std::cos(2 * theta), f2 = -std::sin(2 * theta);
    const double g1 = -std::sin(2 * theta), g2 = -std::cos(2 * theta);
    return Matrix{{c, b1, -s, b2, 0, 1}, {0, c, 0, -s, 0, 0}, {s, b3, c, b4, 1, 0},
                  {0, s, 0, c, 0, 0},    {0, f1, 0, f2, c, s}, {0, g1, 0, g2, -s, c}};
}

namespace {

void require_params(const NormalFormSpec& spec, std::size_t k) {
    if (spec.params.size() < k)
        throw ConstraintError(kind_name(spec.kind) + " needs " + std::to_string(k) + " parameters");
}

void require_theta(double theta) {
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-12) throw ConstraintError("theta must avoid 0 and pi");
}

void check_given_b4(const NormalFormSpec& spec, double rhs) {
    if (spec.params.size() < 5) return;
    const double b4 = complete_b4(spec.params[0], spec.params[1], spec.params[2], spec.params[3], rhs);
    if (std::abs(b4 - spec.params[4]) > 1e-9 * (1.0 + std::abs(b4)))
        throw ConstraintError("given b4 violates the linear constraint");
}

}  // namespace

SymplecticMatrix make_normal(const NormalFormSpec& spec) {
    Matrix m;
    const auto& p = spec.params;
    switch (spec.kind) {
        case NormalKind::D:
            require_params(spec, 1);
            m = make_D(p[0]);
            break;
        case NormalKind::R:
            require_params(spec, 1);
            m = rot2(p[0]);
            break;
        case NormalKind::N1:
            require_params(spec, 2);
            m = make_N1(p[0], p[1]);
            break;
        case NormalKind::N2:
            require_params(spec, 4);
            require_theta(p[0]);
            check_given_b4(spec, 0.0);
            m = make_N2(p[0], p[1], p[2], p[3]);
            break;
        case NormalKind::M2:
            require_params(spec, 3);
            m = make_M2(p[0], p[1], p[2]);
            break;
        case NormalKind::N3:
            require_params(spec, 4);
            require_theta(p[0]);
            check_given_b4(spec, 1.0);
            m = make_N3(p[0], p[1], p[2], p[3]);
            break;
        case NormalKind::N3tilde:
            require_params(spec, 4);
            require_theta(p[0]);
            check_given_b4(spec, -1.0);
            m = make_N3tilde(p[0], p[1], p[2], p[3]);
            break;
    }
    return validate(m);
}

Matrix diamond(const Matrix& m1, const Matrix& m2) {
    // M_i = [[A_i, B_i], [C_i, D_i]] with m_i x m_i blocks; the sum interleaves them as
    // [[A1, 0, B1, 0], [0, A2, 0, B2], [C1, 0, D1, 0], [0, C2, 0, D2]].
    const int a = half_dim(m1), b = half_dim(m2);
    const int n = a + b;
    Matrix out(2 * n, 2 * n);
    auto place = [&](const Matrix& m, int k, int offset) {
        for (int bi = 0; bi < 2; ++bi)
            for (int bj = 0; bj < 2; ++bj)
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) out(bi * n + offset + i, bj * n + offset + j) = m(bi * k + i, bj * k + j);
    };
    place(m1, a, 0);
    place(m2, b, a);
    return out;
}

Matrix direct_sum(const Matrix& m1, const Matrix& m2) {
    half_dim(m1);
    half_dim(m2);
    return block_diag({m1, m2});
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    std::size_t r = 0, c = 0;
    for (const auto& b : blocks) {
        r += b.rows();
        c += b.cols();
    }
    Matrix out(r, c);
    std::size_t i = 0, j = 0;
    for (const auto& b : blocks) {
        out.set_block(i, j, b);
        i += b.rows();
        j += b.cols();
    }
    return out;
}

Matrix conjugate(const Matrix& m, const Matrix& x) {
    if (m.rows() != x.rows() || !x.square()) throw DimensionError("conjugate shape mismatch");
    return solve(x, m * x);
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Matrix random_symmetric(int dim, Rng& rng, double scale) {
    Matrix s(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const double v = scale * rng.uniform(-1.0, 1.0);
            s(i, j) = v;
            s(j, i) = v;
        }
    return s;
}

Matrix random_symplectic(int n, Rng& rng) {
    if (n < 1 || n > 4) throw DimensionError("random_symplectic supports 1 <= n <= 4");
    const Matrix j = standard_J(n);
    const Matrix s1 = random_symmetric(2 * n, rng);
    const Matrix s2 = random_symmetric(2 * n, rng);
    return mat_exp(j * s1) * mat_exp(j * s2);
}

Matrix random_symplectic(int n, std::uint64_t seed) {
    Rng rng(seed);
    return random_symplectic(n, rng);
}

}  // namespace sympath

#include "sympath/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sympath/symplectic.hpp"

namespace sympath {

std::string location_name(Location l) {
    switch (l) {
        case Location::U: return "U";
        case Location::R: return "R";
        case Location::C: return "C";
        case Location::PlusOne: return "plus_one";
        case Location::MinusOne: return "minus_one";
    }
    return "?";
}

std::vector<double> sigma_from_matrix(const Matrix& m) {
    const int n = half_dim(m);
    const std::vector<double> c = char_poly(m);
    std::vector<double> sigma(n);
    for (int k = 1; k <= n; ++k) sigma[k - 1] = (k % 2 ? -1.0 : 1.0) * c[k];
    return sigma;
}

MuReduction mu_reduce(const Matrix& m) {
    const int n = half_dim(m);
    if (n != 2 && n != 3) throw DimensionError("mu_reduce supports n = 2 or 3");
    MuReduction r;
    r.sigma = sigma_from_matrix(m);
    const auto& s = r.sigma;
    if (n == 2)
        r.mu = poly_roots({1.0, -s[0], s[1] - 2.0});
    else
        r.mu = poly_roots({1.0, -s[0], s[1] - 3.0, -(s[2] - 2.0 * s[0])});
    return r;
}

double discriminant_from_sigma(int n, const std::vector<double>& s) {
    if (n == 2) return s[0] * s[0] - 4.0 * s[1] + 8.0;
    if (n == 3) {
        const double a = -3.0 * (s[1] - s[0] * s[0] / 3.0 - 3.0);
        const double b = 9.0 * s[2] - 15.0 * s[0] - s[0] * s[1];
        const double c = (s[1] - 3.0) * (s[1] - 3.0) - 3.0 * s[0] * (s[2] - 2.0 * s[0]);
        return b * b - 4.0 * a * c;
    }
    throw DimensionError("discriminant supports n = 2 or 3");
}

double discriminant(const Matrix& m) {
    const int n = half_dim(m);
    if (n != 2 && n != 3) throw DimensionError("discriminant supports n = 2 or 3");
    return discriminant_from_sigma(n, sigma_from_matrix(m));
}

namespace {

Complex complex_det(std::vector<Complex> a, std::size_t n) {
    Complex d = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (std::abs(a[piv * n + k]) == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            d = -d;
        }
        d *= a[k * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = a[i * n + k] / a[k * n + k];
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return d;
}

}  // namespace

double d_omega(const Matrix& m, Complex omega) {
    const int n = half_dim(m);
    if (std::abs(std::abs(omega) - 1.0) > 1e-10) throw std::invalid_argument("omega must lie on the unit circle");
    const std::size_t dim = m.rows();
    std::vector<Complex> a(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) a[i * dim + j] = m(i, j) - (i == j ? omega : Complex(0.0));
    const Complex d = complex_det(a, dim) * std::pow(omega, -n) * ((n - 1) % 2 ? -1.0 : 1.0);
    const double residue = std::abs(d.imag()) / std::max(1.0, std::abs(d));
    if (residue > 1e-7) throw NumericalError("D_omega is not real: imaginary residue too large");
    return d.real();
}

double d_plus_one(const Matrix& m) {
    const int n = half_dim(m);
    return ((n - 1) % 2 ? -1.0 : 1.0) * det(m - Matrix::identity(m.rows()));
}

double d_minus_one(const Matrix& m) { return -det(m + Matrix::identity(m.rows())); }

namespace {

struct Cluster {
    std::vector<Complex> members;
    Complex center;
    Location loc = Location::C;
};

Location locate(Complex z, const Tolerances& tol, bool check, std::vector<std::string>& ambiguous) {
    const double dp = std::abs(z - 1.0), dm = std::abs(z + 1.0);
    const double im = std::abs(z.imag());
    const double du = std::abs(std::abs(z) - 1.0);
    if (check) {
        if (dp > tol.pm1_band && dp <= 10 * tol.pm1_band) ambiguous.push_back("plus_one");
        if (dm > tol.pm1_band && dm <= 10 * tol.pm1_band) ambiguous.push_back("minus_one");
    }
    if (dp <= tol.pm1_band) return Location::PlusOne;
    if (dm <= tol.pm1_band) return Location::MinusOne;
    if (check) {
        if (im > tol.real_band && im <= 10 * tol.real_band) ambiguous.push_back("R");
        if (du > tol.unit_band && du <= 10 * tol.unit_band) ambiguous.push_back("U");
    }
    if (im <= tol.real_band) return Location::R;
    if (du <= tol.unit_band) return Location::U;
    return Location::C;
}

std::string sign_tag(Complex lambda) { return lambda.real() > 0 ? "R+" : "R-"; }

}  // namespace

double alpha_slope(const Matrix& m, double h) {
    const int n = half_dim(m);
    return (discriminant(m * rot2n(n, h)) - discriminant(m * rot2n(n, -h))) / (2.0 * h);
}

namespace {

// For a diagonalizable double eigenvalue on U: count how many of the
// coincident eigenvalues move counterclockwise along M R(alpha).
int krein_perturbation_count(const Matrix& m, Complex lambda) {
    const int n = half_dim(m);
    const double h = 1e-4;
    const double theta = std::arg(lambda);
    const std::vector<Complex> ev = eigenvalues(m * rot2n(n, h));
    std::vector<std::pair<double, double>> near;  // (distance, signed angle shift)
    for (auto z : ev) {
        if (z.imag() <= 0) continue;
        const double d = std::abs(z - lambda);
        double shift = std::arg(z) - theta;
        near.push_back({d, shift});
    }
    std::sort(near.begin(), near.end());
    int ccw = 0;
    for (std::size_t k = 0; k < std::min<std::size_t>(2, near.size()); ++k)
        if (near[k].second > 0) ++ccw;
    return ccw;
}

StratumLabel label_for(const Matrix& m, int n, const std::vector<EigenGroup>& groups) {
    std::vector<const EigenGroup*> u, r, c, p1, m1;
    for (const auto& g : groups) {
        switch (g.location) {
            case Location::U: u.push_back(&g); break;
            case Location::R: r.push_back(&g); break;
            case Location::C: c.push_back(&g); break;
            case Location::PlusOne: p1.push_back(&g); break;
            case Location::MinusOne: m1.push_back(&g); break;
        }
    }
    auto composition = [&]() {
        std::ostringstream os;
        bool first = true;
        for (const auto& g : groups) {
            if (!first) os << ",";
            first = false;
            os << location_name(g.location) << "^" << g.algebraic;
            if (g.geometric < g.algebraic) os << "(jordan,geo=" << g.geometric << ")";
        }
        return os.str();
    };
    auto r_signs = [&]() {
        std::string s;
        for (auto* g : r) s += sign_tag(g->lambda);
        return s;
    };
    auto pm1_tag = [&](const EigenGroup* g) { return g->location == Location::PlusOne ? "+1" : "-1"; };
    const EigenGroup* pm = !p1.empty() ? p1.front() : (!m1.empty() ? m1.front() : nullptr);
    const std::size_t npm = p1.size() + m1.size();

    if (n == 1) {
        const auto& g = groups.front();
        if (g.location == Location::U) return {"O_U", "elliptic"};
        if (g.location == Location::R) return {"O_R", sign_tag(g.lambda)};
        if (g.geometric == 1) return {"B_pm1", std::string(pm1_tag(&g)) + " parabolic"};
        return {"generic_other", g.location == Location::PlusOne ? "identity" : "minus identity"};
    }

    if (n == 2) {
        if (c.size() == 1 && groups.size() == 1) return {"O_C", ""};
        if (u.size() == 2 && groups.size() == 2) return {"O_U", ""};
        if (r.size() == 2 && groups.size() == 2) return {"O_R", r_signs()};
        if (u.size() == 1 && r.size() == 1 && groups.size() == 2) return {"O_UR", r_signs()};
        if (u.size() == 1 && groups.size() == 1 && u[0]->algebraic == 2 && u[0]->lambda.imag() > 0) {
            if (u[0]->geometric == 1) {
                const double slope = alpha_slope(m);
                if (slope < 0) return {"B_U_minus", "alpha-family enters O_C"};
                if (slope > 0) return {"B_U_plus", "alpha-family enters O_U"};
                return {"generic_other", "double Jordan pair on U with vanishing alpha slope"};
            }
            const int ccw = krein_perturbation_count(m, u[0]->lambda);
            if (ccw == 1) return {"B_UD", "diagonalizable double on U, opposite motion under perturbation test"};
            return {"O_U", "diagonalizable double on U, common motion under perturbation test (splitting number not computed)"};
        }
        if (r.size() == 1 && groups.size() == 1 && r[0]->algebraic == 2) {
            if (r[0]->geometric == 1) return {"B_R", r_signs()};
            return {"B_RD", r_signs()};
        }
        if (npm == 1 && pm->algebraic == 2 && groups.size() == 2) {
            if (pm->geometric != 1) return {"generic_other", std::string("diagonalizable ") + pm1_tag(pm) + " pair"};
            if (u.size() == 1) return {"B_U_pm1", pm1_tag(pm)};
            if (r.size() == 1) return {"B_R_pm1", std::string(pm1_tag(pm)) + "," + r_signs()};
        }
        if (npm == 1 && pm->algebraic == 4 && groups.size() == 1) {
            if (pm->geometric == 1) return {"B_pm1", std::string(pm1_tag(pm)) + " single Jordan block"};
            if (pm->geometric == 4)
                return {"generic_other", std::string(pm1_tag(pm)) + " scalar matrix, isolated boundary point"};
            return {"generic_other", std::string(pm1_tag(pm)) + " quadruple, geometric multiplicity " +
                                         std::to_string(pm->geometric)};
        }
        return {"generic_other", composition()};
    }

    // n == 3
    if (c.size() == 1 && u.size() == 1 && groups.size() == 2 && u[0]->algebraic == 1) return {"O_CU", ""};
    if (c.size() == 1 && r.size() == 1 && groups.size() == 2 && r[0]->algebraic == 1) return {"O_CR", r_signs()};
    if (u.size() == 3 && groups.size() == 3) return {"O_U", ""};
    if (u.size() == 2 && groups.size() == 2) {
        const EigenGroup* dbl = u[0]->algebraic == 2 ? u[0] : u[1];
        const EigenGroup* sgl = u[0]->algebraic == 2 ? u[1] : u[0];
        if (dbl->algebraic == 2 && sgl->algebraic == 1) {
            if (dbl->geometric == 1) return {"B_U2", ""};
            const int ccw = krein_perturbation_count(m, dbl->lambda);
            if (ccw == 1) return {"B_UD", "diagonalizable double on U, opposite motion under perturbation test"};
            return {"O_U", "diagonalizable double on U, common motion under perturbation test (splitting number not computed)"};
        }
    }
    if (u.size() == 1 && groups.size() == 1 && u[0]->algebraic == 3) {
        if (u[0]->geometric == 1) return {"B_U3", ""};
        return {"generic_other", composition()};
    }
    return {"generic_other", composition()};
}

}  // namespace

SpectrumReport classify(const Matrix& m, const ClassifyOptions& opt) {
    const int n = half_dim(m);
    if (n < 1 || n > 3) throw DimensionError("classify supports n = 1, 2, 3");
    SpectrumReport rep;
    rep.n = n;
    rep.eigenvalues = eigenvalues(m);
    const auto raw = cluster_eigenvalues(m, rep.eigenvalues, opt.cluster_tol);
    std::vector<std::string> ambiguous;
    std::vector<Cluster> clusters;
    for (const auto& rc : raw) {
        Cluster c;
        c.members = rc.members;
        c.center = rc.center;
        c.loc = locate(c.center, opt.tol, opt.ambiguity_check, ambiguous);
        if (c.loc == Location::R || c.loc == Location::PlusOne || c.loc == Location::MinusOne)
            c.center = Complex(c.center.real(), 0.0);
        clusters.push_back(c);
    }
    if (!ambiguous.empty()) {
        std::sort(ambiguous.begin(), ambiguous.end());
        ambiguous.erase(std::unique(ambiguous.begin(), ambiguous.end()), ambiguous.end());
        throw ClassificationAmbiguity("eigenvalue lies in a tolerance gray zone", ambiguous);
    }
    const double scale = singular_values(m).front();
    for (const auto& c : clusters) {
        bool representative = false;
        switch (c.loc) {
            case Location::U: representative = c.center.imag() > 0; break;
            case Location::R: representative = std::abs(c.center) > 1.0; break;
            case Location::C: representative = c.center.imag() > 0 && std::abs(c.center) > 1.0; break;
            case Location::PlusOne:
            case Location::MinusOne: representative = true; break;
        }
        if (!representative) continue;
        EigenGroup g;
        g.location = c.loc;
        g.lambda = c.center;
        g.algebraic = static_cast<int>(c.members.size());
        const std::vector<double> sv = shifted_singular_values(m, c.center);
        g.geometric = static_cast<int>(
            std::count_if(sv.begin(), sv.end(), [&](double s) { return s < opt.tol.rank_rel * scale; }));
        g.geometric = std::clamp(g.geometric, 1, g.algebraic);
        g.mu = c.center + 1.0 / c.center;
        rep.groups.push_back(g);
    }
    std::sort(rep.groups.begin(), rep.groups.end(), [](const EigenGroup& a, const EigenGroup& b) {
        if (a.location != b.location) return a.location < b.location;
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    int count = 0;
    for (const auto& g : rep.groups) {
        if (g.location == Location::C) count += 4 * g.algebraic;
        else if (g.location == Location::PlusOne || g.location == Location::MinusOne) count += g.algebraic;
        else count += 2 * g.algebraic;
    }
    if (count != 2 * n) throw NumericalError("eigenvalue grouping is inconsistent with symplectic pairing");
    if (n == 1) {
        rep.sigma = sigma_from_matrix(m);
        rep.mu = {Complex(m.trace(), 0.0)};
    } else {
        const MuReduction mr = mu_reduce(m);
        rep.sigma = mr.sigma;
        rep.mu = mr.mu;
        rep.has_delta = true;
        rep.delta = discriminant_from_sigma(n, mr.sigma);
    }
    rep.stratum = label_for(m, n, rep.groups);
    return rep;
}

bool has_unit_spectrum(const Matrix& m, const Tolerances& tol) {
    for (auto z : eigenvalues(m))
        if (std::abs(std::abs(z) - 1.0) <= tol.unit_band) return true;
    return false;
}

bool truly_hyperbolic(const Matrix& m, const Tolerances& tol) { return !has_unit_spectrum(m, tol); }

}  // namespace sympath

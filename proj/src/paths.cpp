#include "sympath/paths.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace sympath {

namespace {

constexpr double kTwoPi = 6.283185307179586;

Matrix sym_part(const Matrix& m) { return symmetrize(m); }

double max_or_one(const Matrix& m) { return std::max(1.0, m.norm_max()); }

// log(X) for X near the identity: square roots until close, then the series.
Matrix log_near_identity(const Matrix& x_in) {
    const std::size_t d = x_in.rows();
    const Matrix id = Matrix::identity(d);
    Matrix x = x_in;
    int roots = 0;
    while ((x - id).norm_inf() > 0.25) {
        if (++roots > 40) throw NumericalError("matrix logarithm did not converge");
        Matrix y = x, z = id;
        for (int it = 0; it < 60; ++it) {
            const Matrix yi = inverse(y), zi = inverse(z);
            const Matrix yn = 0.5 * (y + zi);
            z = 0.5 * (z + yi);
            const double step = (yn - y).norm_max();
            y = yn;
            if (step < 1e-15 * std::max(1.0, y.norm_max())) break;
        }
        x = y;
    }
    const Matrix e = x - id;
    Matrix term = e, sum = e;
    for (int j = 2; j < 120; ++j) {
        term = term * e;
        const Matrix add = ((j % 2) ? 1.0 : -1.0) / j * term;
        sum += add;
        if (add.norm_max() < 1e-18) break;
    }
    return std::ldexp(1.0, roots) * sum;
}

std::size_t segment_of(const std::vector<double>& t, double s) {
    if (s <= t.front()) return 0;
    if (s >= t.back()) return t.size() - 2;
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    return static_cast<std::size_t>(it - t.begin()) - 1;
}

PathModel ensure_closed(const PathModel& m) {
    if (m.closed_form()) return m;
    return interpolate(integrate(m, default_intervals(m)));
}

void require_same_interval(const PathModel& a, const PathModel& b) {
    if (a.n != b.n) throw DimensionError("paths have different dimensions");
    if (std::abs(a.t0 - b.t0) > 1e-12 || std::abs(a.t1 - b.t1) > 1e-12)
        throw PathError("paths are defined on different intervals");
}

Matrix rot_dim(int n, double theta) { return rot2n(n, theta); }

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

}  // namespace

Matrix expm(const Matrix& a) {
    const double nrm = a.norm_inf();
    if (nrm <= 25.0) return mat_exp(a);
    const int s = static_cast<int>(std::ceil(std::log2(nrm / 25.0)));
    Matrix r = mat_exp(std::ldexp(1.0, -s) * a);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

Matrix generator_of(const Matrix& gamma, const Matrix& dgamma) {
    const int n = half_dim(gamma);
    return -1.0 * (standard_J(n) * dgamma * symp_inverse(gamma));
}

// ---- TauSpec ----

TauSpec TauSpec::identity(double t0, double t1) { return TauSpec{{t0, t1}, {t0, t1}, {1.0, 1.0}}; }

TauSpec TauSpec::through(double t0, double t1, double a, double b) {
    if (!(t0 < a && a < t1 && t0 < b && b < t1)) throw PathError("tau target outside the interval");
    const double d1 = (b - t0) / (a - t0), d2 = (t1 - b) / (t1 - a);
    const double m = 2.0 * d1 * d2 / (d1 + d2);
    auto ok = [](double ml, double mr, double d) { return (ml / d) * (ml / d) + (mr / d) * (mr / d) <= 9.0; };
    if (!ok(1.0, m, d1) || !ok(m, 1.0, d2))
        throw PathError("no monotone cubic with unit end slopes reaches the target");
    return TauSpec{{t0, a, t1}, {t0, b, t1}, {1.0, m, 1.0}};
}

double TauSpec::operator()(double t) const {
    t = std::clamp(t, knots.front(), knots.back());
    const std::size_t i = segment_of(knots, t);
    const double h = knots[i + 1] - knots[i], s = (t - knots[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * values[i] + (s3 - 2 * s2 + s) * h * slopes[i] + (-2 * s3 + 3 * s2) * values[i + 1] +
           (s3 - s2) * h * slopes[i + 1];
}

double TauSpec::derivative(double t) const {
    t = std::clamp(t, knots.front(), knots.back());
    const std::size_t i = segment_of(knots, t);
    const double h = knots[i + 1] - knots[i], s = (t - knots[i]) / h;
    const double s2 = s * s;
    return (6 * s2 - 6 * s) / h * values[i] + (3 * s2 - 4 * s + 1) * slopes[i] + (-6 * s2 + 6 * s) / h * values[i + 1] +
           (3 * s2 - 2 * s) * slopes[i + 1];
}

bool TauSpec::unit_end_slopes(double tol) const {
    return std::abs(slopes.front() - 1.0) <= tol && std::abs(slopes.back() - 1.0) <= tol;
}

void check_tau(const TauSpec& tau) {
    const std::size_t k = tau.knots.size();
    if (k < 2 || tau.values.size() != k || tau.slopes.size() != k) throw PathError("malformed tau");
    for (std::size_t i = 0; i + 1 < k; ++i)
        if (!(tau.knots[i] < tau.knots[i + 1])) throw PathError("tau knots must increase");
    if (std::abs(tau.values.front() - tau.knots.front()) > 1e-12 ||
        std::abs(tau.values.back() - tau.knots.back()) > 1e-12)
        throw PathError("tau must fix both endpoints");
    if (tau.slopes.front() < 0.0 || tau.slopes.back() < 0.0) throw PathError("tau is not monotone");
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const int m = 256;
        for (int j = 0; j <= m; ++j) {
            if ((i == 0 && j == 0) || (i + 2 == k && j == m)) continue;
            const double t = tau.knots[i] + (tau.knots[i + 1] - tau.knots[i]) * j / m;
            if (!(tau.derivative(t) > 0.0)) throw PathError("tau is not strictly increasing");
        }
    }
}

// ---- grids and sampling ----

std::vector<double> uniform_grid(double t0, double t1, int intervals) {
    if (intervals < 1) throw PathError("need at least one interval");
    std::vector<double> t(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) t[i] = t0 + (t1 - t0) * i / intervals;
    t.back() = t1;
    return t;
}

int default_intervals(const PathModel& m, const Tolerances& tol) {
    return std::max(64, static_cast<int>(std::ceil(tol.samples_per_unit * (m.t1 - m.t0) - 1e-9)));
}

void certify(PositivePath& p) {
    const std::size_t N = p.size();
    p.min_eig_P = std::numeric_limits<double>::infinity();
    p.symp_defect = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        p.min_eig_P = std::min(p.min_eig_P, sym_min_eig(sym_part(p.P[k])));
        p.symp_defect = std::max(p.symp_defect, symplectic_defect(p.gamma[k]));
    }
    p.fd_constant = 0.0;
    if (N < 3) return;
    const Matrix J = standard_J(p.n);
    const double h = (p.t.back() - p.t.front()) / static_cast<double>(N - 1);
    for (std::size_t k = 1; k + 1 < N; ++k) {
        const Matrix d = (1.0 / (p.t[k + 1] - p.t[k - 1])) * (p.gamma[k + 1] - p.gamma[k - 1]);
        const double r = (d - J * p.P[k] * p.gamma[k]).norm_max();
        p.fd_constant = std::max(p.fd_constant, r / (h * h));
    }
}

PositivePath integrate(const PathModel& m, int intervals, const Tolerances& tol) {
    if (!m.P) throw PathError("path has no generator");
    PositivePath p;
    p.n = m.n;
    p.t = uniform_grid(m.t0, m.t1, intervals);
    const Matrix J = standard_J(m.n);
    Matrix g = m.gamma0;
    auto check = [&](const Matrix& P, double t) {
        const double e = sym_min_eig(sym_part(P));
        if (!(e > 0.0)) {
            std::ostringstream os;
            os << "generator not positive definite at t = " << t << " (min eig " << e << ")";
            throw PositivityViolation(os.str(), t, e);
        }
    };
    for (std::size_t k = 0; k < p.t.size(); ++k) {
        const Matrix Pk = sym_part(m.P(p.t[k]));
        check(Pk, p.t[k]);
        p.gamma.push_back(g);
        p.P.push_back(Pk);
        if (k + 1 == p.t.size()) break;
        const double h = p.t[k + 1] - p.t[k], tm = p.t[k] + 0.5 * h;
        const Matrix Pm = sym_part(m.P(tm));
        check(Pm, tm);
        g = expm(h * (J * Pm)) * g;
    }
    certify(p);
    if (p.symp_defect > tol.symp) throw NumericalError("integrated path lost symplecticity");
    return p;
}

PositivePath sample(const PathModel& m, int intervals, const Tolerances& tol) {
    if (!m.closed_form()) return integrate(m, intervals, tol);
    PositivePath p;
    p.n = m.n;
    p.t = uniform_grid(m.t0, m.t1, intervals);
    for (double t : p.t) {
        p.gamma.push_back(m.gamma(t));
        p.P.push_back(sym_part(m.P(t)));
    }
    certify(p);
    return p;
}

PositivePath sample(const PathModel& m, const Tolerances& tol) { return sample(m, default_intervals(m, tol), tol); }

PathModel interpolate(const PositivePath& p) {
    if (p.size() < 2) throw PathError("need at least two samples");
    struct Data {
        std::vector<double> t;
        std::vector<Matrix> g, L, P;
    };
    auto d = std::make_shared<Data>();
    d->t = p.t;
    d->g = p.gamma;
    const Matrix J = standard_J(p.n);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        const Matrix L = log_near_identity(symp_inverse(p.gamma[k]) * p.gamma[k + 1]);
        const double h = p.t[k + 1] - p.t[k];
        d->L.push_back(L);
        d->P.push_back(sym_part(-1.0 / h * (J * p.gamma[k] * L * symp_inverse(p.gamma[k]))));
    }
    PathModel m;
    m.n = p.n;
    m.t0 = p.t.front();
    m.t1 = p.t.back();
    m.gamma0 = p.gamma.front();
    m.kind = "interpolated";
    m.gamma = [d](double t) {
        const std::size_t k = segment_of(d->t, t);
        const double s = (t - d->t[k]) / (d->t[k + 1] - d->t[k]);
        if (s <= 0.0) return d->g[k];
        if (s >= 1.0) return d->g[k + 1];
        return d->g[k] * expm(s * d->L[k]);
    };
    m.P = [d](double t) { return d->P[segment_of(d->t, t)]; };
    return m;
}

PositivityCertificate verify_positive(const PositivePath& p, double asym_tol) {
    if (p.size() < 2) throw PathError("need at least two samples");
    PositivityCertificate c;
    c.min_eig = std::numeric_limits<double>::infinity();
    const std::size_t N = p.size();
    const Matrix J = standard_J(p.n);
    auto consider = [&](const Matrix& Phat, double t) {
        const double asym = (Phat - Phat.transpose()).norm_max() / max_or_one(Phat);
        const double e = sym_min_eig(sym_part(Phat));
        c.max_asymmetry = std::max(c.max_asymmetry, asym);
        if (e < c.min_eig) {
            c.min_eig = e;
            c.worst_t = t;
        }
    };
    if (N == 2) {
        const double h = p.t[1] - p.t[0];
        const Matrix L = log_near_identity(symp_inverse(p.gamma[0]) * p.gamma[1]);
        consider(-1.0 / h * (J * p.gamma[0] * L * symp_inverse(p.gamma[0])), p.t[0]);
    }
    for (std::size_t k = 1; k + 1 < N; ++k) {
        const double hl = p.t[k] - p.t[k - 1], hr = p.t[k + 1] - p.t[k];
        Matrix dg;
        const bool five = k >= 2 && k + 2 < N && std::abs(hl - hr) <= 1e-9 * hr &&
                          std::abs((p.t[k - 1] - p.t[k - 2]) - hl) <= 1e-9 * hr &&
                          std::abs((p.t[k + 2] - p.t[k + 1]) - hr) <= 1e-9 * hr;
        const bool uniform = N >= 5 && std::abs((p.t[N - 1] - p.t[0]) / (N - 1) - hr) <= 1e-9 * hr;
        if (five)
            dg = (1.0 / (12.0 * hr)) * (p.gamma[k - 2] - 8.0 * p.gamma[k - 1] + 8.0 * p.gamma[k + 1] - p.gamma[k + 2]);
        else if (uniform && k == 1)
            dg = (1.0 / (12.0 * hr)) *
                 (-3.0 * p.gamma[0] - 10.0 * p.gamma[1] + 18.0 * p.gamma[2] - 6.0 * p.gamma[3] + p.gamma[4]);
        else if (uniform && k + 2 == N)
            dg = (1.0 / (12.0 * hr)) * (3.0 * p.gamma[N - 1] + 10.0 * p.gamma[N - 2] - 18.0 * p.gamma[N - 3] +
                                        6.0 * p.gamma[N - 4] - p.gamma[N - 5]);
        else
            dg = (hl / (hr * (hl + hr))) * p.gamma[k + 1] + ((hr - hl) / (hl * hr)) * p.gamma[k] -
                 (hr / (hl * (hl + hr))) * p.gamma[k - 1];
        consider(generator_of(p.gamma[k], dg), p.t[k]);
    }
    std::ostringstream os;
    if (!(c.min_eig > 0.0)) {
        os << "min eig " << c.min_eig << " at t = " << c.worst_t;
    } else if (c.max_asymmetry > asym_tol) {
        os << "asymmetry " << c.max_asymmetry << " exceeds " << asym_tol;
    }
    c.reason = os.str();
    c.ok = c.reason.empty();
    return c;
}

// ---- models ----

PathModel constant_generator(const Matrix& S, const Matrix& gamma0, double t0, double t1) {
    PathModel m;
    m.n = half_dim(gamma0);
    m.t0 = t0;
    m.t1 = t1;
    m.gamma0 = gamma0;
    m.kind = "constant_generator";
    const Matrix JS = standard_J(m.n) * S;
    const Matrix Ss = sym_part(S);
    m.gamma = [JS, gamma0, t0](double t) { return expm((t - t0) * JS) * gamma0; };
    m.P = [Ss](double) { return Ss; };
    return m;
}

PathModel rotation_loop(const std::vector<int>& ks) {
    if (ks.empty() || ks.size() > 4) throw DimensionError("rotation_loop needs 1 to 4 blocks");
    PathModel m;
    m.n = static_cast<int>(ks.size());
    m.gamma0 = Matrix::identity(2 * ks.size());
    m.kind = "rotation_loop";
    m.gamma = [ks](double t) {
        std::vector<Matrix> b;
        for (int k : ks) b.push_back(rot2(kTwoPi * k * t));
        return block_diag(b);
    };
    std::vector<double> d;
    for (int k : ks) {
        d.push_back(kTwoPi * k);
        d.push_back(kTwoPi * k);
    }
    const Matrix P = Matrix::diag(d);
    m.P = [P](double) { return P; };
    return m;
}

PathModel alpha_path(const Matrix& base, double a0, double a1) {
    validate(base);
    PathModel m;
    m.n = half_dim(base);
    m.t0 = a0;
    m.t1 = a1;
    m.gamma0 = base * rot2n(m.n, a0);
    m.kind = "alpha_family";
    const Matrix bi = symp_inverse(base);
    const Matrix P = sym_part(bi.transpose() * bi);
    const int n = m.n;
    m.gamma = [base, n](double a) { return base * rot2n(n, a); };
    m.P = [P](double) { return P; };
    return m;
}

PathModel random_positive_path(int n, Rng& rng) {
    auto spd = [&]() {
        Matrix a(2 * n, 2 * n);
        for (int i = 0; i < 2 * n; ++i)
            for (int j = 0; j < 2 * n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
        Matrix s = (1.0 / (2 * n)) * (a * a.transpose());
        for (int i = 0; i < 2 * n; ++i) s(i, i) += 0.2;
        return s;
    };
    const Matrix s1 = spd(), s2 = spd();
    const Matrix g0 = random_symplectic(n, rng);
    const Matrix J = standard_J(n);
    const Matrix js1 = J * s1, js2 = J * s2;
    PathModel m;
    m.n = n;
    m.gamma0 = g0;
    m.kind = "random_positive";
    m.gamma = [js1, js2, g0](double t) { return expm(t * js1) * expm(t * js2) * g0; };
    m.P = [js1, s1, s2](double t) {
        const Matrix ei = symp_inverse(expm(t * js1));
        return sym_part(s1 + ei.transpose() * s2 * ei);
    };
    return m;
}

PathModel model_product(const PathModel& p1_in, const PathModel& p2_in) {
    require_same_interval(p1_in, p2_in);
    const PathModel p1 = ensure_closed(p1_in), p2 = ensure_closed(p2_in);
    PathModel m;
    m.n = p1.n;
    m.t0 = p1.t0;
    m.t1 = p1.t1;
    m.gamma0 = p1.gamma0 * p2.gamma0;
    m.kind = "product";
    m.gamma = [p1, p2](double t) { return p1.gamma(t) * p2.gamma(t); };
    m.P = [p1, p2](double t) {
        const Matrix gi = symp_inverse(p1.gamma(t));
        return sym_part(p1.P(t) + gi.transpose() * p2.P(t) * gi);
    };
    return m;
}

PathModel model_rotation(const PathModel& p_in, double theta) {
    const PathModel p = ensure_closed(p_in);
    PathModel m = p;
    m.kind = "rotated";
    const int n = p.n;
    const double t0 = p.t0;
    m.gamma = [p, theta, n, t0](double t) { return p.gamma(t) * rot_dim(n, theta * (t - t0)); };
    m.P = [p, theta](double t) {
        const Matrix gi = symp_inverse(p.gamma(t));
        return sym_part(p.P(t) + theta * (gi.transpose() * gi));
    };
    return m;
}

PathModel reverse(const PathModel& p_in) {
    const PathModel p = ensure_closed(p_in);
    PathModel m = p;
    const double T = p.t0 + p.t1;
    m.kind = "reversed";
    m.gamma0 = p.gamma(p.t1);
    m.gamma = [p, T](double t) { return p.gamma(T - t); };
    m.P = [p, T](double t) { return -1.0 * p.P(T - t); };
    return m;
}

PathModel reverse_inverse(const PathModel& p_in) {
    const PathModel p = ensure_closed(p_in);
    PathModel m = p;
    const double T = p.t0 + p.t1;
    m.kind = "reversed_inverse";
    m.gamma0 = symp_inverse(p.gamma(p.t1));
    m.gamma = [p, T](double t) { return symp_inverse(p.gamma(T - t)); };
    m.P = [p, T](double t) {
        const Matrix g = p.gamma(T - t);
        return sym_part(g.transpose() * p.P(T - t) * g);
    };
    return m;
}

PathModel retime(const PathModel& p_in, const TauSpec& tau) {
    check_tau(tau);
    if (std::abs(tau.t0() - p_in.t0) > 1e-12 || std::abs(tau.t1() - p_in.t1) > 1e-12)
        throw PathError("tau interval differs from the path interval");
    const PathModel p = ensure_closed(p_in);
    PathModel m = p;
    m.kind = "retimed";
    m.gamma = [p, tau](double t) { return p.gamma(tau(t)); };
    m.P = [p, tau](double t) { return tau.derivative(t) * p.P(tau(t)); };
    return m;
}

PathModel homotopy_slice(const PathModel& p_in, const TauSpec& tau, double s) {
    check_tau(tau);
    if (s < 0.0 || s > 1.0) throw PathError("homotopy parameter outside [0, 1]");
    const PathModel p = ensure_closed(p_in);
    PathModel m = p;
    m.kind = "homotopy_slice";
    auto ts = [tau, s](double t) { return (1.0 - s) * t + s * tau(t); };
    m.gamma = [p, ts](double t) { return p.gamma(ts(t)); };
    m.P = [p, tau, s, ts](double t) { return ((1.0 - s) + s * tau.derivative(t)) * p.P(ts(t)); };
    return m;
}

// ---- sampled operations ----

PositivePath product(const PositivePath& p1, const PositivePath& p2) {
    if (p1.n != p2.n) throw DimensionError("paths have different dimensions");
    if (p1.size() != p2.size()) throw PathError("grid mismatch");
    for (std::size_t k = 0; k < p1.size(); ++k)
        if (std::abs(p1.t[k] - p2.t[k]) > 1e-12 * std::max(1.0, std::abs(p1.t[k]))) throw PathError("grid mismatch");
    if (!p1.positive() || !p2.positive()) throw PathError("operands must be certified positive");
    PositivePath p;
    p.n = p1.n;
    p.t = p1.t;
    for (std::size_t k = 0; k < p1.size(); ++k) {
        const Matrix gi = symp_inverse(p1.gamma[k]);
        p.gamma.push_back(p1.gamma[k] * p2.gamma[k]);
        p.P.push_back(sym_part(p1.P[k] + gi.transpose() * p2.P[k] * gi));
    }
    certify(p);
    return p;
}

PositivePath perturb_rotation(const PositivePath& p, double theta) {
    if (theta == 0.0) return p;
    PositivePath q;
    q.n = p.n;
    q.t = p.t;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Matrix gi = symp_inverse(p.gamma[k]);
        q.gamma.push_back(p.gamma[k] * rot2n(p.n, theta * (p.t[k] - p.t[0])));
        q.P.push_back(sym_part(p.P[k] + theta * (gi.transpose() * gi)));
    }
    certify(q);
    if (!q.positive()) {
        double worst_t = q.t[0], worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < q.size(); ++k) {
            const double e = sym_min_eig(q.P[k]);
            if (e < worst) {
                worst = e;
                worst_t = q.t[k];
            }
        }
        throw PositivityViolation("rotation perturbation leaves the positive cone", worst_t, worst);
    }
    return q;
}

ThetaInterval find_epsilon(const PositivePath& p, double resolution) {
    if (!p.positive()) throw PathError("path is not certified positive");
    std::vector<Matrix> G;
    for (const auto& g : p.gamma) {
        const Matrix gi = symp_inverse(g);
        G.push_back(sym_part(gi.transpose() * gi));
    }
    auto ok = [&](double theta) {
        for (std::size_t k = 0; k < p.size(); ++k)
            if (!(sym_min_eig(p.P[k] + theta * G[k]) > 0.0)) return false;
        return true;
    };
    double good = 0.0, bad = 1.0;
    while (ok(-bad)) {
        good = bad;
        bad *= 2.0;
        if (bad > 1e12) return ThetaInterval{-good, std::numeric_limits<double>::infinity()};
    }
    while (bad - good > resolution * std::max(1.0, bad)) {
        const double mid = 0.5 * (good + bad);
        (ok(-mid) ? good : bad) = mid;
    }
    return ThetaInterval{-good, std::numeric_limits<double>::infinity()};
}

XFamily exp_family(const Matrix& Y, const Matrix& X0, double t0) {
    const int n = half_dim(X0);
    const Matrix JY = standard_J(n) * Y;
    const Matrix Ys = sym_part(Y);
    return XFamily{[JY, X0, t0](double t) { return expm((t - t0) * JY) * X0; }, [Ys](double) { return Ys; }};
}

Matrix conjugated_generator(const Matrix& gamma, const Matrix& P, const Matrix& X, const Matrix& Y) {
    const Matrix gi = symp_inverse(gamma);
    return sym_part(X.transpose() * (P - Y + gi.transpose() * Y * gi) * X);
}

ConjugatedPath conjugate_path(const PositivePath& p, const XFamily& x, double gen_tol) {
    ConjugatedPath r;
    r.path.n = p.n;
    r.path.t = p.t;
    const Matrix J = standard_J(p.n);
    const double delta = 1e-5 * std::max(1.0, p.t.back() - p.t.front());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p.t[k];
        const Matrix X = x.X(t), Y = x.Y(t);
        const Matrix dX = (0.5 / delta) * (x.X(t + delta) - x.X(t - delta));
        const Matrix expect = J * Y * X;
        r.generator_residual = std::max(r.generator_residual, (dX - expect).norm_max() / max_or_one(expect));
        r.path.gamma.push_back(symp_inverse(X) * p.gamma[k] * X);
        r.path.P.push_back(conjugated_generator(p.gamma[k], p.P[k], X, Y));
    }
    if (r.generator_residual > gen_tol) throw PathError("generator inconsistency: X' differs from J Y X");
    certify(r.path);
    r.positive = r.path.positive();
    return r;
}

// ---- join ----

PathModel join_model(const Matrix& A, const Matrix& B, int k) {
    validate(A);
    validate(B);
    const int n = half_dim(A);
    if (half_dim(B) != n) throw DimensionError("join endpoints differ in dimension");
    if (k < 0) throw PathError("twist must be non-negative");
    const std::size_t d = 2 * n;
    const Matrix I = Matrix::identity(d), J = standard_J(n);
    const Matrix C = symp_inverse(A) * B;
    // log S projected onto symmetric elements of sp(2n)
    const Matrix Lraw = sym_log(sym_sqrt(sym_part(C * C.transpose())));
    const SymEig le = sym_eig(sym_part(0.5 * (Lraw - J * Lraw * J.transpose())));
    Matrix S = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) S(i, i) = std::exp(le.values[i]);
    S = le.vectors * S * le.vectors.transpose();
    const Matrix U = inverse(S) * C;

    // rotate away from -1 so the Cayley transform exists
    double phi = 0.0, best = -1.0;
    for (int j = 0; j < 8; ++j) {
        const double cand = j * M_PI / 8.0;
        double sep = 1e300;
        for (auto z : eigenvalues(rot2n(n, cand) * U)) sep = std::min(sep, std::abs(z + 1.0));
        if (sep > best + 1e-12) {
            best = sep;
            phi = cand;
        }
        if (best > 0.5) break;
    }
    const Matrix U2 = rot2n(n, phi) * U;
    const Matrix Wraw = (U2 - I) * inverse(U2 + I);
    // skew and commuting with J
    const Matrix Wk = 0.5 * (Wraw - Wraw.transpose());
    const Matrix W = 0.5 * (Wk + J * Wk * J.transpose());

    struct Base {
        Matrix A, J, I, W, Q;
        std::vector<double> w;
        double phi;
        int n;
    };
    auto b = std::make_shared<Base>(Base{A, J, I, W, le.vectors, le.values, phi, n});
    auto expL = [b](double t, bool deriv) {
        Matrix D(b->I.rows(), b->I.rows());
        for (std::size_t i = 0; i < b->w.size(); ++i) D(i, i) = (deriv ? b->w[i] : 1.0) * std::exp(t * b->w[i]);
        return b->Q * D * b->Q.transpose();
    };
    auto beta = [b, expL](double t) {
        const Matrix cay = (b->I + t * b->W) * inverse(b->I - t * b->W);
        return b->A * expL(t, false) * rot2n(b->n, -b->phi * t) * cay;
    };
    auto beta_gen = [b, expL](double t) {
        const Matrix E = expL(t, false), dE = expL(t, true);
        const Matrix R = rot2n(b->n, -b->phi * t);
        const Matrix inv = inverse(b->I - t * b->W);
        const Matrix cay = (b->I + t * b->W) * inv;
        const Matrix G = E * R * cay;
        const Matrix dG = dE * R * cay - b->phi * (E * b->J * R * cay) + E * R * ((b->I + cay) * b->W * inv);
        return generator_of(G, dG);
    };
    PathModel m;
    m.n = n;
    m.t0 = 0.0;
    m.t1 = 1.0;
    m.gamma0 = A;
    m.kind = "join";
    const double speed = kTwoPi * k;
    // exp(t L) absorbs the rounding left at t = 1
    const Matrix X = inverse(beta(1.0) * rot2n(n, speed)) * B - I;
    const Matrix Ls = X - 0.5 * (X * X) + (1.0 / 3.0) * (X * X * X);
    const Matrix K = sym_part(-1.0 * (J * Ls));
    m.gamma = [beta, speed, n, Ls](double t) { return beta(t) * rot2n(n, speed * t) * mat_exp(t * Ls); };
    m.P = [b, beta, beta_gen, speed, n, K](double t) {
        // P_beta = A^{-T} P_G A^{-1} for beta = A G
        const Matrix ai = symp_inverse(b->A);
        const Matrix PG = beta_gen(t);
        const Matrix bi = symp_inverse(beta(t));
        const Matrix gi = symp_inverse(rot2n(n, speed * t)) * bi;
        return sym_part(ai.transpose() * PG * ai + speed * (bi.transpose() * bi) + gi.transpose() * K * gi);
    };
    return m;
}

JoinResult join(const Matrix& A, const Matrix& B, int k, const Tolerances& tol) {
    auto attempt = [&](int kk, JoinResult& out) {
        out.model = join_model(A, B, kk);
        out.path = sample(out.model, tol);
        out.k = kk;
        return out.path.positive() && verify_positive(out.path).ok;
    };
    JoinResult r;
    if (k > 0) {
        if (!attempt(k, r)) throw PositivityViolation("join is not positive for the requested twist", 0.0, r.path.min_eig_P);
        return r;
    }
    for (int kk = 1; kk <= tol.join_k_max; ++kk)
        if (attempt(kk, r)) return r;
    throw NumericalError("join: no positive twist up to k_max");
}

// ---- smoothing concatenation ----

ConcatResult smooth_concat(const PathModel& p1_in, const PathModel& p2_in, double w, const Tolerances& tol) {
    if (p1_in.n != p2_in.n) throw DimensionError("paths have different dimensions");
    if (std::abs(p1_in.t1 - p2_in.t0) > 1e-12) throw PathError("second path must start where the first ends");
    const PathModel p1 = ensure_closed(p1_in), p2 = ensure_closed(p2_in);
    const double a = p1.t0, b = p1.t1, c = p2.t1;
    if (!(w > 0.0 && w < b - a && w < c - b)) throw PathError("window does not fit inside both paths");
    const Matrix gb1 = p1.gamma(b), gb2 = p2.gamma(b);
    if ((gb1 - gb2).norm_max() > tol.junction * max_or_one(gb1)) throw PathError("non-matching junction");
    for (const PathModel* q : {&p1, &p2}) {
        const PositivePath s = sample(*q, tol);
        if (!s.positive()) {
            std::size_t worst = 0;
            for (std::size_t k = 0; k < s.size(); ++k)
                if (sym_min_eig(s.P[k]) < sym_min_eig(s.P[worst])) worst = k;
            throw PositivityViolation("input path is not positive", s.t[worst], sym_min_eig(s.P[worst]));
        }
    }

    auto blend = [p1, p2, b, w](double t) {
        const double rho = smoothstep((t - (b - w)) / (2.0 * w));
        return sym_part((1.0 - rho) * p1.P(std::min(t, b)) + rho * p2.P(std::max(t, b)));
    };
    const int m = std::max(512, static_cast<int>(std::ceil(2.0 * w * tol.samples_per_unit * 8)));
    struct Table {
        std::vector<double> t;
        std::vector<Matrix> g, gen;  // gen = h J P_mid
    };
    auto tab = std::make_shared<Table>();
    tab->t = uniform_grid(b - w, b + w, m);
    const Matrix J = standard_J(p1.n);
    Matrix g = p1.gamma(b - w);
    for (int j = 0; j <= m; ++j) {
        tab->g.push_back(g);
        if (j == m) break;
        const double h = tab->t[j + 1] - tab->t[j];
        const Matrix Pm = blend(tab->t[j] + 0.5 * h);
        const double e = sym_min_eig(Pm);
        if (!(e > 0.0)) throw PositivityViolation("positivity lost in window; use a smaller window", tab->t[j], e);
        tab->gen.push_back(J * Pm);
        g = expm(h * tab->gen.back()) * g;
    }
    const Matrix Ccorr = symp_inverse(p2.gamma(b + w)) * g;

    ConcatResult r;
    r.model.n = p1.n;
    r.model.t0 = a;
    r.model.t1 = c;
    r.model.gamma0 = p1.gamma0;
    r.model.kind = "concat";
    r.model.gamma = [p1, p2, tab, Ccorr, b, w](double t) {
        if (t <= b - w) return p1.gamma(t);
        if (t >= b + w) return Matrix(p2.gamma(t) * Ccorr);
        const std::size_t j = std::min(segment_of(tab->t, t), tab->gen.size() - 1);
        return Matrix(expm((t - tab->t[j]) * tab->gen[j]) * tab->g[j]);
    };
    r.model.P = [p1, p2, blend, b, w](double t) {
        if (t <= b - w) return p1.P(t);
        if (t >= b + w) return p2.P(t);
        return blend(t);
    };
    r.path = sample(r.model, tol);
    for (std::size_t k = 0; k < r.path.size(); ++k) {
        const double t = r.path.t[k];
        const Matrix ref = t <= b ? p1.gamma(t) : p2.gamma(t);
        r.c0_distance = std::max(r.c0_distance, (r.path.gamma[k] - ref).norm_max());
    }
    const double dt = 1e-5 * std::min(w, 1.0);
    for (double x : {b - w, b + w}) {
        const Matrix left =
            (0.5 / dt) * (3.0 * r.model.gamma(x) - 4.0 * r.model.gamma(x - dt) + r.model.gamma(x - 2 * dt));
        const Matrix right =
            (0.5 / dt) * (-3.0 * r.model.gamma(x) + 4.0 * r.model.gamma(x + dt) - r.model.gamma(x + 2 * dt));
        r.derivative_jump = std::max(r.derivative_jump, (left - right).norm_max());
    }
    return r;
}

// ---- specs ----

PathModel build(const PathSpec& s, const Tolerances& tol) {
    auto child = [&](std::size_t i) {
        if (s.children.size() <= i) throw PathError("path spec '" + s.kind + "' is missing a child");
        return build(s.children[i], tol);
    };
    if (s.kind == "samples") {
        const std::size_t k = s.knot_t.size();
        if (k < 2 || s.knot_P.size() != k) throw PathError("samples spec needs matching knot_t and knot_P");
        for (std::size_t i = 0; i + 1 < k; ++i)
            if (!(s.knot_t[i] < s.knot_t[i + 1])) throw PathError("knot times must increase");
        const int n = half_dim(s.gamma0);
        validate(s.gamma0, tol);
        for (const auto& P : s.knot_P) {
            if (half_dim(P) != n) throw DimensionError("knot generator has the wrong size");
            if ((P - P.transpose()).norm_max() > 1e-12 * max_or_one(P)) throw PathError("knot generator not symmetric");
        }
        PathModel m;
        m.n = n;
        m.t0 = s.knot_t.front();
        m.t1 = s.knot_t.back();
        m.gamma0 = s.gamma0;
        m.kind = "samples";
        const auto kt = s.knot_t;
        const auto kp = s.knot_P;
        m.P = [kt, kp](double t) {
            const std::size_t i = segment_of(kt, t);
            const double u = std::clamp((t - kt[i]) / (kt[i + 1] - kt[i]), 0.0, 1.0);
            return Matrix((1.0 - u) * kp[i] + u * kp[i + 1]);
        };
        return m;
    }
    if (s.kind == "rotation_loop") return rotation_loop(s.ks);
    if (s.kind == "alpha_family") return alpha_path(make_normal(s.base).m, s.t0, s.t1);
    if (s.kind == "join") return join(s.A, s.B, s.k, tol).model;
    if (s.kind == "product") return model_product(child(0), child(1));
    if (s.kind == "conjugated") {
        const PathModel p = ensure_closed(child(0));
        validate(s.X0, tol);
        const Matrix Y = s.Y.rows() ? s.Y : Matrix(s.X0.rows(), s.X0.rows());
        const XFamily x = exp_family(Y, s.X0, p.t0);
        PathModel m = p;
        m.kind = "conjugated";
        m.gamma0 = symp_inverse(s.X0) * p.gamma0 * s.X0;
        m.gamma = [p, x](double t) {
            const Matrix X = x.X(t);
            return Matrix(symp_inverse(X) * p.gamma(t) * X);
        };
        m.P = [p, x](double t) { return conjugated_generator(p.gamma(t), p.P(t), x.X(t), x.Y(t)); };
        return m;
    }
    if (s.kind == "retimed") return retime(child(0), s.tau);
    if (s.kind == "concat") return smooth_concat(child(0), child(1), s.window, tol).model;
    throw PathError("unknown path kind '" + s.kind + "'");
}

}  // namespace sympath

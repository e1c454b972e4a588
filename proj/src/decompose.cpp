#include <algorithm>
#include <cmath>
#include <sstream>

#include "sympath/paths.hpp"

namespace sympath {

namespace {

using Vec = std::vector<double>;

double omega(const Vec& u, const Vec& v) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); i += 2) s += u[i] * v[i + 1] - u[i + 1] * v[i];
    return s;
}

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Vec column(const Matrix& m, std::size_t j) {
    Vec v(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, j);
    return v;
}

Matrix from_columns(const std::vector<Vec>& cols) {
    Matrix m(cols.front().size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < cols[j].size(); ++i) m(i, j) = cols[j][i];
    return m;
}

void axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Removes the symplectic projection of v onto the existing pairs.
void reduce(Vec& v, const std::vector<Vec>& pairs) {
    for (std::size_t p = 0; p + 1 < pairs.size(); p += 2) {
        const Vec& e = pairs[p];
        const Vec& f = pairs[p + 1];
        const double cf = omega(v, f), ce = omega(v, e);
        axpy(v, -cf, e);
        axpy(v, ce, f);
    }
}

// Appends (e, f) with omega(e, f) = 1 built from the candidates a, b.
void push_pair(Vec a, Vec b, std::vector<Vec>& pairs, double gram_tol, bool allow_flip) {
    reduce(a, pairs);
    reduce(b, pairs);
    double w = omega(a, b);
    const double scale = norm2(a) * norm2(b);
    if (!(std::abs(w) > gram_tol * scale) || scale == 0.0)
        throw ConditioningError("symplectic Gram matrix is ill-conditioned");
    if (w < 0.0) {
        if (!allow_flip) throw ConditioningError("tracked basis changed orientation");
        for (double& x : b) x = -x;
        w = -w;
    }
    const double s = 1.0 / std::sqrt(w);
    for (double& x : a) x *= s;
    for (double& x : b) x *= s;
    pairs.push_back(a);
    pairs.push_back(b);
}

// Symplectic basis of span(V) with pivoting, appended to pairs.
void initial_pairs(std::vector<Vec> cand, std::vector<Vec>& pairs, double gram_tol) {
    while (!cand.empty()) {
        for (auto& c : cand) reduce(c, pairs);
        std::size_t ia = 0;
        for (std::size_t i = 1; i < cand.size(); ++i)
            if (norm2(cand[i]) > norm2(cand[ia])) ia = i;
        Vec a = cand[ia];
        cand.erase(cand.begin() + static_cast<long>(ia));
        if (cand.empty()) throw ConditioningError("odd-dimensional invariant subspace");
        std::size_t ib = 0;
        for (std::size_t i = 1; i < cand.size(); ++i)
            if (std::abs(omega(a, cand[i])) > std::abs(omega(a, cand[ib]))) ib = i;
        Vec b = cand[ib];
        cand.erase(cand.begin() + static_cast<long>(ib));
        push_pair(a, b, pairs, gram_tol, true);
    }
}

using CMat = std::vector<Complex>;

// Orthonormal basis of the range of prod (M - c I) over c in others.
Matrix spectral_range(const Matrix& m, const std::vector<Complex>& others, std::size_t rank) {
    const std::size_t d = m.rows();
    CMat q(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) q[i * d + i] = 1.0;
    for (Complex c : others) {
        CMat r(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                const Complex a = (i == k) ? Complex(m(i, k)) - c : Complex(m(i, k));
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j) r[i * d + j] += a * q[k * d + j];
            }
        double mx = 0.0;
        for (auto z : r) mx = std::max(mx, std::abs(z));
        if (mx == 0.0) throw NotDecomposable("spectral projector vanishes");
        for (auto& z : r) z /= mx;
        q = r;
    }
    Matrix re(d, d);
    double im = 0.0;
    for (std::size_t i = 0; i < d * d; ++i) {
        re(i / d, i % d) = q[i].real();
        im = std::max(im, std::abs(q[i].imag()));
    }
    if (im > 1e-6) throw NotDecomposable("eigenvalue group is not closed under conjugation");
    const SymEig e = sym_eig(re * re.transpose());
    Matrix v(d, rank);
    for (std::size_t j = 0; j < rank; ++j)
        for (std::size_t i = 0; i < d; ++i) v(i, j) = e.vectors(i, d - rank + j);
    return v;
}

Vec project(const Matrix& v, const Vec& x) {
    Vec c(v.cols(), 0.0), y(v.rows(), 0.0);
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i) c[j] += v(i, j) * x[i];
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i) y[i] += v(i, j) * c[j];
    return y;
}

// Minimum-cost assignment of tracked values to new eigenvalues.
std::vector<std::size_t> match(const std::vector<Complex>& pred, const std::vector<Complex>& ev) {
    const std::size_t m = pred.size();
    const std::size_t full = std::size_t{1} << m;
    std::vector<double> cost(full, 1e300);
    std::vector<std::size_t> from(full, 0);
    cost[0] = 0.0;
    for (std::size_t mask = 0; mask < full; ++mask) {
        if (cost[mask] >= 1e300) continue;
        const std::size_t i = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (i >= m) continue;
        for (std::size_t j = 0; j < m; ++j) {
            if (mask & (std::size_t{1} << j)) continue;
            const double c = cost[mask] + std::norm(pred[i] - ev[j]);
            const std::size_t nm = mask | (std::size_t{1} << j);
            if (c < cost[nm]) {
                cost[nm] = c;
                from[nm] = j;
            }
        }
    }
    std::vector<std::size_t> assign(m);
    std::size_t mask = full - 1;
    for (std::size_t i = m; i-- > 0;) {
        assign[i] = from[mask];
        mask &= ~(std::size_t{1} << assign[i]);
    }
    return assign;
}

struct Orbit {
    std::vector<std::size_t> members;
    Complex rep;
};

// Eigenvalues grouped into orbits {z, 1/z, conj z, 1/conj z}.
std::vector<Orbit> orbits(const std::vector<Complex>& ev) {
    std::vector<bool> used(ev.size(), false);
    std::vector<Orbit> out;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (used[i]) continue;
        Orbit o;
        std::vector<Complex> want{ev[i], 1.0 / ev[i]};
        if (std::abs(ev[i].imag()) > 1e-9 && std::abs(std::abs(ev[i]) - 1.0) > 1e-9) {
            want.push_back(std::conj(ev[i]));
            want.push_back(1.0 / std::conj(ev[i]));
        }
        for (Complex w : want) {
            std::size_t best = ev.size();
            double bd = 1e300;
            for (std::size_t j = 0; j < ev.size(); ++j)
                if (!used[j] && std::abs(ev[j] - w) < bd) {
                    bd = std::abs(ev[j] - w);
                    best = j;
                }
            if (best == ev.size()) break;
            used[best] = true;
            o.members.push_back(best);
        }
        Complex rep = ev[o.members.front()];
        for (std::size_t j : o.members) {
            const Complex z = ev[j];
            if (z.imag() > rep.imag() + 1e-12 || (std::abs(z.imag() - rep.imag()) <= 1e-12 && std::abs(z) > std::abs(rep)))
                rep = z;
        }
        o.rep = rep;
        out.push_back(o);
    }
    std::sort(out.begin(), out.end(), [](const Orbit& a, const Orbit& b) {
        const double aa = std::arg(Complex(a.rep.real(), std::abs(a.rep.imag())));
        const double ab = std::arg(Complex(b.rep.real(), std::abs(b.rep.imag())));
        if (std::abs(aa - ab) > 1e-9) return aa < ab;
        return std::abs(a.rep) > std::abs(b.rep);
    });
    return out;
}

double separation(const std::vector<Complex>& ev, const std::vector<bool>& in_group) {
    double s = 1e300;
    for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = 0; j < ev.size(); ++j)
            if (in_group[i] && !in_group[j])
                s = std::min(s, std::abs(ev[i] - ev[j]) / std::max(1.0, std::abs(ev[i])));
    return s;
}

Matrix block_diag2(const Matrix& a, const Matrix& b) { return direct_sum(a, b); }

double offdiag(const Matrix& b, std::size_t r) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            if ((i < r) != (j < r)) s = std::max(s, std::abs(b(i, j)));
    return s / std::max(1.0, b.norm_max());
}

Matrix resymplectify(const Matrix& x, double gram_tol) {
    std::vector<Vec> pairs;
    for (std::size_t j = 0; j + 1 < x.cols(); j += 2) push_pair(column(x, j), column(x, j + 1), pairs, gram_tol, false);
    return from_columns(pairs);
}

// Characteristic polynomial coefficients of a against those of the block product.
double spectrum_mismatch(const Matrix& a, const Matrix& b1, const Matrix& b2) {
    const auto pa = char_poly(a), p1 = char_poly(b1), p2 = char_poly(b2);
    std::vector<double> prod(p1.size() + p2.size() - 1, 0.0);
    for (std::size_t i = 0; i < p1.size(); ++i)
        for (std::size_t j = 0; j < p2.size(); ++j) prod[i + j] += p1[i] * p2[j];
    double worst = 0.0, scale = 1.0;
    for (double c : pa) scale = std::max(scale, std::abs(c));
    for (std::size_t i = 0; i < pa.size(); ++i) worst = std::max(worst, std::abs(pa[i] - prod[i]));
    return worst / scale;
}

// Blocks and re-gauged generators from a basis path X.
BlockDecomposition assemble(const PositivePath& p, const std::vector<Matrix>& X, int k, bool constant) {
    const std::size_t N = p.size();
    const std::size_t r = 2 * static_cast<std::size_t>(k), d = 2 * static_cast<std::size_t>(p.n);
    BlockDecomposition out;
    out.X.resize(N);
    out.constant_basis = constant;
    std::vector<Matrix> B(N), Pt(N);
    for (std::size_t j = 0; j < N; ++j) {
        B[j] = symp_inverse(X[j]) * p.gamma[j] * X[j];
        Pt[j] = symmetrize(X[j].transpose() * p.P[j] * X[j]);
        out.offdiag_residual = std::max(out.offdiag_residual, offdiag(B[j], r));
    }
    std::vector<Matrix> Z1(N, Matrix::identity(r)), Z2(N, Matrix::identity(d - r));
    if (!constant && N >= 3) {
        std::vector<Matrix> K(N);
        for (std::size_t j = 0; j < N; ++j) {
            Matrix dX;
            if (j == 0)
                dX = (1.0 / (p.t[2] - p.t[0])) * (-3.0 * X[0] + 4.0 * X[1] - X[2]);
            else if (j + 1 == N)
                dX = (1.0 / (p.t[N - 1] - p.t[N - 3])) * (3.0 * X[N - 1] - 4.0 * X[N - 2] + X[N - 3]);
            else
                dX = (1.0 / (p.t[j + 1] - p.t[j - 1])) * (X[j + 1] - X[j - 1]);
            K[j] = symp_inverse(X[j]) * dX;
        }
        auto hamiltonian_block = [](const Matrix& Kf, std::size_t r0, std::size_t sz) {
            const int nb = static_cast<int>(sz / 2);
            const Matrix Jb = standard_J(nb);
            const Matrix S = symmetrize(-1.0 * (Jb * Kf.block(r0, r0, sz, sz)));
            return Matrix(Jb * S);
        };
        for (std::size_t j = 0; j + 1 < N; ++j) {
            const double h = p.t[j + 1] - p.t[j];
            const Matrix Km = 0.5 * (K[j] + K[j + 1]);
            Z1[j + 1] = expm(-h * hamiltonian_block(Km, 0, r)) * Z1[j];
            Z2[j + 1] = expm(-h * hamiltonian_block(Km, r, d - r)) * Z2[j];
        }
    }
    out.first.n = k;
    out.second.n = p.n - k;
    out.first.t = out.second.t = p.t;
    for (std::size_t j = 0; j < N; ++j) {
        const Matrix b1 = B[j].block(0, 0, r, r), b2 = B[j].block(r, r, d - r, d - r);
        out.first.gamma.push_back(symp_inverse(Z1[j]) * b1 * Z1[j]);
        out.second.gamma.push_back(symp_inverse(Z2[j]) * b2 * Z2[j]);
        out.first.P.push_back(symmetrize(Z1[j].transpose() * Pt[j].block(0, 0, r, r) * Z1[j]));
        out.second.P.push_back(symmetrize(Z2[j].transpose() * Pt[j].block(r, r, d - r, d - r) * Z2[j]));
        out.X[j] = X[j] * block_diag2(Z1[j], Z2[j]);
    }
    certify(out.first);
    certify(out.second);
    const std::size_t stride = std::max<std::size_t>(1, N / 64);
    for (std::size_t j = 0; j < N; j += stride) {
        out.spectrum_error =
            std::max(out.spectrum_error, spectrum_mismatch(p.gamma[j], out.first.gamma[j], out.second.gamma[j]));
    }
    return out;
}

struct Clusters {
    std::vector<int> id;
    std::vector<Complex> center;
    std::vector<std::size_t> size;
};

// Cluster index of each entry of ev.
Clusters cluster_ids(const Matrix& m, const std::vector<Complex>& ev, double tol) {
    Clusters out;
    out.id.assign(ev.size(), -1);
    const auto cl = cluster_eigenvalues(m, ev, tol);
    for (std::size_t c = 0; c < cl.size(); ++c) {
        out.center.push_back(cl[c].center);
        out.size.push_back(cl[c].members.size());
        for (Complex z : cl[c].members)
            for (std::size_t i = 0; i < ev.size(); ++i)
                if (out.id[i] < 0 && ev[i] == z) {
                    out.id[i] = static_cast<int>(c);
                    break;
                }
    }
    return out;
}

bool mixed(const Clusters& c, const std::vector<bool>& in_group) {
    for (std::size_t i = 0; i < c.id.size(); ++i)
        for (std::size_t j = 0; j < c.id.size(); ++j)
            if (in_group[i] && !in_group[j] && c.id[i] == c.id[j]) return true;
    return false;
}

// The nearest value to conj(z) and to 1/z must carry the label of z.
bool closed_group(const std::vector<Complex>& ev, const std::vector<bool>& in_group) {
    auto nearest = [&](Complex w) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < ev.size(); ++j)
            if (std::abs(ev[j] - w) < std::abs(ev[best] - w)) best = j;
        return best;
    };
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (in_group[nearest(std::conj(ev[i]))] != in_group[i]) return false;
        if (in_group[nearest(1.0 / ev[i])] != in_group[i]) return false;
    }
    return true;
}

bool basis_splits(const PositivePath& p, const Matrix& X, std::size_t r) {
    const Matrix xi = symp_inverse(X);
    for (std::size_t j = 0; j < p.size(); ++j)
        if (offdiag(xi * p.gamma[j] * X, r) > 1e-10) return false;
    return true;
}

}  // namespace

BlockDecomposition block_decompose(const PositivePath& p, const DecomposeOptions& opt) {
    const int n = p.n;
    if (opt.k < 1 || opt.k >= n) throw DimensionError("block size must satisfy 1 <= k < n");
    const std::size_t N = p.size();
    if (N < 3) throw PathError("need at least three samples");
    const std::size_t d = 2 * static_cast<std::size_t>(n), r = 2 * static_cast<std::size_t>(opt.k);

    const Matrix X0 = opt.basis ? *opt.basis : Matrix::identity(d);
    if (opt.basis) validate(X0);
    if (basis_splits(p, X0, r)) return assemble(p, std::vector<Matrix>(N, X0), opt.k, true);

    std::vector<std::vector<Complex>> ev(N);
    for (std::size_t j = 0; j < N; ++j) ev[j] = eigenvalues(p.gamma[j]);

    // seed: first sample where the chosen orbits are separated from the rest
    std::size_t s = N;
    std::vector<bool> group;
    for (std::size_t j = 0; j < N && s == N; ++j) {
        const auto orb = orbits(ev[j]);
        std::vector<bool> g(d, false);
        std::size_t pairs = 0;
        for (std::size_t o = static_cast<std::size_t>(opt.pair_index); o < orb.size() && pairs < r / 2; ++o) {
            for (std::size_t m : orb[o].members) g[m] = true;
            pairs += orb[o].members.size() / 2;
        }
        if (pairs != r / 2) continue;
        if (separation(ev[j], g) >= opt.sep_tol && !mixed(cluster_ids(p.gamma[j], ev[j], opt.sep_tol), g)) {
            s = j;
            group = g;
        }
    }
    if (s == N) throw NotDecomposable("no sample separates the chosen eigenvalue group");

    // track eigenvalues in both directions; labels follow the seed
    std::vector<std::vector<Complex>> tracked(N);
    std::vector<std::vector<bool>> labels(N);
    tracked[s] = ev[s];
    labels[s] = group;
    auto step = [&](std::size_t from, std::size_t prev2, bool have2, std::size_t to) {
        std::vector<Complex> pred = tracked[from];
        if (have2)
            for (std::size_t i = 0; i < d; ++i) pred[i] += tracked[from][i] - tracked[prev2][i];
        const auto a = match(pred, ev[to]);
        tracked[to].resize(d);
        for (std::size_t i = 0; i < d; ++i) tracked[to][i] = ev[to][a[i]];
        labels[to] = labels[from];
    };
    for (std::size_t j = s + 1; j < N; ++j) step(j - 1, j - 2, j >= s + 2, j);
    for (std::size_t j = s; j-- > 0;) step(j + 1, j + 2, j + 2 <= s, j);

    std::vector<bool> regular(N, false);
    for (std::size_t j = 0; j < N; ++j) {
        const Clusters cl = cluster_ids(p.gamma[j], tracked[j], opt.sep_tol);
        regular[j] = separation(tracked[j], labels[j]) >= opt.sep_tol && !mixed(cl, labels[j]);
        if (regular[j]) {
            if (!closed_group(tracked[j], labels[j])) {
                std::ostringstream os;
                os << "eigenvalue groups collide near t = " << p.t[j];
                throw NotDecomposable(os.str());
            }
            continue;
        }
        // a coincident overlap must be diagonalizable, otherwise the groups collide
        const double smax = singular_values(p.gamma[j]).front();
        for (std::size_t c = 0; c < cl.center.size(); ++c) {
            bool g = false, o = false;
            double diam = 0.0;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    if (cl.id[a] == static_cast<int>(c) && cl.id[b] == static_cast<int>(c))
                        diam = std::max(diam, std::abs(tracked[j][a] - tracked[j][b]));
            for (std::size_t i = 0; i < d; ++i)
                if (cl.id[i] == static_cast<int>(c)) (labels[j][i] ? g : o) = true;
            if (!(g && o)) continue;
            if (diam > 1e-3 * std::max(1.0, std::abs(cl.center[c]))) continue;
            const Complex z = cl.center[c];
            const double thr = std::max(1e-7, 10.0 * opt.sep_tol) * std::max(1.0, std::abs(z));
            if (nullity(p.gamma[j], z, thr / std::max(1.0, smax)) < cl.size[c]) {
                std::ostringstream os;
                os << "eigenvalue groups collide at t = " << p.t[j];
                throw NotDecomposable(os.str());
            }
        }
    }
    {
        int run = 0;
        for (std::size_t j = 0; j < N; ++j) {
            run = regular[j] ? 0 : run + 1;
            if (run > opt.max_degenerate_run) throw NotDecomposable("eigenvalue groups overlap on a stretch of the path");
        }
    }

    auto subspaces = [&](std::size_t j, Matrix& vg, Matrix& vc) {
        std::vector<Complex> g, c;
        for (std::size_t i = 0; i < d; ++i) (labels[j][i] ? g : c).push_back(tracked[j][i]);
        // range of prod over the complement is the group subspace
        vg = spectral_range(p.gamma[j], c, r);
        vc = spectral_range(p.gamma[j], g, d - r);
    };

    std::vector<Matrix> X(N);
    std::vector<bool> have(N, false);
    {
        Matrix vg, vc;
        subspaces(s, vg, vc);
        std::vector<Vec> pairs;
        std::vector<Vec> cg, cc;
        if (opt.basis) {
            for (std::size_t j = 0; j < r; ++j) cg.push_back(project(vg, column(X0, j)));
            for (std::size_t j = r; j < d; ++j) cc.push_back(project(vc, column(X0, j)));
        } else {
            for (std::size_t j = 0; j < r; ++j) cg.push_back(column(vg, j));
            for (std::size_t j = 0; j < d - r; ++j) cc.push_back(column(vc, j));
        }
        initial_pairs(cg, pairs, opt.gram_tol);
        initial_pairs(cc, pairs, opt.gram_tol);
        X[s] = from_columns(pairs);
        have[s] = true;
    }
    auto carry = [&](std::size_t from, std::size_t to) {
        Matrix vg, vc;
        subspaces(to, vg, vc);
        std::vector<Vec> pairs;
        for (std::size_t j = 0; j < d; j += 2) {
            const Matrix& v = j < r ? vg : vc;
            push_pair(project(v, column(X[from], j)), project(v, column(X[from], j + 1)), pairs, opt.gram_tol, false);
        }
        X[to] = from_columns(pairs);
        have[to] = true;
    };
    {
        std::size_t last = s;
        for (std::size_t j = s + 1; j < N; ++j)
            if (regular[j]) {
                carry(last, j);
                last = j;
            }
        last = s;
        for (std::size_t j = s; j-- > 0;)
            if (regular[j]) {
                carry(last, j);
                last = j;
            }
    }
    // fill degenerate samples from neighbouring regular ones
    for (std::size_t j = 0; j < N; ++j) {
        if (have[j]) continue;
        std::size_t lo = j, hi = j;
        while (lo > 0 && !have[lo]) --lo;
        while (hi + 1 < N && !have[hi]) ++hi;
        Matrix guess;
        if (have[lo] && have[hi] && lo < j && j < hi) {
            const double u = static_cast<double>(j - lo) / static_cast<double>(hi - lo);
            guess = (1.0 - u) * X[lo] + u * X[hi];
        } else {
            const std::size_t a = have[lo] && lo < j ? lo : hi;
            const bool fwd = a > j;
            const std::size_t b = fwd ? a + 1 : a - 1;
            const double steps = fwd ? static_cast<double>(a - j) : static_cast<double>(j - a);
            if (b < N && have[b])
                guess = X[a] + steps * (X[a] - X[b]);
            else
                guess = X[a];
        }
        X[j] = resymplectify(guess, opt.gram_tol);
    }
    BlockDecomposition out = assemble(p, X, opt.k, false);
    for (std::size_t j = 0; j < N; ++j)
        if (!regular[j]) out.degenerate.push_back(j);
    return out;
}

PositivePath part_retime(const PositivePath& p, const TauSpec& tau, const DecomposeOptions& opt) {
    check_tau(tau);
    if (!tau.unit_end_slopes()) throw PathError("part_retime needs unit end slopes");
    if (std::abs(tau.t0() - p.t.front()) > 1e-12 || std::abs(tau.t1() - p.t.back()) > 1e-12)
        throw PathError("tau interval differs from the path interval");
    const BlockDecomposition dec = block_decompose(p, opt);
    const PathModel mu2 = interpolate(dec.second);
    const std::size_t N = p.size();

    auto P2_at = [&](double t) {
        const auto& tt = dec.second.t;
        if (t <= tt.front()) return dec.second.P.front();
        if (t >= tt.back()) return dec.second.P.back();
        const std::size_t i = static_cast<std::size_t>(std::upper_bound(tt.begin(), tt.end(), t) - tt.begin()) - 1;
        const double u = (t - tt[i]) / (tt[i + 1] - tt[i]);
        return Matrix((1.0 - u) * dec.second.P[i] + u * dec.second.P[i + 1]);
    };

    std::vector<Matrix> W(N);
    for (std::size_t j = 0; j < N; ++j) W[j] = symp_inverse(dec.X[j]);
    const Matrix J = standard_J(p.n);
    PositivePath q;
    q.n = p.n;
    q.t = p.t;
    for (std::size_t j = 0; j < N; ++j) {
        const double t = p.t[j], s = tau(t);
        const Matrix b2 = j == 0 ? dec.second.gamma.front() : (j + 1 == N ? dec.second.gamma.back() : mu2.gamma(s));
        const Matrix B = direct_sum(dec.first.gamma[j], b2);
        const Matrix PB = direct_sum(dec.first.P[j], tau.derivative(t) * P2_at(s));
        Matrix Yw(2 * p.n, 2 * p.n);
        if (!dec.constant_basis) {
            Matrix dW;
            if (j == 0)
                dW = (1.0 / (p.t[2] - p.t[0])) * (-3.0 * W[0] + 4.0 * W[1] - W[2]);
            else if (j + 1 == N)
                dW = (1.0 / (p.t[N - 1] - p.t[N - 3])) * (3.0 * W[N - 1] - 4.0 * W[N - 2] + W[N - 3]);
            else
                dW = (1.0 / (p.t[j + 1] - p.t[j - 1])) * (W[j + 1] - W[j - 1]);
            Yw = symmetrize(-1.0 * (J * dW * dec.X[j]));
        }
        q.gamma.push_back(dec.X[j] * B * W[j]);
        q.P.push_back(conjugated_generator(B, PB, W[j], Yw));
    }
    certify(q);
    if (!q.positive()) {
        std::size_t worst = 0;
        for (std::size_t j = 0; j < N; ++j)
            if (sym_min_eig(q.P[j]) < sym_min_eig(q.P[worst])) worst = j;
        throw PositivityViolation("recombined path is not positive", q.t[worst], sym_min_eig(q.P[worst]));
    }
    return q;
}

}  // namespace sympath

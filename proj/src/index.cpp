#include <cmath>
#include <numbers>
#include <sstream>

#include "sympath/index.hpp"

namespace sympath {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
    a = std::fmod(a + std::numbers::pi, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a - std::numbers::pi;
}

double polar_angle(const Matrix& m) { return std::atan2(m(1, 0) - m(0, 1), m(0, 0) + m(1, 1)); }

// Lifted angle along gamma; throws if a step reaches pi/2.
std::vector<double> lift(const std::vector<double>& raw) {
    std::vector<double> out(raw.size());
    if (raw.empty()) return out;
    out[0] = raw[0];
    for (std::size_t k = 1; k < raw.size(); ++k) {
        const double step = wrap(raw[k] - raw[k - 1]);
        if (std::abs(step) >= 0.5 * std::numbers::pi) {
            std::ostringstream os;
            os << "angle lift failed at sample " << k << " (step " << step << "); refine the grid";
            throw LiftError(os.str());
        }
        out[k] = out[k - 1] + step;
    }
    return out;
}

bool closes(const Matrix& a, const Matrix& b) { return max_abs_diff(a, b) <= 1e-8 * std::max(1.0, a.norm_max()); }

Complex complex_det(std::vector<Complex> a, std::size_t n) {
    Complex d = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        if (a[piv * n + c] == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            d = -d;
        }
        d *= a[c * n + c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const Complex f = a[r * n + c] / a[c * n + c];
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return d;
}

// Angle change along s -> S^s mu S^-s, s in [0, 1].
double conjugation_sweep(const Matrix& S, const Matrix& mu) {
    const Matrix L = sym_log(S);
    const int steps = 256;
    std::vector<double> raw;
    for (int k = 0; k <= steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        const Matrix P = mat_exp(s * L);
        raw.push_back(polar_angle(P * mu * inverse(P)));
    }
    const auto l = lift(raw);
    return l.back() - l.front();
}

void split_blocks(const PositivePath& loop, const DecomposeOptions& hint, std::vector<PositivePath>& blocks,
                  std::vector<Matrix>& closure) {
    if (loop.n == 1) {
        blocks.push_back(loop);
        closure.push_back(Matrix::identity(2));
    } else {
        PositivePath rest = loop;
        std::vector<Matrix> frame_start{Matrix::identity(2 * loop.n)}, frame_end{Matrix::identity(2 * loop.n)};
        std::size_t offset = 0;
        DecomposeOptions opt = hint;
        opt.k = 1;
        while (rest.n > 1) {
            const BlockDecomposition d = block_decompose(rest, opt);
            opt = DecomposeOptions{};
            const std::size_t dim = 2 * static_cast<std::size_t>(loop.n);
            Matrix lift_s = Matrix::identity(dim), lift_e = Matrix::identity(dim);
            lift_s.set_block(offset, offset, d.X.front());
            lift_e.set_block(offset, offset, d.X.back());
            frame_start.front() = frame_start.front() * lift_s;
            frame_end.front() = frame_end.front() * lift_e;
            blocks.push_back(d.first);
            rest = d.second;
            offset += 2;
        }
        blocks.push_back(rest);
        const Matrix C = symp_inverse(frame_start.front()) * frame_end.front();
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            double off = 0.0;
            for (std::size_t r = 0; r < C.rows(); ++r)
                for (std::size_t c = 2 * i; c < 2 * i + 2; ++c)
                    if (r / 2 != i) off = std::max(off, std::abs(C(r, c)));
            if (off > 1e-6 * std::max(1.0, C.norm_max()))
                throw NotDecomposable("blocks are exchanged around the loop");
            closure.push_back(C.block(2 * i, 2 * i, 2, 2));
        }
    }
}

}  // namespace

PolarSp2 sp2_polar(const Matrix& m) {
    if (m.rows() != 2 || m.cols() != 2) throw DimensionError("sp2_polar needs a 2x2 matrix");
    validate(m);
    PolarSp2 p;
    double th = polar_angle(m);
    if (th < 0) th += kTwoPi;
    if (th >= kTwoPi) th -= kTwoPi;
    p.theta = th;
    const Matrix S = m * rot2(-th);
    p.r = S(0, 0);
    p.z = 0.5 * (S(0, 1) + S(1, 0));
    return p;
}

Matrix reconstruct(const PolarSp2& p) {
    const Matrix S{{p.r, p.z}, {p.z, (1.0 + p.z * p.z) / p.r}};
    return S * rot2(p.theta);
}

WindingRecord sp2_winding(const std::vector<double>& t, const std::vector<Matrix>& gamma) {
    if (gamma.size() < 2 || t.size() != gamma.size()) throw PathError("winding needs matching samples");
    for (const auto& g : gamma)
        if (g.rows() != 2 || g.cols() != 2) throw DimensionError("sp2_winding needs a path in Sp(2)");
    WindingRecord w;
    w.t = t;
    std::vector<double> raw;
    for (const auto& g : gamma) raw.push_back(polar_angle(g));
    w.lifted_theta = lift(raw);
    w.winding = (w.lifted_theta.back() - w.lifted_theta.front()) / kTwoPi;
    w.increasing = true;
    for (std::size_t k = 1; k < raw.size(); ++k)
        if (!(w.lifted_theta[k] > w.lifted_theta[k - 1])) w.increasing = false;
    w.loop = closes(gamma.front(), gamma.back());
    if (w.loop) w.index = 2 * static_cast<int>(std::lround(w.winding));
    return w;
}

WindingRecord sp2_winding(const PositivePath& p) {
    WindingRecord w = sp2_winding(p.t, p.gamma);
    if (p.positive() && !w.increasing)
        throw NumericalError("polar angle is not strictly increasing along a certified positive path");
    return w;
}

double unitary_winding(const std::vector<Matrix>& gamma) {
    if (gamma.empty()) return 0.0;
    const std::size_t n = static_cast<std::size_t>(half_dim(gamma.front()));
    std::vector<double> raw;
    for (const auto& g : gamma) {
        const Matrix U = g * sym_inv_sqrt(symmetrize(g.transpose() * g));
        std::vector<Complex> u(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) u[a * n + b] = Complex(U(2 * a, 2 * b), U(2 * a + 1, 2 * b));
        raw.push_back(std::arg(complex_det(u, n)));
    }
    const auto l = lift(raw);
    return (l.back() - l.front()) / kTwoPi;
}

LoopIndex loop_index_report(const PositivePath& loop, const DecomposeOptions& hint) {
    if (loop.size() < 3) throw PathError("loop needs at least three samples");
    if (!closes(loop.gamma.front(), loop.gamma.back())) throw PathError("path is not a loop");
    LoopIndex out;
    const double det_w = unitary_winding(loop.gamma);
    out.determinant_index = 2 * static_cast<int>(std::lround(det_w));

    std::vector<PositivePath> blocks;
    std::vector<Matrix> closure;  // block conjugating the end value back to the start value
    try {
        split_blocks(loop, hint, blocks, closure);
    } catch (const NotDecomposable& e) {
        // identical blocks never separate; the determinant winding still applies
        out.index = out.determinant_index;
        out.method = "determinant";
        out.note = e.what();
        return out;
    }

    int total = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const WindingRecord w = sp2_winding(blocks[i].t, blocks[i].gamma);
        double turns = w.winding;
        const Matrix& Ci = closure[i];
        const Matrix S = symmetrize(Ci * rot2(-polar_angle(Ci)));
        turns += conjugation_sweep(S, rot2(polar_angle(Ci)) * blocks[i].gamma.back() * rot2(-polar_angle(Ci))) / kTwoPi;
        const double k = std::round(turns);
        if (std::abs(turns - k) > 1e-3) {
            std::ostringstream os;
            os << "block " << i << " winding " << turns << " is not an integer";
            throw NumericalError(os.str());
        }
        out.block_windings.push_back(turns);
        total += 2 * static_cast<int>(k);
    }
    out.index = total;
    if (out.index != out.determinant_index) {
        std::ostringstream os;
        os << "block index " << out.index << " disagrees with determinant index " << out.determinant_index;
        throw NumericalError(os.str());
    }
    return out;
}

int loop_index(const PositivePath& loop, const DecomposeOptions& hint) { return loop_index_report(loop, hint).index; }

Realization realize_index(int n, int m, const Tolerances& tol) {
    if (n < 1 || n > 4) throw DimensionError("realize_index supports n = 1..4");
    if (m < 1) throw std::invalid_argument("realize_index needs m >= 1");
    Realization r;
    if (m < n) {
        std::ostringstream os;
        os << "winding " << m << " is below n = " << n
           << ": every Sp(2) block of a positive loop carries winding at least 1";
        r.explanation = os.str();
        return r;
    }
    r.realizable = true;
    r.ks.assign(static_cast<std::size_t>(n), 1);
    r.ks.front() = m - n + 1;
    r.loop = sample(rotation_loop(r.ks), tol);
    if (!r.loop.positive()) throw PositivityViolation("rotation loop failed certification", 0.0, r.loop.min_eig_P);
    r.index = loop_index(r.loop);
    std::ostringstream os;
    os << "diagonal rotation loop with windings";
    for (int k : r.ks) os << " " << k;
    r.explanation = os.str();
    return r;
}

}  // namespace sympath

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sympath/config.hpp"
#include "sympath/linalg.hpp"
#include "sympath/symplectic.hpp"

namespace sympath {

class PathError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PositivityViolation : public NumericalError {
public:
    PositivityViolation(const std::string& what, double t, double min_eig)
        : NumericalError(what), t(t), min_eig(min_eig) {}
    double t;
    double min_eig;
};

class NotDecomposable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Continuous path with gamma' = J P gamma on [t0, t1].
struct PathModel {
    int n = 0;
    double t0 = 0.0, t1 = 1.0;
    Matrix gamma0;
    std::function<Matrix(double)> P;
    std::function<Matrix(double)> gamma;  // empty if only the generator is known
    std::string kind;

    bool closed_form() const { return static_cast<bool>(gamma); }
};

// Sampled path with its generator and a positivity certificate.
struct PositivePath {
    int n = 0;
    std::vector<double> t;
    std::vector<Matrix> gamma;
    std::vector<Matrix> P;
    double min_eig_P = 0.0;
    double symp_defect = 0.0;
    double fd_constant = 0.0;  // max midpoint residual / h^2

    bool positive() const { return min_eig_P > 0.0; }
    std::size_t size() const { return t.size(); }
};

// Piecewise cubic Hermite reparametrization.
struct TauSpec {
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<double> slopes;

    static TauSpec identity(double t0, double t1);
    // Monotone cubic with tau(a) = b and unit end slopes.
    static TauSpec through(double t0, double t1, double a, double b);
    double t0() const { return knots.front(); }
    double t1() const { return knots.back(); }
    double operator()(double t) const;
    double derivative(double t) const;
    bool unit_end_slopes(double tol = 1e-12) const;
};

// Throws PathError unless tau is a strictly increasing self-map of [t0, t1].
void check_tau(const TauSpec& tau);

struct PathSpec {
    std::string kind;  // samples, rotation_loop, alpha_family, join, product, conjugated, retimed, concat
    double t0 = 0.0, t1 = 1.0;
    std::vector<int> ks;                 // rotation_loop
    NormalFormSpec base;                 // alpha_family
    Matrix A, B;                         // join endpoints
    int k = 0;                           // join twist, 0 = auto
    Matrix gamma0;                       // samples
    std::vector<double> knot_t;          // samples
    std::vector<Matrix> knot_P;          // samples
    Matrix X0, Y;                        // conjugated: X(t) = exp((t - t0) J Y) X0
    TauSpec tau;                         // retimed
    double window = 0.05;                // concat
    std::vector<PathSpec> children;
};

PathModel build(const PathSpec& spec, const Tolerances& tol = default_tolerances());

// Grid with `intervals` equal steps.
std::vector<double> uniform_grid(double t0, double t1, int intervals);
int default_intervals(const PathModel& m, const Tolerances& tol = default_tolerances());

PositivePath integrate(const PathModel& m, int intervals, const Tolerances& tol = default_tolerances());
// Closed form when available, otherwise integrate.
PositivePath sample(const PathModel& m, int intervals, const Tolerances& tol = default_tolerances());
PositivePath sample(const PathModel& m, const Tolerances& tol = default_tolerances());
// Fills min_eig_P, symp_defect and fd_constant.
void certify(PositivePath& p);
// Segmentwise geodesic interpolation.  P is constant on each segment.
PathModel interpolate(const PositivePath& p);

struct PositivityCertificate {
    bool ok = false;
    double min_eig = 0.0;
    double worst_t = 0.0;
    double max_asymmetry = 0.0;
    std::string reason;
};

// Recomputes P = -J gamma' gamma^{-1} from finite differences.
PositivityCertificate verify_positive(const PositivePath& p, double asym_tol = 1e-6);

// Models
PathModel constant_generator(const Matrix& S, const Matrix& gamma0, double t0 = 0.0, double t1 = 1.0);
PathModel rotation_loop(const std::vector<int>& ks);
PathModel alpha_path(const Matrix& base, double a0, double a1);
PathModel random_positive_path(int n, Rng& rng);
PathModel model_product(const PathModel& p1, const PathModel& p2);
PathModel model_rotation(const PathModel& p, double theta);
PathModel reverse(const PathModel& p);
// t -> gamma(t0 + t1 - t)^{-1}; positive whenever gamma is.
PathModel reverse_inverse(const PathModel& p);
PathModel retime(const PathModel& p, const TauSpec& tau);
// Slice s of H(s, t) = gamma((1 - s) t + s tau(t)).
PathModel homotopy_slice(const PathModel& p, const TauSpec& tau, double s);

PositivePath product(const PositivePath& p1, const PositivePath& p2);
PositivePath perturb_rotation(const PositivePath& p, double theta);

struct ThetaInterval {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
};
// Admissible theta for perturb_rotation; the upper side is unbounded.
ThetaInterval find_epsilon(const PositivePath& p, double resolution = 1e-10);

struct XFamily {
    std::function<Matrix(double)> X;
    std::function<Matrix(double)> Y;  // X' = J Y X
};
XFamily exp_family(const Matrix& Y, const Matrix& X0, double t0 = 0.0);

struct ConjugatedPath {
    PositivePath path;
    bool positive = false;
    double generator_residual = 0.0;
};
ConjugatedPath conjugate_path(const PositivePath& p, const XFamily& x, double gen_tol = 1e-6);
// Generator of X^{-1} gamma X from the conjugation formula.
Matrix conjugated_generator(const Matrix& gamma, const Matrix& P, const Matrix& X, const Matrix& Y);

struct JoinResult {
    PathModel model;
    PositivePath path;
    int k = 0;
};
PathModel join_model(const Matrix& A, const Matrix& B, int k);
JoinResult join(const Matrix& A, const Matrix& B, int k = 0, const Tolerances& tol = default_tolerances());

struct ConcatResult {
    PathModel model;
    PositivePath path;
    double c0_distance = 0.0;
    double derivative_jump = 0.0;
};
ConcatResult smooth_concat(const PathModel& p1, const PathModel& p2, double window,
                           const Tolerances& tol = default_tolerances());

struct DecomposeOptions {
    int k = 1;                       // half-dimension of the first block
    int pair_index = 0;              // which eigenvalue pair seeds the first block
    std::optional<Matrix> basis;     // constant symplectic basis tried first
    double sep_tol = 1e-5;
    int max_degenerate_run = 32;
    double gram_tol = 1e-6;
};

struct BlockDecomposition {
    PositivePath first;
    PositivePath second;
    std::vector<Matrix> X;  // gamma = X diag(first, second) X^{-1}
    std::vector<std::size_t> degenerate;
    double offdiag_residual = 0.0;
    double spectrum_error = 0.0;
    bool constant_basis = false;
};
BlockDecomposition block_decompose(const PositivePath& p, const DecomposeOptions& opt = DecomposeOptions{});
// Retimes the second block and recombines.
PositivePath part_retime(const PositivePath& p, const TauSpec& tau, const DecomposeOptions& opt = DecomposeOptions{});

// Helpers shared with other modules.
Matrix expm(const Matrix& a);
Matrix generator_of(const Matrix& gamma, const Matrix& dgamma);

}  // namespace sympath

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sympath/paths.hpp"
#include "sympath/spectra.hpp"

namespace sympath {

enum class RootKind { SignChange, Touch };

struct DeltaRoot {
    double t = 0.0;
    RootKind kind = RootKind::SignChange;
    double before = 0.0;  // sign of the function just before t
    double after = 0.0;
};

struct DeltaTrace {
    std::vector<double> t;
    std::vector<double> delta;
    std::vector<DeltaRoot> roots;
};

using ScalarOfMatrix = double (*)(const Matrix&);

// Samples f(gamma(t)) on the grid and refines sign changes and touches.
DeltaTrace scalar_trace(const PathModel& m, ScalarOfMatrix f, int intervals, double resolution = 1e-10);
DeltaTrace delta_trace(const PathModel& m, int intervals, double resolution = 1e-10);
DeltaTrace delta_trace(const PositivePath& p, double resolution = 1e-10);

enum class SignChange { PlusToMinus, MinusToPlus, Touch };
std::string sign_change_name(SignChange s);

struct CollisionEvent {
    double t_star = 0.0;
    Location location = Location::U;
    double location_value = 0.0;  // angle on U, value on R, or +-1
    int multiplicity = 0;
    int geometric = 0;
    std::string stratum;          // at t_star
    std::string stratum_before;
    std::string stratum_after;
    SignChange delta_sign_change = SignChange::Touch;
    std::string source;           // delta, d_plus_one or d_minus_one
    std::optional<bool> adjacent;  // empty if the stratum is outside the table
};

// Zero of a detector at which the groups stay diagonalizable.
struct Pass {
    double t = 0.0;
    std::string stratum;
    std::string source;
};

struct CollisionReport {
    double t0 = 0.0, t1 = 1.0;
    std::vector<CollisionEvent> events;
    std::vector<Pass> passes;
    std::vector<std::string> warnings;
};

struct CollisionOptions {
    int intervals = 0;  // 0 = default grid
    double resolution = 1e-10;
    double side_offset = 1e-4;  // relative to the interval length
};

CollisionReport find_collisions(const PathModel& m, const CollisionOptions& opt = CollisionOptions{});
CollisionReport find_collisions(const PositivePath& p, const CollisionOptions& opt = CollisionOptions{});

// Base stratum name with the B_U sign refinement dropped.
std::string stratum_family(const std::string& name);
// Codimension-one adjacency; empty if the stratum is outside the table.
std::optional<bool> strata_adjacent(const std::string& event, const std::string& a, const std::string& b, int n);

struct AlphaFamily {
    Matrix base;
    std::vector<double> alpha;
    std::vector<Matrix> values;
};

// M_alpha = base diag(R(alpha), ..., R(alpha)) on m equally spaced alphas.
AlphaFamily alpha_family(const NormalFormSpec& base, double alpha0, double alpha1, int m);

double delta_N2_formula(double theta, double b1, double b2, double b3, double alpha);
double delta_M2_formula(double lambda, double c1, double c2, double alpha, double c2_sign = 1.0);

struct Monomial {
    double coeff;
    int beta, l1, l2;
};

// Expanded Kocak discriminant as a list of monomials.
const std::vector<Monomial>& kocak_terms();
double evaluate(const std::vector<Monomial>& poly, double beta, double l1, double l2);
std::vector<Monomial> differentiate(const std::vector<Monomial>& poly, int var);  // 1 = l1, 2 = l2

struct KocakValue {
    double expanded = 0.0;
    double factored = 0.0;
    double residual = 0.0;
};
KocakValue kocak_discriminant(double beta, double l1, double l2);
// Infinitesimally symplectic deformation K(beta; l1, l2).
Matrix kocak_matrix(double beta, double l1, double l2);

enum class ConstraintStatus { Satisfied, Violated, Inconclusive };
std::string constraint_name(ConstraintStatus s);

struct ConstraintCheck {
    std::size_t event = 0;
    std::string clause;  // exit_U (leaves O_U into C) or enter_U (leaves C into O_U)
    ConstraintStatus status = ConstraintStatus::Inconclusive;
    std::string detail;
};

struct ConstraintReport {
    std::vector<ConstraintCheck> checks;
    bool satisfied() const;
};

ConstraintReport check_collision_constraints(const CollisionReport& r, int n);

enum class ElementaryKind { CollideOut, CollideIn, TwoDoubleCollisions };
std::string elementary_name(ElementaryKind k);

struct ElementarySegment {
    ElementaryKind kind;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t first_event = 0;
};

std::vector<ElementarySegment> detect_elementary(const CollisionReport& r);

}  // namespace sympath

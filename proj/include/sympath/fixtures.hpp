#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sympath/collisions.hpp"
#include "sympath/index.hpp"
#include "sympath/paths.hpp"

namespace sympath {

struct FixtureCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

struct FixtureResult {
    std::string name;
    std::vector<FixtureCheck> checks;
    bool passed() const;
};

// Joins from D(1/2) to D(2) each meet the unit circle.
FixtureResult fixture_hyperbolic_join_witness(const std::vector<int>& ks = {1, 3});

// diag(e^{pi J t} D(2), e^{pi J t} D(3)) ends at minus its start.
PositivePath half_turn_pair_path();
FixtureResult fixture_half_turn_pair();

struct ConeWitness {
    Matrix X;       // symplectic basis splitting A into contracting and expanding parts
    Matrix Z;       // quadratic form in that basis
    Matrix Y;       // X^{-T} Z X^{-1}
    Matrix D;       // A^{-T} Y A^{-1} - Y
    double min_eig = 0.0;
    std::optional<double> k;  // Q + k D > 0 when Q is given
};

ConeWitness fixture_cone_surjectivity(const Matrix& A, const std::optional<Matrix>& Q = std::nullopt);

struct ElementaryPath {
    PathModel model;
    PositivePath path;
    double t_collision = 0.0;  // double collision on U before smoothing
    double c0_distance = 0.0;
    double derivative_jump = 0.0;
};

// Positive Sp(4) path O_UR -> B_U,1 -> O_U -> B_U -> O_C.
ElementaryPath fixture_elementary_collide_out(double theta_collision, double theta_other, double lambda_start,
                                              double eps = 0.05, double window = 0.02);
// Time-reversed inverse of the collide-out path.
ElementaryPath fixture_elementary_collide_in(double theta_collision, double theta_other, double lambda_start);

// Sp(6) path C N3 R(alpha) perturbed off the cusp to cross B_U2 twice.
ElementaryPath fixture_two_double_collisions(double theta = 1.2, double eps = 0.05, std::uint64_t seed = 8);

struct FixtureEntry {
    std::string name;
    std::string description;
    std::function<FixtureResult()> run;
};

const std::vector<FixtureEntry>& fixture_registry();
FixtureResult run_fixture(const std::string& name);

}  // namespace sympath

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sympath/paths.hpp"

namespace sympath {

class LiftError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// M = [[r, z], [z, (1 + z^2) / r]] R(theta).
struct PolarSp2 {
    double r = 1.0;
    double z = 0.0;
    double theta = 0.0;  // in [0, 2 pi)
};

PolarSp2 sp2_polar(const Matrix& m);
Matrix reconstruct(const PolarSp2& p);

struct WindingRecord {
    std::vector<double> t;
    std::vector<double> lifted_theta;
    double winding = 0.0;
    bool loop = false;
    bool increasing = false;
    std::optional<int> index;  // 2 * winding for loops
};

WindingRecord sp2_winding(const std::vector<double>& t, const std::vector<Matrix>& gamma);
// Also asserts strict increase when p carries a positivity certificate.
WindingRecord sp2_winding(const PositivePath& p);

// Degree of det u(t) for the unitary polar factor; winding of a loop in Sp(2n).
double unitary_winding(const std::vector<Matrix>& gamma);

struct LoopIndex {
    int index = 0;
    std::vector<double> block_windings;
    int determinant_index = 0;
    std::string method = "blocks";  // or "determinant" when the loop does not split
    std::string note;
};

LoopIndex loop_index_report(const PositivePath& loop, const DecomposeOptions& hint = DecomposeOptions{});
int loop_index(const PositivePath& loop, const DecomposeOptions& hint = DecomposeOptions{});

struct Realization {
    bool realizable = false;
    std::vector<int> ks;
    PositivePath loop;
    int index = 0;
    std::string explanation;
};

Realization realize_index(int n, int m, const Tolerances& tol = default_tolerances());

}  // namespace sympath

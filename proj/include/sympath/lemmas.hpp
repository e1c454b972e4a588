#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sympath/collisions.hpp"
#include "sympath/index.hpp"

namespace sympath {

struct LemmaReport {
    std::string lemma;
    int trials = 0;
    double worst_residual = 0.0;
    bool passed = false;
    std::vector<std::string> failures;  // parameters of failing instances, full precision
    std::vector<std::string> notes;
};

// n2-family, m2-unit-family, m2-family, n3-family, product, rotation-perturbation,
// conjugation, join, cusp, sp2-angle
const std::vector<std::string>& lemma_names();

LemmaReport verify_lemma(const std::string& name, int trials, std::uint64_t seed);
// Accepts a single name or "all".
std::vector<LemmaReport> verify_lemmas(const std::string& name, int trials, std::uint64_t seed);

// Delta from eigenvalues paired into mu = lambda + 1/lambda; Sp(4) only.
double delta_from_eigenvalues(const Matrix& m);

}  // namespace sympath

#pragma once

namespace sympath {

// Default numerical tolerances shared by all modules.
struct Tolerances {
    double symp = 1e-9;          // max-entry bound on M^T J M - J
    double det = 1e-8;           // |det M - 1|
    double pairing_rel = 1e-6;   // lambda -> 1/lambda pairing, relative
    double unit_band = 1e-7;     // ||lambda| - 1|
    double real_band = 1e-7;     // |Im lambda|
    double pm1_band = 1e-6;      // |lambda -+ 1|
    double rank_rel = 1e-7;      // singular value threshold relative to ||M||
    double eig_residual = 1e-9;  // |p(lambda)| relative to max(1, ||M||^n)
    double sym_eig_rel = 1e-10;  // Jacobi accuracy relative to ||S||
    double exp_max_norm = 50.0;  // mat_exp refuses larger arguments
    double root_resolution = 1e-10;  // bisection resolution in t
    double junction = 1e-8;      // smooth_concat endpoint mismatch
    int samples_per_unit = 2048;
    int join_k_max = 64;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

}  // namespace sympath

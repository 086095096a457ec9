#pragma once

#include "asi/sparse.hpp"

namespace asi {

struct EigenPairs {
    VecR values;  // ascending
    MatR vectors; // columns, M-orthonormal, deterministic sign
};

struct EigenOptions {
    // Per pair, verified on the shift-inverted operator in the M-norm:
    // |K^-1 M v - theta v|_M <= tol * theta + 1e-13 * theta_max, where
    // theta = 1/lambda. The first term bounds the relative eigenvalue error by
    // tol; the second is the attainable accuracy floor of repeated solves
    // through K once the pencil spectrum spans many decades, and costs at most
    // ~1e-13 * lambda / lambda_min extra relative error on the pairs it hits.
    double tol = 1e-9;
    int max_steps_per_pair = 300;
    // Factor (scale * K) instead of K; eigenvalues are mapped back. Useful when
    // K carries a huge uniform scale.
    double operator_scale = 1.0;
};

// k smallest eigenpairs of the symmetric positive definite pencil K v = lambda M v,
// via shift-invert (sigma = 0) Lanczos with full M-reorthogonalization.
EigenPairs smallest_eigenpairs(const SparseReal& K, const SparseReal& M, int k,
                               const EigenOptions& opts = {});

}  // namespace asi

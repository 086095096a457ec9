#pragma once

#include "asi/sparse.hpp"

namespace asi {

struct QcqpResult {
    VecR beta;
    double nu = 0.0;  // KKT multiplier of the ball constraint
};

// Minimize beta' A beta subject to |beta - gamma| <= r, where A is symmetric
// positive semidefinite. Returns the minimizer (min-norm one when the optimum
// is degenerate) together with the multiplier nu satisfying
// (A + nu I) beta = nu gamma.
QcqpResult qcqp_ball(const MatR& A, const VecR& gamma, double r);

}  // namespace asi

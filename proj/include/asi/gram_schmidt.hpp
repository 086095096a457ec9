#pragma once

#include <vector>

#include "asi/sparse.hpp"

namespace asi {

struct MgsResult {
    std::vector<VecR> basis;  // M-orthonormal, input order preserved
    int dropped = 0;
};

// Modified Gram-Schmidt in the M-weighted inner product. A vector is dropped
// when its residual after projection falls below drop_tol times its original
// M-norm (rank-revealing). Two projection passes keep pairwise inner products
// at roundoff level.
MgsResult modified_gram_schmidt(const std::vector<VecR>& vectors, const SparseReal& M,
                                double drop_tol = 1e-10);

}  // namespace asi

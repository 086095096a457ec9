#include "asi/gram_schmidt.hpp"

#include <cmath>

#include "asi/errors.hpp"

namespace asi {

MgsResult modified_gram_schmidt(const std::vector<VecR>& vectors, const SparseReal& M,
                                double drop_tol) {
    MgsResult result;
    if (vectors.empty()) return result;
    const auto n = vectors.front().size();

    // Cache M * u per kept vector so each MGS update is two axpys instead of a
    // fresh sparse product.
    std::vector<VecR> basis_m;

    for (const VecR& v : vectors) {
        if (v.size() != n) throw ConfigError("modified_gram_schmidt: inconsistent vector sizes");
        VecR y = M * v;
        const double original = std::sqrt(std::max(0.0, v.dot(y)));
        if (original <= 0.0) {
            ++result.dropped;
            continue;
        }
        VecR w = v;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < result.basis.size(); ++i) {
                const double c = result.basis[i].dot(y);
                w -= c * result.basis[i];
                y -= c * basis_m[i];
            }
        }
        const double residual = std::sqrt(std::max(0.0, w.dot(y)));
        if (residual < drop_tol * original) {
            ++result.dropped;
        } else {
            result.basis.push_back(w / residual);
            basis_m.push_back(y / residual);
        }
    }
    return result;
}

}  // namespace asi

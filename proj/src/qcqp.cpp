#include "asi/qcqp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "asi/errors.hpp"

namespace asi {

namespace {

// Squared distance |beta(nu) - gamma|^2 restricted to the range of A, in the
// eigenbasis: beta_i(nu) = nu g_i / (a_i + nu), so the gap is a_i g_i / (a_i + nu).
double range_gap_sq(const VecR& a, const VecR& g, const std::vector<int>& range, double nu) {
    double s = 0.0;
    for (int i : range) {
        const double t = a[i] * g[i] / (a[i] + nu);
        s += t * t;
    }
    return s;
}

}  // namespace

QcqpResult qcqp_ball(const MatR& A, const VecR& gamma, double r) {
    const auto n = gamma.size();
    if (A.rows() != n || A.cols() != n) throw ConfigError("qcqp_ball: dimension mismatch");
    if (!(r >= 0.0)) throw ConfigError("qcqp_ball: radius must be nonnegative");

    QcqpResult result;
    result.beta = VecR::Zero(n);
    if (gamma.norm() <= r) return result;  // beta = 0 is feasible and optimal

    Eigen::SelfAdjointEigenSolver<MatR> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("qcqp_ball: eigendecomposition failed");
    VecR a = es.eigenvalues();
    const MatR& V = es.eigenvectors();
    const double a_max = a.maxCoeff();
    const double null_tol = 1e-13 * std::max(a_max, 1.0);

    std::vector<int> range_idx, null_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
        a[i] = std::max(a[i], 0.0);
        if (a[i] <= null_tol) {
            a[i] = 0.0;
            null_idx.push_back(static_cast<int>(i));
        } else {
            range_idx.push_back(static_cast<int>(i));
        }
    }
    const VecR g = V.transpose() * gamma;

    double range_dist_sq = 0.0;  // |P_range gamma|^2, the gap at nu -> infinity
    for (int i : range_idx) range_dist_sq += g[i] * g[i];

    VecR beta_eig = VecR::Zero(n);
    if (range_dist_sq <= r * r) {
        // The affine set of unconstrained minimizers (null space of A) meets the
        // ball: objective 0 is attainable with nu = 0. Pick the minimum-norm
        // feasible null vector.
        double null_norm_sq = 0.0;
        for (int i : null_idx) null_norm_sq += g[i] * g[i];
        const double null_norm = std::sqrt(null_norm_sq);
        const double slack = std::sqrt(std::max(0.0, r * r - range_dist_sq));
        const double shrink = null_norm > 0.0 ? std::max(0.0, 1.0 - slack / null_norm) : 0.0;
        for (int i : null_idx) beta_eig[i] = shrink * g[i];
        result.beta = V * beta_eig;
        result.nu = 0.0;
        return result;
    }

    // Active constraint with nu > 0: solve the secular equation
    // |beta(nu) - gamma| = r. The gap is monotonically decreasing in nu from
    // |P_range gamma| > r down to 0, so the root is unique. Safeguarded Newton
    // with a bisection fallback on the bracket.
    double lo = 0.0;                                           // gap(lo) > r
    double agn = 0.0;                                          // |diag(a) g| over range
    for (int i : range_idx) agn += a[i] * g[i] * a[i] * g[i];
    agn = std::sqrt(agn);
    double hi = std::max(agn / r, null_tol + 1e-300);
    while (range_gap_sq(a, g, range_idx, hi) > r * r) hi *= 2.0;

    double nu = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double s = range_gap_sq(a, g, range_idx, nu);
        const double gap = std::sqrt(s);
        const double f = gap - r;
        if (std::abs(f) <= 1e-13 * r) break;
        if (f > 0.0) lo = nu; else hi = nu;
        // f'(nu) = -sum a_i^2 g_i^2 / (a_i + nu)^3 / gap
        double ds = 0.0;
        for (int i : range_idx) {
            const double t = a[i] * g[i];
            ds += t * t / std::pow(a[i] + nu, 3);
        }
        const double fp = -ds / gap;
        double next = nu - f / fp;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * (1.0 + nu)) break;
        nu = next;
    }

    for (int i : range_idx) beta_eig[i] = nu * g[i] / (a[i] + nu);
    for (int i : null_idx) beta_eig[i] = g[i];  // nu/(0+nu) = 1
    result.beta = V * beta_eig;
    result.nu = nu;
    return result;
}

}  // namespace asi

#include "asi/eigensolver.hpp"

#ifdef ASI_EIG_DEBUG
#include <cstdio>
#endif

#include <algorithm>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "asi/errors.hpp"

namespace asi {

namespace {

VecR gaussian_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    VecR v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

// Largest-magnitude entry made positive so eigenvector signs are reproducible.
void fix_sign(Eigen::Ref<VecR> v) {
    int imax = 0;
    double amax = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > amax) {
            amax = a;
            imax = i;
        }
    }
    if (v[imax] < 0.0) v = -v;
}

struct Locked {
    std::vector<double> values;
    std::vector<VecR> vectors;
    int count() const { return static_cast<int>(values.size()); }
};

}  // namespace

EigenPairs smallest_eigenpairs(const SparseReal& K, const SparseReal& M, int k,
                               const EigenOptions& opts) {
    const int n = static_cast<int>(K.rows());
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw ConfigError("smallest_eigenpairs: K and M must be square with equal size");
    if (k < 1 || k > n) throw ConfigError("smallest_eigenpairs: need 1 <= k <= dimension");

    SparseReal Ks = K;
    if (opts.operator_scale != 1.0) Ks = opts.operator_scale * K;
    SpdSolver kinv(Ks);  // throws on indefinite K

    const double scale = opts.operator_scale;
    const long cap = std::max<long>(static_cast<long>(opts.max_steps_per_pair) * k, 200);
    std::mt19937_64 rng(0x517e9a7bd2c8f3ULL);

    Locked locked;
    long total_steps = 0;
    std::vector<double> last_residuals;

    // Orthogonalize w against the locked set and the sweep basis (M-inner product).
    const auto reorthogonalize = [&](VecR& w, const MatR& Q, int cols) {
        for (int pass = 0; pass < 2; ++pass) {
            VecR y = M * w;
            for (const auto& u : locked.vectors) w -= (u.dot(y)) * u;
            if (cols > 0) {
                y = M * w;
                w -= Q.leftCols(cols) * (Q.leftCols(cols).transpose() * y);
            }
        }
    };

    while (locked.count() < k && total_steps < cap) {
        const int want = k - locked.count();
        const int complement_dim = n - locked.count();

        // Fresh start vector in the complement of the locked subspace.
        VecR q = gaussian_vector(n, rng);
        {
            MatR empty(n, 0);
            reorthogonalize(q, empty, 0);
        }
        double qn = std::sqrt(q.dot(M * q));
        if (qn <= 0.0) break;
        q /= qn;

        int alloc = std::min(complement_dim, std::max(2 * want + 64, 96));
        MatR Q(n, alloc);
        Q.col(0) = q;
        std::vector<double> alpha, beta;
        VecR q_prev = VecR::Zero(n);
        int j = 0;
        bool sweep_done = false;

        while (!sweep_done) {
            const VecR z = M * Q.col(j);
            VecR w = kinv.solve(z);
            const double a = w.dot(z);
            alpha.push_back(a);
            w -= a * Q.col(j);
            if (j > 0) w -= beta.back() * q_prev;
            reorthogonalize(w, Q, j + 1);
            double b = std::sqrt(std::max(0.0, w.dot(M * w)));
            ++total_steps;

            const bool breakdown = b <= 1e-13 * (std::abs(a) + 1.0);
            const bool exhausted = j + 1 >= complement_dim;
            const bool cap_hit = total_steps >= cap;
            const bool forced = breakdown || exhausted || cap_hit;
            const bool check_now = forced || ((j + 1) % 8 == 0 && j + 1 >= want);

            if (check_now) {
                const int m = j + 1;
                Eigen::Map<const VecR> da(alpha.data(), m);
                VecR db = VecR::Zero(std::max(0, m - 1));
                for (int i = 0; i + 1 < m; ++i) db[i] = beta[i];
                Eigen::SelfAdjointEigenSolver<MatR> tri;
                tri.computeFromTridiagonal(da, db);
                const VecR& theta = tri.eigenvalues();  // ascending
                const MatR& S = tri.eigenvectors();

                // Acceptance threshold per pair: relative to its own theta, but
                // floored at machine noise relative to the largest theta of the
                // pencil -- solves through K cannot resolve the small-theta end
                // beyond that floor when the spectrum spans many decades.
                double theta_top = theta[m - 1];
                for (double lv : locked.values) theta_top = std::max(theta_top, 1.0 / (scale * lv));
                const double eps_floor = 1e-13 * theta_top;
                const auto threshold = [&](double th) { return opts.tol * std::max(th, 1e-300) + eps_floor; };

                // Candidates: largest theta = smallest lambda still unlocked.
                // The sweep ends only once every wanted pair passes the cheap
                // bound (or it cannot continue); locking mid-sweep would throw
                // away the Krylov space that is about to converge the rest.
                const int ncand = std::min(want, m);
                bool all_cheap_ok = true;
                for (int c = 0; c < ncand && !breakdown; ++c) {
                    const int idx = m - 1 - c;
                    const double bound = b * std::abs(S(m - 1, idx));
                    if (bound > threshold(theta[idx])) {
                        all_cheap_ok = false;
                        break;
                    }
                }
#ifdef ASI_EIG_DEBUG
                if (m % 8 == 0 || forced) {
                    std::fprintf(stderr,
                                 "m=%d a=%.3e b=%.3e bk=%d ex=%d cap=%d total=%ld theta:", m,
                                 a, b, int(breakdown), int(exhausted), int(cap_hit), total_steps);
                    for (int c = 0; c < std::min(6, m); ++c)
                        std::fprintf(stderr, " %.6e(%.1e)", theta[m - 1 - c],
                                     b * std::abs(S(m - 1, m - 1 - c)));
                    std::fprintf(stderr, "\n");
                }
#endif
                if ((all_cheap_ok && ncand == want) || forced) {
                    last_residuals.clear();
                    for (int c = 0; c < ncand; ++c) {
                        const int idx = m - 1 - c;
                        if (theta[idx] <= 0.0) break;
                        VecR v = Q.leftCols(m) * S.col(idx);
                        // True residual of the inverted operator in the M-norm;
                        // bounds the relative eigenvalue error by tol.
                        const VecR r = kinv.solve(VecR(M * v)) - theta[idx] * v;
                        const double resid = std::sqrt(std::max(0.0, r.dot(M * r)));
                        last_residuals.push_back(resid / theta[idx]);
#ifdef ASI_EIG_DEBUG
                        std::fprintf(stderr, "  verify c=%d theta=%.6e resid=%.3e thresh=%.3e\n",
                                     c, theta[idx], resid, threshold(theta[idx]));
#endif
                        if (resid <= threshold(theta[idx])) {
                            const double vn = std::sqrt(v.dot(M * v));
                            locked.values.push_back(1.0 / (scale * theta[idx]));
                            locked.vectors.push_back(v / vn);
                        } else {
                            break;  // lock only a converged prefix to keep ordering
                        }
                    }
                    sweep_done = true;
                }
            }

            if (!sweep_done) {
                if (breakdown || j + 1 >= complement_dim) {
                    sweep_done = true;
                } else {
                    if (j + 1 >= alloc) {
                        alloc = std::min(complement_dim, std::max(alloc + alloc / 2, alloc + 32));
                        Q.conservativeResize(Eigen::NoChange, alloc);
                    }
                    beta.push_back(b);
                    q_prev = Q.col(j);
                    Q.col(j + 1) = w / b;
                    ++j;
                }
            }
        }
        if (total_steps >= cap) break;
    }

    if (locked.count() < k)
        throw ConvergenceError("smallest_eigenpairs: only " + std::to_string(locked.count()) +
                                   " of " + std::to_string(k) + " pairs converged within " +
                                   std::to_string(cap) + " steps",
                               last_residuals);

    std::vector<int> order(locked.count());
    for (int i = 0; i < locked.count(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked.values[a] < locked.values[b]; });

    EigenPairs out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
        out.values[i] = locked.values[order[i]];
        VecR v = locked.vectors[order[i]];
        fix_sign(v);
        out.vectors.col(i) = v;
    }
    return out;
}

}  // namespace asi

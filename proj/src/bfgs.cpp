#include <cmath>
#include <limits>

#include "asi/errors.hpp"
#include "asi/inversion.hpp"

namespace asi {

namespace {

constexpr double kC1 = 1e-4;  // sufficient-decrease constant
constexpr double kC2 = 0.9;   // curvature constant

struct LinePoint {
    double alpha = 0.0;
    double value = std::numeric_limits<double>::infinity();
    VecR x;
    VecR gradient;
    double slope = 0.0;
    bool finite = false;
};

class LineSearch {
  public:
    LineSearch(const std::function<MisfitResult(const VecR&)>& fg, const VecR& x0, const VecR& p,
               double f0, double slope0, int max_evals)
        : fg_(fg), x0_(x0), p_(p), f0_(f0), slope0_(slope0), budget_(max_evals) {}

    // Strong-Wolfe search; infinite objective values are treated as failed
    // sufficient decrease, so infeasible steps shrink the bracket.
    bool run(double alpha0, LinePoint& out) {
        LinePoint prev;
        prev.alpha = 0.0;
        prev.value = f0_;
        prev.slope = slope0_;
        prev.finite = true;
        double alpha = alpha0;
        for (int i = 0; i < budget_ && budget_left() > 0; ++i) {
            LinePoint cur = eval(alpha);
            if (!cur.finite || cur.value > f0_ + kC1 * alpha * slope0_ ||
                (i > 0 && cur.value >= prev.value))
                return zoom(prev, cur, out);
            if (std::abs(cur.slope) <= -kC2 * slope0_) {
                out = std::move(cur);
                return true;
            }
            if (cur.slope >= 0.0) return zoom(cur, prev, out);
            prev = std::move(cur);
            alpha *= 2.0;
        }
        return best(out);
    }

  private:
    LinePoint eval(double alpha) {
        --evals_left_;
        LinePoint p;
        p.alpha = alpha;
        p.x = x0_ + alpha * p_;
        const MisfitResult r = fg_(p.x);
        p.value = r.value;
        p.finite = std::isfinite(r.value);
        if (p.finite) {
            p.gradient = r.gradient;
            p.slope = r.gradient.dot(p_);
            if (p.value < best_.value) best_ = p;
        }
        return p;
    }

    int budget_left() const { return evals_left_; }

    bool zoom(LinePoint lo, LinePoint hi, LinePoint& out) {
        // Invariant: lo is finite, satisfies sufficient decrease, and has the
        // smallest such value seen; the Wolfe point lies between lo and hi.
        while (budget_left() > 0) {
            const double alpha = 0.5 * (lo.alpha + hi.alpha);
            if (std::abs(hi.alpha - lo.alpha) <= 1e-14 * (1.0 + std::abs(lo.alpha))) break;
            LinePoint cur = eval(alpha);
            if (!cur.finite || cur.value > f0_ + kC1 * alpha * slope0_ || cur.value >= lo.value) {
                hi = std::move(cur);
            } else {
                if (std::abs(cur.slope) <= -kC2 * slope0_) {
                    out = std::move(cur);
                    return true;
                }
                if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(cur);
            }
        }
        return best(out);
    }

    // Fall back to the best sufficient-decrease point seen, if any improved.
    bool best(LinePoint& out) {
        if (best_.finite && best_.value < f0_) {
            out = best_;
            return true;
        }
        return false;
    }

    const std::function<MisfitResult(const VecR&)>& fg_;
    const VecR& x0_;
    const VecR& p_;
    double f0_;
    double slope0_;
    int budget_;
    int evals_left_ = budget_;
    LinePoint best_;
};

}  // namespace

BfgsResult bfgs_minimize(const std::function<double(const VecR&)>& /*f*/,
                         const std::function<MisfitResult(const VecR&)>& fg, VecR x0,
                         const BfgsOptions& opts) {
    const auto n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);

    MisfitResult cur = fg(res.x);
    if (!std::isfinite(cur.value))
        throw ConfigError("bfgs_minimize: initial point is infeasible");
    res.value = cur.value;
    res.values.push_back(cur.value);
    // Gradient tolerance is relative to the starting gradient so the stopping
    // rule is invariant under rescaling of the objective (source amplitudes,
    // observation counts, ...).
    const double gref = std::max(cur.gradient.norm(), std::numeric_limits<double>::min());

    MatR H = MatR::Identity(n, n);
    bool scaled = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (cur.gradient.norm() / gref < opts.grad_tol) {
            res.converged = true;
            break;
        }
        VecR p = -(H * cur.gradient);
        double slope = p.dot(cur.gradient);
        if (!(slope < 0.0)) {  // reset on loss of descent
            H = MatR::Identity(n, n);
            scaled = false;
            p = -cur.gradient;
            slope = -cur.gradient.squaredNorm();
            if (!(slope < 0.0)) {
                res.converged = true;
                break;
            }
        }

        const double alpha0 = scaled ? 1.0 : std::min(1.0, 1.0 / std::max(1.0, cur.gradient.norm()));
        LineSearch ls(fg, res.x, p, cur.value, slope, opts.line_search_max);
        LinePoint accepted;
        if (!ls.run(alpha0, accepted)) {
            res.line_search_failed = true;
            break;
        }

        const VecR s = accepted.x - res.x;
        const VecR yv = accepted.gradient - cur.gradient;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (!scaled) {
                H *= sy / yv.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const VecR Hy = H * yv;
            // H <- (I - rho s y') H (I - rho y s') + rho s s'
            H -= rho * (s * Hy.transpose() + Hy * s.transpose());
            H += rho * (rho * yv.dot(Hy) + 1.0) * (s * s.transpose());
        }

        res.x = accepted.x;
        cur.value = accepted.value;
        cur.gradient = accepted.gradient;
        res.value = cur.value;
        res.values.push_back(cur.value);
        res.iterations = iter + 1;
    }
    return res;
}

BfgsResult minimize_subspace(const VecR& initial, const SearchSpace& space,
                             const ForwardProblem& problem, const ObservationSet& obs,
                             const BfgsOptions& opts) {
    const MisfitEvaluator ev(space, problem, obs);
    const auto fg = [&ev, &space](const VecR& beta) -> MisfitResult {
        try {
            return ev.value_and_gradient(beta);
        } catch (const NonpositiveMediumError&) {
            MisfitResult r;
            r.value = std::numeric_limits<double>::infinity();
            r.gradient = VecR::Zero(static_cast<Eigen::Index>(space.basis.size()));
            return r;
        }
    };
    const auto f = [&fg](const VecR& beta) { return fg(beta).value; };
    return bfgs_minimize(f, fg, initial, opts);
}

}  // namespace asi

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "asi/errors.hpp"
#include "asi/gram_schmidt.hpp"
#include "asi/inversion.hpp"
#include "asi/qcqp.hpp"

namespace asi {

SearchSpace merge_spaces(const SparseReal& M, const SearchSpace& old_space,
                         const VecR& new_background, const std::vector<VecR>& new_modes) {
    std::vector<VecR> ordered;
    ordered.reserve(new_modes.size() + 1 + old_space.basis.size());
    for (const VecR& m : new_modes) ordered.push_back(m);
    if (old_space.offset.size() == new_background.size())
        ordered.push_back(new_background - old_space.offset);
    for (const VecR& b : old_space.basis) ordered.push_back(b);

    SearchSpace merged;
    merged.offset = new_background;
    merged.basis = modified_gram_schmidt(ordered, M).basis;
    return merged;
}

FilterResult filter_indicator(const Mesh& mesh, const SparseReal& M, const VecR& w,
                              const SearchSpace& merged, double eps_psi, const WeightSpec& spec) {
    const auto j = static_cast<Eigen::Index>(merged.basis.size());
    const SparseReal K = assemble_weighted_stiffness(mesh, weight_field(mesh, w, spec));

    MatR A(j, j);
    std::vector<VecR> kpsi(static_cast<std::size_t>(j));
    for (Eigen::Index b = 0; b < j; ++b) kpsi[static_cast<std::size_t>(b)] = K * merged.basis[static_cast<std::size_t>(b)];
    for (Eigen::Index a = 0; a < j; ++a)
        for (Eigen::Index b = a; b < j; ++b) {
            const double v = merged.basis[static_cast<std::size_t>(a)].dot(kpsi[static_cast<std::size_t>(b)]);
            A(a, b) = v;
            A(b, a) = v;
        }

    const VecR mw = M * w;
    VecR gamma(j);
    for (Eigen::Index b = 0; b < j; ++b) gamma[b] = merged.basis[static_cast<std::size_t>(b)].dot(mw);

    const double w_norm_sq = w.dot(mw);
    const double resid_sq = std::max(0.0, w_norm_sq - gamma.squaredNorm());
    const double r_sq = eps_psi * eps_psi * w_norm_sq - resid_sq;

    FilterResult out;
    if (r_sq <= 0.0) {
        out.beta = gamma;  // constraint ball is empty: fall back to the projection
    } else {
        out.beta = qcqp_ball(A, gamma, std::sqrt(r_sq)).beta;
    }
    out.field = VecR::Zero(w.size());
    for (Eigen::Index b = 0; b < j; ++b) out.field += out.beta[b] * merged.basis[static_cast<std::size_t>(b)];
    return out;
}

TruncateResult truncate_space(const SearchSpace& merged, const VecR& beta, int prev_dimension,
                              double eps_psi, double rho0, double rho1) {
    const auto j = static_cast<Eigen::Index>(merged.basis.size());
    if (beta.size() != j) throw ConfigError("truncate_space: coefficient count mismatch");
    if (prev_dimension < 1) throw ConfigError("truncate_space: previous dimension must be >= 1");

    std::vector<int> order(static_cast<std::size_t>(j));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(beta[a]) > std::abs(beta[b]); });

    const double total = beta.squaredNorm();
    const double bound = eps_psi * eps_psi * total;
    double tail = total;
    Eigen::Index j0 = j;
    for (Eigen::Index i = 0; i <= j; ++i) {
        if (tail <= bound) {
            j0 = i;
            break;
        }
        if (i < j) tail -= beta[order[static_cast<std::size_t>(i)]] * beta[order[static_cast<std::size_t>(i)]];
    }

    const double rho = static_cast<double>(j0) / prev_dimension;
    TruncateResult out;
    out.j0 = static_cast<int>(j0);
    Eigen::Index keep = j0;
    out.eps_psi = eps_psi;
    if (rho > rho1) {
        out.eps_psi = 2.0 * eps_psi;
    } else if (rho < rho0) {
        keep = static_cast<Eigen::Index>(std::ceil(rho0 * prev_dimension));
        out.eps_psi = 0.5 * eps_psi;
    }
    keep = std::clamp<Eigen::Index>(keep, 1, j);

    out.space.offset = merged.offset;
    out.space.basis.reserve(static_cast<std::size_t>(keep));
    out.kept_beta = VecR(keep);
    for (Eigen::Index i = 0; i < keep; ++i) {
        const int idx = order[static_cast<std::size_t>(i)];
        out.space.basis.push_back(merged.basis[static_cast<std::size_t>(idx)]);
        out.kept_beta[i] = beta[idx];
    }
    return out;
}

namespace {

double mass_norm(const SparseReal& M, const VecR& v) { return std::sqrt(std::max(0.0, v.dot(M * v))); }

}  // namespace

AsiResult asi_run(const Mesh& mesh, const AsiConfig& cfg,
                  const std::vector<GaussianSource>& sources, const std::vector<int>& gamma_edges,
                  const std::vector<ObservationSet>& obs_per_frequency, const VecR& initial_guess,
                  const VecR& boundary_trace, const VecR* truth, const AsiState* resume,
                  const std::function<void(const AsiState&)>& on_frequency_advance) {
    if (cfg.frequencies.empty() || cfg.frequencies.size() != obs_per_frequency.size())
        throw ConfigError("asi_run: one observation set per frequency required");
    for (std::size_t i = 1; i < cfg.frequencies.size(); ++i)
        if (!(cfg.frequencies[i] > cfg.frequencies[i - 1]))
            throw ConfigError("asi_run: frequencies must be strictly increasing");
    if (!(cfg.rho0 <= 1.0 && 1.0 <= cfg.rho1 && cfg.rho0 >= 0.0))
        throw ConfigError("asi_run: need 0 <= rho0 <= 1 <= rho1");
    if (!(cfg.eps_psi > 0.0 && cfg.eps_nu > 0.0 && cfg.eps_tol > 0.0))
        throw ConfigError("asi_run: tolerances must be positive");

    const SparseReal M = assemble_mass(mesh);
    const int max_modes = mesh.num_interior() - 1;
    const auto t0 = std::chrono::steady_clock::now();

    AsiResult result;
    VecR u_prev = resume ? resume->u_prev : initial_guess;
    result.medium = u_prev;
    try {
        SearchSpace space;
        double eps_psi = cfg.eps_psi;
        std::size_t freq_idx = 0;
        VecR warm_beta;
        bool have_warm = false;
        int first_iter = 1;
        if (resume) {
            space = resume->space;
            eps_psi = resume->eps_psi;
            freq_idx = static_cast<std::size_t>(resume->freq_index);
            warm_beta = resume->warm_beta;
            have_warm = resume->have_warm;
            first_iter = resume->next_iteration;
            if (freq_idx >= cfg.frequencies.size())
                throw ConfigError("asi_run: resume state frequency index out of range");
        } else {
            // Initial space from the starting guess (a constant guess yields
            // the unweighted Laplacian eigenbasis).
            const VecR phi_init =
                compute_background(mesh, weight_field(mesh, u_prev, cfg.weight), boundary_trace);
            const VecR w0 = cfg.subtract_background ? VecR(u_prev - phi_init) : u_prev;
            space.offset = phi_init;
            space.basis = compute_eigenbasis(mesh, weight_field(mesh, w0, cfg.weight),
                                             std::min(cfg.initial_modes, max_modes), cfg.eig)
                              .modes;
        }

        for (int m = first_iter; m <= cfg.max_outer_iters; ++m) {
            ForwardProblem problem;
            problem.mesh = &mesh;
            problem.sources = sources;
            problem.gamma_edges = gamma_edges;
            problem.frequency = cfg.frequencies[freq_idx];

            VecR beta0;
            if (cfg.warm_start_filtered && have_warm) {
                beta0 = warm_beta;
            } else {
                beta0 = project(M, space.basis, u_prev - space.offset).coefficients;
            }
            // A warm start can leave the positivity region after truncation
            // reshuffles the basis; shrink toward the background (positive by
            // the discrete maximum principle) until the start is feasible.
            for (int tries = 0; tries < 64 && space.expand(beta0).minCoeff() <= 0.0; ++tries)
                beta0 *= 0.5;

            const BfgsResult br =
                minimize_subspace(beta0, space, problem, obs_per_frequency[freq_idx], cfg.bfgs);
            const VecR u_m = space.expand(br.x);
            result.medium = u_m;

            HistoryRow row;
            row.iteration = m;
            row.frequency = problem.frequency;
            row.dimension = space.dimension();
            row.misfit = br.value;
            row.rel_error = truth ? mass_norm(M, u_m - *truth) / mass_norm(M, *truth)
                                  : std::numeric_limits<double>::quiet_NaN();
            result.history.push_back(row);
            result.bfgs_values.push_back(br.values);

            const double du =
                mass_norm(M, u_m - u_prev) / std::max(mass_norm(M, u_m), 1e-300);
            if (std::getenv("ASI_DEBUG"))
                std::fprintf(stderr,
                             "asi iter %d nu %g J %d misfit %.6e err %.4f du %.5f eps_psi %g "
                             "t %.1fs\n",
                             m, row.frequency, row.dimension, row.misfit, row.rel_error, du,
                             eps_psi,
                             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                 .count());
            const bool at_last = freq_idx + 1 == cfg.frequencies.size();
            if (at_last && du < cfg.eps_tol) {
                result.converged = true;
                u_prev = u_m;
                break;
            }
            bool advanced = false;
            if (!at_last && du < cfg.eps_nu) {
                ++freq_idx;
                advanced = true;
            }

            // Refresh the decomposition around the new iterate.
            const VecR phi0 =
                compute_background(mesh, weight_field(mesh, u_m, cfg.weight), boundary_trace);
            const VecR w_eig = cfg.subtract_background ? VecR(u_m - phi0) : u_m;
            const int k_next = std::min(space.dimension(), max_modes);
            const SpectralBasis eb =
                compute_eigenbasis(mesh, weight_field(mesh, w_eig, cfg.weight), k_next, cfg.eig);

            const SearchSpace merged = merge_spaces(M, space, phi0, eb.modes);
            const FilterResult filt =
                filter_indicator(mesh, M, u_m - phi0, merged, eps_psi, cfg.weight);
            TruncateResult tr =
                truncate_space(merged, filt.beta, space.dimension(), eps_psi, cfg.rho0, cfg.rho1);

            DimensionStep step;
            step.prev_dimension = space.dimension();
            step.new_modes = k_next;
            step.merged_dimension = merged.dimension();
            step.kept_dimension = tr.space.dimension();
            result.dimensions.push_back(step);

            space = std::move(tr.space);
            eps_psi = tr.eps_psi;
            warm_beta = std::move(tr.kept_beta);
            have_warm = true;
            u_prev = u_m;

            if (advanced && on_frequency_advance) {
                AsiState state;
                state.next_iteration = m + 1;
                state.freq_index = static_cast<int>(freq_idx);
                state.eps_psi = eps_psi;
                state.space = space;
                state.u_prev = u_prev;
                state.warm_beta = warm_beta;
                state.have_warm = have_warm;
                on_frequency_advance(state);
            }
        }
    } catch (const std::exception& e) {
        result.abort_reason = e.what();
    }
    return result;
}

}  // namespace asi

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asi/helmholtz.hpp"
#include "asi/spectral.hpp"

namespace asi {

// Boundary observations for one frequency: complex data per source at the
// observation nodes (union of endpoints of the observation edges).
struct ObservationSet {
    std::vector<int> gamma_nodes;  // sorted vertex ids
    std::vector<VecC> values;      // per source, aligned with gamma_nodes
    double frequency = 0.0;
    double noise_level = 0.0;  // metadata: relative noise used when generating
};

// Forward-problem description: sources, observation boundary, frequency.
struct ForwardProblem {
    const Mesh* mesh = nullptr;
    std::vector<GaussianSource> sources;
    std::vector<int> gamma_edges;  // indices into mesh->boundary_edges
    double frequency = 0.0;
    double omega() const;
};

// Sorted unique endpoint vertices of the listed boundary edges.
std::vector<int> gamma_nodes(const Mesh& mesh, const std::vector<int>& edges);

// Affine search space: candidate media are offset + sum_j beta_j basis_j with
// the basis mass-orthonormal and vanishing on the boundary.
struct SearchSpace {
    VecR offset;
    std::vector<VecR> basis;
    int dimension() const { return static_cast<int>(basis.size()); }
    VecR expand(const VecR& beta) const;
};

// Half the summed squared L2(Gamma) data misfit and its exact discrete
// gradient with respect to the subspace coefficients (adjoint method; one LU
// factorization shared by all forward and adjoint solves).
struct MisfitResult {
    double value = 0.0;
    VecR gradient;
};

class MisfitEvaluator {
  public:
    MisfitEvaluator(const SearchSpace& space, const ForwardProblem& problem,
                    const ObservationSet& obs);

    double value(const VecR& beta) const;
    MisfitResult value_and_gradient(const VecR& beta) const;

  private:
    const SearchSpace* space_;
    const ForwardProblem* problem_;
    const ObservationSet* obs_;
    SparseReal gamma_mass_;       // boundary mass on the observation edges
    std::vector<VecR> loads_;     // per source
    double omega_ = 0.0;
    // Operator persists across evaluations so refactoring reuses the symbolic
    // analysis of the sparse LU.
    mutable std::unique_ptr<HelmholtzOperator> op_;

    struct Solves;
    Solves forward(const VecR& beta) const;
};

double evaluate_misfit(const VecR& beta, const SearchSpace& space, const ForwardProblem& problem,
                       const ObservationSet& obs);
VecR misfit_gradient(const VecR& beta, const SearchSpace& space, const ForwardProblem& problem,
                     const ObservationSet& obs);

// BFGS with a strong-Wolfe line search. The objective may return +inf to
// reject infeasible points (the line search backtracks through them).
struct BfgsOptions {
    double grad_tol = 1e-6;  // relative to the initial gradient norm
    int max_iters = 200;
    int line_search_max = 40;
};

struct BfgsResult {
    VecR x;
    double value = 0.0;
    std::vector<double> values;  // accepted iterate values, non-increasing
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
};

BfgsResult bfgs_minimize(const std::function<double(const VecR&)>& f,
                         const std::function<MisfitResult(const VecR&)>& fg, VecR x0,
                         const BfgsOptions& opts);

// Subspace misfit minimization from a feasible initial coefficient vector.
BfgsResult minimize_subspace(const VecR& initial, const SearchSpace& space,
                             const ForwardProblem& problem, const ObservationSet& obs,
                             const BfgsOptions& opts);

// Merge: orthonormalize (new modes, new offset - old offset, old basis) in
// that order against the mass inner product, dropping near-dependent vectors.
SearchSpace merge_spaces(const SparseReal& M, const SearchSpace& old_space,
                         const VecR& new_background, const std::vector<VecR>& new_modes);

// Filter: minimal weighted-gradient representative of w within the merged
// space, constrained to stay within eps_psi * |w| of w in L2.
struct FilterResult {
    VecR beta;  // coefficients in the merged basis
    VecR field;
};

FilterResult filter_indicator(const Mesh& mesh, const SparseReal& M, const VecR& w,
                              const SearchSpace& merged, double eps_psi, const WeightSpec& spec);

// Truncate: keep the leading coefficients of the filtered indicator, adapting
// the kept count and the tolerance by the relative-dimension band [rho0, rho1].
struct TruncateResult {
    SearchSpace space;
    double eps_psi = 0.0;
    int j0 = 0;      // smallest prefix meeting the tail-energy bound
    VecR kept_beta;  // indicator coefficients in the kept, reordered basis
};

TruncateResult truncate_space(const SearchSpace& merged, const VecR& beta, int prev_dimension,
                              double eps_psi, double rho0, double rho1);

// Full adaptive loop: subspace BFGS, convergence test, frequency stepping,
// then background + eigenbasis refresh, merge, filter, truncate.
struct AsiConfig {
    std::vector<double> frequencies;  // ascending
    double eps_psi = 0.005;
    double eps_nu = 0.005;
    double eps_tol = 0.005;
    double rho0 = 0.8;
    double rho1 = 1.2;
    int initial_modes = 100;  // eigenbasis size of the first search space
    int max_outer_iters = 100;
    bool subtract_background = true;   // eigenproblem operand: u - phi0 vs u
    bool warm_start_filtered = false;  // warm start: filtered indicator vs projection
    WeightSpec weight;
    EigenOptions eig;
    BfgsOptions bfgs;
};

struct HistoryRow {
    int iteration = 0;  // 1-based outer iteration
    double frequency = 0.0;
    int dimension = 0;  // J_m of the space minimized over
    double misfit = 0.0;
    double rel_error = 0.0;  // vs truth when supplied, else NaN
};

struct DimensionStep {
    int prev_dimension = 0;   // J_m
    int new_modes = 0;        // K_{m+1}
    int merged_dimension = 0; // after orthonormalization
    int kept_dimension = 0;   // J_{m+1}
};

struct AsiResult {
    std::vector<HistoryRow> history;
    std::vector<std::vector<double>> bfgs_values;  // per outer iteration
    std::vector<DimensionStep> dimensions;
    VecR medium;
    bool converged = false;
    std::string abort_reason;  // empty unless a sub-operation failed
};

// Complete loop state at the top of an outer iteration; a run restarted from
// it continues exactly where the original left off.
struct AsiState {
    int next_iteration = 1;
    int freq_index = 0;
    double eps_psi = 0.0;
    SearchSpace space;
    VecR u_prev;
    VecR warm_beta;
    bool have_warm = false;
};

AsiResult asi_run(const Mesh& mesh, const AsiConfig& cfg,
                  const std::vector<GaussianSource>& sources, const std::vector<int>& gamma_edges,
                  const std::vector<ObservationSet>& obs_per_frequency, const VecR& initial_guess,
                  const VecR& boundary_trace, const VecR* truth = nullptr,
                  const AsiState* resume = nullptr,
                  const std::function<void(const AsiState&)>& on_frequency_advance = {});

}  // namespace asi

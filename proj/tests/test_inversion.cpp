#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "asi/fem.hpp"
#include "asi/gram_schmidt.hpp"
#include "asi/inversion.hpp"
#include "asi/mesh.hpp"
#include "asi/scenario.hpp"

using namespace asi;

namespace {

// Small single-frequency setup: unit square, four corner-ish sources,
// observations on the whole boundary.
struct Setup {
    Mesh mesh;
    ForwardProblem problem;
    SparseReal M;

    explicit Setup(int n, double frequency = 1.5) : mesh(build_rect_mesh({0, 0, 1, 1}, n, n)) {
        problem.mesh = &mesh;
        problem.frequency = frequency;
        const double w = 2.0 * mesh.h_max();
        for (Point c : {Point{0.25, 0.25}, Point{0.75, 0.25}, Point{0.75, 0.75}})
            problem.sources.push_back({c, w, 40.0});
        problem.gamma_edges.resize(mesh.boundary_edges.size());
        std::iota(problem.gamma_edges.begin(), problem.gamma_edges.end(), 0);
        M = assemble_mass(mesh);
    }

    ObservationSet observe(const VecR& medium) const {
        ObservationSet obs;
        obs.gamma_nodes = gamma_nodes(mesh, problem.gamma_edges);
        obs.frequency = problem.frequency;
        HelmholtzOperator op(mesh, medium, problem.omega());
        for (const GaussianSource& s : problem.sources) {
            const VecC y = op.solve(source_load(mesh, s).cast<Complex>());
            VecC v(static_cast<Eigen::Index>(obs.gamma_nodes.size()));
            for (std::size_t i = 0; i < obs.gamma_nodes.size(); ++i)
                v[static_cast<Eigen::Index>(i)] = y[obs.gamma_nodes[i]];
            obs.values.push_back(std::move(v));
        }
        return obs;
    }
};

// Mass-orthonormal interior-supported random basis.
std::vector<VecR> random_interior_basis(const Mesh& mesh, const SparseReal& M, int count,
                                        unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<VecR> raw;
    for (int k = 0; k < count; ++k) {
        VecR v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = mesh.is_boundary_vertex(static_cast<int>(i)) ? 0.0 : gauss(rng);
        raw.push_back(std::move(v));
    }
    return modified_gram_schmidt(raw, M).basis;
}

}  // namespace

TEST_CASE("misfit vanishes on consistent data and grows quadratically") {
    Setup s(12);
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    SearchSpace space;
    space.offset = VecR::Constant(n, 1.3);
    space.basis = random_interior_basis(s.mesh, s.M, 2, 7);

    VecR beta(2);
    beta << 0.2, -0.1;
    ObservationSet obs = s.observe(space.expand(beta));

    const double at_truth = evaluate_misfit(beta, space, s.problem, obs);
    double obs_sq = 0.0;
    for (const VecC& v : obs.values) obs_sq += v.squaredNorm();
    CHECK(at_truth <= 1e-16 * obs_sq);

    VecR other(2);
    other << 0.05, 0.0;
    CHECK(evaluate_misfit(other, space, s.problem, obs) > 0.0);

    // Doubling every residual quadruples the quadratic misfit.
    ObservationSet shifted = obs, shifted2 = obs;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (std::size_t l = 0; l < obs.values.size(); ++l)
        for (Eigen::Index i = 0; i < obs.values[l].size(); ++i) {
            const Complex d(gauss(rng), gauss(rng));
            shifted.values[l][i] += 1e-3 * d;
            shifted2.values[l][i] += 2e-3 * d;
        }
    const double j1 = evaluate_misfit(beta, space, s.problem, shifted);
    const double j2 = evaluate_misfit(beta, space, s.problem, shifted2);
    CHECK(j2 == doctest::Approx(4.0 * j1).epsilon(1e-10));
}

TEST_CASE("gradient vanishes at the exact minimum and scales with the data") {
    Setup s(12);
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    SearchSpace space;
    space.offset = VecR::Constant(n, 1.1);
    space.basis = random_interior_basis(s.mesh, s.M, 3, 11);
    VecR beta(3);
    beta << 0.15, -0.2, 0.1;
    const ObservationSet obs = s.observe(space.expand(beta));

    CHECK(misfit_gradient(beta, space, s.problem, obs).norm() <= 1e-10);

    // Scaling sources and observations by a constant scales y and y_obs, hence
    // the residual, by it; the quadratic misfit and its gradient pick up the
    // square.
    VecR off(3);
    off << 0.1, -0.15, 0.05;
    const VecR g1 = misfit_gradient(off, space, s.problem, obs);
    Setup scaled(12);
    for (GaussianSource& src : scaled.problem.sources) src.amplitude *= 3.0;
    ObservationSet obs3 = obs;
    for (VecC& v : obs3.values) v *= 3.0;
    const VecR g9 = misfit_gradient(off, space, scaled.problem, obs3);
    CHECK((g9 - 9.0 * g1).norm() <= 1e-9 * g9.norm());
}

TEST_CASE("adjoint gradient matches central finite differences") {
    Setup s(10);
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;

    for (int instance = 0; instance < 4; ++instance) {
        SearchSpace space;
        space.offset = VecR::Constant(n, 1.0 + 0.3 * instance);
        const int dim = 3 + (instance % 2);
        if (instance == 3) {
            // Boundary-supported basis exercises the impedance derivative.
            std::vector<VecR> raw;
            for (int k = 0; k < dim; ++k) {
                VecR v(n);
                for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
                raw.push_back(0.2 * v);
            }
            space.basis = modified_gram_schmidt(raw, s.M).basis;
        } else {
            space.basis = random_interior_basis(s.mesh, s.M, dim, 100 + instance);
        }

        VecR truth(dim), beta(dim);
        for (int j = 0; j < dim; ++j) {
            truth[j] = 0.2 * gauss(rng);
            beta[j] = truth[j] + 0.1 * gauss(rng);
        }
        const ObservationSet obs = s.observe(space.expand(truth));
        const MisfitEvaluator ev(space, s.problem, obs);
        const MisfitResult res = ev.value_and_gradient(beta);

        double worst = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(beta[j]));
            VecR bp = beta, bm = beta;
            bp[j] += h;
            bm[j] -= h;
            const double fd = (ev.value(bp) - ev.value(bm)) / (2.0 * h);
            worst = std::max(worst,
                             std::abs(fd - res.gradient[j]) / std::max(1e-300, std::abs(fd)));
        }
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("bfgs solves a quadratic in a few iterations") {
    MatR Q(3, 3);
    Q << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0;
    VecR target(3);
    target << 1.0, -2.0, 0.5;
    const auto fg = [&](const VecR& x) {
        MisfitResult r;
        const VecR d = x - target;
        r.value = 0.5 * d.dot(Q * d);
        r.gradient = Q * d;
        return r;
    };
    const auto f = [&](const VecR& x) { return fg(x).value; };
    BfgsOptions opts;
    opts.grad_tol = 1e-10;
    const BfgsResult res = bfgs_minimize(f, fg, VecR::Zero(3), opts);
    CHECK(res.converged);
    CHECK(res.iterations <= 10);
    CHECK((res.x - target).norm() <= 1e-8);
    for (std::size_t i = 1; i < res.values.size(); ++i) CHECK(res.values[i] < res.values[i - 1]);
}

TEST_CASE("one-dimensional inclusion recovery hits the true coefficient") {
    Setup s(32, 2.0);
    Medium med;
    med.domain = {0.0, 0.0, 1.0, 1.0};
    med.pieces.push_back({med.domain, 1.5});
    med.inclusions.push_back({Disk{{0.5, 0.5}, 0.22}, 0.8});
    med.validate();

    const VecR truth = medium_nodal_values(s.mesh, med);
    const ObservationSet obs = s.observe(truth);

    // One-dimensional search space spanned by the interpolated indicator.
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    VecR chi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point p = s.mesh.vertices[static_cast<std::size_t>(i)];
        chi[i] = (!s.mesh.is_boundary_vertex(static_cast<int>(i)) &&
                  std::hypot(p.x - 0.5, p.y - 0.5) <= 0.22)
                     ? 1.0
                     : 0.0;
    }
    SearchSpace space;
    space.offset = VecR::Constant(n, 1.5);
    space.basis = modified_gram_schmidt({chi}, s.M).basis;
    const double scale = space.basis[0].maxCoeff();  // normalized indicator height

    BfgsOptions opts;
    const BfgsResult res = minimize_subspace(VecR::Zero(1), space, s.problem, obs, opts);
    const double recovered = res.x[0] * scale;
    CHECK(recovered == doctest::Approx(0.8).epsilon(1e-4));
}

TEST_CASE("merge keeps new modes, drops duplicates, and contains the iterate") {
    Setup s(16);
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    const std::vector<VecR> modes = random_interior_basis(s.mesh, s.M, 4, 5);
    const VecR bg = VecR::Constant(n, 2.0);

    SearchSpace empty;
    empty.offset = bg;
    const SearchSpace fresh = merge_spaces(s.M, empty, bg, modes);
    REQUIRE(fresh.dimension() == 4);
    for (int k = 0; k < 4; ++k) CHECK((fresh.basis[k] - modes[k]).norm() <= 1e-12);

    // New modes inside the old span add no dimension.
    SearchSpace old;
    old.offset = bg;
    old.basis = modes;
    const SearchSpace same = merge_spaces(s.M, old, bg, {modes[1], modes[3]});
    CHECK(same.dimension() == 4);

    // The current iterate lies in the merged affine space.
    VecR coeff(4);
    coeff << 0.3, -0.2, 0.12, 0.05;
    const VecR u_m = old.expand(coeff);
    const VecR new_bg = bg + 0.02 * random_interior_basis(s.mesh, s.M, 1, 77)[0];
    const std::vector<VecR> new_modes = random_interior_basis(s.mesh, s.M, 3, 9);
    const SearchSpace merged = merge_spaces(s.M, old, new_bg, new_modes);
    const VecR w = u_m - merged.offset;
    const VecR recon = merged.offset + project(s.M, merged.basis, w).field;
    const double unorm = std::sqrt(u_m.dot(s.M * u_m));
    CHECK(std::sqrt((u_m - recon).dot(s.M * (u_m - recon))) <= 1e-9 * unorm);
}

TEST_CASE("filter returns zero for a wide ball and the projection for a tight one") {
    Setup s(16);
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    SearchSpace merged;
    merged.offset = VecR::Constant(n, 1.0);
    merged.basis = random_interior_basis(s.mesh, s.M, 3, 21);

    VecR coeff(3);
    coeff << 0.4, -0.3, 0.2;
    VecR w = VecR::Zero(n);
    for (int k = 0; k < 3; ++k) w += coeff[k] * merged.basis[k];

    const WeightSpec spec;
    // eps >= 1: zero is feasible and minimizes the seminorm.
    const FilterResult wide = filter_indicator(s.mesh, s.M, w, merged, 1.0, spec);
    CHECK(wide.beta.norm() <= 1e-12);
    // eps -> 0 with w in the span: the constraint pins the projection.
    const FilterResult tight = filter_indicator(s.mesh, s.M, w, merged, 1e-8, spec);
    CHECK((tight.beta - coeff).norm() <= 1e-6 * coeff.norm());
    // In between, the filtered field stays within the constraint ball.
    const FilterResult mid = filter_indicator(s.mesh, s.M, w, merged, 0.3, spec);
    const VecR d = mid.field - w;
    CHECK(std::sqrt(d.dot(s.M * d)) <= 0.3 * std::sqrt(w.dot(s.M * w)) * (1.0 + 1e-9));
}

namespace {

SearchSpace trivial_space(int dim) {
    // Orthonormal placeholder basis on a tiny mesh: the truncation rule only
    // touches coefficients, but the space must be well-formed.
    static const Mesh mesh = build_rect_mesh({0, 0, 1, 1}, 8, 8);
    static const SparseReal M = assemble_mass(mesh);
    SearchSpace s;
    s.offset = VecR::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    s.basis = random_interior_basis(mesh, M, dim, 42);
    return s;
}

}  // namespace

TEST_CASE("truncation rule battery") {
    // All tail energy behind the first coefficient: keep exactly one.
    {
        SearchSpace sp = trivial_space(3);
        VecR beta(3);
        beta << 1.0, 0.0, 0.0;
        const TruncateResult r = truncate_space(sp, beta, 3, 0.5, 0.0, 10.0);
        CHECK(r.j0 == 1);
        CHECK(r.space.dimension() == 1);
        CHECK(r.eps_psi == 0.5);
        CHECK(r.kept_beta[0] == 1.0);
    }
    // gamma = (3,2,1), eps = 0.9: tail 2^2+1^2 = 5 <= 0.81*14 already at J=1.
    {
        SearchSpace sp = trivial_space(3);
        VecR beta(3);
        beta << 3.0, 2.0, 1.0;
        const TruncateResult r = truncate_space(sp, beta, 3, 0.9, 0.0, 10.0);
        CHECK(r.j0 == 1);
        CHECK(r.space.dimension() == 1);
    }
    // rho < rho0: J0=2 of prev 10 -> keep ceil(0.8*10)=8, eps halves.
    {
        SearchSpace sp = trivial_space(12);
        VecR beta = VecR::Constant(12, 1e-9);
        beta[4] = 2.0;
        beta[7] = 1.0;
        const TruncateResult r = truncate_space(sp, beta, 10, 0.005, 0.8, 1.2);
        CHECK(r.j0 == 2);
        CHECK(r.space.dimension() == 8);
        CHECK(r.eps_psi == 0.0025);
        CHECK(r.kept_beta[0] == 2.0);  // sorted by descending magnitude
        CHECK(r.kept_beta[1] == 1.0);
        CHECK((r.space.basis[0] - sp.basis[4]).norm() == 0.0);
        CHECK((r.space.basis[1] - sp.basis[7]).norm() == 0.0);
    }
    // rho > rho1: J0=5 of prev 2 -> keep 5, eps doubles.
    {
        SearchSpace sp = trivial_space(6);
        VecR beta(6);
        beta << 1.0, 1.0, 1.0, 1.0, 1.0, 1e-9;
        const TruncateResult r = truncate_space(sp, beta, 2, 0.01, 0.8, 1.2);
        CHECK(r.j0 == 5);
        CHECK(r.space.dimension() == 5);
        CHECK(r.eps_psi == 0.02);
    }
    // In-band keep: discarded tail energy obeys the bound.
    {
        SearchSpace sp = trivial_space(6);
        VecR beta(6);
        beta << 5.0, 4.0, 3.0, 0.01, 0.005, 0.003;
        const double eps = 0.01;
        const TruncateResult r = truncate_space(sp, beta, 3, eps, 0.8, 1.2);
        CHECK(r.eps_psi == eps);
        double tail = 0.0;
        for (int i = r.space.dimension(); i < 6; ++i) {
            double c = (i == 3) ? 0.01 : (i == 4 ? 0.005 : 0.003);
            tail += c * c;
        }
        CHECK(tail <= eps * eps * beta.squaredNorm());
    }
}

TEST_CASE("synthetic observations: exact noise ratio and determinism") {
    ScenarioConfig cfg = preset("five_inclusion");
    cfg.mesh.nx = cfg.mesh.ny = 24;
    cfg.asi.frequencies = {3.0};
    cfg.noise = 0.1;
    cfg.seed = 99;

    const std::vector<ObservationSet> noisy = synthesize_observations(cfg);
    ScenarioConfig clean_cfg = cfg;
    clean_cfg.noise = 0.0;
    const std::vector<ObservationSet> clean = synthesize_observations(clean_cfg);
    REQUIRE(noisy.size() == 1);
    REQUIRE(noisy[0].values.size() == clean[0].values.size());

    const Mesh mesh = cfg.mesh.build();
    const std::vector<int> edges = side_edges(mesh, cfg.gamma);
    const SparseReal B = assemble_boundary_mass(
        mesh, edges, VecR::Ones(static_cast<Eigen::Index>(edges.size())));
    const std::vector<int> nodes = gamma_nodes(mesh, edges);
    const auto nv = static_cast<Eigen::Index>(mesh.vertices.size());
    const auto gamma_norm = [&](const VecC& vals) {
        VecC full = VecC::Zero(nv);
        for (std::size_t i = 0; i < nodes.size(); ++i) full[nodes[i]] = vals[static_cast<Eigen::Index>(i)];
        const VecR re = full.real(), im = full.imag();
        return std::sqrt(re.dot(B * re) + im.dot(B * im));
    };
    for (std::size_t l = 0; l < noisy[0].values.size(); ++l) {
        const double ratio = gamma_norm(noisy[0].values[l] - clean[0].values[l]) /
                             gamma_norm(clean[0].values[l]);
        CHECK(ratio == doctest::Approx(0.1).epsilon(1e-12));
    }

    const std::vector<ObservationSet> again = synthesize_observations(cfg);
    for (std::size_t l = 0; l < noisy[0].values.size(); ++l)
        CHECK((again[0].values[l] - noisy[0].values[l]).norm() == 0.0);
}

TEST_CASE("zero-noise data at the initial guess stops immediately") {
    // Same-mesh observations generated at the constant initial guess: the
    // first subspace minimization starts at the global minimum and the run
    // converges at the first iteration.
    Setup s(16, 2.0);
    const auto n = static_cast<Eigen::Index>(s.mesh.vertices.size());
    const VecR initial = VecR::Constant(n, 1.5);
    ObservationSet obs = s.observe(initial);

    AsiConfig cfg;
    cfg.frequencies = {2.0};
    cfg.initial_modes = 10;
    cfg.max_outer_iters = 5;
    const AsiResult res =
        asi_run(s.mesh, cfg, s.problem.sources, s.problem.gamma_edges, {obs}, initial, initial);
    CHECK(res.abort_reason.empty());
    CHECK(res.converged);
    CHECK(res.history.size() == 1);
    CHECK(res.history[0].misfit <= 1e-12);
}

TEST_CASE("small run respects the merge dimension bound and stays deterministic") {
    ScenarioConfig cfg = preset("five_inclusion");
    cfg.mesh.nx = cfg.mesh.ny = 16;
    cfg.asi.frequencies = {2.0, 3.0};
    cfg.noise = 0.05;
    cfg.seed = 7;
    cfg.asi.initial_modes = 8;
    cfg.asi.max_outer_iters = 4;
    cfg.asi.bfgs.max_iters = 10;

    const Mesh mesh = cfg.mesh.build();
    const std::vector<ObservationSet> obs = synthesize_observations(cfg);
    const VecR truth = medium_nodal_values(mesh, cfg.medium);
    const VecR initial = VecR::Constant(mesh.num_vertices(), cfg.initial_constant);
    const std::vector<GaussianSource> sources = resolve_sources(cfg, mesh);
    const std::vector<int> gamma = side_edges(mesh, cfg.gamma);

    const AsiResult a = asi_run(mesh, cfg.asi, sources, gamma, obs, initial, initial, &truth);
    CHECK(a.abort_reason.empty());
    REQUIRE(!a.history.empty());
    for (const DimensionStep& d : a.dimensions) {
        CHECK(d.kept_dimension <= d.merged_dimension);
        CHECK(d.merged_dimension <= d.prev_dimension + d.new_modes + 1);
    }
    for (const std::vector<double>& run : a.bfgs_values)
        for (std::size_t i = 1; i < run.size(); ++i) CHECK(run[i] < run[i - 1]);

    const AsiResult b = asi_run(mesh, cfg.asi, sources, gamma, obs, initial, initial, &truth);
    REQUIRE(b.history.size() == a.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(b.history[i].misfit == a.history[i].misfit);
        CHECK(b.history[i].rel_error == a.history[i].rel_error);
        CHECK(b.history[i].dimension == a.history[i].dimension);
    }
    CHECK((b.medium - a.medium).norm() == 0.0);
}

TEST_CASE("snapshot round-trip preserves the loop state") {
    const Mesh mesh = build_rect_mesh({0, 0, 1, 1}, 8, 8);
    const SparseReal M = assemble_mass(mesh);
    AsiState state;
    state.next_iteration = 4;
    state.freq_index = 1;
    state.eps_psi = 0.0125;
    state.space.offset = VecR::Constant(static_cast<Eigen::Index>(mesh.vertices.size()), 1.7);
    state.space.basis = random_interior_basis(mesh, M, 3, 13);
    state.u_prev = state.space.expand(VecR::Constant(3, 0.1));
    state.warm_beta = VecR::Constant(3, -0.2);
    state.have_warm = true;

    const auto path = std::filesystem::temp_directory_path() / "asi_state_test.bin";
    write_snapshot(path, state);
    const AsiState back = read_snapshot(path);
    std::filesystem::remove(path);

    CHECK(back.next_iteration == state.next_iteration);
    CHECK(back.freq_index == state.freq_index);
    CHECK(back.eps_psi == state.eps_psi);
    CHECK(back.have_warm == state.have_warm);
    CHECK((back.u_prev - state.u_prev).norm() == 0.0);
    CHECK((back.warm_beta - state.warm_beta).norm() == 0.0);
    REQUIRE(back.space.basis.size() == state.space.basis.size());
    CHECK((back.space.offset - state.space.offset).norm() == 0.0);
    for (std::size_t k = 0; k < state.space.basis.size(); ++k)
        CHECK((back.space.basis[k] - state.space.basis[k]).norm() == 0.0);
}

TEST_CASE("config text round-trips through parse and emit") {
    for (const std::string& name : preset_names()) {
        const ScenarioConfig cfg = preset(name);
        const std::string text = emit_config(cfg);
        const ScenarioConfig back = parse_config(text);
        CHECK(emit_config(back) == text);
    }
}

#include <cmath>
#include <cstdio>
#include <fstream>

#include "asi/errors.hpp"
#include "asi/fem.hpp"
#include "asi/scenario.hpp"
#include "asi/spectral.hpp"

namespace asi {

namespace {

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw NumericalError("cannot write " + path.string());
    return f;
}

// Edge-midpoint quadrature of (v_h - u)^2 over the mesh; v_h is a P1 field so
// its midpoint values are endpoint means. Comparable across fields because the
// same rule is used everywhere.
double quadrature_error_sq(const Mesh& mesh, const VecR* nodal, const Medium& medium) {
    double total = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const double w = mesh.triangle_area(t) / 3.0;
        for (int i = 0; i < 3; ++i) {
            const Point& a = mesh.vertices[static_cast<std::size_t>(tri[(i + 1) % 3])];
            const Point& b = mesh.vertices[static_cast<std::size_t>(tri[(i + 2) % 3])];
            const double vh =
                nodal ? 0.5 * ((*nodal)[tri[(i + 1) % 3]] + (*nodal)[tri[(i + 2) % 3]]) : 0.0;
            const double d = vh - medium.evaluate({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
            total += w * d * d;
        }
    }
    return total;
}

double mass_norm(const SparseReal& M, const VecR& v) { return std::sqrt(std::max(0.0, v.dot(M * v))); }

}  // namespace

void run_observe(const ScenarioConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const Mesh mesh = cfg.mesh.build();
    write_observations(out, mesh, synthesize_observations(cfg));
    write_manifest(out, cfg, "observe");
}

void run_decomposition_study(const ScenarioConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const int n_modes = cfg.decompose.modes;
    const int n_total = n_modes + cfg.decompose.extra_modes;

    Mesh base;
    SpectralBasis spec0;
    VecR u0;
    {
        auto tab = open_out(out / "eigenvalues.csv");
        tab << "level,h_max,k,lambda\n";
        for (int r = 0; r < cfg.decompose.refinements; ++r) {
            MeshSpec ms = cfg.mesh;
            ms.refine += r;
            const Mesh mesh = ms.build();
            const VecR u = medium_nodal_values(mesh, cfg.medium);
            SpectralBasis basis =
                compute_eigenbasis(mesh, weight_field(mesh, u, cfg.weight), n_total, cfg.asi.eig);
            for (Eigen::Index k = 0; k < basis.lambda.size(); ++k)
                tab << r << ',' << fmt17(mesh.h_max()) << ',' << (k + 1) << ','
                    << fmt17(basis.lambda[k]) << '\n';
            if (r == 0) {
                base = mesh;
                u0 = u;
                spec0 = std::move(basis);
            }
        }
    }

    const VecR phi0 = compute_background(base, spec0.weights, u0);
    write_field(out / "background.csv", base, phi0);
    write_field(out / "medium_interpolant.csv", base, u0);
    for (int k = 0; k < n_modes && k < static_cast<int>(spec0.modes.size()); ++k)
        write_field(out / ("mode_" + std::to_string(k + 1) + ".csv"), base, spec0.modes[k]);

    const SparseReal M = assemble_mass(base);
    const VecR residual = u0 - phi0;
    const double u_norm_mass = mass_norm(M, u0);
    const double u_norm_quad = std::sqrt(quadrature_error_sq(base, nullptr, cfg.medium));
    const double interp_err =
        std::sqrt(quadrature_error_sq(base, &u0, cfg.medium)) / u_norm_quad;
    auto proj = open_out(out / "projection_error.csv");
    proj << "K,rel_err_interpolant,rel_err_medium,rel_interp_err\n";
    for (int k = 1; k <= static_cast<int>(spec0.modes.size()) && k <= n_modes; ++k) {
        const std::vector<VecR> first(spec0.modes.begin(), spec0.modes.begin() + k);
        const VecR approx = phi0 + project(M, first, residual).field;
        const double e_interp = mass_norm(M, VecR(approx - u0)) / u_norm_mass;
        const double e_medium =
            std::sqrt(quadrature_error_sq(base, &approx, cfg.medium)) / u_norm_quad;
        proj << k << ',' << fmt17(e_interp) << ',' << fmt17(e_medium) << ','
             << fmt17(interp_err) << '\n';
    }
    write_manifest(out, cfg, "decompose");
}

void run_verify(const ScenarioConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    if (cfg.medium.is_raster())
        throw ConfigError("verify needs exact inclusion geometry, not a raster medium");
    if (cfg.medium.inclusions.empty()) throw ConfigError("verify needs at least one inclusion");
    const Mesh mesh = cfg.mesh.build();
    const double delta = cfg.decompose.delta_factor * mesh.h_max();
    const EstimateReport rep =
        verify_estimates(cfg.medium, mesh, cfg.weight, delta,
                         static_cast<int>(cfg.medium.inclusions.size()), cfg.decompose.v_rect,
                         cfg.asi.eig);
    auto f = open_out(out / "verify_report.csv");
    f << "check,lhs,rhs,pass\n";
    for (const EstimateCheck& c : rep.checks)
        f << c.id << ',' << fmt17(c.lhs) << ',' << fmt17(c.rhs) << ',' << (c.pass ? 1 : 0) << '\n';
    f << "constant_c," << fmt17(rep.constant_c) << ",,\n";
    f << "constant_c2," << fmt17(rep.constant_c2) << ",,\n";
    write_manifest(out, cfg, "verify");
    if (!rep.all_pass) throw NumericalError("estimate verification failed; see verify_report.csv");
}

void run_inversion(const ScenarioConfig& cfg, const std::filesystem::path& out,
                   const std::optional<std::filesystem::path>& resume_snapshot) {
    std::filesystem::create_directories(out);
    if (cfg.sources.empty()) throw ConfigError("invert needs at least one source");
    if (cfg.asi.frequencies.empty()) throw ConfigError("invert needs at least one frequency");
    if (!(cfg.initial_constant > 0.0)) throw ConfigError("initial_constant must be positive");

    const Mesh mesh = cfg.mesh.build();
    const std::vector<ObservationSet> obs = cfg.observations_dir
                                                ? read_observations(*cfg.observations_dir, cfg, mesh)
                                                : synthesize_observations(cfg);
    if (!cfg.observations_dir) write_observations(out / "observations", mesh, obs);

    const std::vector<GaussianSource> sources = resolve_sources(cfg, mesh);
    const std::vector<int> gamma = side_edges(mesh, cfg.gamma);
    const VecR truth = medium_nodal_values(mesh, cfg.medium);
    const VecR initial = VecR::Constant(mesh.num_vertices(), cfg.initial_constant);

    std::optional<AsiState> resume;
    if (resume_snapshot) resume = read_snapshot(*resume_snapshot);
    const auto snapshot_hook = [&](const AsiState& s) {
        write_snapshot(out / ("snapshot_f" + std::to_string(s.freq_index) + ".bin"), s);
    };

    const AsiResult res = asi_run(mesh, cfg.asi, sources, gamma, obs, initial, truth, &truth,
                                  resume ? &*resume : nullptr, snapshot_hook);

    write_history(out / "history.csv", res.history);
    {
        auto f = open_out(out / "bfgs_history.csv");
        f << "iteration,step,misfit\n";
        for (std::size_t m = 0; m < res.bfgs_values.size(); ++m)
            for (std::size_t s = 0; s < res.bfgs_values[m].size(); ++s)
                f << (m + 1) << ',' << s << ',' << fmt17(res.bfgs_values[m][s]) << '\n';
    }
    {
        auto f = open_out(out / "dimensions.csv");
        f << "iteration,J_m,new_modes,merged,kept\n";
        for (std::size_t m = 0; m < res.dimensions.size(); ++m)
            f << (m + 1) << ',' << res.dimensions[m].prev_dimension << ','
              << res.dimensions[m].new_modes << ',' << res.dimensions[m].merged_dimension << ','
              << res.dimensions[m].kept_dimension << '\n';
    }
    if (res.medium.size() > 0) write_field(out / "medium_final.csv", mesh, res.medium);
    write_field(out / "medium_true.csv", mesh, truth);
    write_manifest(out, cfg, "invert");

    if (!res.abort_reason.empty())
        throw NumericalError("inversion aborted: " + res.abort_reason +
                             " (partial outputs written to " + out.string() + ")");
}

}  // namespace asi

#include "asi/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "asi/errors.hpp"
#include "asi/sparse.hpp"

namespace asi {

double weight_value(double grad_norm, const WeightSpec& spec) {
    if (!(spec.epsilon > 0.0)) throw ConfigError("weight_value: epsilon must be positive");
    if (!(spec.q >= 1.0)) throw ConfigError("weight_value: q must be >= 1");
    const double t = std::max(grad_norm, 0.0);
    if (spec.form == WeightForm::Max) return 1.0 / std::max(t, spec.epsilon);
    return std::pow(std::pow(t, spec.q) + std::pow(spec.epsilon, spec.q), -1.0 / spec.q);
}

VecR weight_field(const Mesh& mesh, const VecR& w_nodal, const WeightSpec& spec) {
    const VecR g = element_gradient_norm(mesh, w_nodal);
    VecR mu(g.size());
    for (Eigen::Index t = 0; t < g.size(); ++t) mu[t] = weight_value(g[t], spec);
    return mu;
}

VecR compute_background(const Mesh& mesh, const VecR& element_weights,
                        const VecR& boundary_values) {
    if (boundary_values.size() != static_cast<Eigen::Index>(mesh.vertices.size()))
        throw ConfigError("compute_background: boundary values must be a full nodal field");
    const SparseReal K = assemble_weighted_stiffness(mesh, element_weights);

    VecR lift = VecR::Zero(boundary_values.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (mesh.is_boundary_vertex(static_cast<int>(v)))
            lift[static_cast<Eigen::Index>(v)] = boundary_values[static_cast<Eigen::Index>(v)];

    const VecR rhs = restrict_vec(mesh, -(K * lift));
    const SpdSolver solver(restrict_interior(mesh, K));
    return lift + extend_zero(mesh, solver.solve(rhs));
}

SpectralBasis compute_eigenbasis(const Mesh& mesh, const VecR& element_weights, int k,
                                 const EigenOptions& opts) {
    if (k < 1) throw ConfigError("compute_eigenbasis: need k >= 1");
    const SparseReal K_int = restrict_interior(mesh, assemble_weighted_stiffness(mesh, element_weights));
    const SparseReal M_int = restrict_interior(mesh, assemble_mass(mesh));
    const EigenPairs pairs = smallest_eigenpairs(K_int, M_int, k, opts);

    SpectralBasis basis;
    basis.lambda = pairs.values;
    basis.weights = element_weights;
    basis.modes.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) basis.modes.push_back(extend_zero(mesh, pairs.vectors.col(j)));
    return basis;
}

Projection project(const SparseReal& M, const std::vector<VecR>& modes, const VecR& v) {
    Projection p;
    p.coefficients = VecR::Zero(static_cast<Eigen::Index>(modes.size()));
    p.field = VecR::Zero(v.size());
    const VecR mv = M * v;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        const double c = modes[j].dot(mv);
        p.coefficients[static_cast<Eigen::Index>(j)] = c;
        p.field += c * modes[j];
    }
    return p;
}

double total_variation(const Mesh& mesh, const VecR& nodal) {
    const VecR g = element_gradient_norm(mesh, nodal);
    double s = 0.0;
    for (Eigen::Index t = 0; t < g.size(); ++t) s += mesh.triangle_area(static_cast<int>(t)) * g[t];
    return s;
}

VecR inclusion_indicator(const Mesh& mesh, const Medium& medium, int inclusion) {
    if (inclusion < 0 || inclusion >= static_cast<int>(medium.inclusions.size()))
        throw ConfigError("inclusion_indicator: index out of range");
    const Shape& shape = medium.inclusions[static_cast<std::size_t>(inclusion)].shape;
    VecR chi = VecR::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (shape_contains(shape, mesh.vertices[v])) chi[static_cast<Eigen::Index>(v)] = 1.0;
    return chi;
}

double l2_norm_sq_on_rect(const Mesh& mesh, const VecR& nodal, const Rect& rect) {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        if (!rect.contains(mesh.barycenter(t))) continue;
        const auto& tri = mesh.triangles[t];
        const double a = nodal[tri[0]], b = nodal[tri[1]], c = nodal[tri[2]];
        s += mesh.triangle_area(t) / 12.0 *
             (2.0 * (a * a + b * b + c * c) + 2.0 * (a * b + a * c + b * c));
    }
    return s;
}

namespace {

// Squared L2 norm of the gradient restricted to triangles outside the
// interface neighborhood (the flat region D).
double flat_gradient_sq(const Mesh& mesh, const RegionMask& mask, const VecR& nodal) {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        if (!mask.in_complement(t)) continue;
        const Point g = element_gradient(mesh, t, nodal);
        s += mesh.triangle_area(t) * dot(g, g);
    }
    return s;
}

}  // namespace

EstimateReport verify_estimates(const Medium& medium, const Mesh& mesh, const WeightSpec& spec,
                                double delta, int k, std::optional<Rect> v_rect,
                                const EigenOptions& eig_opts) {
    const RegionMask mask = classify_regions(mesh, medium, delta);
    const VecR u0 = medium_nodal_values(mesh, medium);
    const VecR mu = weight_field(mesh, u0, spec);
    const VecR phi0 = compute_background(mesh, mu, u0);
    SpectralBasis basis = compute_eigenbasis(mesh, mu, k, eig_opts);

    EstimateReport report;
    const double slack = 1e-9;

    // (a) background gradient on the flat region vs eps * TV of the medium.
    {
        EstimateCheck c;
        c.id = "background_gradient";
        c.lhs = flat_gradient_sq(mesh, mask, phi0);
        c.rhs = spec.epsilon * total_variation(mesh, u0);
        c.pass = c.lhs <= c.rhs * (1.0 + slack);
        report.all_pass = report.all_pass && c.pass;
        report.checks.push_back(std::move(c));
    }

    // (b) mode gradients on the flat region vs eps * lambda_k.
    for (int j = 0; j < k; ++j) {
        EstimateCheck c;
        c.id = "mode_gradient_" + std::to_string(j + 1);
        c.lhs = flat_gradient_sq(mesh, mask, basis.modes[static_cast<std::size_t>(j)]);
        c.rhs = spec.epsilon * basis.lambda[j];
        c.pass = c.lhs <= c.rhs * (1.0 + slack);
        report.all_pass = report.all_pass && c.pass;
        report.checks.push_back(std::move(c));
    }

    // (c) eigenvalue bounds: lambda_k against tau_k / min-jump with the TV
    // values sorted ascending; the implied constant is reported, not asserted.
    if (!medium.inclusions.empty()) {
        double min_jump = std::abs(medium.inclusions.front().value);
        std::vector<double> tau;
        for (int j = 0; j < static_cast<int>(medium.inclusions.size()); ++j) {
            tau.push_back(total_variation(mesh, inclusion_indicator(mesh, medium, j)));
            min_jump = std::min(min_jump, std::abs(medium.inclusions[static_cast<std::size_t>(j)].value));
        }
        std::sort(tau.begin(), tau.end());
        const int kc = std::min<int>(k, static_cast<int>(tau.size()));
        for (int j = 0; j < kc; ++j) {
            EstimateCheck c;
            c.id = "eigenvalue_bound_" + std::to_string(j + 1);
            c.lhs = basis.lambda[j];
            c.rhs = tau[static_cast<std::size_t>(j)] / min_jump;
            c.pass = true;
            if (c.rhs > 0.0) report.constant_c = std::max(report.constant_c, c.lhs / c.rhs);
            report.checks.push_back(std::move(c));
        }

        // (d) mode mass in a boundary rectangle vs eps / min-jump.
        if (v_rect) {
            for (int j = 0; j < k; ++j) {
                EstimateCheck c;
                c.id = "boundary_strip_" + std::to_string(j + 1);
                c.lhs = l2_norm_sq_on_rect(mesh, basis.modes[static_cast<std::size_t>(j)], *v_rect);
                c.rhs = spec.epsilon / min_jump;
                c.pass = true;
                if (c.rhs > 0.0) report.constant_c2 = std::max(report.constant_c2, c.lhs / c.rhs);
                report.checks.push_back(std::move(c));
            }
        }
    }
    return report;
}

}  // namespace asi

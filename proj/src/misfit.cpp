#include <cmath>
#include <numbers>

#include "asi/errors.hpp"
#include "asi/inversion.hpp"

namespace asi {

double ForwardProblem::omega() const { return 2.0 * std::numbers::pi * frequency; }

std::vector<int> gamma_nodes(const Mesh& mesh, const std::vector<int>& edges) {
    std::vector<int> nodes;
    nodes.reserve(edges.size() * 2);
    for (int idx : edges) {
        if (idx < 0 || idx >= static_cast<int>(mesh.boundary_edges.size()))
            throw ConfigError("gamma_nodes: edge index out of range");
        nodes.push_back(mesh.boundary_edges[static_cast<std::size_t>(idx)].a);
        nodes.push_back(mesh.boundary_edges[static_cast<std::size_t>(idx)].b);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

VecR SearchSpace::expand(const VecR& beta) const {
    if (beta.size() != static_cast<Eigen::Index>(basis.size()))
        throw ConfigError("SearchSpace::expand: coefficient count mismatch");
    VecR u = offset;
    for (std::size_t j = 0; j < basis.size(); ++j) u += beta[static_cast<Eigen::Index>(j)] * basis[j];
    return u;
}

namespace {

// r^H R r for a real symmetric R.
double quad_form(const SparseReal& R, const VecC& r) {
    const VecR a = R * r.real(), b = R * r.imag();
    return r.real().dot(a) + r.imag().dot(b);
}

}  // namespace

struct MisfitEvaluator::Solves {
    const HelmholtzOperator* op;
    std::vector<VecC> y;  // field per source
    std::vector<VecC> r;  // residual scattered to the full node set
    double value = 0.0;
};

MisfitEvaluator::MisfitEvaluator(const SearchSpace& space, const ForwardProblem& problem,
                                 const ObservationSet& obs)
    : space_(&space), problem_(&problem), obs_(&obs) {
    const Mesh& mesh = *problem.mesh;
    if (obs.values.size() != problem.sources.size())
        throw ConfigError("MisfitEvaluator: one observation per source required");
    if (std::abs(obs.frequency - problem.frequency) > 1e-12 * std::max(1.0, problem.frequency))
        throw ConfigError("MisfitEvaluator: observation frequency does not match the problem");
    if (gamma_nodes(mesh, problem.gamma_edges) != obs.gamma_nodes)
        throw ConfigError("MisfitEvaluator: observation nodes do not match the problem's boundary");
    for (const VecC& v : obs.values)
        if (v.size() != static_cast<Eigen::Index>(obs.gamma_nodes.size()))
            throw ConfigError("MisfitEvaluator: observation vector size mismatch");

    omega_ = problem.omega();
    gamma_mass_ = assemble_boundary_mass(
        mesh, problem.gamma_edges,
        VecR::Ones(static_cast<Eigen::Index>(problem.gamma_edges.size())));
    loads_.reserve(problem.sources.size());
    for (const GaussianSource& s : problem.sources) loads_.push_back(source_load(mesh, s));
}

MisfitEvaluator::Solves MisfitEvaluator::forward(const VecR& beta) const {
    const Mesh& mesh = *problem_->mesh;
    const VecR u = space_->expand(beta);
    if (op_)
        op_->update(u);
    else
        op_ = std::make_unique<HelmholtzOperator>(mesh, u, omega_);
    Solves s{op_.get(), {}, {}, 0.0};
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    for (std::size_t l = 0; l < loads_.size(); ++l) {
        const VecC y = s.op->solve(loads_[l].cast<Complex>());
        VecC r = VecC::Zero(n);
        for (std::size_t i = 0; i < obs_->gamma_nodes.size(); ++i) {
            const int node = obs_->gamma_nodes[i];
            r[node] = y[node] - obs_->values[l][static_cast<Eigen::Index>(i)];
        }
        s.value += 0.5 * quad_form(gamma_mass_, r);
        s.y.push_back(y);
        s.r.push_back(std::move(r));
    }
    return s;
}

double MisfitEvaluator::value(const VecR& beta) const { return forward(beta).value; }

MisfitResult MisfitEvaluator::value_and_gradient(const VecR& beta) const {
    const Mesh& mesh = *problem_->mesh;
    const Solves s = forward(beta);
    const VecR& c = s.op->edge_values();

    // Adjoint solves reuse the forward factorization: the system matrix is
    // complex symmetric, so the transposed solve is the plain solve with the
    // conjugated, observation-weighted residual as data.
    VecR t = VecR::Zero(static_cast<Eigen::Index>(mesh.triangles.size()));
    VecR se = VecR::Zero(static_cast<Eigen::Index>(mesh.boundary_edges.size()));
    for (std::size_t l = 0; l < s.y.size(); ++l) {
        const VecR rr = gamma_mass_ * s.r[l].real();
        const VecR ri = gamma_mass_ * s.r[l].imag();
        VecC rhs(rr.size());
        rhs.real() = rr;
        rhs.imag() = -ri;
        const VecC z = s.op->solve(rhs);
        const VecC& y = s.y[l];

        for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
            const auto& tri = mesh.triangles[e];
            const P1Element el = p1_element(mesh, e);
            Complex gyx = 0, gyy = 0, gzx = 0, gzy = 0;
            for (int i = 0; i < 3; ++i) {
                gyx += y[tri[i]] * el.grad[i].x;
                gyy += y[tri[i]] * el.grad[i].y;
                gzx += z[tri[i]] * el.grad[i].x;
                gzy += z[tri[i]] * el.grad[i].y;
            }
            t[e] -= el.area * (gzx * gyx + gzy * gyy).real();
        }
        for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
            const BoundaryEdge& e = mesh.boundary_edges[k];
            const double len6 = mesh.edge_length(e) / 6.0;
            const Complex q =
                len6 * (2.0 * z[e.a] * y[e.a] + z[e.a] * y[e.b] + z[e.b] * y[e.a] +
                        2.0 * z[e.b] * y[e.b]);
            const auto ke = static_cast<Eigen::Index>(k);
            se[ke] -= (Complex(0.0, 0.5 * omega_) * std::pow(c[ke], -1.5) * q).real();
        }
    }

    // Chain rule to nodal medium values: stiffness weights are element means,
    // the impedance coefficient is an edge mean.
    VecR G = VecR::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e)
        for (int i = 0; i < 3; ++i) G[mesh.triangles[e][i]] += t[e] / 3.0;
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const BoundaryEdge& e = mesh.boundary_edges[k];
        G[e.a] += 0.5 * se[static_cast<Eigen::Index>(k)];
        G[e.b] += 0.5 * se[static_cast<Eigen::Index>(k)];
    }

    MisfitResult out;
    out.value = s.value;
    out.gradient = VecR(static_cast<Eigen::Index>(space_->basis.size()));
    for (std::size_t j = 0; j < space_->basis.size(); ++j)
        out.gradient[static_cast<Eigen::Index>(j)] = space_->basis[j].dot(G);
    return out;
}

double evaluate_misfit(const VecR& beta, const SearchSpace& space, const ForwardProblem& problem,
                       const ObservationSet& obs) {
    return MisfitEvaluator(space, problem, obs).value(beta);
}

VecR misfit_gradient(const VecR& beta, const SearchSpace& space, const ForwardProblem& problem,
                     const ObservationSet& obs) {
    return MisfitEvaluator(space, problem, obs).value_and_gradient(beta).gradient;
}

}  // namespace asi

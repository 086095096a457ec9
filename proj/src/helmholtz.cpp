#include "asi/helmholtz.hpp"

#include <cmath>
#include <utility>

#include "asi/errors.hpp"

namespace asi {

VecR source_load(const Mesh& mesh, const GaussianSource& s) {
    if (!(s.width > 0.0)) throw ConfigError("source_load: width must be positive");
    const Point c = s.center;
    const double inv2w2 = 1.0 / (2.0 * s.width * s.width);
    const double amp = s.amplitude;
    return assemble_volume_load(mesh, [c, inv2w2, amp](Point p) {
        const double dx = p.x - c.x, dy = p.y - c.y;
        return amp * std::exp(-(dx * dx + dy * dy) * inv2w2);
    });
}

VecR edge_means(const Mesh& mesh, const VecR& nodal) {
    if (nodal.size() != static_cast<Eigen::Index>(mesh.vertices.size()))
        throw ConfigError("edge_means: nodal field size mismatch");
    VecR out(static_cast<Eigen::Index>(mesh.boundary_edges.size()));
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const BoundaryEdge& e = mesh.boundary_edges[k];
        out[static_cast<Eigen::Index>(k)] = 0.5 * (nodal[e.a] + nodal[e.b]);
    }
    return out;
}

VecR medium_edge_values(const Mesh& mesh, const Medium& medium) {
    VecR out(static_cast<Eigen::Index>(mesh.boundary_edges.size()));
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const BoundaryEdge& e = mesh.boundary_edges[k];
        out[static_cast<Eigen::Index>(k)] =
            0.5 * (medium.evaluate(mesh.vertices[e.a]) + medium.evaluate(mesh.vertices[e.b]));
    }
    return out;
}

Point side_normal(Side side) {
    switch (side) {
        case Side::Bottom: return {0.0, -1.0};
        case Side::Right: return {1.0, 0.0};
        case Side::Top: return {0.0, 1.0};
        case Side::Left: return {-1.0, 0.0};
    }
    throw ConfigError("side_normal: invalid side");
}

namespace {

SparseComplex build_operator(const Mesh& mesh, const VecR& w, const VecR& c, double omega) {
    if (w.size() != static_cast<Eigen::Index>(mesh.triangles.size()))
        throw ConfigError("HelmholtzOperator: one medium value per triangle required");
    if (c.size() != static_cast<Eigen::Index>(mesh.boundary_edges.size()))
        throw ConfigError("HelmholtzOperator: one medium value per boundary edge required");
    const double wmin = std::min(w.minCoeff(), c.minCoeff());
    if (!(wmin > 0.0)) throw NonpositiveMediumError(wmin);

    const SparseReal K = assemble_weighted_stiffness(mesh, w);
    const SparseReal M = assemble_mass(mesh);
    const SparseReal B =
        assemble_boundary_mass(mesh, all_boundary_edges(mesh), c.array().pow(-0.5).matrix());

    SparseComplex A =
        (K - omega * omega * M).cast<Complex>() - Complex(0.0, omega) * B.cast<Complex>();
    A.makeCompressed();
    return A;
}

}  // namespace

HelmholtzOperator::HelmholtzOperator(const Mesh& mesh, VecR element_values, VecR edge_values,
                                     double omega)
    : mesh_(&mesh),
      omega_(omega),
      element_values_(std::move(element_values)),
      edge_values_(std::move(edge_values)),
      A_(build_operator(mesh, element_values_, edge_values_, omega)),
      lu_(A_) {}

HelmholtzOperator::HelmholtzOperator(const Mesh& mesh, const VecR& nodal_medium, double omega)
    : HelmholtzOperator(mesh, element_means(mesh, nodal_medium), edge_means(mesh, nodal_medium),
                        omega) {}

void HelmholtzOperator::update(VecR element_values, VecR edge_values) {
    element_values_ = std::move(element_values);
    edge_values_ = std::move(edge_values);
    A_ = build_operator(*mesh_, element_values_, edge_values_, omega_);
    lu_.factor(A_);
}

void HelmholtzOperator::update(const VecR& nodal_medium) {
    update(element_means(*mesh_, nodal_medium), edge_means(*mesh_, nodal_medium));
}

HelmholtzOperator::HelmholtzOperator(const Mesh& mesh, const Medium& medium, double omega)
    : HelmholtzOperator(mesh, medium_element_values(mesh, medium), medium_edge_values(mesh, medium),
                        omega) {}

}  // namespace asi

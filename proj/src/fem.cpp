#include "asi/fem.hpp"

#include <cmath>
#include <vector>

#include "asi/errors.hpp"

namespace asi {

namespace {

using Triplet = Eigen::Triplet<Real>;

SparseReal from_triplets(Eigen::Index n, std::vector<Triplet>& trips) {
    SparseReal A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
}

}  // namespace

P1Element p1_element(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const Point p0 = mesh.vertices[tri[0]];
    const Point p1 = mesh.vertices[tri[1]];
    const Point p2 = mesh.vertices[tri[2]];
    P1Element el;
    el.area = mesh.triangle_area(t);
    const double inv2a = 1.0 / (2.0 * el.area);
    el.grad[0] = Point{(p1.y - p2.y) * inv2a, (p2.x - p1.x) * inv2a};
    el.grad[1] = Point{(p2.y - p0.y) * inv2a, (p0.x - p2.x) * inv2a};
    el.grad[2] = Point{(p0.y - p1.y) * inv2a, (p1.x - p0.x) * inv2a};
    return el;
}

SparseReal assemble_mass(const Mesh& mesh) {
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a12 = mesh.triangle_area(t) / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(tri[i], tri[j], a12 * (i == j ? 2.0 : 1.0));
    }
    return from_triplets(n, trips);
}

SparseReal assemble_weighted_stiffness(const Mesh& mesh, const VecR& element_weights) {
    if (element_weights.size() != static_cast<Eigen::Index>(mesh.triangles.size()))
        throw ConfigError("assemble_weighted_stiffness: one weight per triangle required");
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const P1Element el = p1_element(mesh, t);
        const double wa = element_weights[t] * el.area;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(tri[i], tri[j], wa * dot(el.grad[i], el.grad[j]));
    }
    return from_triplets(n, trips);
}

SparseReal assemble_boundary_mass(const Mesh& mesh, const std::vector<int>& edges,
                                  const VecR& edge_coeff) {
    if (edge_coeff.size() != static_cast<Eigen::Index>(edges.size()))
        throw ConfigError("assemble_boundary_mass: one coefficient per listed edge required");
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<Triplet> trips;
    trips.reserve(edges.size() * 4);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const int idx = edges[k];
        if (idx < 0 || idx >= static_cast<int>(mesh.boundary_edges.size()))
            throw ConfigError("assemble_boundary_mass: edge index out of range");
        const BoundaryEdge& e = mesh.boundary_edges[idx];
        const double c6 = edge_coeff[static_cast<Eigen::Index>(k)] * mesh.edge_length(e) / 6.0;
        trips.emplace_back(e.a, e.a, 2.0 * c6);
        trips.emplace_back(e.b, e.b, 2.0 * c6);
        trips.emplace_back(e.a, e.b, c6);
        trips.emplace_back(e.b, e.a, c6);
    }
    return from_triplets(n, trips);
}

SparseReal assemble_boundary_mass(const Mesh& mesh) {
    const std::vector<int> edges = all_boundary_edges(mesh);
    return assemble_boundary_mass(mesh, edges, VecR::Ones(static_cast<Eigen::Index>(edges.size())));
}

VecR element_means(const Mesh& mesh, const VecR& nodal) {
    if (nodal.size() != static_cast<Eigen::Index>(mesh.vertices.size()))
        throw ConfigError("element_means: nodal field size mismatch");
    VecR out(static_cast<Eigen::Index>(mesh.triangles.size()));
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        out[t] = (nodal[tri[0]] + nodal[tri[1]] + nodal[tri[2]]) / 3.0;
    }
    return out;
}

VecR medium_element_values(const Mesh& mesh, const Medium& medium) {
    VecR out(static_cast<Eigen::Index>(mesh.triangles.size()));
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        out[t] = medium.evaluate(mesh.barycenter(t));
    return out;
}

VecR medium_nodal_values(const Mesh& mesh, const Medium& medium) {
    VecR out(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        out[static_cast<Eigen::Index>(v)] = medium.evaluate(mesh.vertices[v]);
    return out;
}

Point element_gradient(const Mesh& mesh, int t, const VecR& nodal) {
    const auto& tri = mesh.triangles[t];
    const P1Element el = p1_element(mesh, t);
    Point g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) g = g + nodal[tri[i]] * el.grad[i];
    return g;
}

VecR element_gradient_norm(const Mesh& mesh, const VecR& nodal) {
    if (nodal.size() != static_cast<Eigen::Index>(mesh.vertices.size()))
        throw ConfigError("element_gradient_norm: nodal field size mismatch");
    VecR out(static_cast<Eigen::Index>(mesh.triangles.size()));
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        out[t] = norm(element_gradient(mesh, t, nodal));
    return out;
}

VecR interpolate(const Mesh& mesh, const std::function<double(Point)>& f) {
    VecR out(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        out[static_cast<Eigen::Index>(v)] = f(mesh.vertices[v]);
    return out;
}

VecC interpolate_complex(const Mesh& mesh, const std::function<Complex(Point)>& f) {
    VecC out(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        out[static_cast<Eigen::Index>(v)] = f(mesh.vertices[v]);
    return out;
}

VecR assemble_volume_load(const Mesh& mesh, const std::function<double(Point)>& f) {
    VecR load = VecR::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const Point p0 = mesh.vertices[tri[0]];
        const Point p1 = mesh.vertices[tri[1]];
        const Point p2 = mesh.vertices[tri[2]];
        const double fm[3] = {f(0.5 * (p1 + p2)), f(0.5 * (p0 + p2)), f(0.5 * (p0 + p1))};
        const double a3 = mesh.triangle_area(t) / 3.0;
        for (int i = 0; i < 3; ++i)
            load[tri[i]] += a3 * 0.5 * (fm[(i + 1) % 3] + fm[(i + 2) % 3]);
    }
    return load;
}

VecC assemble_boundary_load(const Mesh& mesh, const std::vector<int>& edges,
                            const std::function<Complex(Point)>& g) {
    VecC load = VecC::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (int idx : edges) {
        if (idx < 0 || idx >= static_cast<int>(mesh.boundary_edges.size()))
            throw ConfigError("assemble_boundary_load: edge index out of range");
        const BoundaryEdge& e = mesh.boundary_edges[idx];
        const Point pa = mesh.vertices[e.a];
        const Point pb = mesh.vertices[e.b];
        const double len = mesh.edge_length(e);
        const Complex ga = g(pa), gm = g(0.5 * (pa + pb)), gb = g(pb);
        load[e.a] += len * (ga / 6.0 + gm / 3.0);
        load[e.b] += len * (gb / 6.0 + gm / 3.0);
    }
    return load;
}

double integrate_nodal(const Mesh& mesh, const VecR& nodal) {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        s += mesh.triangle_area(t) / 3.0 * (nodal[tri[0]] + nodal[tri[1]] + nodal[tri[2]]);
    }
    return s;
}

SparseReal restrict_interior(const Mesh& mesh, const SparseReal& A) {
    const auto m = static_cast<Eigen::Index>(mesh.num_interior());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(A.nonZeros()));
    for (int col = 0; col < A.outerSize(); ++col) {
        const int jc = mesh.interior_index(col);
        if (jc < 0) continue;
        for (SparseReal::InnerIterator it(A, col); it; ++it) {
            const int ir = mesh.interior_index(static_cast<int>(it.row()));
            if (ir < 0) continue;
            trips.emplace_back(ir, jc, it.value());
        }
    }
    SparseReal B(m, m);
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    return B;
}

VecR restrict_vec(const Mesh& mesh, const VecR& full) {
    VecR out(static_cast<Eigen::Index>(mesh.num_interior()));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const int ir = mesh.interior_index(static_cast<int>(v));
        if (ir >= 0) out[ir] = full[static_cast<Eigen::Index>(v)];
    }
    return out;
}

VecR extend_zero(const Mesh& mesh, const VecR& interior) {
    VecR out = VecR::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const int ir = mesh.interior_index(static_cast<int>(v));
        if (ir >= 0) out[static_cast<Eigen::Index>(v)] = interior[ir];
    }
    return out;
}

std::vector<int> all_boundary_edges(const Mesh& mesh) {
    std::vector<int> edges(mesh.boundary_edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = static_cast<int>(i);
    return edges;
}

}  // namespace asi

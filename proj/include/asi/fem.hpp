#pragma once

#include <functional>
#include <vector>

#include "asi/medium.hpp"
#include "asi/mesh.hpp"
#include "asi/sparse.hpp"

namespace asi {

// Geometry of one linear triangular element: constant basis gradients and area.
struct P1Element {
    std::array<Point, 3> grad;
    double area = 0.0;
};

P1Element p1_element(const Mesh& mesh, int t);

// Consistent mass matrix, M_ij = integral of phi_i phi_j.
SparseReal assemble_mass(const Mesh& mesh);

// Stiffness with one weight per triangle: K_ij = sum_e w_e * int_e grad phi_i . grad phi_j.
SparseReal assemble_weighted_stiffness(const Mesh& mesh, const VecR& element_weights);

// Boundary mass over a subset of boundary edges with one coefficient per listed
// edge: B_ij = sum_e c_e * int_e phi_i phi_j ds.
SparseReal assemble_boundary_mass(const Mesh& mesh, const std::vector<int>& edges,
                                  const VecR& edge_coeff);
// All boundary edges, unit coefficient.
SparseReal assemble_boundary_mass(const Mesh& mesh);

// Per-triangle mean of a nodal field (exact integral mean for P1 data).
VecR element_means(const Mesh& mesh, const VecR& nodal);

// Medium sampled per triangle at barycenters (respects discontinuities) and
// per vertex (for plotting and interpolation error studies).
VecR medium_element_values(const Mesh& mesh, const Medium& medium);
VecR medium_nodal_values(const Mesh& mesh, const Medium& medium);

// Constant gradient of a nodal field on one triangle, and its norm per triangle.
Point element_gradient(const Mesh& mesh, int t, const VecR& nodal);
VecR element_gradient_norm(const Mesh& mesh, const VecR& nodal);

// Vertex interpolation of a function.
VecR interpolate(const Mesh& mesh, const std::function<double(Point)>& f);
VecC interpolate_complex(const Mesh& mesh, const std::function<Complex(Point)>& f);

// Load vectors: volume term int f phi_i with edge-midpoint quadrature (exact
// for quadratic f), boundary term int g phi_i ds with Simpson quadrature.
VecR assemble_volume_load(const Mesh& mesh, const std::function<double(Point)>& f);
VecC assemble_boundary_load(const Mesh& mesh, const std::vector<int>& edges,
                            const std::function<Complex(Point)>& g);

// Exact integral of a P1 nodal field.
double integrate_nodal(const Mesh& mesh, const VecR& nodal);

// Restriction to interior (non-boundary) vertices and zero extension back.
SparseReal restrict_interior(const Mesh& mesh, const SparseReal& A);
VecR restrict_vec(const Mesh& mesh, const VecR& full);
VecR extend_zero(const Mesh& mesh, const VecR& interior);

// All boundary edge indices [0, mesh.boundary_edges.size()).
std::vector<int> all_boundary_edges(const Mesh& mesh);

}  // namespace asi

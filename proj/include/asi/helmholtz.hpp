#pragma once

#include "asi/fem.hpp"
#include "asi/medium.hpp"

namespace asi {

struct GaussianSource {
    Point center;
    double width = 0.0;  // standard deviation of the Gaussian bump
    double amplitude = 1.0;
};

// Load vector for f(x) = amplitude * exp(-|x - center|^2 / (2 width^2)).
VecR source_load(const Mesh& mesh, const GaussianSource& s);

// Medium value averaged per boundary edge: mean of the two endpoint values of
// a nodal field, or of pointwise medium evaluations.
VecR edge_means(const Mesh& mesh, const VecR& nodal);
VecR medium_edge_values(const Mesh& mesh, const Medium& medium);

// Outward unit normal of a boundary side of the rectangular domain.
Point side_normal(Side side);

// Discrete time-harmonic operator A = K(w) - omega^2 M - i omega B(c^{-1/2})
// with per-triangle medium values w in the stiffness and per-boundary-edge
// medium averages c in the impedance term. A is complex symmetric, and a
// single LU factorization is reused across right-hand sides.
class HelmholtzOperator {
  public:
    HelmholtzOperator(const Mesh& mesh, VecR element_values, VecR edge_values, double omega);

    // Convenience constructors: a candidate medium as a nodal field (element
    // means and edge means derived from it) or an exact piecewise medium.
    HelmholtzOperator(const Mesh& mesh, const VecR& nodal_medium, double omega);
    HelmholtzOperator(const Mesh& mesh, const Medium& medium, double omega);

    // Re-assemble and re-factor for a new medium on the same mesh, reusing the
    // symbolic analysis of the factorization.
    void update(VecR element_values, VecR edge_values);
    void update(const VecR& nodal_medium);

    VecC solve(const VecC& rhs) const { return lu_.solve(rhs); }

    const SparseComplex& matrix() const { return A_; }
    const Mesh& mesh() const { return *mesh_; }
    double omega() const { return omega_; }
    const VecR& element_values() const { return element_values_; }
    const VecR& edge_values() const { return edge_values_; }

  private:
    const Mesh* mesh_;
    double omega_;
    VecR element_values_;  // per triangle
    VecR edge_values_;     // per boundary edge, before the -1/2 power
    SparseComplex A_;
    LuSolver<Complex> lu_;
};

}  // namespace asi

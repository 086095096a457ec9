#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "asi/geometry.hpp"

namespace asi {

enum class Side : std::uint8_t { Bottom, Right, Top, Left };

struct BoundaryEdge {
    int a = -1;  // vertex indices, oriented along the boundary
    int b = -1;
    Side side = Side::Bottom;
};

// Structured criss-cross triangulation of a rectangle. Each grid cell is split
// along a diagonal whose direction alternates with (i + j) parity, so the mesh
// is symmetric under axis mirroring for even cell counts.
class Mesh {
  public:
    Rect domain;
    int cells_x = 0;
    int cells_y = 0;
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex indices
    std::vector<BoundaryEdge> boundary_edges;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    double hx() const { return domain.width() / cells_x; }
    double hy() const { return domain.height() / cells_y; }
    // Longest edge in the mesh (the cell diagonal).
    double h_max() const { return std::hypot(hx(), hy()); }

    double triangle_area(int t) const;
    Point barycenter(int t) const;
    double edge_length(const BoundaryEdge& e) const { return distance(vertices[e.a], vertices[e.b]); }

    bool is_boundary_vertex(int v) const { return boundary_flag_[v]; }
    // Maps vertex index to interior index, -1 for boundary vertices.
    const std::vector<int>& interior_index() const { return interior_index_; }
    int interior_index(int v) const { return interior_index_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& interior_vertices() const { return interior_vertices_; }
    int num_interior() const { return static_cast<int>(interior_vertices_.size()); }

    int vertex_at(int i, int j) const { return j * (cells_x + 1) + i; }

    void finalize();  // builds boundary flags and interior numbering

  private:
    std::vector<char> boundary_flag_;
    std::vector<int> interior_index_;
    std::vector<int> interior_vertices_;
};

// refine uniformly doubles the cell count in each direction, so areas quarter
// and h_max halves per level, and coarse vertices persist in refined meshes.
Mesh build_rect_mesh(const Rect& domain, int nx, int ny, int refine = 0);

}  // namespace asi

#include "asi/mesh.hpp"

#include <cmath>

#include "asi/errors.hpp"

namespace asi {

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Point a = vertices[tri[0]];
    const Point b = vertices[tri[1]];
    const Point c = vertices[tri[2]];
    return 0.5 * cross(b - a, c - a);
}

Point Mesh::barycenter(int t) const {
    const auto& tri = triangles[t];
    const Point a = vertices[tri[0]];
    const Point b = vertices[tri[1]];
    const Point c = vertices[tri[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

void Mesh::finalize() {
    boundary_flag_.assign(vertices.size(), 0);
    for (const auto& e : boundary_edges) {
        boundary_flag_[e.a] = 1;
        boundary_flag_[e.b] = 1;
    }
    interior_index_.assign(vertices.size(), -1);
    interior_vertices_.clear();
    for (int v = 0; v < num_vertices(); ++v) {
        if (!boundary_flag_[v]) {
            interior_index_[v] = static_cast<int>(interior_vertices_.size());
            interior_vertices_.push_back(v);
        }
    }
}

Mesh build_rect_mesh(const Rect& domain, int nx, int ny, int refine) {
    if (nx < 1 || ny < 1 || refine < 0) throw ConfigError("mesh: nx, ny must be >= 1 and refine >= 0");
    if (domain.width() <= 0.0 || domain.height() <= 0.0)
        throw ConfigError("mesh: domain must have positive extent");

    Mesh mesh;
    mesh.domain = domain;
    mesh.cells_x = nx << refine;
    mesh.cells_y = ny << refine;
    const int N = mesh.cells_x;
    const int M = mesh.cells_y;
    const double hx = domain.width() / N;
    const double hy = domain.height() / M;

    mesh.vertices.reserve(static_cast<std::size_t>(N + 1) * (M + 1));
    for (int j = 0; j <= M; ++j)
        for (int i = 0; i <= N; ++i)
            mesh.vertices.push_back({domain.x0 + i * hx, domain.y0 + j * hy});

    const auto v = [&](int i, int j) { return j * (N + 1) + i; };
    mesh.triangles.reserve(static_cast<std::size_t>(2) * N * M);
    for (int j = 0; j < M; ++j) {
        for (int i = 0; i < N; ++i) {
            const int v00 = v(i, j), v10 = v(i + 1, j), v01 = v(i, j + 1), v11 = v(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                mesh.triangles.push_back({v00, v10, v11});
                mesh.triangles.push_back({v00, v11, v01});
            } else {
                mesh.triangles.push_back({v00, v10, v01});
                mesh.triangles.push_back({v10, v11, v01});
            }
        }
    }

    for (int i = 0; i < N; ++i) mesh.boundary_edges.push_back({v(i, 0), v(i + 1, 0), Side::Bottom});
    for (int j = 0; j < M; ++j) mesh.boundary_edges.push_back({v(N, j), v(N, j + 1), Side::Right});
    for (int i = N; i > 0; --i) mesh.boundary_edges.push_back({v(i, M), v(i - 1, M), Side::Top});
    for (int j = M; j > 0; --j) mesh.boundary_edges.push_back({v(0, j), v(0, j - 1), Side::Left});

    mesh.finalize();
    return mesh;
}

}  // namespace asi

#include "asi/medium.hpp"

#include <algorithm>
#include <cmath>

#include "asi/errors.hpp"

namespace asi {

namespace {

constexpr double kGeomTol = 1e-12;

bool touches_domain_boundary(const Rect& r, const Rect& dom) {
    return std::abs(r.x0 - dom.x0) < kGeomTol || std::abs(r.x1 - dom.x1) < kGeomTol ||
           std::abs(r.y0 - dom.y0) < kGeomTol || std::abs(r.y1 - dom.y1) < kGeomTol;
}

double overlap_area(const Rect& a, const Rect& b) {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

bool strictly_inside(const Shape& shape, const Rect& dom) {
    if (const auto* d = std::get_if<Disk>(&shape)) {
        return d->center.x - d->radius > dom.x0 && d->center.x + d->radius < dom.x1 &&
               d->center.y - d->radius > dom.y0 && d->center.y + d->radius < dom.y1;
    }
    for (const Point& p : std::get<Polygon>(shape).vertices)
        if (p.x <= dom.x0 || p.x >= dom.x1 || p.y <= dom.y0 || p.y >= dom.y1) return false;
    return true;
}

}  // namespace

void Medium::validate() const {
    if (domain.width() <= 0.0 || domain.height() <= 0.0)
        throw ConfigError("medium: domain must have positive extent");
    if (raster.has_value()) {
        const auto& r = *raster;
        if (r.nx < 2 || r.ny < 2) throw ConfigError("medium: raster needs at least 2x2 nodes");
        if (static_cast<int>(r.values.size()) != r.nx * r.ny)
            throw ConfigError("medium: raster value count does not match nx*ny");
        return;
    }
    if (pieces.empty()) throw ConfigError("medium: background needs at least one piece");
    double total = 0.0;
    for (std::size_t m = 0; m < pieces.size(); ++m) {
        const Rect& r = pieces[m].rect;
        if (r.x1 - r.x0 <= 0.0 || r.y1 - r.y0 <= 0.0)
            throw ConfigError("medium: background piece " + std::to_string(m) + " is degenerate");
        if (r.x0 < domain.x0 - kGeomTol || r.x1 > domain.x1 + kGeomTol ||
            r.y0 < domain.y0 - kGeomTol || r.y1 > domain.y1 + kGeomTol)
            throw ConfigError("medium: background piece " + std::to_string(m) +
                              " exceeds the domain");
        if (!touches_domain_boundary(r, domain))
            throw ConfigError("medium: background piece " + std::to_string(m) +
                              " does not touch the domain boundary");
        for (std::size_t l = 0; l < m; ++l)
            if (overlap_area(r, pieces[l].rect) > kGeomTol)
                throw ConfigError("medium: background pieces " + std::to_string(l) + " and " +
                                  std::to_string(m) + " overlap");
        total += r.area();
    }
    if (std::abs(total - domain.area()) > 1e-9 * domain.area())
        throw ConfigError("medium: background pieces do not cover the domain");

    for (std::size_t k = 0; k < inclusions.size(); ++k) {
        if (shape_area(inclusions[k].shape) <= 0.0)
            throw ConfigError("medium: inclusion " + std::to_string(k) + " has zero area");
        if (!strictly_inside(inclusions[k].shape, domain))
            throw ConfigError("medium: inclusion " + std::to_string(k) +
                              " is not strictly inside the domain");
        for (std::size_t l = 0; l < k; ++l)
            if (boundary_gap(inclusions[k].shape, inclusions[l].shape) <= 0.0)
                throw ConfigError("medium: boundaries of inclusions " + std::to_string(l) +
                                  " and " + std::to_string(k) + " touch");
    }
}

double Medium::background_value(Point p) const {
    if (raster.has_value()) return evaluate(p);
    // Later-listed pieces win on shared edges.
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it)
        if (it->rect.contains(p)) return it->value;
    // Points marginally outside (roundoff): clamp to the nearest piece.
    const Point q{std::clamp(p.x, domain.x0, domain.x1), std::clamp(p.y, domain.y0, domain.y1)};
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it)
        if (it->rect.contains(q)) return it->value;
    throw ConfigError("medium: point outside every background piece");
}

double Medium::evaluate(Point p) const {
    if (raster.has_value()) {
        const auto& r = *raster;
        const double fx = std::clamp((p.x - domain.x0) / domain.width(), 0.0, 1.0) * (r.nx - 1);
        const double fy = std::clamp((p.y - domain.y0) / domain.height(), 0.0, 1.0) * (r.ny - 1);
        const int i = std::min(static_cast<int>(fx), r.nx - 2);
        const int j = std::min(static_cast<int>(fy), r.ny - 2);
        const double sx = fx - i, sy = fy - j;
        const auto at = [&](int ii, int jj) { return r.values[jj * r.nx + ii]; };
        return (1 - sx) * (1 - sy) * at(i, j) + sx * (1 - sy) * at(i + 1, j) +
               (1 - sx) * sy * at(i, j + 1) + sx * sy * at(i + 1, j + 1);
    }
    double u = background_value(p);
    for (const auto& inc : inclusions)
        if (shape_contains(inc.shape, p)) u += inc.value;
    return u;
}

std::vector<Segment> Medium::interior_interfaces() const {
    std::vector<Segment> segs;
    const auto add_clipped = [&](Point a, Point b) {
        // Drop edge parts lying on the domain boundary (axis-aligned edges only).
        if (std::abs(a.x - b.x) < kGeomTol) {
            const double x = a.x;
            if (std::abs(x - domain.x0) < kGeomTol || std::abs(x - domain.x1) < kGeomTol) return;
        } else {
            const double y = a.y;
            if (std::abs(y - domain.y0) < kGeomTol || std::abs(y - domain.y1) < kGeomTol) return;
        }
        segs.push_back({a, b});
    };
    for (const auto& piece : pieces) {
        const Rect& r = piece.rect;
        add_clipped({r.x0, r.y0}, {r.x1, r.y0});
        add_clipped({r.x1, r.y0}, {r.x1, r.y1});
        add_clipped({r.x1, r.y1}, {r.x0, r.y1});
        add_clipped({r.x0, r.y1}, {r.x0, r.y0});
    }
    return segs;
}

double Medium::dist_to_background_interfaces(Point p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : interior_interfaces()) d = std::min(d, dist_point_segment(p, s));
    return d;
}

std::vector<InclusionGeometry> interface_length(const Medium& medium) {
    if (medium.is_raster())
        throw ConfigError("interface_length: raster media have no exact interface geometry");
    std::vector<InclusionGeometry> out;
    out.reserve(medium.inclusions.size());
    for (const auto& inc : medium.inclusions)
        out.push_back({shape_perimeter(inc.shape), shape_area(inc.shape)});
    return out;
}

double RegionMask::area(const Mesh& mesh, RegionKind kind, int inclusion) const {
    double a = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Region& r = tri_regions[t];
        if (r.kind == kind && (inclusion < 0 || r.inclusion == inclusion)) a += mesh.triangle_area(t);
    }
    return a;
}

RegionMask classify_regions(const Mesh& mesh, const Medium& medium, double delta) {
    if (medium.is_raster())
        throw ConfigError("classify_regions: raster media have no exact interface geometry");
    if (delta <= 0.0) throw ConfigError("classify_regions: delta must be positive");

    const auto& incs = medium.inclusions;
    const auto interfaces = medium.interior_interfaces();

    // Exact separation checks first, naming the offending pair.
    for (std::size_t k = 0; k < incs.size(); ++k) {
        for (std::size_t l = 0; l < k; ++l)
            if (boundary_gap(incs[k].shape, incs[l].shape) <= 2.0 * delta)
                throw RegionSeparationError("delta-neighborhoods of inclusions " +
                                            std::to_string(l) + " and " + std::to_string(k) +
                                            " overlap");
        for (const auto& s : interfaces)
            if (boundary_gap(incs[k].shape, s) <= 2.0 * delta)
                throw RegionSeparationError("delta-neighborhood of inclusion " + std::to_string(k) +
                                            " overlaps a background interface band");
        if (const auto* d = std::get_if<Disk>(&incs[k].shape))
            if (d->radius <= delta)
                throw RegionSeparationError("inclusion " + std::to_string(k) +
                                            " has an empty delta-interior (radius <= delta)");
    }

    RegionMask mask;
    mask.delta = delta;
    mask.tri_regions.assign(mesh.num_triangles(), Region{});
    std::vector<char> core_seen(incs.size(), 0);

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Point b = mesh.barycenter(t);
        Region region;
        if (medium.dist_to_background_interfaces(b) < delta) {
            region = {RegionKind::BackgroundBand, -1};
        } else {
            int band = -1;
            for (std::size_t k = 0; k < incs.size(); ++k) {
                if (shape_boundary_distance(incs[k].shape, b) < delta) {
                    band = static_cast<int>(k);
                    break;  // separation checks guarantee at most one
                }
            }
            if (band >= 0) {
                region = {RegionKind::InclusionBand, band};
            } else {
                int core = -1;
                for (std::size_t k = 0; k < incs.size(); ++k)
                    if (shape_contains(incs[k].shape, b)) core = static_cast<int>(k);
                region = core >= 0 ? Region{RegionKind::Core, core} : Region{RegionKind::Outside, -1};
                if (core >= 0) core_seen[core] = 1;
            }
        }
        mask.tri_regions[t] = region;
    }

    for (std::size_t k = 0; k < incs.size(); ++k)
        if (!core_seen[k])
            throw RegionSeparationError("inclusion " + std::to_string(k) +
                                        " has an empty delta-interior at mesh resolution");
    return mask;
}

}  // namespace asi

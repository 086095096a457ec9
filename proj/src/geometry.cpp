#include "asi/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace asi {

double dist_point_segment(Point p, const Segment& s) {
    const Point d = s.b - s.a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return distance(p, s.a);
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(p, s.a + t * d);
}

namespace {

bool segments_intersect(const Segment& s, const Segment& t) {
    const auto orient = [](Point a, Point b, Point c) {
        const double v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    };
    const int o1 = orient(s.a, s.b, t.a);
    const int o2 = orient(s.a, s.b, t.b);
    const int o3 = orient(t.a, t.b, s.a);
    const int o4 = orient(t.a, t.b, s.b);
    if (o1 != o2 && o3 != o4) return true;
    const auto on = [](Point a, Point b, Point c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
    };
    if (o1 == 0 && on(s.a, s.b, t.a)) return true;
    if (o2 == 0 && on(s.a, s.b, t.b)) return true;
    if (o3 == 0 && on(t.a, t.b, s.a)) return true;
    if (o4 == 0 && on(t.a, t.b, s.b)) return true;
    return false;
}

}  // namespace

double dist_segment_segment(const Segment& s, const Segment& t) {
    if (segments_intersect(s, t)) return 0.0;
    return std::min(std::min(dist_point_segment(t.a, s), dist_point_segment(t.b, s)),
                    std::min(dist_point_segment(s.a, t), dist_point_segment(s.b, t)));
}

double dist_segment_circle(const Segment& s, const Disk& d) {
    const double dmin = dist_point_segment(d.center, s);
    const double dmax = std::max(distance(s.a, d.center), distance(s.b, d.center));
    if (dmin > d.radius) return dmin - d.radius;
    if (dmax < d.radius) return d.radius - dmax;
    return 0.0;
}

double dist_circle_circle(const Disk& a, const Disk& b) {
    const double d = distance(a.center, b.center);
    const double outer = d - a.radius - b.radius;
    const double nested = std::max(a.radius, b.radius) - d - std::min(a.radius, b.radius);
    return std::max({0.0, outer, nested});
}

double polygon_area(const Polygon& poly) {
    const auto& v = poly.vertices;
    double twice = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        twice += cross(p, q);
    }
    return std::abs(twice) / 2.0;
}

double polygon_perimeter(const Polygon& poly) {
    const auto& v = poly.vertices;
    double len = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) len += distance(v[i], v[(i + 1) % v.size()]);
    return len;
}

bool polygon_contains(const Polygon& poly, Point p) {
    const auto& v = poly.vertices;
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (dist_point_segment(p, {v[j], v[i]}) == 0.0) return true;
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double xc = v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

double dist_point_polygon_boundary(const Polygon& poly, Point p) {
    const auto& v = poly.vertices;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++)
        d = std::min(d, dist_point_segment(p, {v[j], v[i]}));
    return d;
}

bool shape_contains(const Shape& shape, Point p) {
    if (const auto* d = std::get_if<Disk>(&shape)) return distance(p, d->center) <= d->radius;
    return polygon_contains(std::get<Polygon>(shape), p);
}

double shape_boundary_distance(const Shape& shape, Point p) {
    if (const auto* d = std::get_if<Disk>(&shape))
        return std::abs(distance(p, d->center) - d->radius);
    return dist_point_polygon_boundary(std::get<Polygon>(shape), p);
}

double shape_area(const Shape& shape) {
    if (const auto* d = std::get_if<Disk>(&shape)) return M_PI * d->radius * d->radius;
    return polygon_area(std::get<Polygon>(shape));
}

double shape_perimeter(const Shape& shape) {
    if (const auto* d = std::get_if<Disk>(&shape)) return 2.0 * M_PI * d->radius;
    return polygon_perimeter(std::get<Polygon>(shape));
}

namespace {

std::vector<Segment> polygon_edges(const Polygon& poly) {
    std::vector<Segment> edges;
    const auto& v = poly.vertices;
    edges.reserve(v.size());
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) edges.push_back({v[j], v[i]});
    return edges;
}

}  // namespace

double boundary_gap(const Shape& a, const Shape& b) {
    if (const auto* da = std::get_if<Disk>(&a)) {
        if (const auto* db = std::get_if<Disk>(&b)) return dist_circle_circle(*da, *db);
        double d = std::numeric_limits<double>::infinity();
        for (const auto& e : polygon_edges(std::get<Polygon>(b)))
            d = std::min(d, dist_segment_circle(e, *da));
        return d;
    }
    const auto& pa = std::get<Polygon>(a);
    if (const auto* db = std::get_if<Disk>(&b)) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& e : polygon_edges(pa)) d = std::min(d, dist_segment_circle(e, *db));
        return d;
    }
    double d = std::numeric_limits<double>::infinity();
    for (const auto& ea : polygon_edges(pa))
        for (const auto& eb : polygon_edges(std::get<Polygon>(b)))
            d = std::min(d, dist_segment_segment(ea, eb));
    return d;
}

double boundary_gap(const Shape& a, const Segment& s) {
    if (const auto* d = std::get_if<Disk>(&a)) return dist_segment_circle(s, *d);
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& e : polygon_edges(std::get<Polygon>(a)))
        dist = std::min(dist, dist_segment_segment(e, s));
    return dist;
}

}  // namespace asi

#pragma once

#include <cmath>
#include <variant>
#include <vector>

namespace asi {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(Point p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

struct Segment {
    Point a, b;
    double length() const { return distance(a, b); }
};

struct Disk {
    Point center;
    double radius = 0.0;
};

// Vertices in order; the closing edge back to the first vertex is implicit.
struct Polygon {
    std::vector<Point> vertices;
};

using Shape = std::variant<Disk, Polygon>;

double dist_point_segment(Point p, const Segment& s);
double dist_segment_segment(const Segment& s, const Segment& t);
double dist_segment_circle(const Segment& s, const Disk& d);
double dist_circle_circle(const Disk& a, const Disk& b);

double polygon_area(const Polygon& poly);
double polygon_perimeter(const Polygon& poly);
// Closed-region test: boundary points count as contained.
bool polygon_contains(const Polygon& poly, Point p);
double dist_point_polygon_boundary(const Polygon& poly, Point p);

bool shape_contains(const Shape& shape, Point p);
double shape_boundary_distance(const Shape& shape, Point p);
double shape_area(const Shape& shape);
double shape_perimeter(const Shape& shape);
// Minimum distance between the boundary curves of two shapes.
double boundary_gap(const Shape& a, const Shape& b);
double boundary_gap(const Shape& a, const Segment& s);

}  // namespace asi

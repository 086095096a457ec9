#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asi/geometry.hpp"
#include "asi/mesh.hpp"

namespace asi {

struct BackgroundPiece {
    Rect rect;
    double value = 1.0;
};

struct Inclusion {
    Shape shape;
    double value = 0.0;  // additive jump on top of the background
};

// Node-centered raster of medium values over the domain, bilinear between nodes.
struct RasterMedium {
    int nx = 0;  // number of nodes in x
    int ny = 0;
    std::vector<double> values;  // row-major, ny rows of nx
};

// Piecewise-constant medium: background pieces (axis-aligned rectangles that
// partition the domain, each touching its boundary) plus inclusion jumps that
// add wherever a point lies in an inclusion's closure. A raster medium is an
// alternative sampled representation with no exact interface geometry.
class Medium {
  public:
    Rect domain;
    std::vector<BackgroundPiece> pieces;
    std::vector<Inclusion> inclusions;
    std::optional<RasterMedium> raster;

    // Throws ConfigError if the pieces do not partition the domain, a piece
    // does not touch the boundary, an inclusion is degenerate or not strictly
    // inside, or two inclusion boundaries touch.
    void validate() const;

    double evaluate(Point p) const;
    double background_value(Point p) const;

    // Interior background interfaces: piece edges minus the domain boundary.
    std::vector<Segment> interior_interfaces() const;

    double dist_to_background_interfaces(Point p) const;

    bool is_raster() const { return raster.has_value(); }
};

struct InclusionGeometry {
    double perimeter = 0.0;
    double area = 0.0;
};

// Exact perimeter and area of each inclusion.
std::vector<InclusionGeometry> interface_length(const Medium& medium);

enum class RegionKind : std::uint8_t {
    BackgroundBand,  // within delta of an interior background interface
    InclusionBand,   // within delta of inclusion k's boundary
    Core,            // inside inclusion k, more than delta from its boundary
    Outside,         // everything else (deep background)
};

struct Region {
    RegionKind kind = RegionKind::Outside;
    int inclusion = -1;  // valid for InclusionBand and Core
};

// Triangle labels by barycenter distance to the exact interface geometry.
// The complement region (where the decomposition estimates live) is
// Outside together with every Core.
struct RegionMask {
    double delta = 0.0;
    std::vector<Region> tri_regions;

    bool in_complement(int t) const {
        const auto k = tri_regions[t].kind;
        return k == RegionKind::Outside || k == RegionKind::Core;
    }
    double area(const Mesh& mesh, RegionKind kind, int inclusion = -1) const;
};

// Throws RegionSeparationError when two inclusion boundaries (or an inclusion
// and a background interface) come within 2*delta of each other, or when an
// inclusion has an empty delta-interior at mesh resolution.
RegionMask classify_regions(const Mesh& mesh, const Medium& medium, double delta);

}  // namespace asi

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fklab/common.hpp"

namespace fklab {

// Declarative description of a domain.  Primitives are axis-aligned boxes,
// balls, the square-with-a-quadrant-removed, and an elongated serpentine tube;
// composites are unions and differences of two children.
struct DomainSpec {
    enum class Kind { box, ball, lshape, snake, union_, difference };

    Kind kind = Kind::box;
    int dim = 2;
    std::string name;

    // box: [lo, lo + sides] in each of the first `dim` axes
    std::array<double, 3> sides{1.0, 1.0, 1.0};
    std::array<double, 3> lo{0.0, 0.0, 0.0};

    // ball
    double radius = 1.0;
    Vec center{0.0, 0.0, 0.0};

    // lshape (2-D): [0,size]^2 with the quadrant [size/2,size]^2 removed
    double size = 1.0;

    // snake (2-D): all points within width/2 of a sinusoidal centerline that
    // spans x in [0, length]; amplitude width/2, period 4*width keeps the
    // curvature radius above width/2, so the tube's inradius is width/2.
    double length = 8.0;
    double width = 1.0;

    // union_/difference: exactly two children of equal dimension
    std::vector<DomainSpec> children;

    static DomainSpec make_box(int dim, std::array<double, 3> sides,
                               std::array<double, 3> lo = {0, 0, 0});
    static DomainSpec make_ball(int dim, double radius, Vec center = {0, 0, 0});
    static DomainSpec make_lshape(double size);
    static DomainSpec make_snake(double length, double width);
};

// Cell-centered rasterization of a domain on a uniform grid of spacing h.
// Cells are classified by their center; boundary cells land outside, so the
// zero extension used by the Dirichlet operator is conservative.  Immutable
// after construction.
struct DomainMask {
    int n = 2;                      // dimension, 2 or 3
    std::array<int, 3> dims{1, 1, 1};
    double h = 0.0;
    Vec origin{0.0, 0.0, 0.0};      // coordinates of the center of cell (0,0,0)
    std::vector<std::uint8_t> inside;   // one flag per grid cell
    std::vector<std::int64_t> cells;    // linear ids of inside cells, ascending
    std::vector<std::int32_t> unknown;  // per grid cell: rank among inside cells, or -1

    std::int64_t index(int i, int j, int k) const {
        return (static_cast<std::int64_t>(k) * dims[1] + j) * dims[0] + i;
    }
    std::array<int, 3> coords(std::int64_t id) const {
        const int i = static_cast<int>(id % dims[0]);
        const int j = static_cast<int>((id / dims[0]) % dims[1]);
        const int k = static_cast<int>(id / (static_cast<std::int64_t>(dims[0]) * dims[1]));
        return {i, j, k};
    }
    Vec center_of(std::int64_t id) const {
        const auto c = coords(id);
        return {origin[0] + c[0] * h, origin[1] + c[1] * h,
                n == 3 ? origin[2] + c[2] * h : 0.0};
    }
    bool in_grid(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }
    bool is_inside(int i, int j, int k) const {
        return in_grid(i, j, k) && inside[static_cast<std::size_t>(index(i, j, k))] != 0;
    }
    std::size_t cell_count() const { return cells.size(); }
    double cell_volume() const { return n == 3 ? h * h * h : h * h; }
    double volume() const { return static_cast<double>(cells.size()) * cell_volume(); }

    // Grid cell containing x, or nullopt when x falls off the grid.
    std::optional<std::int64_t> locate(const Vec& x) const;
};

struct BallSpec {
    Vec center{0.0, 0.0, 0.0};
    double radius = 0.0;
};

// Rasterize a domain spec.  The grid covers the spec's bounding box plus one
// cell of margin per side, so every inside cell has a full set of neighbors.
std::shared_ptr<const DomainMask> build_domain(const DomainSpec& spec, double h);

// A face separating an inside cell from an outside one (or from off-grid).
// The homogeneous Dirichlet condition lives on these faces.
struct BoundaryFace {
    int axis;
    Vec center;  // midpoint of the face
};

std::vector<BoundaryFace> boundary_faces(const DomainMask& mask);

// Euclidean distance from x (inside the domain) to the nearest boundary face,
// computed exactly by brute force over all faces; accuracy O(h) relative to the
// continuum boundary.  Throws std::invalid_argument when x is not inside.
double distance_to_boundary(const DomainMask& mask, const Vec& x);
double distance_to_boundary(const DomainMask& mask, const std::vector<BoundaryFace>& faces,
                            const Vec& x);

// Largest distance-to-boundary over inside cell centers.
double inradius(const DomainMask& mask);

// |B ∩ Ω| / |B|, sampled on a fixed sub-lattice of the ball (h-independent),
// with Ω the union of inside cells; a fully-inside ball reports exactly 1.
double ball_intersection_fraction(const DomainMask& mask, const BallSpec& ball);

}  // namespace fklab

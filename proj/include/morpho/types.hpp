#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace morpho {

struct Point2d {
    double x = 0.0;
    double y = 0.0;

    friend Point2d operator+(Point2d a, Point2d b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2d operator-(Point2d a, Point2d b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2d operator*(double k, Point2d p) { return {k * p.x, k * p.y}; }
    friend Point2d operator*(Point2d p, double k) { return {k * p.x, k * p.y}; }
    friend bool operator==(const Point2d&, const Point2d&) = default;
};

inline double distance(Point2d a, Point2d b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Closed, ordered planar outline in pixel units (y grows downward).
// The last point connects back to the first; it is not repeated.
struct Contour {
    std::vector<Point2d> points;
    bool closed = true;

    std::size_t size() const { return points.size(); }
    const Point2d& operator[](std::size_t i) const { return points[i]; }
};

// Shoelace area. Positive for the library's canonical orientation, which runs
// from the top point down the right-hand side (larger x) in image coordinates.
double signed_area(const Contour& c);

double perimeter(const Contour& c);

// Same points, traversal reversed, index 0 kept in place.
Contour reversed(const Contour& c);

// Cyclic rotation so that `start` becomes index 0.
Contour rotated(const Contour& c, std::size_t start);

}  // namespace morpho

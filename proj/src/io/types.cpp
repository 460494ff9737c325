#include "morpho/types.hpp"

#include <algorithm>

namespace morpho {

double signed_area(const Contour& c) {
    const std::size_t n = c.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2d& p = c.points[i];
        const Point2d& q = c.points[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

double perimeter(const Contour& c) {
    const std::size_t n = c.size();
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) len += distance(c.points[i], c.points[(i + 1) % n]);
    return len;
}

Contour reversed(const Contour& c) {
    Contour out = c;
    if (out.points.size() > 1) std::reverse(out.points.begin() + 1, out.points.end());
    return out;
}

Contour rotated(const Contour& c, std::size_t start) {
    Contour out = c;
    if (!out.points.empty()) {
        std::rotate(out.points.begin(),
                    out.points.begin() + static_cast<std::ptrdiff_t>(start % out.points.size()),
                    out.points.end());
    }
    return out;
}

}  // namespace morpho

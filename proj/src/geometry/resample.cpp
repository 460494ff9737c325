#include <algorithm>
#include <cmath>

#include "morpho/error.hpp"
#include "morpho/geometry.hpp"

namespace morpho::geometry {

void SmoothingParams::validate() const {
    if (n_resample < 256) throw ConfigError("n_resample must be >= 256");
    if (!(sigma >= 1.0) || sigma > n_resample / 16.0)
        throw ConfigError("sigma must lie in [1, n_resample/16]");
}

Contour resample(const Contour& c, std::size_t n) {
    const std::size_t m = c.size();
    if (m < 2 || n == 0) throw DegenerateContourError("contour needs at least two points");

    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + distance(c[i], c[(i + 1) % m]);
    const double total = cum[m];
    if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateContourError("zero perimeter");

    Contour out;
    out.points.reserve(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = total * static_cast<double>(k) / static_cast<double>(n);
        while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
        const Point2d& a = c[seg];
        const Point2d& b = c[(seg + 1) % m];
        out.points.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return out;
}

std::size_t topmost_index(const Contour& c) {
    const std::size_t n = c.size();
    if (n == 0) throw DegenerateContourError("empty contour");
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (c[i].y < c[best].y) best = i;
    const double ymin = c[best].y;
    auto at_top = [&](std::size_t i) { return c[i].y <= ymin + 1e-9; };

    // Expand the run around `best` cyclically and take its middle.
    std::size_t back = 0, fwd = 0;
    while (back + 1 < n && at_top((best + n - back - 1) % n)) ++back;
    while (fwd + back + 1 < n && at_top((best + fwd + 1) % n)) ++fwd;
    const std::size_t first = (best + n - back) % n;
    return (first + (back + fwd) / 2) % n;
}

Contour rotate_to_top(const Contour& c) { return rotated(c, topmost_index(c)); }

Contour prepare_contour(const Contour& c, std::size_t n) {
    if (c.size() < 3) throw DegenerateContourError("contour needs at least three points");
    const double area = signed_area(c);
    if (!(std::abs(area) > 0.0)) throw DegenerateContourError("contour encloses no area");
    return resample(rotate_to_top(area < 0.0 ? reversed(c) : c), n);
}

}  // namespace morpho::geometry

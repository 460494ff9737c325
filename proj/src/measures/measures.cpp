#include <algorithm>
#include <cmath>

#include "morpho/error.hpp"
#include "morpho/measures.hpp"

namespace morpho::measures {

namespace {

// Height of the line through p and q at abscissa x; the mean height when the
// line is vertical.
double line_y_at(Point2d p, Point2d q, double x) {
    const double dx = q.x - p.x;
    if (std::abs(dx) < 1e-12) return 0.5 * (p.y + q.y);
    return p.y + (q.y - p.y) * (x - p.x) / dx;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0)) {
        throw LandmarkOrderError(std::string("measure ") + name +
                                 " is not positive; landmarks are out of vertical order");
    }
}

}  // namespace

std::array<double, 16> FeatureVector::values() const {
    return {a, b, c, d, e, f, h1, h2, ell, L, s[0], s[1], s[2], s[3], s[4], s[5]};
}

FeatureVector FeatureVector::from_values(std::span<const double, 16> v) {
    FeatureVector fv;
    fv.a = v[0];
    fv.b = v[1];
    fv.c = v[2];
    fv.d = v[3];
    fv.e = v[4];
    fv.f = v[5];
    fv.h1 = v[6];
    fv.h2 = v[7];
    fv.ell = v[8];
    fv.L = v[9];
    for (int i = 0; i < 6; ++i) fv.s[i] = v[10 + i];
    return fv;
}

bool within_reference_band(const FeatureVector& fv) {
    return fv.a >= kStradivariBandLow && fv.a <= kStradivariBandHigh;
}

RawMeasures extract_raw(const Contour& c, const geometry::LandmarkSet& lm,
                        const geometry::CurvatureProfile& profile) {
    const std::size_t n = c.size();
    if (lm.n != n || profile.size() != n)
        throw LandmarkOrderError("landmarks or curvature profile do not match the contour");
    // Re-validates the cyclic order.
    (void)geometry::LandmarkSet::from_indices(n, lm.qr, lm.ar, lm.br, lm.bottom, lm.bl, lm.al, lm.ql);

    const Point2d qr = c[lm.qr], ql = c[lm.ql];
    const Point2d ar = c[lm.ar], br = c[lm.br], bl = c[lm.bl], al = c[lm.al];
    const Point2d bottom = c[lm.bottom];

    const std::size_t top = geometry::topmost_index(c);
    const double ymin = c[top].y;
    double ymax = ymin;
    for (const auto& p : c.points) ymax = std::max(ymax, p.y);

    RawMeasures r;
    r.a = br.y - ar.y;
    r.d = bl.y - al.y;
    r.b = ar.y - line_y_at(qr, ql, ar.x);
    r.e = al.y - line_y_at(qr, ql, al.x);
    r.c = bottom.y - br.y;
    r.f = bottom.y - bl.y;
    r.h1 = distance(bl, br);
    r.h2 = distance(al, ar);
    r.ell = line_y_at(qr, ql, c[top].x) - c[top].y;
    r.L = ymax - ymin;

    require_positive(r.a, "a");
    require_positive(r.b, "b");
    require_positive(r.c, "c");
    require_positive(r.d, "d");
    require_positive(r.e, "e");
    require_positive(r.f, "f");
    require_positive(r.h1, "h1");
    require_positive(r.h2, "h2");
    require_positive(r.ell, "ell");

    const double spacing = perimeter(c) / static_cast<double>(n);
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& seg = lm.segments[k];
        double acc = 0.0;
        for (std::size_t j = 0; j < seg.length; ++j) acc += profile.abs_s[seg.at(j)];
        r.n_seg[k] = seg.length;
        r.sbar[k] = seg.length ? acc / static_cast<double>(seg.length) : 0.0;
        r.seg_points[k] = static_cast<double>(seg.length) * spacing;
    }
    return r;
}

FeatureVector normalize(const RawMeasures& raw) {
    if (!(raw.L > 0.0) || !std::isfinite(raw.L)) throw NormalizationError("total length L must be positive");
    for (std::size_t k = 0; k < 6; ++k) {
        if (raw.n_seg[k] == 0 || !(raw.seg_points[k] > 0.0))
            throw NormalizationError("segment " + std::to_string(k + 1) + " has no points");
    }
    FeatureVector fv;
    fv.a = raw.a / raw.L;
    fv.b = raw.b / raw.L;
    fv.c = raw.c / raw.L;
    fv.d = raw.d / raw.L;
    fv.e = raw.e / raw.L;
    fv.f = raw.f / raw.L;
    fv.h1 = raw.h1 / raw.L;
    fv.h2 = raw.h2 / raw.L;
    fv.ell = raw.ell / raw.L;
    fv.L = raw.L;
    for (std::size_t k = 0; k < 6; ++k) fv.s[k] = raw.sbar[k] * raw.seg_points[k];
    return fv;
}

}  // namespace morpho::measures

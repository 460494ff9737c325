#include <cmath>
#include <fstream>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/geometry.hpp"

namespace morpho::geometry {

namespace {

struct DerivativeKernels {
    int radius = 0;
    std::vector<double> d1;  // index j + radius
    std::vector<double> d2;
};

// Sampled derivative-of-Gaussian kernels, rescaled so that they differentiate
// polynomials up to degree 3 exactly: d1 maps t -> 1 and d2 maps t^2/2 -> 1.
DerivativeKernels make_kernels(double sigma) {
    DerivativeKernels k;
    k.radius = static_cast<int>(std::ceil(4.0 * sigma));
    const int r = k.radius;
    std::vector<double> g(2 * r + 1);
    for (int j = -r; j <= r; ++j) g[j + r] = std::exp(-0.5 * j * j / (sigma * sigma));

    double m0 = 0.0, m2 = 0.0;
    for (int j = -r; j <= r; ++j) {
        m0 += g[j + r];
        m2 += double(j) * j * g[j + r];
    }
    k.d1.resize(g.size());
    for (int j = -r; j <= r; ++j) k.d1[j + r] = j * g[j + r] / m2;

    const double mean_j2 = m2 / m0;
    k.d2.resize(g.size());
    double norm = 0.0;
    for (int j = -r; j <= r; ++j) {
        k.d2[j + r] = (double(j) * j - mean_j2) * g[j + r];
        norm += k.d2[j + r] * double(j) * j * 0.5;
    }
    for (auto& w : k.d2) w /= norm;
    return k;
}

}  // namespace

CurvatureProfile curvature(const Contour& c, const SmoothingParams& p) {
    const std::size_t n = c.size();
    if (n < 3) throw DegenerateContourError("curvature needs at least three points");
    const DerivativeKernels k = make_kernels(p.sigma);
    if (static_cast<std::size_t>(2 * k.radius + 1) > n)
        throw DegenerateContourError("smoothing kernel wider than the contour");

    CurvatureProfile out;
    out.s.resize(n);
    out.abs_s.resize(n);
    const long ln = static_cast<long>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dx = 0, dy = 0, ddx = 0, ddy = 0;
        const Point2d& ci = c[i];
        for (int j = -k.radius; j <= k.radius; ++j) {
            const std::size_t idx = static_cast<std::size_t>(((static_cast<long>(i) + j) % ln + ln) % ln);
            // Centre on c[i] so the arithmetic stays well conditioned far from the origin.
            const double x = c[idx].x - ci.x;
            const double y = c[idx].y - ci.y;
            const double w1 = k.d1[j + k.radius];
            const double w2 = k.d2[j + k.radius];
            dx += w1 * x;
            dy += w1 * y;
            ddx += w2 * x;
            ddy += w2 * y;
        }
        const double speed2 = dx * dx + dy * dy;
        if (!(speed2 > 1e-24)) {
            throw NumericalSingularityError("zero tangent speed at contour index " + std::to_string(i));
        }
        const double s = (dx * ddy - dy * ddx) / (speed2 * std::sqrt(speed2));
        if (!std::isfinite(s)) throw NumericalSingularityError("non-finite curvature at index " + std::to_string(i));
        out.s[i] = s;
        out.abs_s[i] = std::abs(s);
    }
    return out;
}

void write_profile_csv(const CurvatureProfile& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "index,s,abs_s\n";
    for (std::size_t i = 0; i < p.size(); ++i)
        out << i << ',' << csv::format_sig9(p.s[i]) << ',' << csv::format_sig9(p.abs_s[i]) << '\n';
}

}  // namespace morpho::geometry

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "morpho/error.hpp"
#include "morpho/tps.hpp"

namespace morpho::tps {

double kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

Point2d TPSTransform::apply(Point2d p) const {
    double x = affine[0] + affine[1] * p.x + affine[2] * p.y;
    double y = affine[3] + affine[4] * p.x + affine[5] * p.y;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const double u = kernel(distance(p, source[i]));
        x += wx[i] * u;
        y += wy[i] * u;
    }
    return {x, y};
}

TPSTransform fit_tps(const LandmarkCorrespondence& corr) {
    const std::size_t k = corr.source.size();
    if (k < 3) throw SingularConfigurationError("thin-plate spline needs at least 3 landmarks");
    if (corr.target.size() != k) throw SingularConfigurationError("source and target differ in length");

    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::isfinite(corr.source[i].x) || !std::isfinite(corr.source[i].y) ||
            !std::isfinite(corr.target[i].x) || !std::isfinite(corr.target[i].y))
            throw SingularConfigurationError("non-finite landmark coordinate");
        for (std::size_t j = 0; j < i; ++j) scale = std::max(scale, distance(corr.source[i], corr.source[j]));
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (distance(corr.source[i], corr.source[j]) <= 1e-12 * scale || scale == 0.0)
                throw SingularConfigurationError("duplicate source landmarks " + std::to_string(j) + " and " +
                                                 std::to_string(i));

    // Collinear sources leave the affine part undetermined.
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : corr.source) mean += Eigen::Vector2d(p.x, p.y);
    mean /= static_cast<double>(k);
    Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
    for (const auto& p : corr.source) {
        const Eigen::Vector2d d = Eigen::Vector2d(p.x, p.y) - mean;
        scatter += d * d.transpose();
    }
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(scatter).eigenvalues();
    if (!(ev(0) > 1e-12 * ev(1))) throw SingularConfigurationError("source landmarks are collinear");

    const Eigen::Index n = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 3, n + 3);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point2d& pi = corr.source[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j)
            system(i, j) = kernel(distance(pi, corr.source[static_cast<std::size_t>(j)]));
        system(i, n) = system(n, i) = 1.0;
        system(i, n + 1) = system(n + 1, i) = pi.x;
        system(i, n + 2) = system(n + 2, i) = pi.y;
        rhs(i, 0) = corr.target[static_cast<std::size_t>(i)].x;
        rhs(i, 1) = corr.target[static_cast<std::size_t>(i)].y;
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible()) throw SingularConfigurationError("thin-plate spline system is singular");
    const Eigen::MatrixXd sol = lu.solve(rhs);

    TPSTransform t;
    t.source = corr.source;
    t.wx.resize(k);
    t.wy.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        t.wx[i] = sol(static_cast<Eigen::Index>(i), 0);
        t.wy[i] = sol(static_cast<Eigen::Index>(i), 1);
    }
    t.affine = {sol(n, 0), sol(n + 1, 0), sol(n + 2, 0), sol(n, 1), sol(n + 1, 1), sol(n + 2, 1)};

    const Eigen::MatrixXd K = system.topLeftCorner(n, n);
    const Eigen::MatrixXd W = sol.topRows(n);
    const double energy = (W.transpose() * K * W).trace();
    t.bending_energy = std::max(0.0, energy);
    return t;
}

std::vector<Point2d> warp_points(const TPSTransform& t, std::span<const Point2d> pts) {
    std::vector<Point2d> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(t.apply(p));
    return out;
}

DeformationGrid deformation_grid(const TPSTransform& t, const Bounds& b, int nx, int ny, int samples) {
    if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin) || !std::isfinite(b.xmin) || !std::isfinite(b.xmax) ||
        !std::isfinite(b.ymin) || !std::isfinite(b.ymax))
        throw BoundsError("grid bounds are empty or non-finite");
    if (nx < 2 || ny < 2) throw BoundsError("grid needs at least 2 lines in each direction");
    samples = std::max(samples, 50);

    auto lerp = [](double lo, double hi, int i, int count) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    };
    DeformationGrid g;
    for (int i = 0; i < nx; ++i) {
        const double x = lerp(b.xmin, b.xmax, i, nx);
        Polyline line;
        for (int s = 0; s < samples; ++s) line.push_back(t.apply({x, lerp(b.ymin, b.ymax, s, samples)}));
        g.vertical.push_back(std::move(line));
    }
    for (int j = 0; j < ny; ++j) {
        const double y = lerp(b.ymin, b.ymax, j, ny);
        Polyline line;
        for (int s = 0; s < samples; ++s) line.push_back(t.apply({lerp(b.xmin, b.xmax, s, samples), y}));
        g.horizontal.push_back(std::move(line));
    }
    return g;
}

}  // namespace morpho::tps

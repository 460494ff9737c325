#pragma once

#include <array>
#include <span>
#include <vector>

#include "morpho/ingest.hpp"
#include "morpho/types.hpp"

namespace morpho::tps {

struct LandmarkCorrespondence {
    std::vector<Point2d> source;
    std::vector<Point2d> target;
};

// Thin-plate spline kernel U(r) = r^2 ln r, with U(0) = 0.
double kernel(double r);

// f(p) = affine(p) + sum_i w_i U(|p - source_i|), one weight vector per axis.
struct TPSTransform {
    // x' = affine[0] + affine[1] x + affine[2] y, y' = affine[3] + affine[4] x + affine[5] y
    std::array<double, 6> affine{0, 1, 0, 0, 0, 1};
    std::vector<double> wx;
    std::vector<double> wy;
    std::vector<Point2d> source;
    // wx' K wx + wy' K wy, zero exactly when the map is affine.
    double bending_energy = 0.0;

    Point2d apply(Point2d p) const;
};

// Interpolating spline (no regularization). Throws SingularConfigurationError
// for fewer than three, duplicate or collinear source points.
TPSTransform fit_tps(const LandmarkCorrespondence& corr);

std::vector<Point2d> warp_points(const TPSTransform& t, std::span<const Point2d> pts);

struct Bounds {
    double xmin = 0, ymin = 0, xmax = 1, ymax = 1;
};

using Polyline = std::vector<Point2d>;

struct DeformationGrid {
    std::vector<Polyline> vertical;    // nx lines of constant source x
    std::vector<Polyline> horizontal;  // ny lines of constant source y
};

// Regular nx-by-ny grid over `bounds`, each line sampled at `samples` points
// (at least 50) and pushed through the transform.
DeformationGrid deformation_grid(const TPSTransform& t, const Bounds& bounds, int nx, int ny,
                                 int samples = 64);

// Translate the centroid to the origin and divide by the instrument length.
std::vector<Point2d> normalize_landmarks(std::span<const Point2d> pts, double length);

struct LandmarkRecord {
    std::vector<Point2d> landmarks;  // normalized, same order for every record
    ingest::Metadata meta;
};

struct EpochTarget {
    double center_year = 0.0;
    std::size_t count = 0;
    std::vector<Point2d> landmarks;  // per-landmark mean over the window
};

// Average landmark configuration per sliding window (analysis::make_windows
// semantics). Windows without instruments are omitted.
std::vector<EpochTarget> epoch_targets(std::span<const LandmarkRecord> records, int dt, int step);

}  // namespace morpho::tps

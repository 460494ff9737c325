#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "morpho/types.hpp"

namespace morpho::geometry {

struct SmoothingParams {
    int n_resample = 2048;
    double sigma = 5.0;  // in samples

    // Throws ConfigError unless n_resample >= 256 and sigma in [1, n_resample/16].
    void validate() const;
};

// Signed curvature (1/pixel) and its magnitude, index-aligned with the
// resampled contour it was computed on.
struct CurvatureProfile {
    std::vector<double> s;
    std::vector<double> abs_s;

    std::size_t size() const { return s.size(); }
};

// `length` consecutive indices on a circle of `n`, starting at `begin`.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t length = 0;
    std::size_t n = 0;

    std::size_t at(std::size_t k) const { return (begin + k) % n; }
    bool contains(std::size_t i) const { return (i + n - begin) % n < length; }
    std::size_t last() const { return (begin + length - 1) % n; }
};

enum class LandmarkName { QR, AR, BR, Bottom, BL, AL, QL };
inline constexpr std::array<LandmarkName, 7> kLandmarkOrder = {
    LandmarkName::QR, LandmarkName::AR, LandmarkName::BR, LandmarkName::Bottom,
    LandmarkName::BL, LandmarkName::AL, LandmarkName::QL};
const char* to_string(LandmarkName name);

// The six detected control points plus the lowest body point, as indices
// into the contour they were detected on, and the body segments they bound.
//
// Traversal order is QR, AR, BR, bottom, BL, AL, QL. The neck arc [QL..QR]
// (through index 0 when the contour starts at the scroll tip) is excluded.
// Segments, in order: QR-AR, AR-BR, BR-bottom, bottom-BL, BL-AL, AL-QL.
// Right-side segments own their lower endpoint and left-side segments their
// upper one, so the pairs (1,6), (2,5), (3,4) treat corners alike.
struct LandmarkSet {
    std::size_t n = 0;
    std::size_t qr = 0, ar = 0, br = 0, bottom = 0, bl = 0, al = 0, ql = 0;
    std::array<IndexRange, 6> segments{};

    // Validates cyclic order (LandmarkOrderError) and builds the segments.
    static LandmarkSet from_indices(std::size_t n, std::size_t qr, std::size_t ar,
                                    std::size_t br, std::size_t bottom, std::size_t bl,
                                    std::size_t al, std::size_t ql);

    std::size_t index(LandmarkName name) const;
};

struct DetectionParams {
    // A peak qualifies when its prominence exceeds this multiple of median |s|.
    double prominence_factor = 3.0;
    // Half-width fraction (of the contour's half-width) that marks the body.
    double body_width_fraction = 0.6;
};

// Arc-length resampling to n points, linear between vertices; index 0 stays
// at the original start point.
Contour resample(const Contour& c, std::size_t n);

// Index of the topmost point (minimum y). A flat run resolves to its middle.
std::size_t topmost_index(const Contour& c);

// Rotate so traversal starts at the scroll tip.
Contour rotate_to_top(const Contour& c);

// Positive orientation, start at the scroll tip, then resample to n points.
Contour prepare_contour(const Contour& c, std::size_t n);

// Derivatives by periodic convolution with derivative-of-Gaussian kernels,
// then s = (x'y'' - y'x'') / (x'^2 + y'^2)^(3/2).
CurvatureProfile curvature(const Contour& c, const SmoothingParams& p);

// Cyclic local maxima of `values` whose topographic prominence is strictly
// greater than `min_prominence`, in index order.
std::vector<std::size_t> find_peaks(std::span<const double> values, double min_prominence);

// Prominence of the local maximum at `peak` on a cyclic sequence.
double peak_prominence(std::span<const double> values, std::size_t peak);

// Expects `c` to start at the scroll tip (see rotate_to_top).
LandmarkSet detect_landmarks(const CurvatureProfile& profile, const Contour& c,
                             const DetectionParams& params = {});

// Neck arc from QL forward through index 0 to QR, inclusive.
IndexRange exclude_neck(const Contour& c, const LandmarkSet& lm);

void write_profile_csv(const CurvatureProfile& p, const std::filesystem::path& path);
void write_landmarks_csv(const LandmarkSet& lm, const Contour& c,
                         const std::filesystem::path& path);

struct LandmarkPoint {
    LandmarkName name;
    std::size_t index;
    Point2d pos;
};
std::vector<LandmarkPoint> read_landmarks_csv(const std::filesystem::path& path);

}  // namespace morpho::geometry

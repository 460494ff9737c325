#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "morpho/ingest.hpp"
#include "morpho/measures.hpp"
#include "morpho/types.hpp"

namespace morpho::synth {

// Parametric violin-like outline in units of the body length, y downward,
// scroll tip at the origin. The right half is built from a rounded cap, a
// straight neck edge, the upper bout (circle centred on the axis), the C-bout
// (concave circular arc) and the lower bout (ellipse centred on the axis);
// the left half mirrors it.
struct ShapeParams {
    double neck_half_width = 0.035;
    double ell = 0.38;          // tip to the fingerboard exit
    double upper = 0.19;        // fingerboard exit to the upper corner (b)
    double cbout = 0.15;        // upper to lower corner (a)
    double corner_half_width = 0.15;
    double lower_half_width = 0.165;
    double cbout_angle = 1.1;  // tangent at both corners, radians from the vertical

    // Throws ConfigError when the pieces cannot be assembled.
    void validate() const;
    double waist_half_width() const;
};

// Corners that can be rounded off, in traversal order.
enum class Corner { QR, AR, BR, BL, AL, QL };

struct OutlineOptions {
    double length_px = 1000.0;
    // Amplitude bound of a smooth displacement field, as a fraction of the length.
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::array<bool, 6> rounded{};  // indexed by Corner
    double step_px = 0.25;          // spacing of the dense polyline
};

struct Outline {
    Contour contour;                       // pixels, tip near the origin, positive orientation
    std::array<Point2d, 7> landmarks{};   // geometry::kLandmarkOrder
};

Outline generate_outline(const ShapeParams& shape, const OutlineOptions& opt = {});

// Lengths a..f, h1, h2, ell and L in pixels, by the same definitions the
// measurement stage uses, evaluated on the planted landmarks.
measures::RawMeasures analytic_measures(const Outline& o);

// Index of the point of `c` nearest to each landmark.
std::array<std::size_t, 7> nearest_indices(const Contour& c, const std::array<Point2d, 7>& landmarks);

// Scanline fill of pixel centres: background 255, instrument `ink`.
ingest::RasterImage rasterize(const Contour& c, int width, int height, std::uint8_t ink = 40);

struct CorpusParams {
    int count = 50;
    double noise = 0.005;
    std::uint64_t seed = 7;
    // Below about 1000 px the pixel staircase of traced outlines starts to
    // produce curvature peaks comparable to the C-bouts.
    double length_px = 1200.0;
    int margin_px = 16;
};

struct CorpusEntry {
    ingest::Metadata meta;
    ShapeParams shape;
    Outline outline;  // in image coordinates
    int width = 0;
    int height = 0;
};

// Instruments are dealt round-robin over a fixed set of makers; each maker
// has its own shape offsets and working years.
std::vector<CorpusEntry> make_corpus(const CorpusParams& p);

// images/<id>.pgm, outlines/<id>.csv, metadata.csv and ground_truth.json.
void write_corpus(const std::vector<CorpusEntry>& corpus, const CorpusParams& p,
                  const std::filesystem::path& dir);

}  // namespace morpho::synth

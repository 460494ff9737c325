#pragma once

#include <optional>

#include "morpho/geometry.hpp"
#include "morpho/ingest.hpp"
#include "morpho/measures.hpp"

namespace morpho {

struct ExtractionParams {
    geometry::SmoothingParams smoothing;
    geometry::DetectionParams detection;
    std::optional<int> threshold;  // Otsu when empty
};

// Everything one outline goes through on its way to a feature vector.
struct Extraction {
    Contour traced;   // pixel boundary, or the caller's outline
    Contour contour;  // resampled, starting at the scroll tip
    geometry::CurvatureProfile profile;
    geometry::LandmarkSet landmarks;
    measures::RawMeasures raw;
    measures::FeatureVector features;
};

Extraction extract_outline(const Contour& outline, const ExtractionParams& p = {});
Extraction extract_image(const ingest::RasterImage& img, const ExtractionParams& p = {});

}  // namespace morpho

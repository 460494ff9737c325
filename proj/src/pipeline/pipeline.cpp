#include "morpho/pipeline.hpp"

namespace morpho {

Extraction extract_outline(const Contour& outline, const ExtractionParams& p) {
    p.smoothing.validate();
    Extraction e;
    e.traced = outline;
    e.contour = geometry::prepare_contour(outline, static_cast<std::size_t>(p.smoothing.n_resample));
    e.profile = geometry::curvature(e.contour, p.smoothing);
    e.landmarks = geometry::detect_landmarks(e.profile, e.contour, p.detection);
    e.raw = measures::extract_raw(e.contour, e.landmarks, e.profile);
    e.features = measures::normalize(e.raw);
    return e;
}

Extraction extract_image(const ingest::RasterImage& img, const ExtractionParams& p) {
    const auto mask = ingest::binarize(img, p.threshold);
    return extract_outline(ingest::trace_contour(mask), p);
}

}  // namespace morpho

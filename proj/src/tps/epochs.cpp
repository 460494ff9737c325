#include "morpho/analysis.hpp"
#include "morpho/error.hpp"
#include "morpho/tps.hpp"

namespace morpho::tps {

std::vector<Point2d> normalize_landmarks(std::span<const Point2d> pts, double length) {
    if (pts.empty()) return {};
    if (!(length > 0.0)) throw NormalizationError("landmark normalization needs a positive length");
    Point2d centroid;
    for (const auto& p : pts) centroid = centroid + p;
    centroid = (1.0 / static_cast<double>(pts.size())) * centroid;
    std::vector<Point2d> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back((1.0 / length) * (p - centroid));
    return out;
}

std::vector<EpochTarget> epoch_targets(std::span<const LandmarkRecord> records, int dt, int step) {
    std::vector<std::optional<int>> years;
    std::vector<std::vector<double>> flat;
    std::size_t k = 0;
    for (const auto& r : records) {
        if (!r.meta.year) continue;
        if (k == 0) k = r.landmarks.size();
        if (r.landmarks.size() != k) throw DimensionError("records carry different landmark counts");
        years.push_back(r.meta.year);
        std::vector<double> v;
        v.reserve(2 * k);
        for (const auto& p : r.landmarks) {
            v.push_back(p.x);
            v.push_back(p.y);
        }
        flat.push_back(std::move(v));
    }
    if (years.empty()) throw NoDatesError("no landmark record carries a year");

    std::vector<std::string> labels(2 * k);
    const auto ts = analysis::sliding_window(years, flat, std::move(labels), dt, step);
    std::vector<EpochTarget> out;
    for (std::size_t w = 0; w < ts.center_years.size(); ++w) {
        if (ts.counts[w] == 0) continue;
        EpochTarget e{ts.center_years[w], ts.counts[w], {}};
        for (std::size_t i = 0; i < k; ++i) e.landmarks.push_back({ts.values[w][2 * i], ts.values[w][2 * i + 1]});
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace morpho::tps

#include <algorithm>
#include <array>

#include "morpho/error.hpp"
#include "morpho/ingest.hpp"

namespace morpho::ingest {

namespace {

std::array<double, 256> histogram(const RasterImage& img) {
    std::array<double, 256> h{};
    for (auto p : img.pixels) h[p] += 1.0;
    return h;
}

void require_contrast(const RasterImage& img) {
    if (img.pixels.empty()) throw DegenerateImageError("empty image");
    const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    if (*lo == *hi) throw DegenerateImageError("image has a single intensity");
}

}  // namespace

int otsu_threshold(const RasterImage& img) {
    require_contrast(img);
    const auto hist = histogram(img);
    const double total = static_cast<double>(img.pixels.size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

    // Between-class variance for the split {< t} / {>= t}.
    double best = -1.0;
    int first_best = 1, last_best = 1;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 1; t < 256; ++t) {
        w0 += hist[t - 1];
        sum0 += (t - 1) * hist[t - 1];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        const double tol = 1e-9 * std::max(1.0, best);
        if (between > best + tol) {
            best = between;
            first_best = last_best = t;
        } else if (between >= best - tol) {
            last_best = t;
        }
    }
    return (first_best + last_best) / 2;
}

BinaryMask below_threshold(const RasterImage& img, int threshold) {
    BinaryMask m{img.width, img.height, std::vector<std::uint8_t>(img.pixels.size())};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] < threshold ? 1 : 0;
    return m;
}

BinaryMask binarize(const RasterImage& img, std::optional<int> threshold) {
    require_contrast(img);
    const int t = threshold ? *threshold : otsu_threshold(img);

    std::size_t light = 0, border = 0;
    auto vote = [&](int x, int y) {
        ++border;
        if (img.at(x, y) >= t) ++light;
    };
    for (int x = 0; x < img.width; ++x) {
        vote(x, 0);
        if (img.height > 1) vote(x, img.height - 1);
    }
    for (int y = 1; y + 1 < img.height; ++y) {
        vote(0, y);
        if (img.width > 1) vote(img.width - 1, y);
    }
    const bool light_background = 2 * light >= border;

    BinaryMask m = below_threshold(img, t);
    if (!light_background) {
        for (auto& b : m.bits) b = b ? 0 : 1;
    }
    return m;
}

}  // namespace morpho::ingest

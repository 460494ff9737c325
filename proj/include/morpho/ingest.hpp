#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morpho/types.hpp"

namespace morpho::ingest {

// 8-bit grayscale raster, row-major.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// true = foreground (instrument).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
};

RasterImage load_image(const std::filesystem::path& path);

// Decoders exposed for in-memory use; load_image dispatches on magic bytes.
RasterImage decode_pgm(std::span<const std::uint8_t> bytes);
RasterImage decode_png(std::span<const std::uint8_t> bytes);

void write_pgm(const RasterImage& img, const std::filesystem::path& path);

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Otsu threshold t: the dark class is every intensity < t.
// Plateaus of equal between-class variance resolve to their midpoint.
int otsu_threshold(const RasterImage& img);

// Pixels strictly below the threshold.
BinaryMask below_threshold(const RasterImage& img, int threshold);

// Foreground mask. With no threshold, Otsu picks one. The foreground is the
// class that does not own the majority of border pixels.
BinaryMask binarize(const RasterImage& img, std::optional<int> threshold = std::nullopt);

RasterImage inverted(const RasterImage& img);

inline constexpr std::size_t kMinComponentPixels = 64;

// Outer boundary of the largest 8-connected foreground component, traced by
// Moore-neighbour tracing with Jacob's stopping criterion. Holes are ignored.
// The result is oriented so that signed_area() > 0.
Contour trace_contour(const BinaryMask& mask);

void write_contour_csv(const Contour& c, const std::filesystem::path& path);
Contour read_contour_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Metadata

enum class Period { Baroque, Classical, Romantic, Impressionist, Modern };

const char* to_string(Period p);
std::optional<Period> parse_period(std::string_view s);

// Inclusive upper years of Baroque, Classical, Romantic and Impressionist.
// Everything later is Modern.
struct PeriodTable {
    std::array<int, 4> upper = {1750, 1820, 1900, 1920};

    Period classify(int year) const;
    static PeriodTable parse(std::string_view csv);
};

inline constexpr int kMinYear = 1400;
inline constexpr int kMaxYear = 2100;

struct Metadata {
    std::string id;
    std::optional<std::string> maker;
    std::optional<std::string> country;
    std::optional<int> year;
    std::optional<Period> period;

    friend bool operator==(const Metadata&, const Metadata&) = default;
};

std::vector<Metadata> parse_metadata(std::istream& in, const PeriodTable& periods = {});
std::vector<Metadata> load_metadata(const std::filesystem::path& path,
                                    const PeriodTable& periods = {});

void write_metadata(std::ostream& out, std::span<const Metadata> rows);

}  // namespace morpho::ingest

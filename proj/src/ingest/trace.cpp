#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/ingest.hpp"

namespace morpho::ingest {

namespace {

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Clockwise on screen (y down), starting west.
constexpr std::array<Pixel, 8> kRing = {{{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                         {1, 0},  {1, 1},   {0, 1},  {-1, 1}}};

int ring_index(int dx, int dy) {
    for (int i = 0; i < 8; ++i)
        if (kRing[i].x == dx && kRing[i].y == dy) return i;
    return -1;
}

struct Largest {
    std::vector<int> labels;
    int label = -1;
    std::size_t size = 0;
    Pixel seed;
};

// 8-connected labelling; the seed of each component is its first pixel in
// raster order, which is where boundary tracing starts.
Largest largest_component(const BinaryMask& mask) {
    Largest out;
    out.labels.assign(mask.bits.size(), -1);
    std::vector<Pixel> stack;
    int next = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * mask.width + x;
            if (!mask.bits[idx] || out.labels[idx] >= 0) continue;
            const int label = next++;
            std::size_t count = 0;
            out.labels[idx] = label;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                ++count;
                for (const Pixel& d : kRing) {
                    const int nx = p.x + d.x, ny = p.y + d.y;
                    if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
                    const std::size_t n = static_cast<std::size_t>(ny) * mask.width + nx;
                    if (mask.bits[n] && out.labels[n] < 0) {
                        out.labels[n] = label;
                        stack.push_back({nx, ny});
                    }
                }
            }
            if (count > out.size) {
                out.size = count;
                out.label = label;
                out.seed = {x, y};
            }
        }
    }
    return out;
}

}  // namespace

Contour trace_contour(const BinaryMask& mask) {
    const Largest comp = largest_component(mask);
    if (comp.label < 0 || comp.size < kMinComponentPixels) {
        throw EmptyMaskError("no foreground component of at least " +
                             std::to_string(kMinComponentPixels) + " pixels");
    }

    auto inside = [&](Pixel p) {
        if (p.x < 0 || p.y < 0 || p.x >= mask.width || p.y >= mask.height) return false;
        return comp.labels[static_cast<std::size_t>(p.y) * mask.width + p.x] == comp.label;
    };

    const Pixel start = comp.seed;
    // The seed is the first raster pixel, so its west neighbour is outside.
    constexpr int kStartBacktrack = 0;

    std::vector<Pixel> boundary{start};
    Pixel p = start;
    int back = kStartBacktrack;
    const std::size_t guard = 4 * comp.size + 16;
    for (std::size_t step = 0; step < guard; ++step) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (inside({p.x + kRing[d].x, p.y + kRing[d].y})) {
                found = d;
                break;
            }
        }
        if (found < 0) break;  // isolated pixel

        const Pixel prev_bg{p.x + kRing[(found + 7) % 8].x, p.y + kRing[(found + 7) % 8].y};
        const Pixel q{p.x + kRing[found].x, p.y + kRing[found].y};
        const int q_back = ring_index(prev_bg.x - q.x, prev_bg.y - q.y);

        // Jacob's criterion: stop on re-entering the start the way we first left it.
        if (q == start && q_back == kStartBacktrack) break;
        if (!(q == start)) boundary.push_back(q);
        else if (boundary.size() > 1 && !(boundary.back() == start)) boundary.push_back(q);
        p = q;
        back = q_back;
    }

    Contour c;
    c.points.reserve(boundary.size());
    for (const Pixel& px : boundary) {
        const Point2d pt{static_cast<double>(px.x), static_cast<double>(px.y)};
        if (!c.points.empty() && c.points.back() == pt) continue;
        c.points.push_back(pt);
    }
    while (c.points.size() > 1 && c.points.back() == c.points.front()) c.points.pop_back();
    if (signed_area(c) < 0.0) c = reversed(c);
    return c;
}

void write_contour_csv(const Contour& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "x,y\n";
    for (const auto& p : c.points) out << std::llround(p.x) << ',' << std::llround(p.y) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

Contour read_contour_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> row;
    if (!csv::read_row(in, row) || row.size() != 2 || row[0] != "x" || row[1] != "y")
        throw FormatError(path.string() + ": expected header x,y");
    Contour c;
    std::size_t line = 1;
    while (csv::read_row(in, row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 2) throw ParseError(path.string() + ":" + std::to_string(line) + ": expected 2 fields");
        double v[2];
        for (int k = 0; k < 2; ++k) {
            const auto& f = row[k];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw ParseError(path.string() + ":" + std::to_string(line) + ": bad number '" + f + "'");
        }
        c.points.push_back({v[0], v[1]});
    }
    return c;
}

}  // namespace morpho::ingest

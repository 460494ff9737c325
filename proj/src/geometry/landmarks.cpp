#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/geometry.hpp"

namespace morpho::geometry {

namespace {

constexpr std::array<const char*, 7> kNames = {"QR", "AR", "BR", "BOTTOM", "BL", "AL", "QL"};

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

// Middle index of the lowest (max y) run strictly between `from` and `to`.
std::size_t lowest_between(const Contour& c, std::size_t from, std::size_t to) {
    double ymax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = from + 1; i < to; ++i) ymax = std::max(ymax, c[i].y);
    std::size_t first = to, last = from;
    for (std::size_t i = from + 1; i < to; ++i) {
        if (c[i].y >= ymax - 1e-9) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }
    if (first > last) throw LandmarkOrderError("no contour points between BR and BL");
    return (first + last) / 2;
}

}  // namespace

const char* to_string(LandmarkName name) { return kNames[static_cast<std::size_t>(name)]; }

LandmarkSet LandmarkSet::from_indices(std::size_t n, std::size_t qr, std::size_t ar,
                                      std::size_t br, std::size_t bottom, std::size_t bl,
                                      std::size_t al, std::size_t ql) {
    const std::array<std::size_t, 7> idx = {qr, ar, br, bottom, bl, al, ql};
    for (auto i : idx)
        if (i >= n) throw LandmarkOrderError("landmark index " + std::to_string(i) + " outside contour");

    // Offsets along the traversal, measured from QR.
    std::array<std::size_t, 7> off{};
    for (std::size_t k = 0; k < 7; ++k) off[k] = (idx[k] + n - qr) % n;
    for (std::size_t k = 1; k < 7; ++k) {
        if (off[k] <= off[k - 1]) {
            throw LandmarkOrderError(std::string("landmark ") + kNames[k] +
                                     " out of cyclic order QR, AR, BR, BOTTOM, BL, AL, QL");
        }
    }

    LandmarkSet lm;
    lm.n = n;
    lm.qr = qr;
    lm.ar = ar;
    lm.br = br;
    lm.bottom = bottom;
    lm.bl = bl;
    lm.al = al;
    lm.ql = ql;
    auto range = [n](std::size_t first_off, std::size_t end_off, std::size_t qr_idx) {
        return IndexRange{(qr_idx + first_off) % n, end_off - first_off, n};
    };
    // Offsets: QR=0 < AR < BR < bottom < BL < AL < QL.
    lm.segments[0] = range(1, off[1] + 1, qr);           // (QR, AR]
    lm.segments[1] = range(off[1] + 1, off[2] + 1, qr);  // (AR, BR]
    lm.segments[2] = range(off[2] + 1, off[3] + 1, qr);  // (BR, bottom]
    lm.segments[3] = range(off[3] + 1, off[4], qr);      // (bottom, BL)
    lm.segments[4] = range(off[4], off[5], qr);          // [BL, AL)
    lm.segments[5] = range(off[5], off[6], qr);          // [AL, QL)
    return lm;
}

std::size_t LandmarkSet::index(LandmarkName name) const {
    switch (name) {
        case LandmarkName::QR: return qr;
        case LandmarkName::AR: return ar;
        case LandmarkName::BR: return br;
        case LandmarkName::Bottom: return bottom;
        case LandmarkName::BL: return bl;
        case LandmarkName::AL: return al;
        case LandmarkName::QL: return ql;
    }
    return qr;
}

double peak_prominence(std::span<const double> v, std::size_t peak) {
    const std::size_t n = v.size();
    const double h = v[peak];
    auto walk = [&](int dir) {
        double lo = h;
        for (std::size_t step = 1; step < n; ++step) {
            const std::size_t i = dir > 0 ? (peak + step) % n : (peak + n - step) % n;
            if (v[i] > h) return lo;
            lo = std::min(lo, v[i]);
        }
        return lo;
    };
    return h - std::max(walk(+1), walk(-1));
}

std::vector<std::size_t> find_peaks(std::span<const double> v, double min_prominence) {
    const std::size_t n = v.size();
    std::vector<std::size_t> peaks;
    if (n < 3) return peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n;
        // Only consider the first sample of a plateau.
        if (v[prev] >= v[i]) continue;
        std::size_t len = 1;
        while (len < n && v[(i + len) % n] == v[i]) ++len;
        if (len == n || v[(i + len) % n] > v[i]) continue;
        const std::size_t centre = (i + (len - 1) / 2) % n;
        if (peak_prominence(v, centre) > min_prominence) peaks.push_back(centre);
    }
    std::sort(peaks.begin(), peaks.end());
    return peaks;
}

LandmarkSet detect_landmarks(const CurvatureProfile& profile, const Contour& c,
                             const DetectionParams& params) {
    const std::size_t n = c.size();
    if (profile.size() != n || n < 16)
        throw LandmarkOrderError("curvature profile is not aligned with the contour");

    double threshold = params.prominence_factor * median(profile.abs_s);
    if (!(threshold > 0.0)) {
        // Mostly straight outlines have a zero median; fall back to the mean.
        double mean = 0.0;
        for (double a : profile.abs_s) mean += a;
        threshold = params.prominence_factor * mean / static_cast<double>(n);
    }
    const auto peaks = find_peaks(profile.abs_s, threshold);

    double xmin = c[0].x, xmax = c[0].x;
    for (const auto& p : c.points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    const double xc = 0.5 * (xmin + xmax);
    const double reach = params.body_width_fraction * 0.5 * (xmax - xmin);

    // First point on the way down the right side, and last on the way back up
    // the left side, that lie in the wide body rather than the neck.
    std::size_t body_right = n, body_left = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (c[i].x - xc >= reach) {
            body_right = i;
            break;
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        if (xc - c[i].x >= reach) {
            body_left = i;
            break;
        }
    }
    if (body_right == n || body_left == n || body_right >= body_left)
        throw LandmarkOrderError("outline does not descend the right side first from the top point");

    // Peaks in the upper half of the neck (scroll, pegs) never become landmarks.
    const double ytop = c[0].y;
    const double ycut = ytop + 0.5 * (std::min(c[body_right].y, c[body_left].y) - ytop);
    std::vector<std::size_t> cand;
    for (auto p : peaks)
        if (c[p].y >= ycut) cand.push_back(p);

    if (cand.size() < 6) {
        throw LandmarkDetectionError(cand.size(), "found " + std::to_string(cand.size()) +
                                                      " qualifying curvature peaks, need 6");
    }

    std::size_t qr = n, ql = n;
    for (auto p : cand)
        if (p < body_right) qr = p;
    for (auto it = cand.rbegin(); it != cand.rend(); ++it)
        if (*it > body_left) ql = *it;
    if (qr == n) throw LandmarkOrderError("no fingerboard-exit peak (QR) above the right upper bout");
    if (ql == n) throw LandmarkOrderError("no fingerboard-exit peak (QL) above the left upper bout");

    std::vector<std::size_t> body;
    for (auto p : cand)
        if (p > qr && p < ql) body.push_back(p);
    if (body.size() < 4) {
        throw LandmarkDetectionError(body.size() + 2, "found " + std::to_string(body.size()) +
                                                          " body corner peaks, need 4");
    }
    const std::size_t ar = body[0], br = body[1];
    const std::size_t bl = body[body.size() - 2], al = body.back();
    if (br >= bl) throw LandmarkOrderError("lower corners BR and BL overlap");
    const std::size_t bottom = lowest_between(c, br, bl);
    return LandmarkSet::from_indices(n, qr, ar, br, bottom, bl, al, ql);
}

IndexRange exclude_neck(const Contour& c, const LandmarkSet& lm) {
    if (lm.n != c.size()) throw LandmarkOrderError("landmark set does not belong to this contour");
    return IndexRange{lm.ql, (lm.qr + lm.n - lm.ql) % lm.n + 1, lm.n};
}

void write_landmarks_csv(const LandmarkSet& lm, const Contour& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "name,index,x,y\n";
    for (auto name : kLandmarkOrder) {
        const std::size_t i = lm.index(name);
        out << to_string(name) << ',' << i << ',' << csv::format_sig9(c[i].x) << ','
            << csv::format_sig9(c[i].y) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LandmarkPoint> read_landmarks_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> row;
    if (!csv::read_row(in, row) || row != std::vector<std::string>{"name", "index", "x", "y"})
        throw FormatError(path.string() + ": expected header name,index,x,y");
    std::vector<LandmarkPoint> out;
    while (csv::read_row(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 4) throw ParseError(path.string() + ": expected 4 fields");
        const auto it = std::find(kNames.begin(), kNames.end(), row[0]);
        if (it == kNames.end()) throw ParseError(path.string() + ": unknown landmark '" + row[0] + "'");
        LandmarkPoint lp{static_cast<LandmarkName>(it - kNames.begin()), 0, {}};
        auto parse = [&](const std::string& f, auto& dst) {
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), dst);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw ParseError(path.string() + ": bad number '" + f + "'");
        };
        parse(row[1], lp.index);
        parse(row[2], lp.pos.x);
        parse(row[3], lp.pos.y);
        out.push_back(lp);
    }
    return out;
}

}  // namespace morpho::geometry

#include "morpho/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/geometry.hpp"
#include "morpho/random.hpp"

namespace morpho::synth {

namespace {

// Derived circle and ellipse parameters of the right half.
struct Layout {
    double y_qr, y_ar, y_br, y_mid;
    double yu, ru;        // upper bout circle, centre (0, yu)
    double cx, rc;        // C-bout circle, centre (cx, y_mid)
    double yl, la, lb;    // lower bout ellipse, centre (0, yl), semi-axes (la, lb)
};

Layout layout(const ShapeParams& s) {
    Layout l{};
    const double xe = s.corner_half_width, wn = s.neck_half_width;
    l.y_qr = s.ell;
    l.y_ar = s.ell + s.upper;
    l.y_br = l.y_ar + s.cbout;
    l.y_mid = 0.5 * (l.y_ar + l.y_br);
    // Centre on the axis equidistant from QR and AR.
    l.yu = (xe * xe + l.y_ar * l.y_ar - wn * wn - l.y_qr * l.y_qr) / (2.0 * (l.y_ar - l.y_qr));
    l.ru = std::hypot(wn, l.y_qr - l.yu);
    // Concave arc leaving both corners at cbout_angle from the vertical.
    l.rc = 0.5 * s.cbout / std::sin(s.cbout_angle);
    l.cx = xe + l.rc * std::cos(s.cbout_angle);
    // Ellipse through BR and the bottom point (0, 1), centred on the axis.
    l.la = s.lower_half_width;
    const double q = 1.0 - (xe / l.la) * (xe / l.la);
    l.lb = (1.0 - l.y_br) / (1.0 + std::sqrt(std::max(q, 0.0)));
    l.yl = 1.0 - l.lb;
    return l;
}

void arc(std::vector<Point2d>& out, Point2d centre, double rx, double ry, double t0, double t1, double ds) {
    const double len = std::max(rx, ry) * std::abs(t1 - t0);
    const int n = std::max(2, static_cast<int>(std::ceil(len / ds)));
    for (int k = 1; k <= n; ++k) {
        const double t = t0 + (t1 - t0) * k / n;
        out.push_back({centre.x + rx * std::cos(t), centre.y + ry * std::sin(t)});
    }
}

void segment(std::vector<Point2d>& out, Point2d a, Point2d b, double ds) {
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / ds)));
    for (int k = 1; k <= n; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / n));
}

// Smooth displacement field: three plane waves per axis.
struct NoiseField {
    struct Wave {
        double kx, ky, phase, amp;
    };
    std::array<Wave, 3> wx{}, wy{};

    NoiseField(double amplitude, std::uint64_t seed) {
        Rng rng = make_rng(seed, 0x0a15eULL);
        const double per_wave = amplitude / (3.0 * std::sqrt(2.0));
        for (auto* waves : {&wx, &wy}) {
            for (auto& w : *waves) {
                const double k = uniform(rng, 0.5, 2.0) * 2.0 * M_PI;
                const double dir = uniform(rng, 0.0, 2.0 * M_PI);
                w = {k * std::cos(dir), k * std::sin(dir), uniform(rng, 0.0, 2.0 * M_PI), per_wave};
            }
        }
    }

    Point2d operator()(Point2d p) const {
        Point2d d{0.0, 0.0};
        for (const auto& w : wx) d.x += w.amp * std::sin(w.kx * p.x + w.ky * p.y + w.phase);
        for (const auto& w : wy) d.y += w.amp * std::sin(w.kx * p.x + w.ky * p.y + w.phase);
        return d;
    }
};

// Blend the outline towards a heavily smoothed copy around point `at`, so
// the corner there turns into a gentle bend.
void round_corner(std::vector<Point2d>& pts, std::size_t at, double ds) {
    const std::size_t n = pts.size();
    const double width = 0.05, sigma = 0.025;
    const auto half = static_cast<long>(std::ceil(3.0 * width / ds));
    const auto radius = static_cast<long>(std::ceil(4.0 * sigma / ds));
    const double sig = sigma / ds;

    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double ksum = 0.0;
    for (long j = -radius; j <= radius; ++j)
        ksum += kernel[static_cast<std::size_t>(j + radius)] = std::exp(-0.5 * (j / sig) * (j / sig));

    auto wrap = [n](long i) { return static_cast<std::size_t>(((i % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n)); };
    std::vector<Point2d> blended;
    for (long off = -half; off <= half; ++off) {
        const std::size_t i = wrap(static_cast<long>(at) + off);
        Point2d sm{0.0, 0.0};
        for (long j = -radius; j <= radius; ++j)
            sm = sm + pts[wrap(static_cast<long>(i) + j)] * (kernel[static_cast<std::size_t>(j + radius)] / ksum);
        const double d = off * ds / width;
        const double beta = std::exp(-d * d);
        blended.push_back(pts[i] * (1.0 - beta) + sm * beta);
    }
    for (long off = -half; off <= half; ++off)
        pts[wrap(static_cast<long>(at) + off)] = blended[static_cast<std::size_t>(off + half)];
}

struct MakerProfile {
    const char* maker;
    const char* country;
    int first_year, last_year;
    // offsets to upper, cbout, corner, lower bout, ell
    double d_upper, d_cbout, d_corner, d_lower, d_ell;
};

constexpr std::array<MakerProfile, 7> kMakers = {{
    {"Amati", "Italy", 1600, 1680, 0.000, 0.010, 0.000, -0.005, 0.000},
    {"Stradivari", "Italy", 1666, 1737, 0.000, 0.000, 0.008, 0.000, 0.000},
    {"Guarneri", "Italy", 1690, 1744, 0.000, -0.008, 0.000, 0.006, 0.000},
    {"Stainer", "Austria", 1640, 1680, -0.010, 0.000, -0.008, 0.000, 0.000},
    {"Klotz", "Germany", 1720, 1790, 0.006, 0.000, 0.000, 0.000, 0.010},
    {"Vuillaume", "France", 1825, 1870, 0.000, 0.005, 0.000, 0.008, -0.008},
    {"Sacconi", "Italy", 1935, 1970, -0.004, 0.000, 0.004, 0.000, 0.004},
}};

std::string instrument_id(int i, int count) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(count).size());
    std::string digits = std::to_string(i + 1);
    return "V" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

void ShapeParams::validate() const {
    const double xe = corner_half_width;
    if (!(neck_half_width > 0.0 && ell > neck_half_width && upper > 0.0 && cbout > 0.0))
        throw ConfigError("synthetic shape: lengths must be positive and the neck longer than its width");
    if (ell + upper + cbout >= 0.95) throw ConfigError("synthetic shape: no room left for the lower bout");
    if (!(cbout_angle > 0.1 && cbout_angle <= M_PI / 2))
        throw ConfigError("synthetic shape: C-bout angle must lie in (0.1, pi/2]");
    if (!(xe > neck_half_width) || !(lower_half_width > xe))
        throw ConfigError("synthetic shape: widths must satisfy neck < corner < lower bout");
    const Layout l = layout(*this);
    if (!(l.yu > l.y_qr) || !(l.cx - l.rc > neck_half_width))
        throw ConfigError("synthetic shape: bouts cannot pass through the corners");
}

double ShapeParams::waist_half_width() const {
    const Layout l = layout(*this);
    return l.cx - l.rc;
}

Outline generate_outline(const ShapeParams& s, const OutlineOptions& opt) {
    s.validate();
    if (!(opt.length_px > 0.0) || !(opt.step_px > 0.0) || opt.noise < 0.0)
        throw ConfigError("synthetic outline: length, step and noise must be positive");
    const Layout l = layout(s);
    const double ds = opt.step_px / opt.length_px;
    const double wn = s.neck_half_width, xe = s.corner_half_width;

    std::vector<Point2d> right{{0.0, 0.0}};
    arc(right, {0.0, wn}, wn, wn, -M_PI / 2, 0.0, ds);                    // cap
    segment(right, right.back(), {wn, l.y_qr}, ds);                       // neck edge
    const std::size_t i_qr = right.size() - 1;
    arc(right, {0.0, l.yu}, l.ru, l.ru, std::atan2(l.y_qr - l.yu, wn), std::atan2(l.y_ar - l.yu, xe), ds);
    right.back() = {xe, l.y_ar};
    const std::size_t i_ar = right.size() - 1;
    arc(right, {l.cx, l.y_mid}, l.rc, l.rc, M_PI + s.cbout_angle, M_PI - s.cbout_angle, ds);
    right.back() = {xe, l.y_br};
    const std::size_t i_br = right.size() - 1;
    arc(right, {0.0, l.yl}, l.la, l.lb, std::atan2((l.y_br - l.yl) / l.lb, xe / l.la), 0.5 * M_PI, ds);
    right.back() = {0.0, 1.0};
    const std::size_t i_bottom = right.size() - 1;

    std::vector<Point2d> pts = right;
    for (std::size_t i = i_bottom; i-- > 1;) pts.push_back({-right[i].x, right[i].y});
    auto mirror = [&](std::size_t i) { return 2 * i_bottom - i; };
    const std::array<std::size_t, 7> idx = {i_qr, i_ar, i_br, i_bottom, mirror(i_br), mirror(i_ar), mirror(i_qr)};

    static constexpr std::array<std::size_t, 6> kCornerSlot = {0, 1, 2, 4, 5, 6};
    for (std::size_t k = 0; k < 6; ++k)
        if (opt.rounded[k]) round_corner(pts, idx[kCornerSlot[k]], ds);

    if (opt.noise > 0.0) {
        const NoiseField field(opt.noise, opt.seed);
        for (auto& p : pts) p = p + field(p);
    }

    Outline o;
    o.contour.points.reserve(pts.size());
    for (const auto& p : pts) o.contour.points.push_back(p * opt.length_px);
    for (std::size_t k = 0; k < 7; ++k) o.landmarks[k] = o.contour[idx[k]];
    return o;
}

measures::RawMeasures analytic_measures(const Outline& o) {
    const auto& lm = o.landmarks;
    const Point2d qr = lm[0], ar = lm[1], br = lm[2], bottom = lm[3], bl = lm[4], al = lm[5], ql = lm[6];
    auto t_at = [&](double x) { return qr.y + (ql.y - qr.y) * (x - qr.x) / (ql.x - qr.x); };
    const std::size_t top = geometry::topmost_index(o.contour);
    double ymax = -std::numeric_limits<double>::infinity();
    for (const auto& p : o.contour.points) ymax = std::max(ymax, p.y);

    measures::RawMeasures r;
    r.a = br.y - ar.y;
    r.d = bl.y - al.y;
    r.b = ar.y - t_at(ar.x);
    r.e = al.y - t_at(al.x);
    r.c = bottom.y - br.y;
    r.f = bottom.y - bl.y;
    r.h1 = distance(bl, br);
    r.h2 = distance(al, ar);
    r.ell = t_at(o.contour[top].x) - o.contour[top].y;
    r.L = ymax - o.contour[top].y;
    return r;
}

std::array<std::size_t, 7> nearest_indices(const Contour& c, const std::array<Point2d, 7>& landmarks) {
    std::array<std::size_t, 7> out{};
    for (std::size_t k = 0; k < 7; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double d = distance(c[i], landmarks[k]);
            if (d < best) {
                best = d;
                out[k] = i;
            }
        }
    }
    return out;
}

ingest::RasterImage rasterize(const Contour& c, int width, int height, std::uint8_t ink) {
    if (width <= 0 || height <= 0) throw ConfigError("raster size must be positive");
    ingest::RasterImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 255);

    // Crossings of every edge with the rows, pixel centres at integer coordinates.
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(height));
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2d a = c[i], b = c[(i + 1) % n];
        if (a.y == b.y) continue;
        const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
        const int r0 = std::max(0, static_cast<int>(std::ceil(lo)));
        const int r1 = std::min(height - 1, static_cast<int>(std::ceil(hi)) - 1);
        for (int r = r0; r <= r1; ++r) {
            const double t = (r - a.y) / (b.y - a.y);
            rows[static_cast<std::size_t>(r)].push_back(a.x + t * (b.x - a.x));
        }
    }
    for (int r = 0; r < height; ++r) {
        auto& xs = rows[static_cast<std::size_t>(r)];
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
            const int c1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
            for (int col = c0; col <= c1; ++col)
                img.pixels[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)] = ink;
        }
    }
    return img;
}

std::vector<CorpusEntry> make_corpus(const CorpusParams& p) {
    if (p.count < 1) throw ConfigError("synthetic corpus needs at least one instrument");
    if (p.noise < 0.0 || p.noise > 0.05) throw ConfigError("synthetic noise must lie in [0, 0.05]");
    if (!(p.length_px >= 100.0) || p.margin_px < 2) throw ConfigError("synthetic image too small");

    const int n_makers = static_cast<int>(kMakers.size());
    std::vector<int> per_maker(kMakers.size(), 0);
    for (int i = 0; i < p.count; ++i) ++per_maker[static_cast<std::size_t>(i % n_makers)];

    const ingest::PeriodTable periods;
    std::vector<CorpusEntry> out;
    for (int i = 0; i < p.count; ++i) {
        const auto& mk = kMakers[static_cast<std::size_t>(i % n_makers)];
        const int slot = i / n_makers;
        Rng rng = make_rng(p.seed, static_cast<std::uint64_t>(i));

        CorpusEntry e;
        e.meta.id = instrument_id(i, p.count);
        e.meta.maker = mk.maker;
        e.meta.country = mk.country;
        const double span = mk.last_year - mk.first_year;
        const double pos = (slot + uniform01(rng)) / per_maker[static_cast<std::size_t>(i % n_makers)];
        e.meta.year = mk.first_year + static_cast<int>(std::floor(pos * span));
        e.meta.period = periods.classify(*e.meta.year);

        auto jitter = [&] { return uniform(rng, -0.004, 0.004); };
        e.shape.upper += mk.d_upper + jitter();
        e.shape.cbout += mk.d_cbout + jitter();
        e.shape.corner_half_width += mk.d_corner + jitter();
        e.shape.lower_half_width += mk.d_lower + jitter();
        e.shape.ell += mk.d_ell + jitter();

        OutlineOptions opt;
        opt.length_px = p.length_px * uniform(rng, 0.9, 1.1);
        opt.noise = p.noise;
        opt.seed = splitmix64(p.seed ^ static_cast<std::uint64_t>(i));
        Outline o = generate_outline(e.shape, opt);

        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& q : o.contour.points) {
            xmin = std::min(xmin, q.x);
            xmax = std::max(xmax, q.x);
            ymin = std::min(ymin, q.y);
            ymax = std::max(ymax, q.y);
        }
        const Point2d shift{p.margin_px - std::floor(xmin), p.margin_px - std::floor(ymin)};
        for (auto& q : o.contour.points) q = q + shift;
        for (auto& q : o.landmarks) q = q + shift;
        e.width = static_cast<int>(std::ceil(xmax - std::floor(xmin))) + 2 * p.margin_px + 1;
        e.height = static_cast<int>(std::ceil(ymax - std::floor(ymin))) + 2 * p.margin_px + 1;
        e.outline = std::move(o);
        out.push_back(std::move(e));
    }
    return out;
}

void write_corpus(const std::vector<CorpusEntry>& corpus, const CorpusParams& p, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "outlines");

    nlohmann::ordered_json truth;
    truth["count"] = p.count;
    truth["noise"] = p.noise;
    truth["seed"] = p.seed;
    truth["instruments"] = nlohmann::ordered_json::array();

    std::vector<ingest::Metadata> meta;
    for (const auto& e : corpus) {
        meta.push_back(e.meta);
        ingest::write_pgm(rasterize(e.outline.contour, e.width, e.height), dir / "images" / (e.meta.id + ".pgm"));

        std::ofstream oc(dir / "outlines" / (e.meta.id + ".csv"), std::ios::binary);
        if (!oc) throw IoError("cannot write outline for " + e.meta.id);
        oc << "x,y\n";
        for (const auto& q : e.outline.contour.points)
            csv::write_row(oc, {csv::format_sig9(q.x), csv::format_sig9(q.y)});

        const auto raw = analytic_measures(e.outline);
        nlohmann::ordered_json j;
        j["id"] = e.meta.id;
        j["image"] = "images/" + e.meta.id + ".pgm";
        j["maker"] = *e.meta.maker;
        j["country"] = *e.meta.country;
        j["year"] = *e.meta.year;
        auto& lm = j["landmarks"];
        for (std::size_t k = 0; k < 7; ++k)
            lm[geometry::to_string(geometry::kLandmarkOrder[k])] = {e.outline.landmarks[k].x, e.outline.landmarks[k].y};
        auto& m = j["measures"];
        m["L_px"] = raw.L;
        const std::array<std::pair<const char*, double>, 9> lengths = {{{"a", raw.a}, {"b", raw.b}, {"c", raw.c},
                                                                        {"d", raw.d}, {"e", raw.e}, {"f", raw.f},
                                                                        {"h1", raw.h1}, {"h2", raw.h2},
                                                                        {"ell", raw.ell}}};
        for (const auto& [name, v] : lengths) m[name] = v / raw.L;
        truth["instruments"].push_back(std::move(j));
    }

    std::ofstream mo(dir / "metadata.csv", std::ios::binary);
    if (!mo) throw IoError("cannot write metadata.csv");
    ingest::write_metadata(mo, meta);

    std::ofstream jo(dir / "ground_truth.json", std::ios::binary);
    if (!jo) throw IoError("cannot write ground_truth.json");
    jo << truth.dump(2) << '\n';
}

}  // namespace morpho::synth

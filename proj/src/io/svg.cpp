#include "morpho/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "morpho/error.hpp"

namespace morpho::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

// Plot area inside a fixed canvas.
struct Frame {
    static constexpr double W = 640, H = 480, left = 70, right = 20, top = 40, bottom = 55;
    Range xr, yr;

    double px(double x) const { return left + (x - xr.lo) / (xr.hi - xr.lo) * (W - left - right); }
    double py(double y) const { return H - bottom - (y - yr.lo) / (yr.hi - yr.lo) * (H - top - bottom); }

    void axes(Document& d, std::string_view title, std::string_view xlabel, std::string_view ylabel) const {
        d.rect(0, 0, W, H, "white");
        d.rect(left, top, W - left - right, H - top - bottom, "none", "#333333");
        for (int i = 0; i <= 4; ++i) {
            const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
            const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
            d.line({px(xv), H - bottom}, {px(xv), H - bottom + 5}, "#333333");
            d.text({px(xv), H - bottom + 18}, tick_label(xv), 10, "middle");
            d.line({left - 5, py(yv)}, {left, py(yv)}, "#333333");
            d.text({left - 8, py(yv) + 3}, tick_label(yv), 10, "end");
        }
        d.text({W / 2, 24}, title, 15, "middle");
        d.text({(left + W - right) / 2, H - 12}, xlabel, 12, "middle");
        d.text({18, (top + H - bottom) / 2}, ylabel, 12, "middle", -90);
    }
};

}  // namespace

std::string escape_xml(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
          << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
}

void Document::line(Point2d a, Point2d b, std::string_view stroke, double width) {
    body_ << "<line x1=\"" << num(a.x) << "\" y1=\"" << num(a.y) << "\" x2=\"" << num(b.x) << "\" y2=\""
          << num(b.y) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
}

void Document::polyline(std::span<const Point2d> pts, std::string_view stroke, double width, bool closed) {
    if (pts.empty()) return;
    body_ << '<' << (closed ? "polygon" : "polyline") << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) body_ << (i ? " " : "") << num(pts[i].x) << ',' << num(pts[i].y);
    body_ << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
}

void Document::circle(Point2d c, double r, std::string_view fill, std::string_view stroke) {
    body_ << "<circle cx=\"" << num(c.x) << "\" cy=\"" << num(c.y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
          << "\" stroke=\"" << stroke << "\"/>\n";
}

void Document::text(Point2d at, std::string_view s, double size, std::string_view anchor, double rotate) {
    body_ << "<text x=\"" << num(at.x) << "\" y=\"" << num(at.y) << "\" font-size=\"" << num(size)
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << '"';
    if (rotate != 0.0) body_ << " transform=\"rotate(" << num(rotate) << ' ' << num(at.x) << ' ' << num(at.y) << ")\"";
    body_ << '>' << escape_xml(s) << "</text>\n";
}

std::string Document::str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
        << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n"
        << body_.str() << "</svg>\n";
    return out.str();
}

void Document::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << str();
}

std::string diverging_color(double v) {
    if (!std::isfinite(v)) return "#cccccc";
    v = std::clamp(v, -1.0, 1.0);
    // white -> (33,102,172) for negatives, white -> (178,24,43) for positives
    const double t = std::abs(v);
    const int r0 = v < 0 ? 33 : 178, g0 = v < 0 ? 102 : 24, b0 = v < 0 ? 172 : 43;
    auto mix = [t](int c) { return static_cast<int>(std::lround(255.0 + (c - 255.0) * t)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(r0), mix(g0), mix(b0));
    return buf;
}

Document heatmap(const analysis::CorrelationMap& cm, std::string_view title) {
    const auto k = static_cast<double>(cm.labels.size());
    const double cell = 32, margin = 60, top = 50, legend = 90;
    const double w = margin + k * cell + legend, h = top + k * cell + 20;
    Document d(w, h);
    d.rect(0, 0, w, h, "white");
    d.text({margin + k * cell / 2, 24}, title, 15, "middle");
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        const double off = static_cast<double>(i) * cell;
        d.text({margin - 6, top + off + cell / 2 + 4}, cm.labels[i], 11, "end");
        d.text({margin + off + cell / 2, top - 6}, cm.labels[i], 11, "middle");
        for (std::size_t j = 0; j < cm.labels.size(); ++j) {
            d.rect(margin + static_cast<double>(j) * cell, top + off, cell, cell,
                   diverging_color(cm.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))), "#ffffff");
        }
    }
    // colour bar over the fixed [-1, 1] scale
    const double bx = margin + k * cell + 25, bh = std::max(k * cell, 100.0), steps = 20;
    for (int s = 0; s < steps; ++s) {
        const double v = 1.0 - 2.0 * (s + 0.5) / steps;
        d.rect(bx, top + s * bh / steps, 16, bh / steps, diverging_color(v));
    }
    d.text({bx + 20, top + 8}, "1", 10);
    d.text({bx + 20, top + bh / 2 + 4}, "0", 10);
    d.text({bx + 20, top + bh}, "-1", 10);
    return d;
}

Document scatter(const Eigen::MatrixXd& scores, std::span<const std::string> groups, std::string_view title,
                 std::string_view xlabel, std::string_view ylabel) {
    if (scores.cols() < 2) throw DimensionError("scatter needs two score columns");
    if (static_cast<Eigen::Index>(groups.size()) != scores.rows())
        throw DimensionError("group count does not match score rows");
    Frame f;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        f.xr.add(scores(r, 0));
        f.yr.add(scores(r, 1));
    }
    f.xr.pad();
    f.yr.pad();

    std::map<std::string, std::string> colour;
    for (const auto& g : groups) colour.emplace(g, "");
    std::size_t next = 0;
    for (auto& [name, c] : colour) c = kPalette[next++ % kPalette.size()];

    Document d(Frame::W + 140, Frame::H);
    d.rect(0, 0, Frame::W + 140, Frame::H, "white");
    f.axes(d, title, xlabel, ylabel);
    for (Eigen::Index r = 0; r < scores.rows(); ++r)
        d.circle({f.px(scores(r, 0)), f.py(scores(r, 1))}, 3.5, colour[groups[static_cast<std::size_t>(r)]],
                 "#222222");
    double ly = Frame::top + 10;
    for (const auto& [name, c] : colour) {
        d.circle({Frame::W + 10, ly - 4}, 4, c, "#222222");
        d.text({Frame::W + 20, ly}, name, 11);
        ly += 16;
    }
    return d;
}

Document line_chart(std::span<const double> x, std::span<const std::optional<double>> y, std::string_view title,
                    std::string_view xlabel, std::string_view ylabel) {
    if (x.size() != y.size()) throw DimensionError("x and y lengths differ");
    Frame f;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!y[i]) continue;
        f.xr.add(x[i]);
        f.yr.add(*y[i]);
    }
    f.xr.pad();
    f.yr.pad();
    Document d(Frame::W, Frame::H);
    f.axes(d, title, xlabel, ylabel);
    std::vector<Point2d> run;
    auto flush = [&] {
        if (run.size() == 1) d.circle(run.front(), 2, "#1f77b4");
        else d.polyline(run, "#1f77b4", 1.5);
        run.clear();
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] && std::isfinite(*y[i])) run.push_back({f.px(x[i]), f.py(*y[i])});
        else if (!run.empty()) flush();
    }
    if (!run.empty()) flush();
    return d;
}

Document morph_frame(const MorphFrame& m) {
    Range xr, yr;
    auto add = [&](Point2d p) {
        xr.add(p.x);
        yr.add(p.y);
    };
    for (auto p : m.contour) add(p);
    for (const auto& l : m.grid.vertical)
        for (auto p : l) add(p);
    for (const auto& l : m.grid.horizontal)
        for (auto p : l) add(p);
    for (auto p : m.source) add(p);
    for (auto p : m.target) add(p);
    xr.pad();
    yr.pad();

    const double H = 600, top = 40;
    const double scale = (H - top - 10) / (yr.hi - yr.lo);
    const double W = std::max(200.0, (xr.hi - xr.lo) * scale + 20);
    auto map = [&](Point2d p) { return Point2d{10 + (p.x - xr.lo) * scale, top + (p.y - yr.lo) * scale}; };
    auto mapped = [&](std::span<const Point2d> pts) {
        std::vector<Point2d> out;
        out.reserve(pts.size());
        for (auto p : pts) out.push_back(map(p));
        return out;
    };

    Document d(W, H);
    d.rect(0, 0, W, H, "white");
    d.text({W / 2, 24}, m.title, 14, "middle");
    for (const auto& l : m.grid.vertical) d.polyline(mapped(l), "#9ecae1", 0.8);
    for (const auto& l : m.grid.horizontal) d.polyline(mapped(l), "#9ecae1", 0.8);
    d.polyline(mapped(m.contour), "#000000", 1.5, true);
    for (auto p : m.source) d.circle(map(p), 3.5, "none", "#2171b5");
    for (auto p : m.target) d.circle(map(p), 3, "#cb181d");
    return d;
}

}  // namespace morpho::svg

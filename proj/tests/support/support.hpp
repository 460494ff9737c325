#pragma once

// Helpers shared by the unit and acceptance tests.

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "morpho/cli.hpp"
#include "morpho/types.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "morpho-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

// Relative path -> bytes for every regular file below `dir`.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    return out;
}

// 8-bit RGB PNG written through libpng's simplified API.
inline void write_png_rgb(const fs::path& p, int w, int h, const std::vector<std::uint8_t>& rgb) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, p.c_str(), 0, rgb.data(), 0, nullptr))
        throw std::runtime_error(std::string("png write failed: ") + img.message);
}

inline void write_png_gray(const fs::path& p, int w, int h, const std::vector<std::uint8_t>& g) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&img, p.c_str(), 0, g.data(), 0, nullptr))
        throw std::runtime_error(std::string("png write failed: ") + img.message);
}

// Point i at angle 2*pi*i/n, running clockwise on screen (positive area for y down).
inline morpho::Contour ellipse(double a, double b, std::size_t n, double cx = 0, double cy = 0,
                               double phase = 0.0) {
    morpho::Contour c;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = phase + 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        c.points.push_back({cx + a * std::cos(t), cy + b * std::sin(t)});
    }
    return c;
}

inline morpho::Contour circle(double r, std::size_t n, double cx = 0, double cy = 0) {
    return ellipse(r, r, n, cx, cy);
}

inline long cyclic_distance(std::size_t a, std::size_t b, std::size_t n) {
    const long d = std::labs(static_cast<long>(a) - static_cast<long>(b));
    return std::min<long>(d, static_cast<long>(n) - d);
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "morpho");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = morpho::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Tag balance plus a root <svg> carrying a viewBox. Enough to catch broken
// writers; not a validating parser.
inline bool well_formed_svg(const std::string& doc, std::string* why = nullptr) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    std::vector<std::string> stack;
    bool saw_root = false;
    std::size_t i = 0;
    while ((i = doc.find('<', i)) != std::string::npos) {
        const auto j = doc.find('>', i);
        if (j == std::string::npos) return fail("unterminated tag");
        std::string tag = doc.substr(i + 1, j - i - 1);
        i = j + 1;
        if (tag.empty()) return fail("empty tag");
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (tag[0] == '/') {
            const std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
        if (!saw_root) {
            if (name != "svg") return fail("root element is " + name);
            if (tag.find("viewBox=\"") == std::string::npos) return fail("no viewBox");
            saw_root = true;
        } else if (stack.empty()) {
            return fail("content after the root element");
        }
        if (tag.find('<') != std::string::npos) return fail("'<' inside a tag");
        if (!self_closing) stack.push_back(name);
    }
    if (!saw_root) return fail("no root element");
    if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
    // Text must not carry raw ampersands.
    for (std::size_t k = doc.find('&'); k != std::string::npos; k = doc.find('&', k + 1)) {
        const auto semi = doc.find(';', k);
        if (semi == std::string::npos || semi - k > 8) return fail("bare '&'");
    }
    return true;
}

}  // namespace testing

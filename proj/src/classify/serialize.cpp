#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "morpho/classify.hpp"
#include "morpho/error.hpp"

// Text format, version 1:
//
//   morpho-forest 1
//   classes <k>
//   <one class name per line>
//   features <p>
//   importance <p values>
//   trees <T>
//   tree <node count>
//   <feature> <threshold> <left> <right> <label>    (one line per node)
//
// Thresholds are written with 17 significant digits so they round-trip exactly.

namespace morpho::classify {

namespace {

constexpr const char* kMagic = "morpho-forest";
constexpr int kVersion = 1;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void expect(std::istream& in, const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw FormatError("forest file: expected '" + word + "', got '" + got + "'");
}

template <class T>
T read_value(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) throw FormatError(std::string("forest file: cannot read ") + what);
    return v;
}

}  // namespace

void Forest::save(std::ostream& out) const {
    out << kMagic << ' ' << kVersion << '\n';
    out << "classes " << classes.size() << '\n';
    for (const auto& c : classes) out << c << '\n';
    out << "features " << n_features << '\n';
    out << "importance";
    for (double v : importance) out << ' ' << fmt17(v);
    out << '\n';
    out << "trees " << trees.size() << '\n';
    for (const auto& t : trees) {
        out << "tree " << t.nodes.size() << '\n';
        for (const auto& n : t.nodes)
            out << n.feature << ' ' << fmt17(n.threshold) << ' ' << n.left << ' ' << n.right << ' ' << n.label
                << '\n';
    }
}

void Forest::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    save(out);
    if (!out) throw IoError("write failed: " + path.string());
}

Forest Forest::load(std::istream& in) {
    expect(in, kMagic);
    if (read_value<int>(in, "version") != kVersion) throw FormatError("forest file: unsupported version");
    Forest f;
    expect(in, "classes");
    const auto k = read_value<std::size_t>(in, "class count");
    in >> std::ws;
    for (std::size_t i = 0; i < k; ++i) {
        std::string name;
        if (!std::getline(in, name)) throw FormatError("forest file: truncated class list");
        if (!name.empty() && name.back() == '\r') name.pop_back();
        f.classes.push_back(name);
    }
    expect(in, "features");
    f.n_features = read_value<int>(in, "feature count");
    expect(in, "importance");
    for (int j = 0; j < f.n_features; ++j) f.importance.push_back(read_value<double>(in, "importance"));
    expect(in, "trees");
    const auto t = read_value<std::size_t>(in, "tree count");
    for (std::size_t i = 0; i < t; ++i) {
        expect(in, "tree");
        const auto m = read_value<std::size_t>(in, "node count");
        Tree tree;
        for (std::size_t j = 0; j < m; ++j) {
            Node n;
            n.feature = read_value<int>(in, "feature");
            n.threshold = read_value<double>(in, "threshold");
            n.left = read_value<int>(in, "left");
            n.right = read_value<int>(in, "right");
            n.label = read_value<int>(in, "label");
            const auto valid_child = [&](int c) { return c > static_cast<int>(j) && c < static_cast<int>(m); };
            if (n.feature >= f.n_features || n.label < 0 || n.label >= static_cast<int>(k) ||
                (n.feature >= 0 && (!valid_child(n.left) || !valid_child(n.right))))
                throw FormatError("forest file: invalid node");
            tree.nodes.push_back(n);
        }
        if (tree.nodes.empty()) throw FormatError("forest file: empty tree");
        f.trees.push_back(std::move(tree));
    }
    return f;
}

Forest Forest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load(in);
}

}  // namespace morpho::classify

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/geometry.hpp"
#include "morpho/svg.hpp"
#include "morpho/synth.hpp"
#include "support.hpp"

using namespace morpho;

TEST_SUITE("io.csv") {
    TEST_CASE("quoting round trip") {
        const std::vector<std::string> row = {"plain", "with,comma", "say \"hi\"", "two\nlines", ""};
        std::stringstream io;
        csv::write_row(io, row);
        CHECK(io.str() == "plain,\"with,comma\",\"say \"\"hi\"\"\",\"two\nlines\",\n");
        std::vector<std::string> back;
        REQUIRE(csv::read_row(io, back));
        CHECK(back == row);
        CHECK(!csv::read_row(io, back));
    }

    TEST_CASE("CRLF and missing final newline") {
        std::istringstream in("a,b\r\nc,\"d\"");
        std::vector<std::string> f;
        REQUIRE(csv::read_row(in, f));
        CHECK(f == std::vector<std::string>{"a", "b"});
        REQUIRE(csv::read_row(in, f));
        CHECK(f == std::vector<std::string>{"c", "d"});
        CHECK(!csv::read_row(in, f));
    }

    TEST_CASE("nine significant digits") {
        CHECK(csv::format_sig9(0.1) == "0.1");
        CHECK(csv::format_sig9(1.0 / 3.0) == "0.333333333");
        CHECK(csv::format_sig9(1174) == "1174");
        CHECK(csv::format_sig9(-2.5e-7) == "-2.5e-07");
    }
}

TEST_SUITE("io.svg") {
    TEST_CASE("text is escaped") {
        CHECK(svg::escape_xml("a<b & \"c\" 'd'>") == "a&lt;b &amp; &quot;c&quot; &apos;d&apos;&gt;");
        svg::Document d(100, 50);
        d.text({1, 2}, "Guarneri & Sons <del Gesu>");
        const auto s = d.str();
        CHECK(testing::well_formed_svg(s));
        CHECK(s.find("viewBox=\"0 0 100") != std::string::npos);
        CHECK(s.find("&amp; Sons &lt;del") != std::string::npos);
    }

    TEST_CASE("diverging colour scale") {
        CHECK(svg::diverging_color(0) == "#ffffff");
        CHECK(svg::diverging_color(1) == svg::diverging_color(5));
        CHECK(svg::diverging_color(-1) == svg::diverging_color(-3));
        CHECK(svg::diverging_color(1) != svg::diverging_color(-1));
    }

    TEST_CASE("charts are well formed") {
        analysis::CorrelationMap cm{{"a", "b&c"}, Eigen::Matrix2d{{1, -0.4}, {-0.4, 1}}};
        std::string why;
        CHECK_MESSAGE(testing::well_formed_svg(svg::heatmap(cm).str(), &why), why);
        const auto heat = svg::heatmap(cm).str();
        CHECK(heat.find(svg::diverging_color(-0.4)) != std::string::npos);
        CHECK(heat.find(">b&amp;c<") != std::string::npos);

        Eigen::MatrixXd scores(4, 2);
        scores << 0, 1, 2, 3, -1, 0.5, 4, 4;
        const std::vector<std::string> groups = {"Italy", "France", "Italy", "Austria"};
        const auto scatter = svg::scatter(scores, groups, "PCA", "PC1 (60.0%)", "PC2 (30.0%)").str();
        CHECK_MESSAGE(testing::well_formed_svg(scatter, &why), why);
        CHECK(scatter.find(">PC1 (60.0%)<") != std::string::npos);
        CHECK(scatter.find(">Austria<") != std::string::npos);

        const std::vector<double> x = {1, 2, 3, 4};
        const std::vector<std::optional<double>> y = {0.1, std::nullopt, 0.3, 0.2};
        const auto line = svg::line_chart(x, y, "a over time", "year", "a").str();
        CHECK_MESSAGE(testing::well_formed_svg(line, &why), why);
        CHECK(line.find("nan") == std::string::npos);
    }
}

TEST_SUITE("synth") {
    TEST_CASE("planted landmarks lie on the outline in order") {
        synth::OutlineOptions o;
        o.noise = 0.01;
        o.seed = 5;
        const auto out = synth::generate_outline({}, o);
        CHECK(morpho::signed_area(out.contour) > 0);
        const auto idx = synth::nearest_indices(out.contour, out.landmarks);
        for (std::size_t k = 0; k < 7; ++k) {
            const auto& p = out.contour.points[idx[k]];
            CHECK(std::hypot(p.x - out.landmarks[k].x, p.y - out.landmarks[k].y) < 1.0);
        }
        // QR .. QL appear in traversal order, starting from the tip.
        for (std::size_t k = 1; k < 7; ++k) CHECK(idx[k] > idx[k - 1]);
    }

    TEST_CASE("noise is bounded and seeded") {
        synth::OutlineOptions o;
        const auto clean = synth::generate_outline({}, o);
        o.noise = 0.005;
        o.seed = 1;
        const auto a = synth::generate_outline({}, o);
        const auto b = synth::generate_outline({}, o);
        CHECK(a.contour.points == b.contour.points);
        o.seed = 2;
        CHECK(!(synth::generate_outline({}, o).contour.points == a.contour.points));
        REQUIRE(a.contour.size() == clean.contour.size());
        double worst = 0;
        for (std::size_t i = 0; i < a.contour.size(); ++i)
            worst = std::max(worst, std::hypot(a.contour.points[i].x - clean.contour.points[i].x,
                                               a.contour.points[i].y - clean.contour.points[i].y));
        CHECK(worst > 0);
        CHECK(worst <= 0.005 * o.length_px + 1e-9);
    }

    TEST_CASE("rasterized area matches the polygon") {
        const auto c = testing::circle(40, 720, 60, 60);
        const auto img = synth::rasterize(c, 120, 120, 20);
        std::size_t ink = 0;
        for (auto v : img.pixels) ink += v == 20;
        CHECK(std::count(img.pixels.begin(), img.pixels.end(), 255) + ink == img.pixels.size());
        CHECK(std::abs(double(ink) - std::numbers::pi * 1600) < 60);
    }

    TEST_CASE("corpus covers every maker with dates inside their careers") {
        synth::CorpusParams p;
        p.count = 14;
        const auto corpus = synth::make_corpus(p);
        REQUIRE(corpus.size() == 14);
        std::set<std::string> makers, ids;
        for (const auto& e : corpus) {
            makers.insert(*e.meta.maker);
            ids.insert(e.meta.id);
            REQUIRE(e.meta.year);
            CHECK(e.meta.period);
            CHECK(*e.meta.year >= 1600);
            CHECK(*e.meta.year <= 1970);
            const bool inside = std::all_of(e.outline.contour.points.begin(), e.outline.contour.points.end(),
                                            [&](const Point2d& q) {
                                                return q.x >= 0 && q.y >= 0 && q.x < e.width && q.y < e.height;
                                            });
            CHECK(inside);
        }
        CHECK(makers.size() == 7);
        CHECK(ids.size() == 14);
    }

    TEST_CASE("invalid shapes") {
        synth::ShapeParams s;
        s.lower_half_width = 0.01;
        CHECK_THROWS_AS(s.validate(), ConfigError);
        CHECK_THROWS_AS(synth::generate_outline(s), ConfigError);
    }
}

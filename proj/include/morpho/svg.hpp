#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "morpho/analysis.hpp"
#include "morpho/tps.hpp"
#include "morpho/types.hpp"

namespace morpho::svg {

std::string escape_xml(std::string_view s);

// Minimal element writer; coordinates are user units inside the viewBox.
class Document {
public:
    Document(double width, double height);

    void rect(double x, double y, double w, double h, std::string_view fill,
              std::string_view stroke = "none");
    void line(Point2d a, Point2d b, std::string_view stroke, double width = 1.0);
    void polyline(std::span<const Point2d> pts, std::string_view stroke, double width = 1.0,
                  bool closed = false);
    void circle(Point2d c, double r, std::string_view fill, std::string_view stroke = "none");
    void text(Point2d at, std::string_view s, double size = 12.0, std::string_view anchor = "start",
              double rotate = 0.0);

    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    double width_, height_;
    std::ostringstream body_;
};

// Blue at -1, white at 0, red at +1; values are clamped to [-1, 1].
std::string diverging_color(double v);

Document heatmap(const analysis::CorrelationMap& cm, std::string_view title = "Pearson correlation");

// First two score columns, one colour per distinct group label (sorted).
Document scatter(const Eigen::MatrixXd& scores, std::span<const std::string> groups,
                 std::string_view title, std::string_view xlabel = "PC1", std::string_view ylabel = "PC2");

// Gaps where a value is missing.
Document line_chart(std::span<const double> x, std::span<const std::optional<double>> y,
                    std::string_view title, std::string_view xlabel, std::string_view ylabel);

struct MorphFrame {
    std::vector<Point2d> contour;  // warped outline
    tps::DeformationGrid grid;
    std::vector<Point2d> source;  // reference landmarks
    std::vector<Point2d> target;  // window landmarks
    std::string title;
};

// y grows downward in both data and SVG, so no flip is applied.
Document morph_frame(const MorphFrame& f);

}  // namespace morpho::svg

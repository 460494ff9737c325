#include <algorithm>
#include <cmath>

#include "morpho/analysis.hpp"
#include "morpho/error.hpp"

namespace morpho::analysis {

CorrelationMap correlation_map(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != m.cols())
        throw DimensionError("label count does not match column count");
    if (m.rows() < 3) throw InsufficientDataError("correlation map needs at least 3 rows");
    if (!m.allFinite()) throw NumericalError("non-finite value in feature matrix");

    const Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
    Eigen::VectorXd norms(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        norms(j) = centered.col(j).norm();
        const double scale = std::max(1.0, m.col(j).cwiseAbs().maxCoeff());
        if (!(norms(j) > 1e-12 * scale)) {
            throw ZeroVarianceError("column '" + labels[static_cast<std::size_t>(j)] + "' has zero variance");
        }
    }

    CorrelationMap out{labels, Eigen::MatrixXd::Identity(m.cols(), m.cols())};
    for (Eigen::Index i = 0; i < m.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            const double r = std::clamp(centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j)), -1.0, 1.0);
            out.r(i, j) = r;
            out.r(j, i) = r;
        }
    }
    return out;
}

CorrelationMap correlation_map(const measures::FeatureMatrix& m) {
    return correlation_map(m.values, m.labels);
}

}  // namespace morpho::analysis

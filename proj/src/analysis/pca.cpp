#include <Eigen/Eigenvalues>

#include <algorithm>

#include "morpho/analysis.hpp"
#include "morpho/error.hpp"

namespace morpho::analysis {

PCAModel fit_pca(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
    if (m.rows() < 2 || m.cols() < 2) throw InsufficientDataError("PCA needs at least 2 rows and 2 columns");
    if (static_cast<Eigen::Index>(labels.size()) != m.cols())
        throw DimensionError("label count does not match column count");
    if (!m.allFinite()) throw NumericalError("non-finite value in feature matrix");

    PCAModel model;
    model.labels = labels;
    model.mean = m.colwise().mean().transpose();
    const Eigen::MatrixXd centered = m.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m.rows() - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");

    // Eigen returns ascending order.
    const Eigen::Index p = m.cols();
    model.eigenvalues.resize(p);
    model.components.resize(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const Eigen::Index src = p - 1 - k;
        model.eigenvalues(k) = std::max(0.0, eig.eigenvalues()(src));
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components.col(k) = v;
    }
    const double trace = model.eigenvalues.sum();
    model.explained_ratio = trace > 0 ? Eigen::VectorXd(model.eigenvalues / trace)
                                      : Eigen::VectorXd::Zero(p);
    return model;
}

PCAModel fit_pca(const measures::FeatureMatrix& m) { return fit_pca(m.values, m.labels); }

Eigen::MatrixXd project(const PCAModel& model, const Eigen::MatrixXd& m, Eigen::Index k) {
    if (m.cols() != model.mean.size()) throw DimensionError("matrix columns do not match the PCA model");
    if (k < 1 || k > model.components.cols()) throw DimensionError("component count out of range");
    return (m.rowwise() - model.mean.transpose()) * model.components.leftCols(k);
}

Projection project(const PCAModel& model, const measures::FeatureMatrix& m, Eigen::Index k) {
    if (m.labels != model.labels) throw DimensionError("feature labels do not match the PCA model");
    return Projection{project(model, m.values, k), m.meta};
}

}  // namespace morpho::analysis

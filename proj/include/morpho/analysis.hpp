#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morpho/measures.hpp"

namespace morpho::analysis {

struct CorrelationMap {
    std::vector<std::string> labels;
    Eigen::MatrixXd r;  // symmetric, unit diagonal
};

// Pearson coefficients between every pair of columns.
CorrelationMap correlation_map(const Eigen::MatrixXd& m, const std::vector<std::string>& labels);
CorrelationMap correlation_map(const measures::FeatureMatrix& m);

struct PCAModel {
    std::vector<std::string> labels;
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // one orthonormal loading vector per column
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::VectorXd explained_ratio;
};

// Eigendecomposition of the sample covariance (divisor n-1). Each component
// is signed so that its largest-magnitude loading is positive.
PCAModel fit_pca(const Eigen::MatrixXd& m, const std::vector<std::string>& labels);
PCAModel fit_pca(const measures::FeatureMatrix& m);

struct Projection {
    Eigen::MatrixXd scores;  // rows x k
    std::vector<ingest::Metadata> meta;
};

Eigen::MatrixXd project(const PCAModel& model, const Eigen::MatrixXd& m, Eigen::Index k);
Projection project(const PCAModel& model, const measures::FeatureMatrix& m, Eigen::Index k);

// Windows [start, start + dt). The first starts at the earliest year; they
// advance by `step` until the first window that contains the latest year.
struct Window {
    int start = 0;
    int dt = 0;
    double center() const { return start + dt / 2.0; }
    bool contains(int year) const { return year >= start && year < start + dt; }
};
std::vector<Window> make_windows(int min_year, int max_year, int dt, int step);

struct TimeSeries {
    std::vector<std::string> labels;
    std::vector<double> center_years;
    std::vector<std::size_t> counts;
    std::vector<std::vector<double>> values;  // empty where counts == 0
};

// Windowed means of arbitrary per-record vectors; records without a year are skipped.
TimeSeries sliding_window(std::span<const std::optional<int>> years,
                          std::span<const std::vector<double>> values,
                          std::vector<std::string> labels, int dt, int step);

// Every feature of kFeatureNames plus "s_mean", the mean of s1..s6.
TimeSeries sliding_window(std::span<const measures::InstrumentRecord> records, int dt = 20, int step = 1);

}  // namespace morpho::analysis

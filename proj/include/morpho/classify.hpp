#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace morpho::classify {

struct ForestParams {
    int n_trees = 100;
    std::optional<int> max_depth;
    int min_leaf = 1;
    std::optional<int> features_per_split;  // default ceil(sqrt(p))
    std::uint64_t seed = 42;
    double train_fraction = 0.7;
    // Classes with fewer labelled instances are pooled into "Other" by evaluate().
    int min_class_size = 4;
    int threads = 1;

    int mtry(int n_features) const;
    void validate(int n_features) const;
};

struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;

    bool leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<Node> nodes;  // root at 0

    int predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

class Forest {
public:
    std::vector<std::string> classes;
    int n_features = 0;
    std::vector<Tree> trees;
    // Mean impurity decrease per feature, normalized to sum to 1
    // (all zeros when no tree ever split).
    std::vector<double> importance;

    // Majority vote; ties go to the lower class index.
    int predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    std::string predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    std::vector<std::string> predict_all(const Eigen::MatrixXd& m) const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static Forest load(std::istream& in);
    static Forest load(const std::filesystem::path& path);

    friend bool operator==(const Forest& a, const Forest& b);
};

// CART trees on bootstrap samples with Gini splits over a random feature
// subset per node; thresholds are midpoints between sorted distinct values.
Forest train_forest(const Eigen::MatrixXd& x, std::span<const std::string> labels, const ForestParams& p);

// Labels of classes with fewer than `min_count` instances become `other`.
std::vector<std::string> pool_rare_classes(std::span<const std::string> labels, int min_count = 4,
                                           const std::string& other = "Other");

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per-class seeded shuffle; round(fraction * class size) instances train.
Split stratified_split(std::span<const std::string> labels, double fraction, std::uint64_t seed);

struct EvaluationReport {
    std::vector<std::string> classes;
    std::vector<std::string> feature_labels;
    double accuracy = 0.0;
    double chance = 0.0;  // largest class prior over all labelled rows
    Eigen::MatrixXi confusion;  // rows true class, columns predicted
    std::vector<std::optional<double>> per_class_recall;  // empty when a class has no test rows
    std::vector<double> feature_importance;
    std::size_t n_train = 0;
    std::size_t n_test = 0;

    friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

EvaluationReport evaluate(const Eigen::MatrixXd& x, std::span<const std::string> labels,
                          const ForestParams& p, std::vector<std::string> feature_labels = {},
                          Forest* trained = nullptr);

// accuracy=... chance=... plus one line per class.
std::string summary(const EvaluationReport& r);
void write_confusion_csv(const EvaluationReport& r, const std::filesystem::path& path);
void write_importance_csv(const EvaluationReport& r, const std::filesystem::path& path);

}  // namespace morpho::classify

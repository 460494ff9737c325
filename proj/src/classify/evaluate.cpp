#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "morpho/classify.hpp"
#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/random.hpp"

namespace morpho::classify {

std::vector<std::string> pool_rare_classes(std::span<const std::string> labels, int min_count,
                                           const std::string& other) {
    std::map<std::string, int> counts;
    for (const auto& l : labels) ++counts[l];
    std::vector<std::string> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(counts[l] < min_count ? other : l);
    return out;
}

Split stratified_split(std::span<const std::string> labels, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    Split s;
    Rng rng = make_rng(seed, 0x5eed5eedULL);
    for (auto& [name, rows] : by_class) {
        shuffle(rows.begin(), rows.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
        if (n_train == 0) {
            throw StratificationError("class '" + name + "' has no training instances after the " +
                                      "stratified split");
        }
        s.train.insert(s.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.test.insert(s.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

EvaluationReport evaluate(const Eigen::MatrixXd& x, std::span<const std::string> labels_in,
                          const ForestParams& p, std::vector<std::string> feature_labels, Forest* trained) {
    if (static_cast<Eigen::Index>(labels_in.size()) != x.rows())
        throw DimensionError("label count does not match row count");
    if (!feature_labels.empty() && static_cast<Eigen::Index>(feature_labels.size()) != x.cols())
        throw DimensionError("feature label count does not match column count");
    p.validate(static_cast<int>(x.cols()));

    const auto labels = pool_rare_classes(labels_in, p.min_class_size);
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    if (counts.size() < 2) throw DegenerateLabelsError("labels contain a single class after pooling");

    EvaluationReport rep;
    for (const auto& [name, c] : counts) rep.classes.push_back(name);
    std::size_t top = 0;
    for (const auto& [name, c] : counts) top = std::max(top, c);
    rep.chance = static_cast<double>(top) / static_cast<double>(labels.size());

    const Split split = stratified_split(labels, p.train_fraction, p.seed);
    Eigen::MatrixXd xtrain(static_cast<Eigen::Index>(split.train.size()), x.cols());
    std::vector<std::string> ytrain;
    for (std::size_t i = 0; i < split.train.size(); ++i) {
        xtrain.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(split.train[i]));
        ytrain.push_back(labels[split.train[i]]);
    }
    Forest forest = train_forest(xtrain, ytrain, p);

    auto class_index = [&](const std::string& name) {
        return static_cast<Eigen::Index>(std::lower_bound(rep.classes.begin(), rep.classes.end(), name) -
                                         rep.classes.begin());
    };
    const auto k = static_cast<Eigen::Index>(rep.classes.size());
    rep.confusion = Eigen::MatrixXi::Zero(k, k);
    std::size_t correct = 0;
    for (auto i : split.test) {
        const std::string pred = forest.predict(x.row(static_cast<Eigen::Index>(i)));
        ++rep.confusion(class_index(labels[i]), class_index(pred));
        if (pred == labels[i]) ++correct;
    }
    rep.n_train = split.train.size();
    rep.n_test = split.test.size();
    rep.accuracy = rep.n_test ? static_cast<double>(correct) / static_cast<double>(rep.n_test) : 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
        const int row = rep.confusion.row(c).sum();
        if (row == 0) rep.per_class_recall.emplace_back();
        else rep.per_class_recall.emplace_back(static_cast<double>(rep.confusion(c, c)) / row);
    }
    rep.feature_importance = forest.importance;
    if (feature_labels.empty())
        for (Eigen::Index j = 0; j < x.cols(); ++j) feature_labels.push_back("x" + std::to_string(j + 1));
    rep.feature_labels = std::move(feature_labels);
    if (trained) *trained = std::move(forest);
    return rep;
}

std::string summary(const EvaluationReport& r) {
    std::ostringstream out;
    out << "accuracy=" << csv::format_sig9(r.accuracy) << " chance=" << csv::format_sig9(r.chance) << '\n';
    out << "train=" << r.n_train << " test=" << r.n_test << " classes=" << r.classes.size() << '\n';
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
        out << "recall[" << r.classes[c] << "]=";
        if (r.per_class_recall[c]) out << csv::format_sig9(*r.per_class_recall[c]);
        else out << "n/a";
        out << '\n';
    }
    return out.str();
}

void write_confusion_csv(const EvaluationReport& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    std::vector<std::string> header{"true\\predicted"};
    header.insert(header.end(), r.classes.begin(), r.classes.end());
    csv::write_row(out, header);
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
        std::vector<std::string> row{r.classes[i]};
        for (std::size_t j = 0; j < r.classes.size(); ++j)
            row.push_back(std::to_string(r.confusion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        csv::write_row(out, row);
    }
}

void write_importance_csv(const EvaluationReport& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "feature,importance\n";
    for (std::size_t j = 0; j < r.feature_importance.size(); ++j)
        csv::write_row(out, {r.feature_labels[j], csv::format_sig9(r.feature_importance[j])});
}

}  // namespace morpho::classify

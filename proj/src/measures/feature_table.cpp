#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/measures.hpp"

namespace morpho::measures {

namespace {

std::vector<std::size_t> analysis_columns(bool include_length) {
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < kFeatureNames.size(); ++k)
        if (k != kLengthColumn || include_length) cols.push_back(k);
    return cols;
}

const std::vector<std::string>& csv_header() {
    static const std::vector<std::string> h = [] {
        std::vector<std::string> v{"id"};
        for (auto name : kFeatureNames) v.emplace_back(name);
        for (auto name : {"maker", "country", "year", "period"}) v.emplace_back(name);
        return v;
    }();
    return h;
}

double parse_double(const std::string& f, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw ParseError(where + ": bad number '" + f + "'");
    return v;
}

}  // namespace

Eigen::MatrixXd raw_feature_columns(std::span<const InstrumentRecord> records,
                                    std::vector<std::string>& labels, bool include_length) {
    const auto cols = analysis_columns(include_length);
    labels.clear();
    for (auto k : cols) labels.emplace_back(kFeatureNames[k]);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto v = records[r].features.values();
        for (std::size_t j = 0; j < cols.size(); ++j)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v[cols[j]];
    }
    return m;
}

FeatureMatrix feature_matrix(std::span<const InstrumentRecord> records, bool include_length) {
    if (records.size() < 2) throw InsufficientDataError("feature matrix needs at least 2 records");

    std::vector<std::string> labels;
    const Eigen::MatrixXd raw = raw_feature_columns(records, labels, include_length);
    const double rows = static_cast<double>(raw.rows());

    FeatureMatrix fm;
    std::vector<Eigen::Index> kept;
    std::vector<double> means, sds;
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        const double mean = raw.col(j).mean();
        const double var = (raw.col(j).array() - mean).square().sum() / rows;
        if (!(var > 1e-24 * std::max(1.0, mean * mean))) {
            fm.dropped.push_back(labels[static_cast<std::size_t>(j)]);
            continue;
        }
        kept.push_back(j);
        means.push_back(mean);
        sds.push_back(std::sqrt(var));
    }

    fm.values.resize(raw.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        fm.labels.push_back(labels[static_cast<std::size_t>(kept[k])]);
        fm.values.col(static_cast<Eigen::Index>(k)) =
            (raw.col(kept[k]).array() - means[k]) / sds[k];
    }
    fm.meta.reserve(records.size());
    for (const auto& r : records) fm.meta.push_back(r.meta);
    return fm;
}

void write_features_csv(std::ostream& out, std::span<const InstrumentRecord> records) {
    csv::write_row(out, csv_header());
    for (const auto& r : records) {
        std::vector<std::string> row{r.meta.id};
        for (double v : r.features.values()) row.push_back(csv::format_sig9(v));
        row.push_back(r.meta.maker.value_or(""));
        row.push_back(r.meta.country.value_or(""));
        row.push_back(r.meta.year ? std::to_string(*r.meta.year) : "");
        row.push_back(r.meta.period ? ingest::to_string(*r.meta.period) : "");
        csv::write_row(out, row);
    }
}

void write_features_csv(const std::filesystem::path& path, std::span<const InstrumentRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_features_csv(out, records);
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<InstrumentRecord> read_features_csv(std::istream& in) {
    std::vector<std::string> row;
    if (!csv::read_row(in, row) || row != csv_header())
        throw ParseError("features CSV: unexpected header");

    std::vector<InstrumentRecord> out;
    std::set<std::string> seen;
    std::size_t line = 1;
    while (csv::read_row(in, row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;
        const std::string where = "features row " + std::to_string(line);
        if (row.size() != csv_header().size()) throw ParseError(where + ": wrong field count");

        InstrumentRecord rec;
        rec.meta.id = row[0];
        if (!seen.insert(rec.meta.id).second) throw DuplicateIdError("duplicate id '" + rec.meta.id + "'");
        std::array<double, 16> v{};
        for (std::size_t k = 0; k < 16; ++k) v[k] = parse_double(row[1 + k], where);
        rec.features = FeatureVector::from_values(v);
        if (!row[17].empty()) rec.meta.maker = row[17];
        if (!row[18].empty()) rec.meta.country = row[18];
        if (!row[19].empty()) {
            const double y = parse_double(row[19], where);
            if (y != std::floor(y) || y < ingest::kMinYear || y > ingest::kMaxYear)
                throw ParseError(where + ": invalid year '" + row[19] + "'");
            rec.meta.year = static_cast<int>(y);
        }
        if (!row[20].empty()) {
            rec.meta.period = ingest::parse_period(row[20]);
            if (!rec.meta.period) throw ParseError(where + ": unknown period '" + row[20] + "'");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<InstrumentRecord> read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_features_csv(in);
}

}  // namespace morpho::measures

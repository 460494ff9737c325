#include <algorithm>

#include "morpho/analysis.hpp"
#include "morpho/error.hpp"

namespace morpho::analysis {

std::vector<Window> make_windows(int min_year, int max_year, int dt, int step) {
    if (dt < 1 || step < 1) throw ConfigError("window length and step must be >= 1");
    if (max_year < min_year) throw ConfigError("window year range is empty");
    std::vector<Window> out;
    for (int start = min_year;; start += step) {
        out.push_back({start, dt});
        if (start + dt > max_year) break;
    }
    return out;
}

TimeSeries sliding_window(std::span<const std::optional<int>> years,
                          std::span<const std::vector<double>> values,
                          std::vector<std::string> labels, int dt, int step) {
    if (years.size() != values.size()) throw DimensionError("years and values differ in length");
    std::vector<std::size_t> dated;
    for (std::size_t i = 0; i < years.size(); ++i) {
        if (!years[i]) continue;
        if (values[i].size() != labels.size()) throw DimensionError("value vector has the wrong length");
        dated.push_back(i);
    }
    if (dated.empty()) throw NoDatesError("no record carries a year");

    int lo = *years[dated.front()], hi = lo;
    for (auto i : dated) {
        lo = std::min(lo, *years[i]);
        hi = std::max(hi, *years[i]);
    }

    TimeSeries ts;
    ts.labels = std::move(labels);
    const std::size_t p = ts.labels.size();
    for (const Window& w : make_windows(lo, hi, dt, step)) {
        // Deviations from the first member are summed, so a constant
        // feature comes out exactly constant.
        std::vector<double> shift, dev(p, 0.0);
        std::size_t count = 0;
        for (auto i : dated) {
            if (!w.contains(*years[i])) continue;
            if (count++ == 0) shift = values[i];
            for (std::size_t k = 0; k < p; ++k) dev[k] += values[i][k] - shift[k];
        }
        ts.center_years.push_back(w.center());
        ts.counts.push_back(count);
        if (count) {
            for (std::size_t k = 0; k < p; ++k) shift[k] += dev[k] / static_cast<double>(count);
            ts.values.push_back(std::move(shift));
        } else {
            ts.values.emplace_back();
        }
    }
    return ts;
}

TimeSeries sliding_window(std::span<const measures::InstrumentRecord> records, int dt, int step) {
    std::vector<std::optional<int>> years;
    std::vector<std::vector<double>> values;
    years.reserve(records.size());
    values.reserve(records.size());
    for (const auto& r : records) {
        years.push_back(r.meta.year);
        const auto v = r.features.values();
        std::vector<double> row(v.begin(), v.end());
        double s_mean = 0.0;
        for (double s : r.features.s) s_mean += s;
        row.push_back(s_mean / 6.0);
        values.push_back(std::move(row));
    }
    std::vector<std::string> labels(measures::kFeatureNames.begin(), measures::kFeatureNames.end());
    labels.emplace_back("s_mean");
    return sliding_window(years, values, std::move(labels), dt, step);
}

}  // namespace morpho::analysis

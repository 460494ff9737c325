#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "morpho/analysis.hpp"
#include "morpho/cli.hpp"
#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/pipeline.hpp"
#include "morpho/svg.hpp"
#include "morpho/tps.hpp"

namespace morpho::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

// Window centres print without decimals when they are whole years.
std::string format_year(double y) {
    char buf[32];
    if (y == std::floor(y)) std::snprintf(buf, sizeof buf, "%.0f", y);
    else std::snprintf(buf, sizeof buf, "%.1f", y);
    return buf;
}

std::vector<measures::InstrumentRecord> load_records(const fs::path& features) {
    auto records = measures::read_features_csv(features);
    if (records.empty()) throw EmptyDatasetError("no instruments in " + features.string());
    return records;
}

std::optional<std::string> field(const ingest::Metadata& m, const std::string& name) {
    if (name == "maker") return m.maker;
    if (name == "country") return m.country;
    if (name == "period") {
        if (m.period) return std::string(ingest::to_string(*m.period));
        return std::nullopt;
    }
    if (name == "year") {
        if (m.year) return std::to_string(*m.year);
        return std::nullopt;
    }
    throw ConfigError("unknown metadata field '" + name + "'");
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = lower(e.path().extension().string());
        if (ext == ".pgm" || ext == ".png") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Runs body(i) for i in [0, n) on up to `workers` threads. Exceptions escape
// only from the calling thread's share; bodies are expected to catch their own.
template <class F>
void parallel_for(std::size_t n, int workers, F body) {
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
    };
    std::vector<std::thread> pool;
    const auto extra = std::min<std::size_t>(n, static_cast<std::size_t>(workers)) ;
    for (std::size_t t = 1; t < extra; ++t) pool.emplace_back(loop);
    loop();
    for (auto& th : pool) th.join();
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_extract(const ExtractOptions& o, std::ostream& log) {
    const std::string started = timestamp_now();
    ExtractionParams params{o.smoothing, o.detection, o.threshold};
    o.smoothing.validate();
    if (o.threshold && (*o.threshold < 1 || *o.threshold > 255))
        throw ConfigError("threshold must be in [1, 255]");

    const auto images = list_images(o.image_dir);
    if (images.empty()) throw EmptyDatasetError("no .pgm or .png images in " + o.image_dir.string());

    std::map<std::string, ingest::Metadata> meta;
    if (o.metadata) {
        for (auto& m : ingest::load_metadata(*o.metadata, o.periods)) meta.emplace(m.id, m);
    }

    ensure_dir(o.output_dir);
    ensure_dir(o.output_dir / "contours");
    ensure_dir(o.output_dir / "landmarks");

    struct Outcome {
        std::string id;
        std::optional<measures::InstrumentRecord> record;
        std::string kind;
        std::string message;
    };
    std::vector<Outcome> outcomes(images.size());
    std::set<std::string> ids;
    for (std::size_t i = 0; i < images.size(); ++i) {
        outcomes[i].id = images[i].stem().string();
        if (!ids.insert(outcomes[i].id).second)
            throw DuplicateIdError("two images share the id '" + outcomes[i].id + "'");
    }

    parallel_for(images.size(), worker_count(o.threads), [&](std::size_t i) {
        Outcome& out = outcomes[i];
        try {
            const auto img = ingest::load_image(images[i]);
            const auto ex = extract_image(img, params);
            ingest::write_contour_csv(ex.traced, o.output_dir / "contours" / (out.id + ".csv"));
            geometry::write_landmarks_csv(ex.landmarks, ex.contour, o.output_dir / "landmarks" / (out.id + ".csv"));
            measures::InstrumentRecord rec;
            rec.features = ex.features;
            if (auto it = meta.find(out.id); it != meta.end()) rec.meta = it->second;
            rec.meta.id = out.id;
            out.record = std::move(rec);
        } catch (const Error& e) {
            out.kind = e.kind();
            out.message = e.what();
        } catch (const std::exception& e) {
            out.kind = "InternalError";
            out.message = e.what();
        }
    });

    std::vector<measures::InstrumentRecord> records;
    ordered_json entries = ordered_json::array();
    std::size_t failed = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& out = outcomes[i];
        ordered_json e;
        e["id"] = out.id;
        e["image"] = images[i].filename().string();
        if (out.record) {
            records.push_back(*out.record);
            e["status"] = "ok";
            if (!measures::within_reference_band(out.record->features)) e["note"] = "a outside the reference band";
        } else {
            ++failed;
            e["status"] = "failed";
            e["error"] = out.kind;
            e["message"] = out.message;
            log << "failed " << out.id << ": " << out.kind << ": " << out.message << '\n';
        }
        entries.push_back(std::move(e));
    }
    measures::write_features_csv(o.output_dir / "features.csv", records);

    ordered_json cfg;
    cfg["image_dir"] = o.image_dir.string();
    cfg["metadata"] = o.metadata ? ordered_json(o.metadata->string()) : ordered_json(nullptr);
    cfg["output_dir"] = o.output_dir.string();
    cfg["n_resample"] = o.smoothing.n_resample;
    cfg["sigma"] = o.smoothing.sigma;
    cfg["prominence_factor"] = o.detection.prominence_factor;
    cfg["body_width_fraction"] = o.detection.body_width_fraction;
    cfg["threshold"] = o.threshold ? ordered_json(*o.threshold) : ordered_json("otsu");
    cfg["periods"] = o.periods.upper;

    ordered_json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kVersion;
    manifest["command"] = "extract";
    manifest["config"] = cfg;
    manifest["started"] = started;
    manifest["finished"] = timestamp_now();
    manifest["summary"] = {{"images", images.size()}, {"ok", records.size()}, {"failed", failed}};
    manifest["instruments"] = std::move(entries);

    const auto path = o.output_dir / "manifest.json";
    auto out = open_out(path);
    out << manifest.dump(2) << '\n';
    close_out(out, path);

    log << "extracted " << records.size() << " of " << images.size() << " images\n";
    return failed ? kPartialFailure : kOk;
}

// ---------------------------------------------------------------------------

int cmd_analyze(const AnalyzeOptions& o, std::ostream& log) {
    static const std::set<std::string> kColorBy = {"maker", "country", "period"};
    if (!kColorBy.count(o.color_by)) throw ConfigError("--color-by must be maker, country or period");

    const auto records = load_records(o.features);
    std::vector<std::string> groups;
    bool any = false;
    for (const auto& r : records) {
        const auto v = field(r.meta, o.color_by);
        any = any || v.has_value();
        groups.push_back(v.value_or("unknown"));
    }
    if (!any) throw MissingFieldError(o.color_by);

    const auto fm = measures::feature_matrix(records, o.include_length);
    for (const auto& d : fm.dropped) log << "dropped constant feature " << d << '\n';
    ensure_dir(o.output_dir);

    const auto cm = analysis::correlation_map(fm);
    {
        const auto path = o.output_dir / "correlation.csv";
        auto out = open_out(path);
        std::vector<std::string> row{"feature"};
        row.insert(row.end(), cm.labels.begin(), cm.labels.end());
        csv::write_row(out, row);
        for (Eigen::Index i = 0; i < cm.r.rows(); ++i) {
            row = {cm.labels[i]};
            for (Eigen::Index j = 0; j < cm.r.cols(); ++j) row.push_back(csv::format_sig9(cm.r(i, j)));
            csv::write_row(out, row);
        }
        close_out(out, path);
    }
    svg::heatmap(cm).save(o.output_dir / "correlation.svg");

    const auto model = analysis::fit_pca(fm);
    const Eigen::Index k = model.components.cols();
    const auto proj = analysis::project(model, fm, k);
    {
        const auto path = o.output_dir / "pca_projection.csv";
        auto out = open_out(path);
        std::vector<std::string> row{"id"};
        for (Eigen::Index j = 0; j < k; ++j) row.push_back("pc" + std::to_string(j + 1));
        for (const char* f : {"maker", "country", "year", "period"}) row.push_back(f);
        csv::write_row(out, row);
        for (Eigen::Index i = 0; i < proj.scores.rows(); ++i) {
            const auto& m = proj.meta[i];
            row = {m.id};
            for (Eigen::Index j = 0; j < k; ++j) row.push_back(csv::format_sig9(proj.scores(i, j)));
            for (const char* f : {"maker", "country", "year", "period"}) row.push_back(field(m, f).value_or(""));
            csv::write_row(out, row);
        }
        close_out(out, path);
    }
    {
        const auto path = o.output_dir / "pca_components.csv";
        auto out = open_out(path);
        std::vector<std::string> row{"feature"};
        for (Eigen::Index j = 0; j < k; ++j) row.push_back("pc" + std::to_string(j + 1));
        csv::write_row(out, row);
        for (Eigen::Index i = 0; i < model.components.rows(); ++i) {
            row = {model.labels[i]};
            for (Eigen::Index j = 0; j < k; ++j) row.push_back(csv::format_sig9(model.components(i, j)));
            csv::write_row(out, row);
        }
        close_out(out, path);
    }
    {
        const auto path = o.output_dir / "pca_variance.csv";
        auto out = open_out(path);
        csv::write_row(out, {"component", "eigenvalue", "explained_ratio", "cumulative"});
        double cum = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            cum += model.explained_ratio(j);
            csv::write_row(out, {"pc" + std::to_string(j + 1), csv::format_sig9(model.eigenvalues(j)),
                                 csv::format_sig9(model.explained_ratio(j)), csv::format_sig9(cum)});
        }
        close_out(out, path);
    }

    std::vector<std::string> proj_groups;
    for (const auto& m : proj.meta) proj_groups.push_back(field(m, o.color_by).value_or("unknown"));
    const Eigen::MatrixXd two = k >= 2 ? Eigen::MatrixXd(proj.scores.leftCols(2))
                                       : Eigen::MatrixXd(proj.scores.rows(), 2).setZero();
    char xl[48], yl[48];
    std::snprintf(xl, sizeof xl, "PC1 (%.1f%%)", 100.0 * model.explained_ratio(0));
    std::snprintf(yl, sizeof yl, "PC2 (%.1f%%)", k >= 2 ? 100.0 * model.explained_ratio(1) : 0.0);
    svg::scatter(two, proj_groups, "PCA projection by " + o.color_by, xl, yl)
        .save(o.output_dir / "pca_projection.svg");

    log << "analyzed " << fm.rows() << " instruments over " << fm.cols() << " features\n";
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_timeseries(const TimeseriesOptions& o, std::ostream& log) {
    if (o.dt < 1 || o.step < 1) throw ConfigError("dt and step must be positive");
    const auto records = load_records(o.features);
    if (std::none_of(records.begin(), records.end(), [](const auto& r) { return r.meta.year.has_value(); }))
        throw MissingFieldError("year");

    const auto ts = analysis::sliding_window(records, o.dt, o.step);
    for (const auto& f : o.plot) {
        if (std::find(ts.labels.begin(), ts.labels.end(), f) == ts.labels.end())
            throw ConfigError("cannot plot unknown feature '" + f + "'");
    }
    ensure_dir(o.output_dir);

    const auto path = o.output_dir / "timeseries.csv";
    auto out = open_out(path);
    std::vector<std::string> row{"center_year", "count"};
    row.insert(row.end(), ts.labels.begin(), ts.labels.end());
    csv::write_row(out, row);
    for (std::size_t w = 0; w < ts.center_years.size(); ++w) {
        row = {csv::format_sig9(ts.center_years[w]), std::to_string(ts.counts[w])};
        for (std::size_t j = 0; j < ts.labels.size(); ++j)
            row.push_back(ts.counts[w] ? csv::format_sig9(ts.values[w][j]) : "");
        csv::write_row(out, row);
    }
    close_out(out, path);

    for (const auto& f : o.plot) {
        const auto j = static_cast<std::size_t>(std::find(ts.labels.begin(), ts.labels.end(), f) - ts.labels.begin());
        std::vector<std::optional<double>> y;
        for (std::size_t w = 0; w < ts.center_years.size(); ++w)
            y.push_back(ts.counts[w] ? std::optional<double>(ts.values[w][j]) : std::nullopt);
        svg::line_chart(ts.center_years, y, f + " over time (window " + std::to_string(o.dt) + " years)",
                        "year", f)
            .save(o.output_dir / ("timeseries_" + f + ".svg"));
    }
    log << "wrote " << ts.center_years.size() << " windows\n";
    return kOk;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Point2d> landmark_positions(const fs::path& path) {
    const auto lps = geometry::read_landmarks_csv(path);
    std::vector<Point2d> pts(geometry::kLandmarkOrder.size());
    std::vector<bool> seen(pts.size(), false);
    for (const auto& lp : lps) {
        const auto k = static_cast<std::size_t>(lp.name);
        if (seen[k]) throw FormatError(path.string() + ": repeated landmark");
        seen[k] = true;
        pts[k] = lp.pos;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw FormatError(path.string() + ": incomplete landmark set");
    return pts;
}

Point2d centroid(std::span<const Point2d> pts) {
    Point2d c;
    for (const auto& p : pts) c = c + p;
    return (1.0 / static_cast<double>(pts.size())) * c;
}

}  // namespace

int cmd_morph(const MorphOptions& o, std::ostream& log) {
    if (o.dt < 1 || o.step < 1) throw ConfigError("dt and step must be positive");
    if (o.grid_x < 2 || o.grid_y < 2) throw ConfigError("grid needs at least 2 lines per axis");
    const auto records = load_records(o.features);
    const fs::path base = o.features.parent_path();
    const fs::path contour_dir = o.contours.value_or(base / "contours");
    const fs::path landmark_dir = o.landmarks.value_or(base / "landmarks");

    const auto ref = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.meta.id == o.reference; });
    if (ref == records.end()) throw UnknownIdError("reference id '" + o.reference + "' is not in " + o.features.string());

    const auto ref_raw = landmark_positions(landmark_dir / (o.reference + ".csv"));
    const double ref_len = ref->features.L;
    const auto source = tps::normalize_landmarks(ref_raw, ref_len);
    const Point2d ref_centre = centroid(ref_raw);

    Contour outline = ingest::read_contour_csv(contour_dir / (o.reference + ".csv"));
    outline = geometry::resample(outline, 512);
    std::vector<Point2d> ref_outline;
    tps::Bounds bounds{1e300, 1e300, -1e300, -1e300};
    for (const auto& p : outline.points) {
        const Point2d q = (1.0 / ref_len) * (p - ref_centre);
        ref_outline.push_back(q);
        bounds.xmin = std::min(bounds.xmin, q.x);
        bounds.ymin = std::min(bounds.ymin, q.y);
        bounds.xmax = std::max(bounds.xmax, q.x);
        bounds.ymax = std::max(bounds.ymax, q.y);
    }

    std::vector<tps::LandmarkRecord> dated;
    for (const auto& r : records) {
        if (!r.meta.year) continue;
        const auto path = landmark_dir / (r.meta.id + ".csv");
        dated.push_back({tps::normalize_landmarks(landmark_positions(path), r.features.L), r.meta});
    }
    if (dated.empty()) throw MissingFieldError("year");

    std::vector<tps::EpochTarget> targets;
    bool skipped = false;
    if (o.centers.empty()) {
        targets = tps::epoch_targets(dated, o.dt, o.step);
    } else {
        for (double c : o.centers) {
            const double lo = c - o.dt / 2.0, hi = c + o.dt / 2.0;
            tps::EpochTarget t{c, 0, std::vector<Point2d>(source.size())};
            for (const auto& r : dated) {
                if (*r.meta.year < lo || *r.meta.year >= hi) continue;
                ++t.count;
                for (std::size_t k = 0; k < source.size(); ++k) t.landmarks[k] = t.landmarks[k] + r.landmarks[k];
            }
            if (!t.count) {
                log << "no dated instruments in the window centred at " << format_year(c) << '\n';
                skipped = true;
                continue;
            }
            for (auto& p : t.landmarks) p = (1.0 / static_cast<double>(t.count)) * p;
            targets.push_back(std::move(t));
        }
    }
    ensure_dir(o.output_dir);

    const auto path = o.output_dir / "bending_energy.csv";
    auto out = open_out(path);
    csv::write_row(out, {"center_year", "bending_energy"});
    for (const auto& t : targets) {
        const auto tf = tps::fit_tps({source, t.landmarks});
        svg::MorphFrame frame;
        frame.contour = tps::warp_points(tf, ref_outline);
        frame.grid = tps::deformation_grid(tf, bounds, o.grid_x, o.grid_y);
        frame.source = source;
        frame.target = t.landmarks;
        frame.title = o.reference + " warped to " + format_year(t.center_year) + " (" + std::to_string(t.count) +
                      " instruments)";
        svg::morph_frame(frame).save(o.output_dir / ("morph_" + format_year(t.center_year) + ".svg"));
        csv::write_row(out, {format_year(t.center_year), csv::format_sig9(tf.bending_energy)});
    }
    close_out(out, path);
    log << "wrote " << targets.size() << " morph frames\n";
    return skipped ? kPartialFailure : kOk;
}

// ---------------------------------------------------------------------------

int cmd_classify(const ClassifyOptions& o, std::ostream& log) {
    if (o.target != "country" && o.target != "maker" && o.target != "period")
        throw ConfigError("--target must be country, maker or period");
    const auto all = load_records(o.features);
    std::vector<measures::InstrumentRecord> records;
    std::vector<std::string> labels;
    for (const auto& r : all) {
        if (auto v = field(r.meta, o.target)) {
            records.push_back(r);
            labels.push_back(*v);
        }
    }
    if (records.empty()) throw MissingFieldError(o.target);
    if (records.size() < all.size())
        log << "skipped " << all.size() - records.size() << " instruments without " << o.target << '\n';

    std::vector<std::string> feature_labels;
    const Eigen::MatrixXd x = measures::raw_feature_columns(records, feature_labels);
    classify::ForestParams p = o.forest;
    p.threads = worker_count(p.threads);
    classify::Forest forest;
    const auto report = classify::evaluate(x, labels, p, feature_labels, &forest);

    ensure_dir(o.output_dir);
    const auto text_path = o.output_dir / ("classification_" + o.target + ".txt");
    auto out = open_out(text_path);
    out << "target=" << o.target << '\n' << classify::summary(report);
    close_out(out, text_path);
    classify::write_confusion_csv(report, o.output_dir / ("confusion_" + o.target + ".csv"));
    classify::write_importance_csv(report, o.output_dir / ("importance_" + o.target + ".csv"));
    forest.save(o.output_dir / ("forest_" + o.target + ".txt"));

    log << classify::summary(report);
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_synth(const SynthOptions& o, std::ostream& log) {
    if (o.corpus.count < 1) throw ConfigError("count must be positive");
    if (o.corpus.noise < 0) throw ConfigError("noise must be non-negative");
    if (o.corpus.length_px < 200) throw ConfigError("length_px must be at least 200");
    const auto corpus = synth::make_corpus(o.corpus);
    ensure_dir(o.output_dir);
    synth::write_corpus(corpus, o.corpus, o.output_dir);
    log << "wrote " << corpus.size() << " synthetic instruments to " << o.output_dir.string() << '\n';
    return kOk;
}

}  // namespace morpho::cli

#include <algorithm>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "morpho/cli.hpp"
#include "morpho/error.hpp"

namespace morpho::cli {

namespace fs = std::filesystem;

namespace {

std::string config_key(const CLI::Option* opt) {
    std::string k = opt->get_single_name();
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

// Fills every option the command line left unset from the config file.
// Options listed in `paths` are resolved against the config file's directory.
void merge_config(CLI::App* sub, const fs::path& config_path, const std::set<std::string>& paths) {
    const auto cfg = ConfigFile::load(config_path);
    const fs::path base = config_path.parent_path();
    std::set<std::string> known;
    for (CLI::Option* opt : sub->get_options()) {
        const std::string key = config_key(opt);
        known.insert(key);
        if (key == "config" || key == "help" || opt->count() > 0) continue;
        auto value = cfg.find(sub->get_name(), key);
        if (!value) continue;
        if (paths.count(key) && !value->empty() && fs::path(*value).is_relative()) *value = (base / *value).string();
        try {
            opt->add_result(*value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError(config_path.string() + ": " + key + ": " + e.what());
        }
    }
    if (auto s = cfg.sections.find(sub->get_name()); s != cfg.sections.end()) {
        for (const auto& [key, value] : s->second)
            if (!known.count(key)) throw ConfigError(config_path.string() + ": unknown key '" + key + "' for " + sub->get_name());
    }
}

void require(const fs::path& p, const char* flag) {
    if (p.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Violin outline morphometrics: extraction, analysis, morphing and classification"};
    app.name(kToolName);
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        std::string config;
        std::set<std::string> paths;
    };
    std::vector<Sub> subs;
    auto add_sub = [&](const char* name, const char* desc, std::set<std::string> paths) -> CLI::App* {
        CLI::App* s = app.add_subcommand(name, desc);
        subs.push_back({s, {}, std::move(paths)});
        return s;
    };

    ExtractOptions ex;
    std::string ex_periods;
    {
        auto* s = add_sub("extract", "Measure every image in a directory", {"images", "metadata", "output"});
        s->add_option("--images", ex.image_dir, "Directory of .pgm/.png outline images");
        s->add_option("--metadata", ex.metadata, "Metadata CSV (id,maker,country,year)");
        s->add_option("-o,--output", ex.output_dir, "Output directory");
        s->add_option("--n-resample", ex.smoothing.n_resample, "Resampled contour points")->capture_default_str();
        s->add_option("--sigma", ex.smoothing.sigma, "Gaussian width in samples")->capture_default_str();
        s->add_option("--prominence", ex.detection.prominence_factor, "Peak prominence over median |s|")
            ->capture_default_str();
        s->add_option("--body-width", ex.detection.body_width_fraction, "Half-width fraction marking the body")
            ->capture_default_str();
        s->add_option("--threshold", ex.threshold, "Fixed binarization threshold (default Otsu)");
        s->add_option("--periods", ex_periods, "Upper years of Baroque,Classical,Romantic,Impressionist");
        s->add_option("--threads", ex.threads, "Worker threads, 0 = all cores")->capture_default_str();
    }

    AnalyzeOptions an;
    {
        auto* s = add_sub("analyze", "Correlation map and PCA projection", {"features", "output"});
        s->add_option("--features", an.features, "features.csv from extract");
        s->add_option("-o,--output", an.output_dir, "Output directory");
        s->add_option("--color-by", an.color_by, "maker, country or period")->capture_default_str();
        s->add_flag("--include-length", an.include_length, "Keep the absolute length L as a feature");
    }

    TimeseriesOptions ts;
    {
        auto* s = add_sub("timeseries", "Sliding-window feature means", {"features", "output"});
        s->add_option("--features", ts.features, "features.csv from extract");
        s->add_option("-o,--output", ts.output_dir, "Output directory");
        s->add_option("--dt", ts.dt, "Window length in years")->capture_default_str();
        s->add_option("--step", ts.step, "Window step in years")->capture_default_str();
        s->add_option("--plot", ts.plot, "Features to chart")->delimiter(',')->capture_default_str();
    }

    MorphOptions mo;
    {
        auto* s = add_sub("morph", "Thin-plate spline morph of a reference towards epoch means",
                          {"features", "output", "contours", "landmarks"});
        s->add_option("--features", mo.features, "features.csv from extract");
        s->add_option("--reference", mo.reference, "Id of the reference instrument");
        s->add_option("-o,--output", mo.output_dir, "Output directory");
        s->add_option("--contours", mo.contours, "Contour directory (default: next to features.csv)");
        s->add_option("--landmarks", mo.landmarks, "Landmark directory (default: next to features.csv)");
        s->add_option("--dt", mo.dt, "Window length in years")->capture_default_str();
        s->add_option("--step", mo.step, "Window step in years")->capture_default_str();
        s->add_option("--centers", mo.centers, "Explicit window centres")->delimiter(',');
        s->add_option("--grid-x", mo.grid_x, "Vertical grid lines")->capture_default_str();
        s->add_option("--grid-y", mo.grid_y, "Horizontal grid lines")->capture_default_str();
    }

    ClassifyOptions cl;
    std::optional<int> cl_max_depth, cl_mtry;
    {
        auto* s = add_sub("classify", "Random forest evaluation", {"features", "output"});
        s->add_option("--features", cl.features, "features.csv from extract");
        s->add_option("-o,--output", cl.output_dir, "Output directory");
        s->add_option("--target", cl.target, "country, maker or period")->capture_default_str();
        s->add_option("--trees", cl.forest.n_trees, "Number of trees")->capture_default_str();
        s->add_option("--max-depth", cl_max_depth, "Depth cap (default none)");
        s->add_option("--min-leaf", cl.forest.min_leaf, "Minimum leaf size")->capture_default_str();
        s->add_option("--mtry", cl_mtry, "Features tried per split (default ceil(sqrt(p)))");
        s->add_option("--seed", cl.forest.seed, "Random seed")->capture_default_str();
        s->add_option("--train-fraction", cl.forest.train_fraction, "Stratified training share")
            ->capture_default_str();
        s->add_option("--min-class-size", cl.forest.min_class_size, "Smaller classes are pooled into Other")
            ->capture_default_str();
        s->add_option("--threads", cl.forest.threads, "Worker threads, 0 = all cores")->capture_default_str();
    }

    SynthOptions sy;
    {
        auto* s = add_sub("synth", "Write a synthetic image corpus with ground truth", {"output"});
        s->add_option("-o,--output", sy.output_dir, "Output directory");
        s->add_option("--count", sy.corpus.count, "Number of instruments")->capture_default_str();
        s->add_option("--noise", sy.corpus.noise, "Outline noise as a fraction of the length")->capture_default_str();
        s->add_option("--seed", sy.corpus.seed, "Random seed")->capture_default_str();
        s->add_option("--length-px", sy.corpus.length_px, "Mean instrument length in pixels")->capture_default_str();
    }

    for (auto& s : subs) s.app->add_option("--config", s.config, "key = value configuration file; flags win");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kFatal;
    }

    try {
        for (auto& s : subs) {
            if (!s.app->parsed()) continue;
            if (!s.config.empty()) merge_config(s.app, s.config, s.paths);
            const std::string name = s.app->get_name();
            if (name == "extract") {
                require(ex.image_dir, "--images");
                require(ex.output_dir, "--output");
                if (!ex_periods.empty()) ex.periods = ingest::PeriodTable::parse(ex_periods);
                return cmd_extract(ex, err);
            }
            if (name == "analyze") {
                require(an.features, "--features");
                require(an.output_dir, "--output");
                return cmd_analyze(an, err);
            }
            if (name == "timeseries") {
                require(ts.features, "--features");
                require(ts.output_dir, "--output");
                return cmd_timeseries(ts, err);
            }
            if (name == "morph") {
                require(mo.features, "--features");
                require(mo.output_dir, "--output");
                if (mo.reference.empty()) throw ConfigError("missing required option --reference");
                return cmd_morph(mo, err);
            }
            if (name == "classify") {
                require(cl.features, "--features");
                require(cl.output_dir, "--output");
                cl.forest.max_depth = cl_max_depth;
                cl.forest.features_per_split = cl_mtry;
                return cmd_classify(cl, err);
            }
            if (name == "synth") {
                require(sy.output_dir, "--output");
                return cmd_synth(sy, err);
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return kFatal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFatal;
    }
    return kFatal;
}

}  // namespace morpho::cli

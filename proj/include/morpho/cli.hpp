#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morpho/classify.hpp"
#include "morpho/geometry.hpp"
#include "morpho/ingest.hpp"
#include "morpho/synth.hpp"

namespace morpho::cli {

inline constexpr const char* kToolName = "morpho";
inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kPartialFailure = 1, kFatal = 2 };

// key = value lines, '#' comments, optional [command] sections. Keys outside
// any section apply to every command; section keys only to that command.
struct ConfigFile {
    std::map<std::string, std::string> global;
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse(std::istream& in, const std::string& origin = "config");
    static ConfigFile load(const std::filesystem::path& path);

    // Section value first, then the global one.
    std::optional<std::string> find(const std::string& command, const std::string& key) const;
};

// Requested worker count (0 = hardware concurrency), capped by MORPHO_THREADS.
int worker_count(int requested);

// ISO 8601 UTC; honours SOURCE_DATE_EPOCH for reproducible manifests.
std::string timestamp_now();

struct ExtractOptions {
    std::filesystem::path image_dir;
    std::optional<std::filesystem::path> metadata;
    std::filesystem::path output_dir;
    geometry::SmoothingParams smoothing;
    geometry::DetectionParams detection;
    std::optional<int> threshold;
    ingest::PeriodTable periods;
    int threads = 0;
};

struct AnalyzeOptions {
    std::filesystem::path features;
    std::filesystem::path output_dir;
    std::string color_by = "country";  // maker | country | period
    bool include_length = false;
};

struct TimeseriesOptions {
    std::filesystem::path features;
    std::filesystem::path output_dir;
    int dt = 20;
    int step = 1;
    std::vector<std::string> plot = {"a", "h1", "s_mean"};
};

struct MorphOptions {
    std::filesystem::path features;
    std::string reference;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> contours;   // default: contours/ next to the features
    std::optional<std::filesystem::path> landmarks;  // default: landmarks/ next to the features
    int dt = 20;
    int step = 1;
    std::vector<double> centers;  // explicit window centres; every non-empty window when empty
    int n_resample = 2048;
    int grid_x = 10;
    int grid_y = 20;
};

struct ClassifyOptions {
    std::filesystem::path features;
    std::filesystem::path output_dir;
    std::string target = "country";  // country | maker | period
    classify::ForestParams forest;
};

struct SynthOptions {
    std::filesystem::path output_dir;
    synth::CorpusParams corpus;
};

// Each returns an ExitCode; fatal problems are thrown as morpho::Error.
int cmd_extract(const ExtractOptions& o, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& o, std::ostream& log);
int cmd_timeseries(const TimeseriesOptions& o, std::ostream& log);
int cmd_morph(const MorphOptions& o, std::ostream& log);
int cmd_classify(const ClassifyOptions& o, std::ostream& log);
int cmd_synth(const SynthOptions& o, std::ostream& log);

// Parses arguments, merges the config file, dispatches, and maps errors to
// exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace morpho::cli

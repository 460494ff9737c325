#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "morpho/classify.hpp"
#include "morpho/cli.hpp"
#include "morpho/error.hpp"
#include "morpho/ingest.hpp"
#include "morpho/measures.hpp"
#include "support.hpp"

using namespace morpho;
namespace fs = std::filesystem;

namespace {

// Restores an environment variable on scope exit.
class EnvGuard {
public:
    EnvGuard(const char* name, const char* value) : name_(name) {
        if (const char* old = std::getenv(name)) old_ = old;
        if (value)
            ::setenv(name, value, 1);
        else
            ::unsetenv(name);
    }
    ~EnvGuard() {
        if (old_)
            ::setenv(name_.c_str(), old_->c_str(), 1);
        else
            ::unsetenv(name_.c_str());
    }

private:
    std::string name_;
    std::optional<std::string> old_;
};

// One synthetic corpus, extracted once and shared by the tests below.
struct Workspace {
    testing::TempDir dir;
    fs::path corpus, extracted;

    Workspace() {
        EnvGuard epoch("SOURCE_DATE_EPOCH", "1700000000");
        corpus = dir / "corpus";
        extracted = dir / "extracted";
        auto r = testing::run_cli({"synth", "-o", corpus.string(), "--count", "24", "--seed", "11"});
        REQUIRE(r.code == 0);
        r = testing::run_cli({"extract", "--images", (corpus / "images").string(), "--metadata",
                              (corpus / "metadata.csv").string(), "-o", extracted.string()});
        REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    fs::path features() const { return extracted / "features.csv"; }
};

const Workspace& workspace() {
    static Workspace w;
    return w;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(testing::read_file(p)); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

void check_svgs(const fs::path& dir) {
    int seen = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.path().extension() != ".svg") continue;
        ++seen;
        std::string why;
        const bool ok = testing::well_formed_svg(testing::read_file(e.path()), &why);
        CHECK_MESSAGE(ok, (e.path().string() + ": " + why));
    }
    CHECK(seen > 0);
}

}  // namespace

TEST_SUITE("cli.extract") {
    TEST_CASE("a blank image is recorded as a failure and the rest carries on") {
        testing::TempDir dir;
        const auto& w = workspace();
        fs::create_directories(dir / "images");
        fs::copy_file(w.corpus / "images" / "V001.pgm", dir / "images" / "V001.pgm");
        fs::copy_file(w.corpus / "images" / "V002.pgm", dir / "images" / "V002.pgm");
        // A few dark specks, each far below the minimum component size.
        ingest::RasterImage blank{300, 400, std::vector<std::uint8_t>(300 * 400, 255)};
        for (int k = 0; k < 5; ++k)
            for (int d = 0; d < 4; ++d) blank.pixels[static_cast<std::size_t>((50 + 60 * k) * 300 + 40 + d)] = 30;
        ingest::write_pgm(blank, dir / "images" / "blank.pgm");

        const auto r = testing::run_cli({"extract", "--images", (dir / "images").string(), "-o", (dir / "out").string()});
        CHECK(r.code == 1);
        const auto rows = measures::read_features_csv(dir / "out" / "features.csv");
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].meta.id == "V001");
        CHECK(rows[1].meta.id == "V002");

        const auto m = read_json(dir / "out" / "manifest.json");
        CHECK(m["summary"]["images"] == 3);
        CHECK(m["summary"]["ok"] == 2);
        CHECK(m["summary"]["failed"] == 1);
        bool found = false;
        for (const auto& inst : m["instruments"]) {
            if (inst["id"] != "blank") continue;
            found = true;
            CHECK(inst["status"] == "failed");
            CHECK(inst["error"] == "EmptyMaskError");
        }
        CHECK(found);
        CHECK(fs::exists(dir / "out" / "contours" / "V001.csv"));
        CHECK(fs::exists(dir / "out" / "landmarks" / "V002.csv"));
        CHECK(!fs::exists(dir / "out" / "landmarks" / "blank.csv"));
    }

    TEST_CASE("rerunning gives byte-identical outputs") {
        EnvGuard epoch("SOURCE_DATE_EPOCH", "1700000000");
        const auto& w = workspace();
        const auto before = testing::snapshot(w.extracted);
        for (const char* threads : {"1", "3"}) {
            const auto r = testing::run_cli({"extract", "--images", (w.corpus / "images").string(), "--metadata",
                                             (w.corpus / "metadata.csv").string(), "-o", w.extracted.string(),
                                             "--threads", threads});
            REQUIRE(r.code == 0);
            CHECK(testing::snapshot(w.extracted) == before);
        }
        const auto m = read_json(w.extracted / "manifest.json");
        CHECK(m["started"] == "2023-11-14T22:13:20Z");
    }

    TEST_CASE("features agree with the generator's planted geometry") {
        const auto& w = workspace();
        const auto truth = read_json(w.corpus / "ground_truth.json");
        const auto rows = measures::read_features_csv(w.features());
        REQUIRE(rows.size() == truth["instruments"].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& t = truth["instruments"][i];
            const auto& fv = rows[i].features;
            CAPTURE(rows[i].meta.id);
            CHECK(rows[i].meta.id == t["id"].get<std::string>());
            CHECK(rows[i].meta.maker == t["maker"].get<std::string>());
            CHECK(std::abs(fv.L - t["measures"]["L_px"].get<double>()) <= 3.0);
            const std::array<std::pair<const char*, double>, 9> got = {{{"a", fv.a}, {"b", fv.b}, {"c", fv.c},
                                                                       {"d", fv.d}, {"e", fv.e}, {"f", fv.f},
                                                                       {"h1", fv.h1}, {"h2", fv.h2},
                                                                       {"ell", fv.ell}}};
            // Landmarks within a few pixels at 1200 px: well under 1% of L.
            for (const auto& [name, v] : got) {
                CAPTURE(name);
                CHECK(std::abs(v - t["measures"][name].get<double>()) < 0.01);
            }
        }
    }

    TEST_CASE("an empty image directory is fatal") {
        testing::TempDir dir;
        fs::create_directories(dir / "images");
        testing::write_file(dir / "images" / "notes.txt", "nothing here\n");
        const auto r = testing::run_cli({"extract", "--images", (dir / "images").string(), "-o", (dir / "out").string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("EmptyDatasetError") != std::string::npos);
    }

    TEST_CASE("bad parameters are configuration errors") {
        testing::TempDir dir;
        const auto& w = workspace();
        const std::string images = (w.corpus / "images").string();
        for (std::vector<std::string> extra : {std::vector<std::string>{"--threshold", "0"},
                                               std::vector<std::string>{"--sigma", "-1"},
                                               std::vector<std::string>{"--threads", "-2"}}) {
            std::vector<std::string> args = {"extract", "--images", images, "-o", (dir / "out").string()};
            args.insert(args.end(), extra.begin(), extra.end());
            const auto r = testing::run_cli(args);
            CAPTURE(extra[0]);
            CHECK(r.code == 2);
            CHECK(r.err.find("ConfigError") != std::string::npos);
        }
    }
}

TEST_SUITE("cli.commands") {
    TEST_CASE("analyze, timeseries, morph and classify on extracted features") {
        testing::TempDir dir;
        const auto& w = workspace();
        const std::string features = w.features().string();

        auto r = testing::run_cli({"analyze", "--features", features, "-o", (dir / "analysis").string()});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const auto variance = testing::read_file(dir / "analysis" / "pca_variance.csv");
        CHECK(variance.rfind("component,eigenvalue,explained_ratio,cumulative\n", 0) == 0);
        CHECK(count_lines(testing::read_file(dir / "analysis" / "pca_projection.csv")) == 25);

        r = testing::run_cli({"timeseries", "--features", features, "-o", (dir / "ts").string(), "--step", "10"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(testing::read_file(dir / "ts" / "timeseries.csv").rfind("center_year,count,", 0) == 0);

        const auto first = measures::read_features_csv(w.features()).front().meta.id;
        r = testing::run_cli({"morph", "--features", features, "--reference", first, "-o", (dir / "morph").string(),
                              "--centers", "1400,1655,1859"});
        CHECK(r.code == 1);  // nothing dated 1390..1409
        CHECK(fs::exists(dir / "morph" / "morph_1655.svg"));
        CHECK(fs::exists(dir / "morph" / "morph_1859.svg"));
        CHECK(!fs::exists(dir / "morph" / "morph_1400.svg"));
        CHECK(testing::read_file(dir / "morph" / "bending_energy.csv").rfind("center_year,bending_energy\n", 0) == 0);

        r = testing::run_cli({"classify", "--features", features, "-o", (dir / "cls").string(), "--target", "maker",
                              "--trees", "40", "--min-class-size", "2"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(testing::read_file(dir / "cls" / "classification_maker.txt").rfind("target=maker\naccuracy=", 0) == 0);
        CHECK(fs::exists(dir / "cls" / "confusion_maker.csv"));
        CHECK(fs::exists(dir / "cls" / "importance_maker.csv"));
        std::ifstream forest(dir / "cls" / "forest_maker.txt");
        CHECK(classify::Forest::load(forest).trees.size() == 40);

        check_svgs(dir.path());
    }

    TEST_CASE("morph with an unknown reference") {
        testing::TempDir dir;
        const auto r = testing::run_cli({"morph", "--features", workspace().features().string(), "--reference",
                                         "no-such-violin", "-o", dir.path().string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("UnknownIdError") != std::string::npos);
    }

    TEST_CASE("classify without the target column") {
        testing::TempDir dir;
        auto rows = measures::read_features_csv(workspace().features());
        for (auto& row : rows) row.meta.country.reset();
        measures::write_features_csv(dir / "features.csv", rows);
        const auto r = testing::run_cli({"classify", "--features", (dir / "features.csv").string(), "-o",
                                         (dir / "out").string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("MissingFieldError") != std::string::npos);
    }

    TEST_CASE("timeseries without years") {
        testing::TempDir dir;
        auto rows = measures::read_features_csv(workspace().features());
        for (auto& row : rows) row.meta.year.reset();
        measures::write_features_csv(dir / "features.csv", rows);
        const auto r = testing::run_cli({"timeseries", "--features", (dir / "features.csv").string(), "-o",
                                         (dir / "out").string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("MissingFieldError") != std::string::npos);
    }

    TEST_CASE("synth is deterministic") {
        testing::TempDir dir;
        for (const char* sub : {"a", "b"})
            REQUIRE(testing::run_cli({"synth", "-o", (dir / sub).string(), "--count", "50", "--noise", "0.01",
                                      "--seed", "7"})
                        .code == 0);
        const auto a = testing::snapshot(dir / "a");
        CHECK(a.size() == 50 * 2 + 2);
        CHECK(a == testing::snapshot(dir / "b"));
        REQUIRE(testing::run_cli({"synth", "-o", (dir / "c").string(), "--count", "50", "--seed", "8"}).code == 0);
        CHECK(a != testing::snapshot(dir / "c"));
    }

    TEST_CASE("usage errors") {
        CHECK(testing::run_cli({}).code == 2);
        CHECK(testing::run_cli({"frobnicate"}).code == 2);
        auto r = testing::run_cli({"--version"});
        CHECK(r.code == 0);
        CHECK(r.out.find(cli::kVersion) != std::string::npos);
        r = testing::run_cli({"analyze", "-o", "x"});
        CHECK(r.code == 2);
        CHECK(r.err.find("--features") != std::string::npos);
        CHECK(testing::run_cli({"extract", "--help"}).code == 0);
    }
}

TEST_SUITE("cli.config") {
    TEST_CASE("parsing") {
        std::istringstream in(
            "# comment\n"
            "output = out   # trailing\n"
            "\n"
            "[classify]\n"
            "target = \"maker\"\n"
            "max-depth = 5\n"
            "[extract]\n"
            "output = \"a # b\"\n");
        const auto cfg = cli::ConfigFile::parse(in);
        CHECK(cfg.find("classify", "target") == "maker");
        CHECK(cfg.find("classify", "max_depth") == "5");
        CHECK(cfg.find("classify", "output") == "out");
        CHECK(cfg.find("extract", "output") == "a # b");
        CHECK(!cfg.find("analyze", "target"));

        for (const char* bad : {"no equals sign\n", "[broken\n", "= 3\n", "x = 1\nx = 2\n"}) {
            std::istringstream b(bad);
            CAPTURE(bad);
            CHECK_THROWS_AS(cli::ConfigFile::parse(b), ConfigError);
        }
        CHECK_THROWS_AS(cli::ConfigFile::load("/nonexistent/morpho.conf"), ConfigError);
    }

    TEST_CASE("config values fill gaps and flags win") {
        testing::TempDir dir;
        const auto& w = workspace();
        fs::copy_file(w.features(), dir / "features.csv");
        testing::write_file(dir / "morpho.conf",
                            "[timeseries]\n"
                            "features = features.csv\n"
                            "output = from-config\n"
                            "dt = 40\n"
                            "step = 50\n");
        const std::string conf = (dir / "morpho.conf").string();

        auto r = testing::run_cli({"timeseries", "--config", conf});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const auto a = testing::read_file(dir / "from-config" / "timeseries.csv");

        r = testing::run_cli({"timeseries", "--config", conf, "-o", (dir / "from-flags").string(), "--step", "25"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const auto b = testing::read_file(dir / "from-flags" / "timeseries.csv");
        CHECK(count_lines(b) > count_lines(a));
        CHECK(!fs::exists(dir / "from-config" / "from-flags"));
    }

    TEST_CASE("unknown or malformed keys are fatal") {
        testing::TempDir dir;
        testing::write_file(dir / "typo.conf", "[analyze]\nfeatuers = x.csv\n");
        auto r = testing::run_cli({"analyze", "--config", (dir / "typo.conf").string(), "-o", "x"});
        CHECK(r.code == 2);
        CHECK(r.err.find("featuers") != std::string::npos);

        testing::write_file(dir / "bad.conf", "[timeseries]\ndt = twenty\n");
        r = testing::run_cli({"timeseries", "--config", (dir / "bad.conf").string(), "--features",
                              workspace().features().string(), "-o", (dir / "o").string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("ConfigError") != std::string::npos);
    }

    TEST_CASE("worker count") {
        {
            EnvGuard env("MORPHO_THREADS", nullptr);
            CHECK(cli::worker_count(3) == 3);
            CHECK(cli::worker_count(0) >= 1);
            CHECK_THROWS_AS(cli::worker_count(-1), ConfigError);
        }
        {
            EnvGuard env("MORPHO_THREADS", "2");
            CHECK(cli::worker_count(8) == 2);
            CHECK(cli::worker_count(1) == 1);
            CHECK(cli::worker_count(0) <= 2);
        }
        {
            EnvGuard env("MORPHO_THREADS", "lots");
            CHECK_THROWS_AS(cli::worker_count(1), ConfigError);
        }
    }

    TEST_CASE("timestamps") {
        {
            EnvGuard env("SOURCE_DATE_EPOCH", "0");
            CHECK(cli::timestamp_now() == "1970-01-01T00:00:00Z");
        }
        {
            EnvGuard env("SOURCE_DATE_EPOCH", nullptr);
            const auto t = cli::timestamp_now();
            CHECK(t.size() == 20);
            CHECK(t[10] == 'T');
            CHECK(t.back() == 'Z');
        }
    }
}

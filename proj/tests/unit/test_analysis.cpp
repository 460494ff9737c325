#include <doctest.h>

#include <Eigen/Dense>

#include "morpho/analysis.hpp"
#include "morpho/error.hpp"
#include "morpho/random.hpp"

using namespace morpho;
using namespace morpho::analysis;

namespace {

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double mx = x.mean(), my = y.mean();
    double sxy = 0, sxx = 0, syy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sxy += (x(i) - mx) * (y(i) - my);
        sxx += (x(i) - mx) * (x(i) - mx);
        syy += (y(i) - my) * (y(i) - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    auto rng = make_rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = standard_normal(rng) * (1.0 + j) + 0.3 * (j ? m(i, j - 1) : 0.0);
    return m;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd c = m.rowwise() - m.colwise().mean();
    return c.transpose() * c / static_cast<double>(m.rows() - 1);
}

std::vector<std::string> names(Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
    return out;
}

measures::InstrumentRecord dated(std::optional<int> year, double value) {
    measures::InstrumentRecord r;
    r.meta.id = "r" + std::to_string(year.value_or(0)) + "_" + std::to_string(value);
    r.meta.year = year;
    std::array<double, 16> v{};
    v.fill(value);
    r.features = measures::FeatureVector::from_values(v);
    return r;
}

}  // namespace

TEST_SUITE("analysis.correlation") {
    TEST_CASE("perfect dependence and a hand-computed value") {
        Eigen::MatrixXd m(4, 4);
        m << 1, 2, -1, 1,  //
            2, 4, -2, 3,   //
            3, 6, -3, 2,   //
            4, 8, -4, 4;
        const auto cm = correlation_map(m, {"x", "2x", "-x", "y"});
        CHECK(cm.r(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cm.r(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
        // x = (1,2,3,4), y = (1,3,2,4): sxy = 4, sxx = syy = 5.
        CHECK(cm.r(0, 3) == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(cm.labels == std::vector<std::string>{"x", "2x", "-x", "y"});
    }

    TEST_CASE("structure on random data") {
        const auto m = random_matrix(30, 6, 1);
        const auto cm = correlation_map(m, names(6));
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(cm.r(i, i) - 1.0) < 1e-12);
            for (int j = 0; j < 6; ++j) {
                CHECK(cm.r(i, j) == cm.r(j, i));
                CHECK(std::abs(cm.r(i, j)) <= 1.0);
                CHECK(cm.r(i, j) == doctest::Approx(pearson(m.col(i), m.col(j))).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("positive affine rescaling of columns changes nothing") {
        const auto m = random_matrix(25, 4, 2);
        Eigen::MatrixXd s = m;
        for (int j = 0; j < 4; ++j) s.col(j) = s.col(j) * (0.5 + 3 * j) + Eigen::VectorXd::Constant(25, 10.0 - j);
        const auto a = correlation_map(m, names(4));
        const auto b = correlation_map(s, names(4));
        CHECK((a.r - b.r).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("errors") {
        Eigen::MatrixXd m(4, 2);
        m << 1, 5, 2, 5, 3, 5, 4, 5;
        try {
            correlation_map(m, {"x", "flat"});
            FAIL("expected ZeroVarianceError");
        } catch (const ZeroVarianceError& e) {
            CHECK(std::string(e.what()).find("flat") != std::string::npos);
        }
        CHECK_THROWS_AS(correlation_map(m.topRows(2), {"x", "flat"}), InsufficientDataError);
        CHECK_THROWS_AS(correlation_map(m, {"x"}), DimensionError);
    }
}

TEST_SUITE("analysis.pca") {
    TEST_CASE("rank-one data") {
        Eigen::MatrixXd m(6, 2);
        for (int i = 0; i < 6; ++i) m(i, 0) = m(i, 1) = i * 0.7 - 1.0;
        const auto model = fit_pca(m, {"x", "y"});
        CHECK(std::abs(model.explained_ratio(0) - 1.0) < 1e-9);
        CHECK(std::abs(model.eigenvalues(1)) < 1e-12);
        // k = 1 scores are the signed distances along the line, up to one global sign.
        const Eigen::MatrixXd scores = project(model, m, 1);
        const double mean = m.col(0).mean();
        const double sign = scores(5, 0) > 0 ? 1.0 : -1.0;
        for (int i = 0; i < 6; ++i) CHECK(std::abs(scores(i, 0) - sign * std::sqrt(2.0) * (m(i, 0) - mean)) < 1e-9);
    }

    TEST_CASE("three points: closed-form 2x2 eigenvalues") {
        Eigen::MatrixXd m(3, 2);
        m << 0, 0, 1, 0, 0, 1;
        // Standardize by hand (population sd), then the covariance is [[p, q], [q, p]].
        for (int j = 0; j < 2; ++j) {
            const double mu = m.col(j).mean();
            const double sd = std::sqrt((m.col(j).array() - mu).square().mean());
            m.col(j) = (m.col(j).array() - mu) / sd;
        }
        const auto cov = sample_covariance(m);
        const double tr = cov(0, 0) + cov(1, 1);
        const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
        const double disc = std::sqrt(tr * tr / 4 - det);
        const auto model = fit_pca(m, {"x", "y"});
        CHECK(std::abs(model.eigenvalues(0) - (tr / 2 + disc)) < 1e-9);
        CHECK(std::abs(model.eigenvalues(1) - (tr / 2 - disc)) < 1e-9);
        CHECK(model.eigenvalues(0) == doctest::Approx(2.25));
        CHECK(model.eigenvalues(1) == doctest::Approx(0.75));
    }

    TEST_CASE("isotropic Gaussian sample splits the variance evenly") {
        auto rng = make_rng(2024);
        Eigen::MatrixXd m(10000, 2);
        for (int i = 0; i < m.rows(); ++i) m.row(i) << standard_normal(rng), standard_normal(rng);
        const auto model = fit_pca(m, {"x", "y"});
        CHECK(std::abs(model.explained_ratio(0) - 0.5) < 0.03);
        CHECK(std::abs(model.explained_ratio(1) - 0.5) < 0.03);
    }

    TEST_CASE("orthonormal components reconstruct the covariance") {
        const auto m = random_matrix(40, 7, 3);
        const auto model = fit_pca(m, names(7));
        const Eigen::MatrixXd& c = model.components;
        CHECK((c.transpose() * c - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-9);
        const Eigen::MatrixXd cov = sample_covariance(m);
        const Eigen::MatrixXd rec = c * model.eigenvalues.asDiagonal() * c.transpose();
        CHECK((rec - cov).norm() / cov.norm() < 1e-6);
        CHECK(std::abs(model.explained_ratio.sum() - 1.0) < 1e-9);
        for (int j = 0; j < 7; ++j) {
            CHECK(model.eigenvalues(j) >= 0);
            if (j) CHECK(model.eigenvalues(j) <= model.eigenvalues(j - 1));
            Eigen::Index at;
            c.col(j).cwiseAbs().maxCoeff(&at);
            CHECK(c(at, j) > 0);
        }
    }

    TEST_CASE("projection variance and isometry") {
        const auto m = random_matrix(50, 5, 4);
        const auto model = fit_pca(m, names(5));
        for (Eigen::Index k : {1, 3, 5}) {
            const Eigen::MatrixXd s = project(model, m, k);
            const Eigen::MatrixXd cov = sample_covariance(s);
            for (Eigen::Index i = 0; i < k; ++i)
                for (Eigen::Index j = 0; j < k; ++j)
                    CHECK(std::abs(cov(i, j) - (i == j ? model.eigenvalues(i) : 0.0)) < 1e-6);
            CHECK(std::abs(cov.trace() - model.eigenvalues.head(k).sum()) < 1e-6);
        }
        const Eigen::MatrixXd full = project(model, m, 5);
        for (int a = 0; a < 10; ++a)
            for (int b = a + 1; b < 10; ++b)
                CHECK(std::abs((full.row(a) - full.row(b)).norm() - (m.row(a) - m.row(b)).norm()) < 1e-9);
    }

    TEST_CASE("errors") {
        Eigen::MatrixXd m = random_matrix(5, 3, 5);
        m(2, 1) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(fit_pca(m, names(3)), NumericalError);
        const auto model = fit_pca(random_matrix(5, 3, 5), names(3));
        CHECK_THROWS_AS(project(model, random_matrix(5, 4, 6), 2), DimensionError);
        CHECK_THROWS_AS(project(model, random_matrix(5, 3, 6), 4), DimensionError);
        CHECK_THROWS_AS(fit_pca(random_matrix(1, 3, 5), names(3)), InsufficientDataError);
    }

    TEST_CASE("feature matrix overloads carry metadata through") {
        measures::FeatureMatrix fm;
        fm.values = random_matrix(6, 3, 8);
        fm.labels = names(3);
        for (int i = 0; i < 6; ++i) fm.meta.push_back({"id" + std::to_string(i), "M", "C", 1700 + i, std::nullopt});
        const auto model = fit_pca(fm);
        const auto proj = project(model, fm, 2);
        CHECK(proj.scores.cols() == 2);
        CHECK(proj.meta[4].id == "id4");
        fm.labels[1] = "other";
        CHECK_THROWS_AS(project(model, fm, 2), DimensionError);
    }
}

TEST_SUITE("analysis.sliding_window") {
    TEST_CASE("two-point mean") {
        const std::vector<measures::InstrumentRecord> rs = {dated(1600, 1.0), dated(1610, 3.0)};
        const auto ts = sliding_window(rs, 20, 1);
        REQUIRE(!ts.center_years.empty());
        CHECK(ts.center_years[0] == 1610.0);
        CHECK(ts.counts[0] == 2);
        CHECK(ts.values[0][0] == 2.0);
        CHECK(ts.labels.size() == 17);
        CHECK(ts.labels.back() == "s_mean");
        CHECK(ts.values[0].back() == 2.0);
    }

    TEST_CASE("single record fills every window that holds it") {
        const std::vector<measures::InstrumentRecord> rs = {dated(1700, 0.25)};
        const auto ts = sliding_window(rs, 20, 1);
        REQUIRE(ts.counts.size() == 1);
        CHECK(ts.counts[0] == 1);
        CHECK(ts.values[0][3] == 0.25);
    }

    TEST_CASE("windows follow the year range") {
        const auto w = make_windows(1600, 1700, 20, 5);
        REQUIRE(!w.empty());
        CHECK(w.front().start == 1600);
        CHECK(w.back().contains(1700));
        CHECK(!w[w.size() - 2].contains(1700));
        for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i].start - w[i - 1].start == 5);
        CHECK(w.front().center() == 1610.0);
        CHECK_THROWS_AS(make_windows(1600, 1700, 0, 1), ConfigError);
        CHECK_THROWS_AS(make_windows(1600, 1700, 20, 0), ConfigError);
    }

    TEST_CASE("step equal to dt partitions the dated records") {
        auto rng = make_rng(17);
        std::vector<measures::InstrumentRecord> rs;
        for (int i = 0; i < 80; ++i)
            rs.push_back(dated(i % 7 ? std::optional<int>(1550 + static_cast<int>(uniform_index(rng, 400))) : std::nullopt, 0.5));
        const auto dated_count = std::count_if(rs.begin(), rs.end(), [](auto& r) { return r.meta.year.has_value(); });
        const auto ts = sliding_window(rs, 20, 20);
        std::size_t total = 0;
        for (std::size_t w = 0; w < ts.counts.size(); ++w) {
            total += ts.counts[w];
            if (ts.counts[w]) {
                for (double v : ts.values[w]) CHECK(v == 0.5);
            } else {
                CHECK(ts.values[w].empty());
            }
            if (w) CHECK(ts.center_years[w] - ts.center_years[w - 1] == 20.0);
        }
        CHECK(total == static_cast<std::size_t>(dated_count));
    }

    TEST_CASE("empty windows are kept") {
        const std::vector<measures::InstrumentRecord> rs = {dated(1600, 1.0), dated(1700, 2.0)};
        const auto ts = sliding_window(rs, 10, 10);
        REQUIRE(ts.counts.size() == 11);
        CHECK(ts.counts[0] == 1);
        CHECK(ts.counts[5] == 0);
        CHECK(ts.values[5].empty());
        CHECK(ts.counts[10] == 1);
    }

    TEST_CASE("no dates") {
        const std::vector<measures::InstrumentRecord> rs = {dated(std::nullopt, 1.0)};
        CHECK_THROWS_AS(sliding_window(rs, 20, 1), NoDatesError);
    }

    TEST_CASE("generic vectors") {
        const std::vector<std::optional<int>> years = {1800, std::nullopt, 1805};
        const std::vector<std::vector<double>> values = {{1, 10}, {100, 100}, {3, 30}};
        const auto ts = sliding_window(years, values, {"u", "v"}, 10, 1);
        CHECK(ts.values[0] == std::vector<double>{2, 20});
        CHECK_THROWS_AS(sliding_window(years, values, {"u"}, 10, 1), DimensionError);
    }

    TEST_CASE("constant values give an exactly constant series") {
        // 0.1 summed seven times and divided by seven is not 0.1 in binary.
        std::vector<std::optional<int>> years;
        std::vector<std::vector<double>> values;
        for (int i = 0; i < 7; ++i) {
            years.push_back(1700 + i);
            values.push_back({0.1, 0.7});
        }
        const auto ts = sliding_window(years, values, {"u", "v"}, 20, 1);
        for (const auto& v : ts.values) CHECK(v == std::vector<double>{0.1, 0.7});
    }
}

#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "morpho/geometry.hpp"
#include "morpho/ingest.hpp"

namespace morpho::measures {

// Lengths in pixels, curvatures in 1/pixel.
struct RawMeasures {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
    double h1 = 0, h2 = 0;
    double ell = 0;
    double L = 0;
    std::array<double, 6> sbar{};            // mean |s| per segment
    std::array<std::size_t, 6> n_seg{};      // resampled points per segment
    std::array<double, 6> seg_points{};      // points per segment at one-pixel spacing
};

// Dimensionless features: lengths divided by L, curvatures s_i = sbar_i * N_i.
struct FeatureVector {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
    double h1 = 0, h2 = 0;
    double ell = 0;
    double L = 0;  // pixels
    std::array<double, 6> s{};

    // Order of kFeatureNames.
    std::array<double, 16> values() const;
    static FeatureVector from_values(std::span<const double, 16> v);
};

inline constexpr std::array<const char*, 16> kFeatureNames = {
    "a", "b", "c", "d", "e", "f", "h1", "h2", "ell", "L", "s1", "s2", "s3", "s4", "s5", "s6"};
inline constexpr std::size_t kLengthColumn = 9;

struct InstrumentRecord {
    FeatureVector features;
    ingest::Metadata meta;
};

// Reference band for the C-bout length a/L on Stradivari instruments.
// Documentation only: values outside it are worth a second look, not an error.
inline constexpr double kStradivariBandLow = 0.21;
inline constexpr double kStradivariBandHigh = 0.26;
bool within_reference_band(const FeatureVector& fv);

// y grows downward; the body-top line T passes through QR and QL.
// a, d: C-bouts (AR-BR, AL-BL); b, e: upper bouts (T-AR, T-AL);
// c, f: lower bouts (BR-bottom, BL-bottom); h1 = |BL-BR|; h2 = |AL-AR|;
// ell: scroll tip to T; L: full vertical extent.
RawMeasures extract_raw(const Contour& c, const geometry::LandmarkSet& lm,
                        const geometry::CurvatureProfile& profile);

FeatureVector normalize(const RawMeasures& raw);

// Rows = instruments, columns standardized to mean 0 and (population)
// variance 1. Zero-variance columns are dropped and listed in `dropped`.
struct FeatureMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
    std::vector<ingest::Metadata> meta;
    std::vector<std::string> dropped;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

// Columns a..f, h1, h2, ell, s1..s6 (plus L after ell when include_length).
FeatureMatrix feature_matrix(std::span<const InstrumentRecord> records, bool include_length = false);

// Same column selection without standardization.
Eigen::MatrixXd raw_feature_columns(std::span<const InstrumentRecord> records,
                                    std::vector<std::string>& labels, bool include_length = false);

void write_features_csv(std::ostream& out, std::span<const InstrumentRecord> records);
void write_features_csv(const std::filesystem::path& path, std::span<const InstrumentRecord> records);
std::vector<InstrumentRecord> read_features_csv(const std::filesystem::path& path);
std::vector<InstrumentRecord> read_features_csv(std::istream& in);

}  // namespace morpho::measures

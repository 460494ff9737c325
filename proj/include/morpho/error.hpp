#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morpho {

// Base of every error the library raises. kind() is the stable name used in
// run manifests and CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MORPHO_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

// ingest
MORPHO_DEFINE_ERROR(IoError);
MORPHO_DEFINE_ERROR(FormatError);
MORPHO_DEFINE_ERROR(DegenerateImageError);
MORPHO_DEFINE_ERROR(EmptyMaskError);
MORPHO_DEFINE_ERROR(ParseError);
MORPHO_DEFINE_ERROR(DuplicateIdError);

// geometry
MORPHO_DEFINE_ERROR(DegenerateContourError);
MORPHO_DEFINE_ERROR(NumericalSingularityError);
MORPHO_DEFINE_ERROR(LandmarkOrderError);

// measures
MORPHO_DEFINE_ERROR(NormalizationError);
MORPHO_DEFINE_ERROR(InsufficientDataError);

// analysis
MORPHO_DEFINE_ERROR(ZeroVarianceError);
MORPHO_DEFINE_ERROR(NumericalError);
MORPHO_DEFINE_ERROR(DimensionError);
MORPHO_DEFINE_ERROR(NoDatesError);

// tps
MORPHO_DEFINE_ERROR(SingularConfigurationError);
MORPHO_DEFINE_ERROR(BoundsError);

// classify
MORPHO_DEFINE_ERROR(DegenerateLabelsError);
MORPHO_DEFINE_ERROR(StratificationError);

// cli
MORPHO_DEFINE_ERROR(ConfigError);
MORPHO_DEFINE_ERROR(EmptyDatasetError);
MORPHO_DEFINE_ERROR(MissingFieldError);
MORPHO_DEFINE_ERROR(UnknownIdError);

#undef MORPHO_DEFINE_ERROR

class LandmarkDetectionError : public Error {
public:
    LandmarkDetectionError(std::size_t found, const std::string& what)
        : Error("LandmarkDetectionError", what), found_(found) {}

    // Number of qualifying curvature peaks that were available for assignment.
    std::size_t found_peaks() const noexcept { return found_; }

private:
    std::size_t found_;
};

}  // namespace morpho

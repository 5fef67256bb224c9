#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calib {

/// Typed failure categories shared by every module.
enum class Errc {
    IoFailure,
    MalformedHeader,
    ArrayLengthMismatch,
    NonFiniteValue,
    UnsupportedDimension,
    UnsupportedLocation,
    NonPhysicalState,
    DuplicateName,
    MissingField,
    MalformedRow,
    NonMonotoneSpan,
    StageIndexGap,
    StageOutOfRange,
    EmptySelection,
    PlaneOutOfRange,
    EmptyBand,
    ZeroTotalWeight,
    HubTipDegenerate,
    NonPositivePressure,
    DegenerateTemperatureRatio,
    SpeedMismatch,
    MissingStation,
    NoOverlap,
    TooFewSamples,
    InvalidSpec,
    InvalidArgument,
    ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying an error category and the tree path (or other locator)
/// of the offending item. what() renders "<Code> at <path>: <detail>".
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string path, const std::string& detail);

    Errc code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    Errc code_;
    std::string path_;
};

} // namespace calib

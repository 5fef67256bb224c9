#include "calib/error.hpp"

namespace calib {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::IoFailure: return "IoFailure";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::ArrayLengthMismatch: return "ArrayLengthMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::UnsupportedDimension: return "UnsupportedDimension";
    case Errc::UnsupportedLocation: return "UnsupportedLocation";
    case Errc::NonPhysicalState: return "NonPhysicalState";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::MissingField: return "MissingField";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonMonotoneSpan: return "NonMonotoneSpan";
    case Errc::StageIndexGap: return "StageIndexGap";
    case Errc::StageOutOfRange: return "StageOutOfRange";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::PlaneOutOfRange: return "PlaneOutOfRange";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::ZeroTotalWeight: return "ZeroTotalWeight";
    case Errc::HubTipDegenerate: return "HubTipDegenerate";
    case Errc::NonPositivePressure: return "NonPositivePressure";
    case Errc::DegenerateTemperatureRatio: return "DegenerateTemperatureRatio";
    case Errc::SpeedMismatch: return "SpeedMismatch";
    case Errc::MissingStation: return "MissingStation";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

namespace {

std::string render(Errc code, const std::string& path, const std::string& detail)
{
    std::string out(errc_name(code));
    if (!path.empty()) {
        out += " at ";
        out += path;
    }
    if (!detail.empty()) {
        out += ": ";
        out += detail;
    }
    return out;
}

} // namespace

Error::Error(Errc code, std::string path, const std::string& detail)
    : std::runtime_error(render(code, path, detail)), code_(code), path_(std::move(path))
{
}

} // namespace calib

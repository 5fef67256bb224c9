#pragma once

#include "calib/extraction.hpp"
#include "calib/s2_design.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace calib {

/// S2 and CFD values of one quantity on a shared span grid.
struct AlignedPair {
    std::string station; // e.g. "row_1_inlet"
    int row_index = 0;
    Side side = Side::Inlet;
    std::string quantity;
    std::vector<double> span; // fractions, strictly increasing
    std::vector<double> s2;
    std::vector<double> cfd;
};

/// Union of both span grids restricted to their overlap; each source is
/// linearly interpolated onto it. Nodes shared with a source reproduce that
/// source exactly. Never extrapolates.
AlignedPair align_profiles(const S2RadialProfile& s2, std::span<const double> cfd_span,
                           std::span<const double> cfd_values);
AlignedPair align_profiles(const S2RadialProfile& s2, const StationProfile& cfd);

/// Linear interpolation of (x, y) at `at`; `at` must lie inside [x.front(), x.back()].
double interpolate_linear(std::span<const double> x, std::span<const double> y, double at);

enum class Reference { S2, Cfd };

struct DeviationMetrics {
    double max_rel = 0.0;  // largest |deviation|
    double mean_rel = 0.0; // signed mean (bias)
    double rms_rel = 0.0;
    double location_of_max = 0.0; // span fraction
    std::size_t absolute_nodes = 0; // nodes with zero reference, measured absolutely
};

/// Per-node deviation (other - ref) / |ref|; absolute where ref == 0.
std::vector<double> node_deviations(const AlignedPair& pair, Reference reference);
DeviationMetrics deviation_metrics(const AlignedPair& pair, Reference reference = Reference::S2);

enum class Severity { Info, Warn, Critical };
const char* severity_name(Severity s);

struct Evidence {
    std::string quantity;
    std::optional<double> span; // absent for stage-level evidence
    std::optional<double> s2;
    double cfd = 0.0;
};

struct Advisory {
    std::string code;
    Severity severity = Severity::Info;
    int stage = 0;
    std::string row;     // rotor | stator | igv | ogv | stage
    std::string station; // empty for stage-level advisories
    std::string message;
    std::vector<Evidence> evidence;
};

struct RuleConfig {
    double mach_tip_limit = 1.3;
    double tip_span_threshold = 0.90;
    double p0_rel_dev_threshold = 0.01;
    double stage_pi_dev_threshold = 0.005;

    /// Throws InvalidArgument unless every threshold is positive.
    void validate() const;
};

/// S2 against 3D stage performance, one row of the comparison table.
struct StageComparison {
    int stage = 0;
    double s2_pi = 1.0;
    double s2_eta = 1.0;
    std::optional<double> cfd_pi;
    std::optional<double> cfd_eta;

    /// |cfd_pi - s2_pi| / s2_pi
    std::optional<double> pi_rel_dev() const;
};

struct AdviceInputs {
    RowLayout layout;
    std::vector<StageComparison> stages;
    std::vector<AlignedPair> pairs;
    /// CFD profiles scanned for tip Mach even without a matching S2 profile.
    std::vector<StationProfile> cfd_profiles;
    Reference reference = Reference::S2;
};

/// Rule sweep, ordered by (stage, code, row, side):
///   SHOCK_TIP     critical  rotor relative Mach above the limit at span >= tip threshold
///   P0_MISMATCH   warn      |P0 deviation| above threshold at tip span or mid span
///   STAGE_PI_DEV  warn      stage pressure ratio deviation above threshold
std::vector<Advisory> advise(const AdviceInputs& in, const RuleConfig& rules);

struct StationMetrics {
    std::string station;
    std::string quantity;
    DeviationMetrics metrics;
};

struct ReportData {
    std::string machine;
    std::vector<StageComparison> stages;
    std::vector<StationMetrics> stations;
    std::vector<Advisory> advisories;
};

std::string render_tecplot(const std::vector<AlignedPair>& pairs);
void write_tecplot(const std::vector<AlignedPair>& pairs, const std::filesystem::path& path);

std::string render_report(const ReportData& report);
void write_report(const ReportData& report, const std::filesystem::path& path);

} // namespace calib

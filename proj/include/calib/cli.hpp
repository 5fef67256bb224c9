/*
  Batch driver: configuration file, validate / run / synth commands.

  Exit codes: 0 success, 2 validation, 3 extraction, 4 I/O.
*/
#pragma once

#include "calib/comparison.hpp"
#include "calib/dataset.hpp"
#include "calib/extraction.hpp"
#include "calib/gas.hpp"
#include "calib/s2_design.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace calib::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_extraction = 3, exit_io = 4 };

struct StationConfig {
    StationSpec spec;
    int n_bands = 21;
    std::vector<double> bands; // explicit span fractions, override n_bands
    std::optional<double> epsilon;
};

/// Run-level boundary conditions of the operating point.
struct BoundaryConditions {
    double inlet_total_pressure = 101325.0;  // Pa
    double inlet_total_temperature = 288.15; // K
    double backpressure = 600000.0;          // Pa

    bool operator==(const BoundaryConditions&) const = default;
};

struct RunConfig {
    std::filesystem::path cfd_dataset;
    std::filesystem::path s2_design;
    std::filesystem::path outputs;
    RowLayout layout;
    double shaft_speed = 0.0; // rad/s
    Axis axis = Axis::X;
    GasModel gas;
    BoundaryConditions boundary;
    WeightingPolicy weighting = WeightingPolicy::Default;
    DerivationOrder order = DerivationOrder::AverageThenDerive;
    Reference reference = Reference::S2;
    RuleConfig rules;
    int threads = 1;
    std::vector<StationConfig> stations;

    /// Relative paths in the file are resolved against this directory.
    std::filesystem::path base_dir;
    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Throws ConfigError naming the offending key; unknown keys are rejected.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source = "<memory>");
/// IoFailure when the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);
/// Keyed-tree text accepted by parse_run_config.
std::string render_run_config(const RunConfig& cfg);

struct ValidationSummary {
    std::size_t bases = 0;
    std::size_t zones = 0;
    int rows = 0;
    int stages = 0;
    std::size_t stations = 0;
    std::vector<std::string> warnings;
};

/// Structural checks binding configuration, dataset and design. Throws the
/// first failure with its tree path.
ValidationSummary validate_inputs(const RunConfig& cfg, const Dataset& ds, const S2DesignCase& design);

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line, including the program name.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace calib::cli

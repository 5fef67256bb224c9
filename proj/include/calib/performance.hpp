#pragma once

#include "calib/extraction.hpp"
#include "calib/gas.hpp"
#include "calib/s2_design.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace calib {

/// Mass-averaged stagnation state and mass flow through one station plane.
struct PlaneState {
    double p0 = 0.0;   // Pa
    double t0 = 0.0;   // K
    double mdot = 0.0; // kg/s
};

/// mdot = sum(rho * V_axial * A) with nodal area shares; P0 and T0 are
/// computed per node from the primitives and mass averaged.
PlaneState mass_averaged_plane_state(const Zone& z, const StationSpec& spec, const GasModel& gas,
                                     Axis axis = Axis::X);

double stage_pressure_ratio(double p0_out, double p0_in);

/// (pi^((gamma-1)/gamma) - 1) / (tau - 1), total-to-total.
double adiabatic_efficiency(double pi, double tau, const GasModel& gas);

/// Temperature ratio that yields `eta` at pressure ratio `pi`.
double temperature_ratio_for(double pi, double eta, const GasModel& gas);

/// Pressure ratio that yields `eta` at temperature ratio `tau`.
double pressure_ratio_for(double eta, double tau, const GasModel& gas);

struct StagePerformance {
    int stage_index = 0;
    double pi = 1.0;
    double tau = 1.0;
    std::optional<double> eta_ad; // absent when the pair is not compressive
    double mdot = 0.0;
};

struct StageTable {
    std::vector<StagePerformance> stages;
    StagePerformance overall; // stage_index 0; pi and tau are stage products
};

/// Plane states keyed by (row index, side).
using RowStates = std::map<std::pair<int, Side>, PlaneState>;

/// Stage k runs from its inlet to the stator-k outlet. The inlet is the
/// stator-(k-1) outlet when present (interstage gaps belong to the
/// downstream stage), otherwise the rotor-k inlet. With an empty stage list
/// every stage of the layout is evaluated.
StageTable stage_table(const RowStates& states, const RowLayout& layout, const GasModel& gas,
                       const std::vector<int>& stages = {});

enum class OperatingLabel { Design, NearSurge, Other };

struct OperatingPoint {
    double pi_overall = 1.0;
    double mdot = 0.0;  // kg/s
    double speed = 0.0; // rad/s
    OperatingLabel label = OperatingLabel::Other;
};

/// Constant-speed surge margin: (pi_s / pi_d) * (mdot_d / mdot_s) - 1.
double surge_margin(const OperatingPoint& design, const OperatingPoint& near_surge);

} // namespace calib

#include "calib/performance.hpp"

#include "calib/error.hpp"

#include <cmath>

namespace calib {

PlaneState mass_averaged_plane_state(const Zone& z, const StationSpec& spec, const GasModel& gas, Axis axis)
{
    gas.validate();
    const std::string where = spec.zone_name + "/" + spec.label();
    for (const char* f : {field::density, field::pressure_static, field::temperature_static})
        if (!z.has_field(f))
            throw Error(Errc::MissingField, where + "/" + f, "primitive field required");
    for (const char* f : velocity_fields(axis))
        if (!z.has_field(f))
            throw Error(Errc::MissingField, where + "/" + f, "primitive field required");

    const StationSample s = sample_station(z, spec, axis);
    const auto& rho = s.quantities.at(field::density);
    const auto& p = s.quantities.at(field::pressure_static);
    const auto& t = s.quantities.at(field::temperature_static);
    const auto& va = s.quantities.at(field::velocity_axial);
    const auto& vr = s.quantities.at(field::velocity_radial);
    const auto& vt = s.quantities.at(field::velocity_tangential);

    double mdot = 0.0, mabs = 0.0, p0_acc = 0.0, t0_acc = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const double dm = rho[n] * va[n] * s.area[n];
        const double speed = std::sqrt(va[n] * va[n] + vr[n] * vr[n] + vt[n] * vt[n]);
        mdot += dm;
        mabs += std::abs(dm);
        p0_acc += dm * gas.total_pressure(p[n], t[n], speed);
        t0_acc += dm * gas.total_temperature(t[n], speed);
    }
    if (mdot == 0.0 || std::abs(mdot) <= 1e-14 * mabs)
        throw Error(Errc::ZeroTotalWeight, where, "no net mass flow through the plane");
    return PlaneState{p0_acc / mdot, t0_acc / mdot, mdot};
}

double stage_pressure_ratio(double p0_out, double p0_in)
{
    if (!(p0_out > 0.0) || !(p0_in > 0.0))
        throw Error(Errc::NonPositivePressure, "pressure ratio", "total pressures must be positive");
    return p0_out / p0_in;
}

double adiabatic_efficiency(double pi, double tau, const GasModel& gas)
{
    if (!(pi > 0.0))
        throw Error(Errc::InvalidArgument, "efficiency", "pressure ratio must be positive");
    if (tau == 1.0)
        throw Error(Errc::DegenerateTemperatureRatio, "efficiency", "temperature ratio of exactly 1");
    return (std::pow(pi, gas.isentropic_exponent()) - 1.0) / (tau - 1.0);
}

double temperature_ratio_for(double pi, double eta, const GasModel& gas)
{
    if (!(pi > 0.0) || eta == 0.0)
        throw Error(Errc::InvalidArgument, "temperature ratio", "need pi > 0 and eta != 0");
    return 1.0 + (std::pow(pi, gas.isentropic_exponent()) - 1.0) / eta;
}

double pressure_ratio_for(double eta, double tau, const GasModel& gas)
{
    const double base = 1.0 + eta * (tau - 1.0);
    if (!(base > 0.0))
        throw Error(Errc::InvalidArgument, "pressure ratio", "no real pressure ratio for this (eta, tau)");
    return std::pow(base, gas.gamma / (gas.gamma - 1.0));
}

namespace {

std::optional<double> efficiency_if_compressive(double pi, double tau, const GasModel& gas)
{
    if (pi > 1.0 && tau > 1.0)
        return adiabatic_efficiency(pi, tau, gas);
    return std::nullopt;
}

} // namespace

StageTable stage_table(const RowStates& states, const RowLayout& layout, const GasModel& gas,
                       const std::vector<int>& stages)
{
    gas.validate();
    std::vector<int> wanted = stages;
    if (wanted.empty()) {
        for (int k = 1; k <= layout.num_stages; ++k)
            wanted.push_back(k);
    }

    auto find = [&](int row, Side side) -> const PlaneState* {
        auto it = states.find({row, side});
        return it == states.end() ? nullptr : &it->second;
    };

    StageTable table;
    table.overall.stage_index = 0;
    table.overall.pi = 1.0;
    table.overall.tau = 1.0;
    for (int k : wanted) {
        const std::string where = "stage " + std::to_string(k);
        const int rotor = row_index_for(k, RowKind::Rotor, layout);
        const int stator = row_index_for(k, RowKind::Stator, layout);

        const PlaneState* in = nullptr;
        if (k > 1)
            in = find(row_index_for(k - 1, RowKind::Stator, layout), Side::Outlet);
        if (!in)
            in = find(rotor, Side::Inlet);
        if (!in)
            throw Error(Errc::MissingStation, where, "no inlet state (rotor inlet or upstream stator outlet)");
        const PlaneState* out = find(stator, Side::Outlet);
        if (!out)
            throw Error(Errc::MissingStation, where, "no stator outlet state");

        StagePerformance sp;
        sp.stage_index = k;
        try {
            sp.pi = stage_pressure_ratio(out->p0, in->p0);
        } catch (const Error& e) {
            throw Error(e.code(), where, e.what());
        }
        if (!(in->t0 > 0.0) || !(out->t0 > 0.0))
            throw Error(Errc::NonPhysicalState, where, "total temperatures must be positive");
        sp.tau = out->t0 / in->t0;
        sp.eta_ad = efficiency_if_compressive(sp.pi, sp.tau, gas);
        const PlaneState* rotor_in = find(rotor, Side::Inlet);
        sp.mdot = rotor_in ? rotor_in->mdot : in->mdot;

        table.overall.pi *= sp.pi;
        table.overall.tau *= sp.tau;
        table.stages.push_back(sp);
    }
    if (!table.stages.empty())
        table.overall.mdot = table.stages.front().mdot;
    table.overall.eta_ad = efficiency_if_compressive(table.overall.pi, table.overall.tau, gas);
    return table;
}

double surge_margin(const OperatingPoint& design, const OperatingPoint& near_surge)
{
    for (const auto* op : {&design, &near_surge}) {
        if (!(op->pi_overall > 0.0) || !(op->mdot > 0.0) || !(op->speed > 0.0))
            throw Error(Errc::InvalidArgument, "operating point", "pressure ratio, mass flow and speed must be positive");
    }
    if (std::abs(near_surge.speed - design.speed) > 1e-3 * design.speed)
        throw Error(Errc::SpeedMismatch, "operating point",
                    "surge margin needs both points on one speed line (0.1% tolerance)");
    return (near_surge.pi_overall / design.pi_overall) * (design.mdot / near_surge.mdot) - 1.0;
}

} // namespace calib

#pragma once

namespace calib {

/// Calorically perfect gas. Defaults are dry air.
struct GasModel {
    double gamma = 1.4;
    double r_gas = 287.06; // J/(kg K)

    /// Throws InvalidArgument unless gamma > 1 and r_gas > 0.
    void validate() const;

    double cp() const { return gamma * r_gas / (gamma - 1.0); }
    double speed_of_sound(double t_static) const;
    double total_temperature(double t_static, double speed) const;
    /// Isentropic stagnation pressure from static state and speed.
    double total_pressure(double p_static, double t_static, double speed) const;
    /// (gamma - 1) / gamma
    double isentropic_exponent() const { return (gamma - 1.0) / gamma; }
};

} // namespace calib

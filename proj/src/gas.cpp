#include "calib/gas.hpp"

#include "calib/error.hpp"

#include <cmath>

namespace calib {

void GasModel::validate() const
{
    if (!(gamma > 1.0) || !std::isfinite(gamma))
        throw Error(Errc::InvalidArgument, "gas.gamma", "gamma must exceed 1");
    if (!(r_gas > 0.0) || !std::isfinite(r_gas))
        throw Error(Errc::InvalidArgument, "gas.r_gas", "gas constant must be positive");
}

double GasModel::speed_of_sound(double t_static) const
{
    return std::sqrt(gamma * r_gas * t_static);
}

double GasModel::total_temperature(double t_static, double speed) const
{
    return t_static + speed * speed / (2.0 * cp());
}

double GasModel::total_pressure(double p_static, double t_static, double speed) const
{
    const double t0 = total_temperature(t_static, speed);
    return p_static * std::pow(t0 / t_static, gamma / (gamma - 1.0));
}

} // namespace calib

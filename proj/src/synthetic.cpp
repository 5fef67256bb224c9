#include "calib/synthetic.hpp"

#include "calib/error.hpp"
#include "calib/performance.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace calib::synth {

void AnnulusSpec::validate() const
{
    if (ni < 2 || nj < 2 || nk < 2)
        throw Error(Errc::InvalidSpec, zone_name, "vertex counts must be at least 2");
    if (!(r_hub > 0.0) || !(r_tip > r_hub))
        throw Error(Errc::InvalidSpec, zone_name, "need 0 < r_hub < r_tip");
    if (!(x_max > x_min))
        throw Error(Errc::InvalidSpec, zone_name, "need x_min < x_max");
    if (!(sector > 0.0) || sector > 2.0 * std::numbers::pi)
        throw Error(Errc::InvalidSpec, zone_name, "sector angle must lie in (0, 2 pi]");
}

Zone gen_annulus(const AnnulusSpec& spec)
{
    spec.validate();
    Zone z;
    z.name = spec.zone_name;
    z.vertex_counts = {spec.ni, spec.nj, spec.nk};
    const std::size_t n = z.vertex_count();
    for (auto& c : z.coords)
        c.resize(n);

    for (std::size_t k = 0; k < spec.nk; ++k) {
        const double th = spec.sector * static_cast<double>(k) / static_cast<double>(spec.nk - 1);
        for (std::size_t j = 0; j < spec.nj; ++j) {
            const double r =
                spec.r_hub + (spec.r_tip - spec.r_hub) * static_cast<double>(j) / static_cast<double>(spec.nj - 1);
            for (std::size_t i = 0; i < spec.ni; ++i) {
                const double x =
                    spec.x_min + (spec.x_max - spec.x_min) * static_cast<double>(i) / static_cast<double>(spec.ni - 1);
                const std::size_t p = z.index(i, j, k);
                z.coords[0][p] = x;
                z.coords[1][p] = r * std::cos(th);
                z.coords[2][p] = r * std::sin(th);
            }
        }
    }
    if (spec.full_wheel())
        z.annotations.push_back(Annotation{"PERIODIC_K seam duplicated: k=0 and k=nk-1 coincide", {}});
    return z;
}

double AnalyticField::pressure(double r) const
{
    switch (kind) {
    case FieldKind::Uniform: return pressure_ref;
    case FieldKind::FreeVortex:
        return pressure_ref + 0.5 * density * swirl * swirl * (1.0 / (r_ref * r_ref) - 1.0 / (r * r));
    case FieldKind::SolidBody: return pressure_ref + 0.5 * density * swirl * swirl * (r * r - r_ref * r_ref);
    }
    return pressure_ref;
}

double AnalyticField::temperature(double r) const
{
    return temperature_ref * pressure(r) / pressure_ref;
}

double AnalyticField::axial_velocity(double r) const
{
    return vx + vx_shear * (r - r_ref);
}

double AnalyticField::tangential_velocity(double r) const
{
    switch (kind) {
    case FieldKind::Uniform: return 0.0;
    case FieldKind::FreeVortex: return swirl / r;
    case FieldKind::SolidBody: return swirl * r;
    }
    return 0.0;
}

Zone apply_field(Zone z, const AnalyticField& f, const GasModel& gas)
{
    gas.validate();
    if (!(f.density > 0.0) || !(f.pressure_ref > 0.0) || !(f.temperature_ref > 0.0) || !(f.r_ref > 0.0))
        throw Error(Errc::NonPhysicalState, z.name, "reference density, pressure, temperature and radius must be positive");

    const std::size_t n = z.vertex_count();
    std::vector<double> rho(n, f.density), p(n), t(n), vx(n), vy(n), vz(n);
    const CylindricalView view = cylindrical_view(z, Axis::X);
    for (std::size_t q = 0; q < n; ++q) {
        const double r = view.r[q];
        p[q] = f.pressure(r);
        t[q] = f.temperature(r);
        if (!(p[q] > 0.0) || !(t[q] > 0.0))
            throw Error(Errc::NonPhysicalState, z.name, "static pressure or temperature not positive at r = " +
                                                            std::to_string(r));
        const double vt = f.tangential_velocity(r);
        const double th = view.theta[q];
        vx[q] = f.axial_velocity(r);
        vy[q] = -vt * std::sin(th);
        vz[q] = vt * std::cos(th);
    }
    auto put = [&](const char* name, std::vector<double> v) {
        z.solutions[name] = Field{name, Location::Vertex, std::move(v)};
    };
    put(field::density, std::move(rho));
    put(field::pressure_static, std::move(p));
    put(field::temperature_static, std::move(t));
    put(field::velocity_x, std::move(vx));
    put(field::velocity_y, std::move(vy));
    put(field::velocity_z, std::move(vz));
    return z;
}

Zone apply_field_by_plane(Zone z, std::span<const AnalyticField> plane_fields, const GasModel& gas)
{
    if (plane_fields.size() != z.vertex_counts[0])
        throw Error(Errc::InvalidArgument, z.name, "need one field per i-plane");
    // Each plane is filled from its own field; apply_field does the checks.
    std::map<std::string, Field> merged;
    for (std::size_t i = 0; i < plane_fields.size(); ++i) {
        const Zone filled = apply_field(z, plane_fields[i], gas);
        for (const auto& [name, f] : filled.solutions) {
            auto [it, fresh] = merged.try_emplace(name, f);
            if (fresh)
                continue;
            for (std::size_t k = 0; k < z.vertex_counts[2]; ++k)
                for (std::size_t j = 0; j < z.vertex_counts[1]; ++j) {
                    const std::size_t q = z.index(i, j, k);
                    it->second.values[q] = f.values[q];
                }
        }
    }
    for (auto& [name, f] : merged)
        z.solutions[name] = std::move(f);
    return z;
}

AnalyticField field_from_totals(FieldKind kind, double swirl, double vx, double p0, double t0, double r_ref,
                                const GasModel& gas)
{
    gas.validate();
    AnalyticField f;
    f.kind = kind;
    f.swirl = swirl;
    f.vx = vx;
    f.r_ref = r_ref;
    const double vt = f.tangential_velocity(r_ref);
    const double t = t0 - (vx * vx + vt * vt) / (2.0 * gas.cp());
    if (!(t > 0.0))
        throw Error(Errc::NonPhysicalState, "field", "velocity too high for the total temperature");
    f.temperature_ref = t;
    f.pressure_ref = p0 * std::pow(t / t0, 1.0 / gas.isentropic_exponent());
    f.density = f.pressure_ref / (gas.r_gas * t);
    return f;
}

AnalyticField scaled(const AnalyticField& f, double pressure_scale, double temperature_scale)
{
    AnalyticField s = f;
    const double vscale = std::sqrt(temperature_scale);
    s.pressure_ref *= pressure_scale;
    s.temperature_ref *= temperature_scale;
    s.density *= pressure_scale / temperature_scale;
    s.vx *= vscale;
    s.vx_shear *= vscale;
    s.swirl *= vscale;
    return s;
}

double critical_free_vortex_swirl(const AnalyticField& f, double r_hub)
{
    const double span_term = 1.0 / (r_hub * r_hub) - 1.0 / (f.r_ref * f.r_ref);
    if (!(span_term > 0.0))
        throw Error(Errc::InvalidArgument, "free vortex", "hub must lie inside the reference radius");
    return std::sqrt(2.0 * f.pressure_ref / (f.density * span_term));
}

std::map<std::string, double> analytic_band_average(const AnalyticField& f, const RadialBand& band, Weighting weighting)
{
    using boost::math::quadrature::gauss_kronrod;
    const double a = band.center - band.epsilon;
    const double b = band.center + band.epsilon;
    auto weight = [&](double r) {
        return weighting == Weighting::Mass ? f.density * f.axial_velocity(r) * r : r;
    };
    auto integrate = [&](auto&& g) {
        double err = 0.0;
        return gauss_kronrod<double, 31>::integrate([&](double r) { return g(r) * weight(r); }, a, b, 15, 1e-14, &err);
    };
    const double den = integrate([](double) { return 1.0; });

    std::map<std::string, double> out;
    out[field::density] = integrate([&](double) { return f.density; }) / den;
    out[field::pressure_static] = integrate([&](double r) { return f.pressure(r); }) / den;
    out[field::temperature_static] = integrate([&](double r) { return f.temperature(r); }) / den;
    out[field::velocity_axial] = integrate([&](double r) { return f.axial_velocity(r); }) / den;
    out[field::velocity_radial] = 0.0;
    out[field::velocity_tangential] = integrate([&](double r) { return f.tangential_velocity(r); }) / den;
    return out;
}

double analytic_mass_flow(const AnalyticField& f, double r_hub, double r_tip, double sector)
{
    // rho * sector * integral (vx + s (r - r_ref)) r dr
    const double c0 = f.vx - f.vx_shear * f.r_ref;
    const double i1 = 0.5 * (r_tip * r_tip - r_hub * r_hub);
    const double i2 = (r_tip * r_tip * r_tip - r_hub * r_hub * r_hub) / 3.0;
    return f.density * sector * (c0 * i1 + f.vx_shear * i2);
}

std::map<std::string, double> brute_force_average(const BandTable& t, Weighting weighting)
{
    if (t.rows() == 0)
        throw Error(Errc::EmptyBand, "oracle", "empty band table");

    const auto& cols = t.columns();
    std::size_t rho_col = cols.size(), vax_col = cols.size();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] == field::density)
            rho_col = c;
        if (cols[c] == field::velocity_axial)
            vax_col = c;
    }
    if (weighting == Weighting::Mass && (rho_col == cols.size() || vax_col == cols.size()))
        throw Error(Errc::MissingField, "oracle", "mass weighting needs Density and VelocityAxial");

    std::map<std::string, double> out;
    for (std::size_t c = BandTable::first_quantity; c < cols.size(); ++c) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t row = 0; row < t.rows(); ++row) {
            double w = t.at(row, BandTable::col_weight);
            if (weighting == Weighting::Mass)
                w = w * t.at(row, rho_col) * t.at(row, vax_col);
            num += w * t.at(row, c);
            den += w;
        }
        if (den == 0.0)
            throw Error(Errc::ZeroTotalWeight, "oracle", "weights sum to zero");
        out[cols[c]] = num / den;
    }
    return out;
}

double brute_force_interpolate(std::span<const double> x, std::span<const double> y, double at)
{
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] == at)
            return y[k];
    }
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (x[k] < at && at < x[k + 1]) {
            const double h = x[k + 1] - x[k];
            return (y[k] * (x[k + 1] - at) + y[k + 1] * (at - x[k])) / h;
        }
    }
    throw Error(Errc::InvalidArgument, "oracle", "query outside the source range");
}

namespace {

bool in_region(double span, SpanRegion region)
{
    switch (region) {
    case SpanRegion::Hub: return span <= 0.1;
    case SpanRegion::Mid: return std::abs(span - 0.5) <= 0.1;
    case SpanRegion::Tip: return span >= 0.9;
    case SpanRegion::All: return true;
    }
    return false;
}

struct PointState {
    double p0, t0, mach, mach_rel;
};

PointState point_state(const AnalyticField& f, double r, double omega, const GasModel& gas)
{
    const double p = f.pressure(r);
    const double t = f.temperature(r);
    const double vx = f.axial_velocity(r);
    const double vt = f.tangential_velocity(r);
    const double speed = std::sqrt(vx * vx + vt * vt);
    const double a = gas.speed_of_sound(t);
    const double wt = vt - omega * r;
    return {gas.total_pressure(p, t, speed), gas.total_temperature(t, speed), speed / a,
            std::sqrt(vx * vx + wt * wt) / a};
}

} // namespace

MachineFixture make_machine_fixture(const MachineFixtureSpec& spec)
{
    const std::size_t n_stages = spec.stage_pi.size();
    if (n_stages == 0 || spec.stage_eta.size() != n_stages)
        throw Error(Errc::InvalidSpec, spec.name, "need one efficiency per stage pressure ratio");
    for (std::size_t k = 0; k < n_stages; ++k) {
        if (!(spec.stage_pi[k] > 1.0) || !(spec.stage_eta[k] > 0.0) || !(spec.stage_eta[k] <= 1.0))
            throw Error(Errc::InvalidSpec, spec.name, "stage pressure ratios must exceed 1 and efficiencies lie in (0, 1]");
    }
    if (spec.n_bands < 2 || (spec.nj - 1) % static_cast<std::size_t>(spec.n_bands - 1) != 0)
        throw Error(Errc::InvalidSpec, spec.name, "n_bands - 1 must divide nj - 1 so bands sit on grid rings");
    if (!(spec.row_length > 0.0) || !(spec.tip_mach > 0.0))
        throw Error(Errc::InvalidSpec, spec.name, "row length and tip Mach must be positive");
    if (spec.p0_offset && !(spec.p0_offset->fraction > -1.0))
        throw Error(Errc::InvalidSpec, spec.name, "total pressure offset must exceed -1");

    const GasModel& gas = spec.gas;
    const double r_mid = 0.5 * (spec.r_hub + spec.r_tip);
    const AnalyticField base =
        field_from_totals(FieldKind::FreeVortex, spec.swirl, spec.vx, spec.inlet_p0, spec.inlet_t0, r_mid, gas);

    // Shaft speed putting the rotor-1 inlet tip at the requested relative Mach.
    const double a_tip = gas.speed_of_sound(base.temperature(spec.r_tip));
    const double vx_tip = base.axial_velocity(spec.r_tip);
    const double w2 = spec.tip_mach * spec.tip_mach * a_tip * a_tip - vx_tip * vx_tip;
    if (!(w2 > 0.0))
        throw Error(Errc::InvalidSpec, spec.name, "tip Mach below the axial Mach number at the tip");
    const double omega = (base.tangential_velocity(spec.r_tip) + std::sqrt(w2)) / spec.r_tip;

    // Cumulative total-pressure and total-temperature scales after each stage.
    std::vector<double> lambda{1.0}, mu{1.0};
    for (std::size_t k = 0; k < n_stages; ++k) {
        lambda.push_back(lambda.back() * spec.stage_pi[k]);
        mu.push_back(mu.back() * temperature_ratio_for(spec.stage_pi[k], spec.stage_eta[k], gas));
    }

    MachineFixture fx;
    fx.shaft_speed = omega;
    fx.n_bands = spec.n_bands;
    fx.design.machine_name = spec.name;
    fx.design.layout = RowLayout{static_cast<int>(n_stages), false, false};
    for (std::size_t k = 0; k < n_stages; ++k)
        fx.design.stages.push_back({static_cast<int>(k + 1), spec.stage_pi[k], spec.stage_eta[k]});

    Base b;
    b.name = "Base";
    const int rows = fx.design.layout.total_rows();
    for (int row = 1; row <= rows; ++row) {
        const RowIdentity id = row_identity(row, fx.design.layout);
        const bool rotor = id.kind == RowKind::Rotor;
        const std::size_t stage = static_cast<std::size_t>(id.stage);
        const AnalyticField f_in = scaled(base, lambda[rotor ? stage - 1 : stage], mu[rotor ? stage - 1 : stage]);
        const AnalyticField f_out = scaled(base, lambda[stage], mu[stage]);

        AnnulusSpec as;
        as.zone_name = "row" + std::to_string(row);
        as.ni = spec.ni;
        as.nj = spec.nj;
        as.nk = spec.nk;
        as.r_hub = spec.r_hub;
        as.r_tip = spec.r_tip;
        as.x_min = spec.row_length * (row - 1);
        as.x_max = spec.row_length * row;
        // Interior planes blend geometrically between inlet and outlet states.
        std::vector<AnalyticField> planes;
        for (std::size_t i = 0; i < spec.ni; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(spec.ni - 1);
            const double l0 = lambda[rotor ? stage - 1 : stage], m0 = mu[rotor ? stage - 1 : stage];
            planes.push_back(i == 0             ? f_in
                             : i == spec.ni - 1 ? f_out
                                                : scaled(base, l0 * std::pow(lambda[stage] / l0, s),
                                                         m0 * std::pow(mu[stage] / m0, s)));
        }
        b.zones.push_back(apply_field_by_plane(gen_annulus(as), planes, gas));

        for (Side side : {Side::Inlet, Side::Outlet}) {
            fx.stations.push_back({as.zone_name, row, side, side == Side::Inlet ? 0 : spec.ni - 1});
            const AnalyticField& f = side == Side::Inlet ? f_in : f_out;
            const double w = rotor ? omega : 0.0;
            S2RadialProfile p0{row, side, field::pressure_total, {}};
            S2RadialProfile t0{row, side, field::temperature_total, {}};
            S2RadialProfile ma{row, side, field::mach_absolute, {}};
            S2RadialProfile mr{row, side, field::mach_relative, {}};
            for (int band = 0; band < spec.n_bands; ++band) {
                const double span = static_cast<double>(band) / static_cast<double>(spec.n_bands - 1);
                const double r = spec.r_hub + span * (spec.r_tip - spec.r_hub);
                const PointState ps = point_state(f, r, w, gas);
                double p0v = ps.p0;
                if (spec.p0_offset && row == 1 && side == Side::Outlet && in_region(span, spec.p0_offset->region))
                    p0v /= 1.0 + spec.p0_offset->fraction;
                p0.samples.push_back({span, p0v});
                t0.samples.push_back({span, ps.t0});
                ma.samples.push_back({span, ps.mach});
                mr.samples.push_back({span, ps.mach_rel});
            }
            fx.design.station_profiles.push_back(std::move(p0));
            fx.design.station_profiles.push_back(std::move(t0));
            fx.design.station_profiles.push_back(std::move(ma));
            if (rotor)
                fx.design.station_profiles.push_back(std::move(mr));
        }
    }
    fx.cfd.name = spec.name;
    fx.cfd.bases.push_back(std::move(b));
    return fx;
}

} // namespace calib::synth

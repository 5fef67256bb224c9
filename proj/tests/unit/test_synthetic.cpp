#include <doctest.h>

#include "calib/error.hpp"
#include "calib/performance.hpp"
#include "calib/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace calib;
using namespace calib::synth;

namespace {

Errc code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::IoFailure;
}

} // namespace

TEST_CASE("2x2x2 quarter sector corners")
{
    AnnulusSpec s;
    s.sector = std::numbers::pi / 2;
    const Zone z = gen_annulus(s);
    CHECK(z.vertex_count() == 8);
    CHECK(z.coords[0][z.index(1, 0, 0)] == 0.1);
    CHECK(z.coords[1][z.index(0, 0, 0)] == 0.3);
    CHECK(z.coords[2][z.index(0, 0, 0)] == 0.0);
    CHECK(z.coords[1][z.index(0, 1, 0)] == 0.4);
    CHECK(std::abs(z.coords[1][z.index(0, 1, 1)]) < 1e-16);
    CHECK(z.coords[2][z.index(0, 1, 1)] == 0.4);
    CHECK(z.annotations.empty());
}

TEST_CASE("17x9x33 full wheel closes its seam")
{
    AnnulusSpec s;
    s.ni = 17;
    s.nj = 9;
    s.nk = 33;
    const Zone z = gen_annulus(s);
    CHECK(z.vertex_count() == 17u * 9u * 33u);
    const CylindricalView v = cylindrical_view(z);
    for (std::size_t j = 0; j < 9; ++j) {
        const double a = v.theta[z.index(0, j, 0)];
        const double b = v.theta[z.index(0, j, 32)];
        CHECK(std::abs(std::remainder(a - b, 2.0 * std::numbers::pi)) < 1e-12);
    }
    REQUIRE(z.annotations.size() == 1);
    CHECK(z.annotations[0].header.rfind("PERIODIC_K", 0) == 0);
}

TEST_CASE("invalid annulus specs")
{
    AnnulusSpec s;
    s.r_hub = 0.4;
    s.r_tip = 0.4;
    CHECK(code_of([&] { gen_annulus(s); }) == Errc::InvalidSpec);
    s = AnnulusSpec{};
    s.nk = 1;
    CHECK(code_of([&] { gen_annulus(s); }) == Errc::InvalidSpec);
    s = AnnulusSpec{};
    s.sector = 7.0;
    CHECK(code_of([&] { gen_annulus(s); }) == Errc::InvalidSpec);
    s = AnnulusSpec{};
    s.r_hub = 0.0;
    CHECK(code_of([&] { gen_annulus(s); }) == Errc::InvalidSpec);
}

TEST_CASE("uniform state is identical at every vertex")
{
    AnnulusSpec s;
    s.nj = 5;
    s.nk = 9;
    const Zone z = apply_field(gen_annulus(s), AnalyticField{}, GasModel{});
    for (std::size_t q = 0; q < z.vertex_count(); ++q) {
        REQUIRE(z.solutions.at(field::density).values[q] == 1.2);
        REQUIRE(z.solutions.at(field::pressure_static).values[q] == 101325.0);
        REQUIRE(z.solutions.at(field::temperature_static).values[q] == 288.15);
        REQUIRE(z.solutions.at(field::velocity_x).values[q] == 150.0);
        REQUIRE(z.solutions.at(field::velocity_y).values[q] == 0.0);
    }
}

TEST_CASE("free vortex swirl and radial equilibrium")
{
    AnalyticField f;
    f.kind = FieldKind::FreeVortex;
    f.swirl = 60.0;
    CHECK(f.tangential_velocity(0.3) == doctest::Approx(200.0).epsilon(1e-15));
    CHECK(f.tangential_velocity(0.4) == doctest::Approx(150.0).epsilon(1e-15));
    // dp/dr = rho V^2 / r
    const double r = 0.33, h = 1e-6;
    const double dpdr = (f.pressure(r + h) - f.pressure(r - h)) / (2 * h);
    CHECK(dpdr == doctest::Approx(f.density * std::pow(f.tangential_velocity(r), 2) / r).epsilon(1e-6));

    AnnulusSpec s;
    s.nj = 3;
    s.nk = 5;
    s.sector = 1.0;
    const Zone z = apply_field(gen_annulus(s), f, GasModel{});
    const CylindricalView v = cylindrical_view(z);
    for (std::size_t q = 0; q < z.vertex_count(); ++q) {
        const double vy = z.solutions.at(field::velocity_y).values[q];
        const double vz = z.solutions.at(field::velocity_z).values[q];
        REQUIRE(std::hypot(vy, vz) == doctest::Approx(60.0 / v.r[q]).epsilon(1e-13));
        REQUIRE(-vy * std::sin(v.theta[q]) + vz * std::cos(v.theta[q]) > 0.0);
    }
}

TEST_CASE("swirl beyond the critical constant is non-physical")
{
    AnalyticField f;
    f.kind = FieldKind::FreeVortex;
    const double kc = critical_free_vortex_swirl(f, 0.3);
    CHECK(f.pressure_ref + 0.5 * f.density * kc * kc * (1 / (f.r_ref * f.r_ref) - 1 / 0.09) ==
          doctest::Approx(0.0).epsilon(1e-9));
    AnnulusSpec s;
    s.nj = 5;
    s.nk = 5;
    f.swirl = 0.99 * kc;
    CHECK_NOTHROW(apply_field(gen_annulus(s), f, GasModel{}));
    f.swirl = 1.01 * kc;
    CHECK(code_of([&] { apply_field(gen_annulus(s), f, GasModel{}); }) == Errc::NonPhysicalState);
}

TEST_CASE("analytic band averages")
{
    const RadialBand band{0.35, 0.03};
    AnalyticField u;
    CHECK(analytic_band_average(u, band, Weighting::Area).at(field::pressure_static) ==
          doctest::Approx(101325.0).epsilon(1e-14));

    AnalyticField fv;
    fv.kind = FieldKind::FreeVortex;
    fv.swirl = 60.0;
    CHECK(std::abs(analytic_band_average(fv, band, Weighting::Area).at(field::velocity_tangential) - 60.0 / 0.35) <=
          1e-12 * 60.0 / 0.35);

    AnalyticField sb;
    sb.kind = FieldKind::SolidBody;
    sb.swirl = 500.0;
    const double a = 0.32, b = 0.38;
    const double centroid = 2.0 / 3.0 * (b * b * b - a * a * a) / (b * b - a * a);
    CHECK(std::abs(analytic_band_average(sb, band, Weighting::Area).at(field::velocity_tangential) - 500.0 * centroid) <=
          1e-12 * 500.0 * centroid);

    // constant density and axial velocity: mass weighting equals area weighting
    CHECK(analytic_band_average(fv, band, Weighting::Mass).at(field::pressure_static) ==
          doctest::Approx(analytic_band_average(fv, band, Weighting::Area).at(field::pressure_static)).epsilon(1e-14));
}

TEST_CASE("analytic mass flow")
{
    AnalyticField f;
    f.vx = 100.0;
    CHECK(analytic_mass_flow(f, 0.3, 0.4, 2 * std::numbers::pi) ==
          doctest::Approx(1.2 * 100.0 * std::numbers::pi * 0.07).epsilon(1e-15));
}

TEST_CASE("band averages converge to the analytic band average")
{
    AnalyticField f;
    f.kind = FieldKind::FreeVortex;
    f.swirl = 60.0;
    f.vx_shear = 800.0;
    const char* qs[] = {field::pressure_static, field::temperature_static, field::velocity_tangential,
                        field::velocity_axial};
    double err[3][4];
    const std::size_t nj[3] = {9, 17, 33};
    for (int g = 0; g < 3; ++g) {
        AnnulusSpec s;
        s.zone_name = "z";
        s.ni = 2;
        s.nj = nj[g];
        s.nk = 17;
        const Zone z = apply_field(gen_annulus(s), f, GasModel{});
        ExtractionOptions o;
        o.band_fractions = {0.5};
        const StationProfile p = extract_profile(z, StationSpec{"z", 1, Side::Inlet, PlaneIndex{}}, o);
        const RadialBand band{p.band_radii[0], p.band_epsilons[0]};
        for (int q = 0; q < 4; ++q) {
            const Weighting w = weighting_for(qs[q], WeightingPolicy::Default);
            err[g][q] = std::abs(p.quantities.at(qs[q])[0] - analytic_band_average(f, band, w).at(qs[q]));
        }
    }
    for (int q = 0; q < 4; ++q) {
        INFO(qs[q]);
        CHECK(std::log2(err[0][q] / err[1][q]) >= 1.9);
        CHECK(std::log2(err[1][q] / err[2][q]) >= 1.9);
    }
}

TEST_CASE("brute-force average oracle")
{
    BandTable empty(RadialBand{1, 1}, {"Q"});
    CHECK(code_of([&] { brute_force_average(empty, Weighting::Area); }) == Errc::EmptyBand);
    BandTable t(RadialBand{1, 1}, {"Q"});
    const double row1[] = {0, 1, 0, 0.25, 5.0};
    const double row2[] = {0, 1, 0, 0.75, 5.0};
    t.add_row(1, row1);
    t.add_row(2, row2);
    CHECK(brute_force_average(t, Weighting::Area).at("Q") == 5.0);
    CHECK(code_of([&] { brute_force_average(t, Weighting::Mass); }) == Errc::MissingField);
}

TEST_CASE("oracle equivalence on randomized cases")
{
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> nj(3, 12), nk(3, 20);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int c = 0; c < 200; ++c) {
        AnnulusSpec s;
        s.zone_name = "z";
        s.ni = 2;
        s.nj = nj(rng);
        s.nk = nk(rng);
        s.r_hub = 0.1 + 0.5 * u(rng);
        s.r_tip = s.r_hub + 0.05 + 0.3 * u(rng);
        s.sector = u(rng) < 0.5 ? 2 * std::numbers::pi : 0.1 + 6.0 * u(rng);
        AnalyticField f;
        f.kind = static_cast<FieldKind>(c % 3);
        f.r_ref = 0.5 * (s.r_hub + s.r_tip);
        f.swirl = f.kind == FieldKind::FreeVortex ? 20.0 * u(rng) : 100.0 * u(rng);
        f.vx_shear = 200.0 * (u(rng) - 0.5);
        const Zone z = apply_field(gen_annulus(s), f, GasModel{});
        const StationSample smp = sample_station(z, StationSpec{"z", 1, Side::Inlet, PlaneIndex{}});
        const RadialBand band{s.r_hub + u(rng) * (s.r_tip - s.r_hub), (0.05 + u(rng)) * (s.r_tip - s.r_hub)};
        const Weighting w = u(rng) < 0.5 ? Weighting::Area : Weighting::Mass;
        BandTable t;
        try {
            t = filter_radial_band(smp, band);
        } catch (const Error&) {
            continue;
        }
        const auto a = circumferential_average(t, w);
        const auto b = brute_force_average(t, w);
        for (const auto& [name, v] : b)
            REQUIRE(std::abs(a.at(name) - v) <= 1e-12 * std::max(std::abs(v), 1.0));
    }
}

TEST_CASE("scaled fields keep Mach and scale totals")
{
    AnalyticField f;
    f.kind = FieldKind::FreeVortex;
    f.swirl = 40.0;
    const GasModel gas;
    const AnalyticField g = scaled(f, 1.37, 1.1);
    const double r = 0.37;
    auto state = [&](const AnalyticField& h) {
        const double v = std::hypot(h.axial_velocity(r), h.tangential_velocity(r));
        const double t = h.temperature(r);
        return std::array<double, 3>{gas.total_pressure(h.pressure(r), t, v), gas.total_temperature(t, v),
                                     v / gas.speed_of_sound(t)};
    };
    const auto a = state(f), b = state(g);
    CHECK(b[0] / a[0] == doctest::Approx(1.37).epsilon(1e-14));
    CHECK(b[1] / a[1] == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(b[2] == doctest::Approx(a[2]).epsilon(1e-14));
}

TEST_CASE("field from totals")
{
    const GasModel gas;
    const AnalyticField f = field_from_totals(FieldKind::FreeVortex, 40.0, 150.0, 101325.0, 288.15, 0.35, gas);
    const double v = std::hypot(150.0, 40.0 / 0.35);
    CHECK(gas.total_temperature(f.temperature(0.35), v) == doctest::Approx(288.15).epsilon(1e-14));
    CHECK(gas.total_pressure(f.pressure(0.35), f.temperature(0.35), v) == doctest::Approx(101325.0).epsilon(1e-14));
    CHECK(f.density == doctest::Approx(f.pressure_ref / (gas.r_gas * f.temperature_ref)).epsilon(1e-15));
}

TEST_CASE("machine fixture structure")
{
    MachineFixtureSpec spec;
    const MachineFixture fx = make_machine_fixture(spec);
    CHECK(fx.design.layout == RowLayout{2, false, false});
    REQUIRE(fx.cfd.bases.size() == 1);
    CHECK(fx.cfd.bases[0].zones.size() == 4);
    CHECK(fx.stations.size() == 8);
    CHECK(fx.design.station_profiles.size() == 4 * 2 * 3 + 2 * 2);
    CHECK(fx.design.stages.size() == 2);
    CHECK(fx.shaft_speed > 0.0);
    CHECK_NOTHROW(validate(fx.cfd));

    // row-1 outlet plane carries the stage-1 total pressure rise
    const StationSpec in{"row1", 1, Side::Inlet, PlaneIndex{0, PlaneDirection::I}};
    const StationSpec out{"row2", 2, Side::Outlet, PlaneIndex{spec.ni - 1, PlaneDirection::I}};
    const Zone& z1 = *fx.cfd.find_zone("row1");
    const Zone& z2 = *fx.cfd.find_zone("row2");
    const PlaneState a = mass_averaged_plane_state(z1, in, spec.gas);
    const PlaneState b = mass_averaged_plane_state(z2, out, spec.gas);
    CHECK(b.p0 / a.p0 == doctest::Approx(1.37).epsilon(1e-13));
    CHECK(adiabatic_efficiency(b.p0 / a.p0, b.t0 / a.t0, spec.gas) == doctest::Approx(0.9424).epsilon(1e-11));
    // Mach-preserving scaling multiplies the mass flux by pi / sqrt(tau)
    CHECK(b.mdot / a.mdot == doctest::Approx(1.37 / std::sqrt(b.t0 / a.t0)).epsilon(1e-12));
}

TEST_CASE("machine fixture injections")
{
    MachineFixtureSpec spec;
    spec.p0_offset = P0Offset{0.02, SpanRegion::Tip};
    const MachineFixture fx = make_machine_fixture(spec);
    const MachineFixture base = make_machine_fixture(MachineFixtureSpec{});
    for (std::size_t k = 0; k < fx.design.station_profiles.size(); ++k) {
        const auto& p = fx.design.station_profiles[k];
        const auto& q = base.design.station_profiles[k];
        for (std::size_t s = 0; s < p.samples.size(); ++s) {
            const bool hit = p.row_index == 1 && p.side == Side::Outlet && p.quantity == field::pressure_total &&
                             p.samples[s].span >= 0.9;
            if (hit)
                REQUIRE(p.samples[s].value * 1.02 == doctest::Approx(q.samples[s].value).epsilon(1e-15));
            else
                REQUIRE(p.samples[s].value == q.samples[s].value);
        }
    }

    MachineFixtureSpec fast;
    fast.tip_mach = 1.35;
    CHECK(make_machine_fixture(fast).shaft_speed > base.shaft_speed);

    MachineFixtureSpec bad;
    bad.n_bands = 7; // 20 radial intervals do not split into 6 bands
    CHECK(code_of([&] { make_machine_fixture(bad); }) == Errc::InvalidSpec);
    bad = MachineFixtureSpec{};
    bad.stage_eta = {0.9};
    CHECK(code_of([&] { make_machine_fixture(bad); }) == Errc::InvalidSpec);
    bad = MachineFixtureSpec{};
    bad.tip_mach = 0.2;
    CHECK(code_of([&] { make_machine_fixture(bad); }) == Errc::InvalidSpec);
}

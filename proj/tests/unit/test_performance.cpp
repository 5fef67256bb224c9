#include <doctest.h>

#include "calib/error.hpp"
#include "calib/performance.hpp"
#include "calib/synthetic.hpp"

#include <cmath>
#include <numbers>

using namespace calib;

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

Zone plane_zone(std::size_t nj, std::size_t nk, const synth::AnalyticField& f)
{
    synth::AnnulusSpec s;
    s.zone_name = "z";
    s.ni = 2;
    s.nj = nj;
    s.nk = nk;
    return synth::apply_field(synth::gen_annulus(s), f, GasModel{});
}

const StationSpec inlet{"z", 1, Side::Inlet, PlaneIndex{0, PlaneDirection::I}};

} // namespace

TEST_CASE("annulus mass flow 26.389")
{
    synth::AnalyticField f;
    f.vx = 100.0;
    const PlaneState s = mass_averaged_plane_state(plane_zone(9, 33, f), inlet, GasModel{});
    const double exact = 1.2 * 100.0 * std::numbers::pi * (0.4 * 0.4 - 0.3 * 0.3);
    CHECK(std::abs(exact - 26.389) < 5e-4);
    CHECK(std::abs(s.mdot - exact) <= 0.005 * exact);
    CHECK(s.mdot == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("mass flow is homogeneous in density and velocity")
{
    synth::AnalyticField f;
    f.vx_shear = 400.0;
    const double m1 = mass_averaged_plane_state(plane_zone(9, 17, f), inlet, GasModel{}).mdot;
    synth::AnalyticField g = f;
    g.density *= 3.0;
    CHECK(mass_averaged_plane_state(plane_zone(9, 17, g), inlet, GasModel{}).mdot ==
          doctest::Approx(3.0 * m1).epsilon(1e-13));
    g = f;
    g.vx *= 2.0;
    g.vx_shear *= 2.0;
    CHECK(mass_averaged_plane_state(plane_zone(9, 17, g), inlet, GasModel{}).mdot ==
          doctest::Approx(2.0 * m1).epsilon(1e-13));
}

TEST_CASE("mass flow converges at second order")
{
    synth::AnalyticField f;
    f.vx_shear = 1500.0;
    const double exact = synth::analytic_mass_flow(f, 0.3, 0.4, 2.0 * std::numbers::pi);
    double err[3];
    const std::size_t nj[3] = {9, 17, 33};
    for (int k = 0; k < 3; ++k)
        err[k] = std::abs(mass_averaged_plane_state(plane_zone(nj[k], 9, f), inlet, GasModel{}).mdot - exact);
    CHECK(std::log2(err[0] / err[1]) >= 1.9);
    CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("zero velocity plane")
{
    synth::AnalyticField f;
    f.vx = 0.0;
    CHECK(code_of([&] { mass_averaged_plane_state(plane_zone(5, 9, f), inlet, GasModel{}); }) ==
          Errc::ZeroTotalWeight);
}

TEST_CASE("plane totals of a uniform flow")
{
    synth::AnalyticField f;
    const GasModel gas;
    const PlaneState s = mass_averaged_plane_state(plane_zone(5, 9, f), inlet, gas);
    CHECK(s.t0 == doctest::Approx(gas.total_temperature(288.15, 150.0)).epsilon(1e-13));
    CHECK(s.p0 == doctest::Approx(gas.total_pressure(101325.0, 288.15, 150.0)).epsilon(1e-13));
}

TEST_CASE("stage pressure ratio")
{
    CHECK(stage_pressure_ratio(138900.0, 101325.0) == doctest::Approx(1.3708).epsilon(1e-4));
    CHECK(stage_pressure_ratio(101325.0, 101325.0) == 1.0);
    CHECK(code_of([] { stage_pressure_ratio(0.0, 101325.0); }) == Errc::NonPositivePressure);
    CHECK(code_of([] { stage_pressure_ratio(1.0, -1.0); }) == Errc::NonPositivePressure);
}

TEST_CASE("adiabatic efficiency")
{
    const GasModel gas;
    CHECK(adiabatic_efficiency(std::pow(1.1, 3.5), 1.1, gas) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(adiabatic_efficiency(std::pow(1.1, 3.5), 1.1, gas) - 1.0) <= 1e-12);
    const double tau = 1.0 + (std::pow(1.349, 1.0 / 3.5) - 1.0) / 0.932;
    CHECK(std::abs(adiabatic_efficiency(1.349, tau, gas) - 0.932) <= 1e-12);
    CHECK(code_of([&] { adiabatic_efficiency(1.0, 1.0, gas); }) == Errc::DegenerateTemperatureRatio);
}

TEST_CASE("isentropic closure and round trips")
{
    const GasModel gas;
    for (int n = 1; n <= 100; ++n) {
        const double tau = 1.0 + 0.5 * n / 100.0;
        REQUIRE(std::abs(adiabatic_efficiency(std::pow(tau, gas.gamma / (gas.gamma - 1.0)), tau, gas) - 1.0) <= 1e-12);
        const double eta = 0.5 + 0.5 * (n - 1) / 99.0;
        REQUIRE(std::abs(adiabatic_efficiency(pressure_ratio_for(eta, tau, gas), tau, gas) - eta) <= 1e-12);
        const double pi = 1.05 + 0.02 * n;
        REQUIRE(std::abs(adiabatic_efficiency(pi, temperature_ratio_for(pi, eta, gas), gas) - eta) <= 1e-12);
    }
}

TEST_CASE("efficiency increases with pressure ratio at fixed temperature ratio")
{
    const GasModel gas;
    double last = -1.0;
    for (int n = 0; n < 50; ++n) {
        const double eta = adiabatic_efficiency(1.1 + 0.01 * n, 1.12, gas);
        CHECK(eta > last);
        last = eta;
    }
}

TEST_CASE("two-stage table from prescribed states")
{
    const GasModel gas;
    const RowLayout layout{2, false, false};
    const double tau1 = temperature_ratio_for(1.37, 0.9424, gas);
    const double tau2 = temperature_ratio_for(1.30, 0.9388, gas);
    RowStates st;
    st[{1, Side::Inlet}] = {101325.0, 288.15, 20.0};
    st[{1, Side::Outlet}] = {101325.0 * 1.37, 288.15 * tau1, 20.0};
    st[{2, Side::Inlet}] = st[{1, Side::Outlet}];
    st[{2, Side::Outlet}] = st[{1, Side::Outlet}];
    st[{3, Side::Inlet}] = st[{2, Side::Outlet}];
    st[{3, Side::Outlet}] = {101325.0 * 1.37 * 1.30, 288.15 * tau1 * tau2, 20.0};
    st[{4, Side::Inlet}] = st[{3, Side::Outlet}];
    st[{4, Side::Outlet}] = st[{3, Side::Outlet}];

    const StageTable t = stage_table(st, layout, gas);
    REQUIRE(t.stages.size() == 2);
    CHECK(t.stages[0].pi == doctest::Approx(1.37).epsilon(1e-14));
    CHECK(t.stages[1].pi == doctest::Approx(1.30).epsilon(1e-14));
    CHECK(*t.stages[0].eta_ad == doctest::Approx(0.9424).epsilon(1e-12));
    CHECK(*t.stages[1].eta_ad == doctest::Approx(0.9388).epsilon(1e-12));
    CHECK(std::abs(t.overall.pi - 1.781) <= 1e-12);
    CHECK(std::abs(t.overall.pi - st[{4, Side::Outlet}].p0 / st[{1, Side::Inlet}].p0) <= 1e-12);
    CHECK(t.overall.tau == doctest::Approx(tau1 * tau2).epsilon(1e-14));
    CHECK(t.overall.eta_ad);

    RowStates missing = st;
    missing.erase({4, Side::Outlet});
    try {
        stage_table(missing, layout, gas);
        FAIL("expected MissingStation");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingStation);
        CHECK(e.path() == "stage 2");
    }
}

TEST_CASE("single isentropic stage")
{
    const GasModel gas;
    RowStates st;
    st[{1, Side::Inlet}] = {100000.0, 300.0, 1.0};
    st[{2, Side::Outlet}] = {100000.0 * std::pow(1.2, 3.5), 360.0, 1.0};
    const StageTable t = stage_table(st, RowLayout{1, false, false}, gas);
    CHECK(std::abs(*t.stages[0].eta_ad - 1.0) <= 1e-12);
}

TEST_CASE("non-compressive stage has no efficiency")
{
    RowStates st;
    st[{1, Side::Inlet}] = {100000.0, 300.0, 1.0};
    st[{2, Side::Outlet}] = {99000.0, 300.0, 1.0};
    const StageTable t = stage_table(st, RowLayout{1, false, false}, GasModel{});
    CHECK_FALSE(t.stages[0].eta_ad);
}

TEST_CASE("surge margin")
{
    const OperatingPoint d{1.781, 20.0, 1000.0, OperatingLabel::Design};
    const OperatingPoint s{1.781 * 1.10, 20.0 * 0.97, 1000.0, OperatingLabel::NearSurge};
    CHECK(surge_margin(d, s) == doctest::Approx(1.10 / 0.97 - 1.0).epsilon(1e-14));
    CHECK(std::abs(surge_margin(d, s) - 0.13402) < 1e-5);
    CHECK(surge_margin(d, d) == 0.0);
    OperatingPoint other = s;
    other.speed = 1100.0;
    CHECK(code_of([&] { surge_margin(d, other); }) == Errc::SpeedMismatch);
    other.speed = 1000.5;
    CHECK_NOTHROW(surge_margin(d, other));
    other.mdot = 0.0;
    CHECK(code_of([&] { surge_margin(d, other); }) == Errc::InvalidArgument);
}

TEST_CASE("gas model")
{
    GasModel g;
    CHECK(g.cp() == doctest::Approx(1004.71).epsilon(1e-12));
    CHECK(g.speed_of_sound(250.0) == doctest::Approx(std::sqrt(1.4 * 287.06 * 250.0)).epsilon(1e-15));
    g.r_gas = 287.0;
    CHECK(g.speed_of_sound(250.0) == doctest::Approx(316.938).epsilon(1e-5));
    g.gamma = 1.0;
    CHECK_THROWS_AS(g.validate(), Error);
}

/*
  Synthetic annulus grids with analytic flow fields, plus brute-force
  reference implementations used as test oracles.

  Grid: x uniform in [x_min, x_max] (i), r uniform in [r_hub, r_tip] (j),
  theta uniform in [0, sector] (k). A full wheel (sector = 2 pi) repeats the
  seam: the first and last k-planes coincide, and the station area shares
  give each seam row half weight.

  Fields (constant density rho, machine axis X, no radial velocity):
      uniform      V_theta = 0                p = p_ref
      free_vortex  V_theta = K / r            p = p_ref + rho K^2 / 2 (1/r_ref^2 - 1/r^2)
      solid_body   V_theta = w_f r            p = p_ref + rho w_f^2 (r^2 - r_ref^2) / 2
  with V_x = vx + vx_shear (r - r_ref) and T = T_ref p / p_ref.
*/
#pragma once

#include "calib/dataset.hpp"
#include "calib/extraction.hpp"
#include "calib/gas.hpp"
#include "calib/s2_design.hpp"

#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>

namespace calib::synth {

struct AnnulusSpec {
    std::string zone_name = "annulus";
    std::size_t ni = 2, nj = 2, nk = 2;
    double r_hub = 0.3;
    double r_tip = 0.4;
    double x_min = 0.0;
    double x_max = 0.1;
    double sector = 2.0 * std::numbers::pi; // radians, (0, 2 pi]

    bool full_wheel() const { return sector == 2.0 * std::numbers::pi; }
    /// Throws InvalidSpec.
    void validate() const;
};

/// Structured annulus zone with Cartesian coordinates. Full wheels carry a
/// "PERIODIC_K" annotation recording the duplicated seam.
Zone gen_annulus(const AnnulusSpec& spec);

enum class FieldKind { Uniform, FreeVortex, SolidBody };

struct AnalyticField {
    FieldKind kind = FieldKind::Uniform;
    double density = 1.2;           // kg/m^3
    double pressure_ref = 101325.0; // Pa, static pressure at r_ref
    double temperature_ref = 288.15; // K, static temperature at r_ref
    double r_ref = 0.35;            // m
    double vx = 150.0;              // m/s at r_ref
    double vx_shear = 0.0;          // dVx/dr, 1/s
    double swirl = 0.0;             // K (m^2/s) for free vortex, w_f (rad/s) for solid body

    double pressure(double r) const;
    double temperature(double r) const;
    double axial_velocity(double r) const;
    double tangential_velocity(double r) const;
};

/// Fills Density, PressureStatic, TemperatureStatic, VelocityX/Y/Z.
/// Throws NonPhysicalState if any vertex gets p <= 0 or T <= 0.
Zone apply_field(Zone z, const AnalyticField& f, const GasModel& gas);

/// As apply_field, with a separate field for every i-plane.
Zone apply_field_by_plane(Zone z, std::span<const AnalyticField> plane_fields, const GasModel& gas);

/// Field whose state at r_ref has the given total pressure and temperature.
AnalyticField field_from_totals(FieldKind kind, double swirl, double vx, double p0, double t0, double r_ref,
                                const GasModel& gas);

/// Same field with pressure scaled by `pressure_scale` and temperature by
/// `temperature_scale`; velocities scale with sqrt(temperature_scale) so
/// Mach numbers are preserved and total pressure / total temperature scale
/// by the same factors.
AnalyticField scaled(const AnalyticField& f, double pressure_scale, double temperature_scale);

/// Swirl constant K at which the free-vortex hub static pressure reaches 0.
double critical_free_vortex_swirl(const AnalyticField& f, double r_hub);

/// Exact average over the band annulus R - eps < r < R + eps, weighting
/// r dr (area) or rho V_x r dr (mass), by adaptive Gauss-Kronrod quadrature.
std::map<std::string, double> analytic_band_average(const AnalyticField& f, const RadialBand& band, Weighting weighting);

/// Closed-form mass flow through the annulus sector [r_hub, r_tip] x sector.
double analytic_mass_flow(const AnalyticField& f, double r_hub, double r_tip, double sector);

/// Naive re-implementation of circumferential_average.
std::map<std::string, double> brute_force_average(const BandTable& t, Weighting weighting);

/// Segment scan with barycentric weights; independent of interpolate_linear.
double brute_force_interpolate(std::span<const double> x, std::span<const double> y, double at);

enum class SpanRegion { Hub, Mid, Tip, All };

/// Design total pressure lowered so that (cfd - s2) / s2 = fraction over
/// the region, at the first rotor outlet.
struct P0Offset {
    double fraction = 0.0;
    SpanRegion region = SpanRegion::Tip;
};

/// Multi-stage machine (no IGV/OGV) built from one free-vortex field. Each
/// blade row is one annulus zone; its inlet is i-plane 0 and its outlet the
/// last i-plane. Rotors raise total pressure and temperature according to
/// the stage pressure ratio and efficiency; stators carry the rotor exit
/// state. The S2 design is sampled from the same analytic state, so an
/// unperturbed fixture compares exactly.
struct MachineFixtureSpec {
    std::string name = "synth";
    std::vector<double> stage_pi{1.37, 1.30};
    std::vector<double> stage_eta{0.9424, 0.9388};
    std::size_t ni = 5, nj = 21, nk = 33;
    double r_hub = 0.3;
    double r_tip = 0.4;
    double row_length = 0.05;
    double swirl = 40.0;      // free-vortex K, m^2/s
    double vx = 150.0;        // m/s
    double inlet_p0 = 101325.0;
    double inlet_t0 = 288.15;
    double tip_mach = 1.1;    // rotor-1 inlet tip relative Mach, sets the shaft speed
    int n_bands = 11;
    std::optional<P0Offset> p0_offset;
    GasModel gas;
};

struct FixtureStation {
    std::string zone;
    int row = 0;
    Side side = Side::Inlet;
    std::size_t plane = 0;
};

struct MachineFixture {
    Dataset cfd;
    S2DesignCase design;
    double shaft_speed = 0.0; // rad/s
    int n_bands = 0;
    std::vector<FixtureStation> stations;
};

MachineFixture make_machine_fixture(const MachineFixtureSpec& spec);

} // namespace calib::synth

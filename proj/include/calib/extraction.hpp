/*
  Station extraction: reduce a structured zone to spanwise profiles.

    1. select the grid points of an inlet/outlet station plane
    2. keep the points of a constant-radius band  R - eps < r < R + eps
    3. collect them into a 2D table (one row per point)
    4. average circumferentially (area or mass weighted)
    5. place the band on the span coordinate (0 = hub, 1 = tip)

  Velocities are averaged in cylindrical components (axial, radial,
  tangential). Averaging Cartesian transverse components would cancel swirl
  on a full wheel.
*/
#pragma once

#include "calib/dataset.hpp"
#include "calib/gas.hpp"
#include "calib/s2_design.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace calib {

namespace field {
inline constexpr const char* velocity_axial = "VelocityAxial";
inline constexpr const char* velocity_radial = "VelocityRadial";
inline constexpr const char* velocity_tangential = "VelocityTangential";
} // namespace field

enum class PlaneDirection { I, J, K };

struct PlaneIndex {
    std::size_t index = 0;
    PlaneDirection direction = PlaneDirection::I;
};

/// Points with |x_axial - x| <= tolerance.
struct AxialWindow {
    double x = 0.0;
    double tolerance = 0.0;
};

struct StationSpec {
    std::string zone_name;
    int row_index = 0; // machine-order blade row the station belongs to
    Side side = Side::Inlet;
    std::variant<PlaneIndex, AxialWindow> selector = PlaneIndex{};

    /// "row_<row>_<side>"
    std::string label() const;
};

struct RadialBand {
    double center = 0.0;  // R, meters
    double epsilon = 0.0; // half width, meters

    bool contains(double r) const { return center - epsilon < r && r < center + epsilon; }
};

enum class Weighting { Area, Mass };

/// Points of one station with their geometry, nodal area shares and every
/// quantity available for averaging.
struct StationSample {
    std::vector<std::size_t> indices; // linear zone indices, ascending
    std::vector<double> x_axial;
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<double> area; // nodal area share, m^2
    std::map<std::string, std::vector<double>> quantities;

    std::size_t size() const { return indices.size(); }
};

/// Row-major 2D table: fixed columns x_axial, r, theta, weight followed by
/// one column per quantity. The weight column holds the nodal area share.
class BandTable {
public:
    static constexpr std::size_t col_x = 0;
    static constexpr std::size_t col_r = 1;
    static constexpr std::size_t col_theta = 2;
    static constexpr std::size_t col_weight = 3;
    static constexpr std::size_t first_quantity = 4;

    BandTable() = default;
    BandTable(RadialBand band, std::vector<std::string> quantity_names);

    const RadialBand& band() const { return band_; }
    std::size_t rows() const { return point_index_.size(); }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    std::vector<std::string> quantity_names() const;
    /// Column position of `name`; nullopt when absent.
    std::optional<std::size_t> column(const std::string& name) const;

    double at(std::size_t row, std::size_t col) const { return data_[row * columns_.size() + col]; }
    double& at(std::size_t row, std::size_t col) { return data_[row * columns_.size() + col]; }
    std::size_t point_index(std::size_t row) const { return point_index_[row]; }

    void add_row(std::size_t point_index, std::span<const double> values);

private:
    RadialBand band_{};
    std::vector<std::string> columns_;
    std::vector<std::size_t> point_index_;
    std::vector<double> data_;
};

std::vector<std::size_t> select_station_points(const Zone& z, const StationSpec& spec, Axis axis = Axis::X);

/// Nodal area shares of the selected points: each quadrilateral of the
/// station plane whose four corners are selected contributes r * A / 4 to
/// each corner, with A measured in (r, theta). Uniform grids reduce to the
/// trapezoidal rule in r and theta; a closed full-wheel seam gets half
/// shares on each of its coincident rows.
std::vector<double> station_area_shares(const Zone& z, const CylindricalView& view,
                                        std::span<const std::size_t> indices,
                                        PlaneDirection normal = PlaneDirection::I);

/// Selection, geometry, area shares and quantity columns for one station.
/// Adds VelocityAxial / VelocityRadial / VelocityTangential when the three
/// Cartesian velocity fields are present.
StationSample sample_station(const Zone& z, const StationSpec& spec, Axis axis = Axis::X);

/// Points of the sample strictly inside the band. With no quantity list
/// every quantity of the sample is copied.
BandTable filter_radial_band(const StationSample& s, const RadialBand& band,
                             const std::vector<std::string>& quantities = {});

/// Weighted mean of every quantity column: sum(w q) / sum(w). Mass
/// weighting multiplies the area share by Density * VelocityAxial. Rows are
/// summed in ascending point index order.
std::map<std::string, double> circumferential_average(const BandTable& t, Weighting weighting);

double normalize_span(double r, double r_hub, double r_tip);

enum class WeightingPolicy {
    Default, // area for static quantities, mass for velocities and stagnation/Mach quantities
    Area,
    Mass,
};

enum class DerivationOrder { AverageThenDerive, DeriveThenAverage };

struct ExtractionOptions {
    int n_bands = 21;
    /// Explicit span fractions; overrides n_bands when non-empty.
    std::vector<double> band_fractions;
    /// Explicit half width; nullopt selects 0.51 x local radial spacing.
    std::optional<double> epsilon;
    WeightingPolicy weighting = WeightingPolicy::Default;
    DerivationOrder order = DerivationOrder::AverageThenDerive;
    double omega = 0.0; // shaft speed, rad/s; 0 for stationary rows
    GasModel gas;
    Axis axis = Axis::X;
};

struct StationProfile {
    StationSpec station;
    std::vector<double> span_fractions;
    std::map<std::string, std::vector<double>> quantities;
    WeightingPolicy weighting = WeightingPolicy::Default;
    double r_hub = 0.0;
    double r_tip = 0.0;
    std::vector<double> band_radii;
    std::vector<double> band_epsilons;
    std::vector<std::size_t> band_point_counts;
};

/// Weighting applied to `quantity` under `policy`.
Weighting weighting_for(const std::string& quantity, WeightingPolicy policy);

StationProfile extract_profile(const Zone& z, const StationSpec& spec, const ExtractionOptions& opts);

} // namespace calib

/*
  Calibration Tree Format (CTF) data model.

  A Dataset mirrors the CGNS SIDS hierarchy for structured results:
      Dataset -> Base -> Zone -> { GridCoordinates X/Y/Z, FlowSolution fields }

  Arrays are vertex-centered, i-fastest:  index(i,j,k) = i + ni*(j + nj*k).

  Nodes the reader does not understand (connectivity, BCs, solver metadata)
  are kept verbatim as Annotations and written back unchanged.
*/
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace calib {

namespace field {
inline constexpr const char* density = "Density";
inline constexpr const char* pressure_static = "PressureStatic";
inline constexpr const char* temperature_static = "TemperatureStatic";
inline constexpr const char* velocity_x = "VelocityX";
inline constexpr const char* velocity_y = "VelocityY";
inline constexpr const char* velocity_z = "VelocityZ";
inline constexpr const char* pressure_total = "PressureTotal";
inline constexpr const char* temperature_total = "TemperatureTotal";
inline constexpr const char* mach_absolute = "MachAbsolute";
inline constexpr const char* mach_relative = "MachRelative";
} // namespace field

/// Names of the canonical solution vocabulary, in declaration order.
const std::vector<std::string>& canonical_fields();

enum class Location { Vertex, CellCenter };

/// Opaque node preserved through load/save: the keyword line and any
/// payload lines that follow it, stored verbatim.
struct Annotation {
    std::string header;
    std::vector<std::string> lines;

    bool operator==(const Annotation&) const = default;
};

struct Field {
    std::string name;
    Location location = Location::Vertex;
    std::vector<double> values;

    bool operator==(const Field&) const = default;
};

struct Zone {
    std::string name;
    std::array<std::size_t, 3> vertex_counts{1, 1, 1};
    std::array<std::vector<double>, 3> coords; // X, Y, Z
    std::map<std::string, Field> solutions;
    std::vector<Annotation> annotations;

    std::size_t ni() const { return vertex_counts[0]; }
    std::size_t nj() const { return vertex_counts[1]; }
    std::size_t nk() const { return vertex_counts[2]; }
    std::size_t vertex_count() const { return ni() * nj() * nk(); }

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const
    {
        return i + ni() * (j + nj() * k);
    }

    bool has_field(const std::string& n) const { return solutions.count(n) != 0; }
    /// Throws MissingField when absent.
    const std::vector<double>& values(const std::string& n) const;

    bool operator==(const Zone&) const = default;
};

struct Base {
    std::string name;
    int cell_dim = 3;
    int phys_dim = 3;
    std::vector<Zone> zones;
    std::vector<Annotation> annotations;

    bool operator==(const Base&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Base> bases;
    std::vector<Annotation> annotations;

    /// Finds a zone by name across all bases; nullptr when absent.
    /// Throws DuplicateName when the name is ambiguous.
    const Zone* find_zone(const std::string& zone_name) const;

    bool operator==(const Dataset&) const = default;
};

/// Checks every structural and physical invariant; throws calib::Error
/// naming the offending tree path.
void validate(const Dataset& d);

Dataset parse_dataset(const std::string& text, const std::string& source = "<memory>");
std::string serialize_dataset(const Dataset& d);

Dataset load_dataset(const std::filesystem::path& path);
/// Validates first; nothing is written when validation fails.
void save_dataset(const Dataset& d, const std::filesystem::path& path);

enum class Axis { X, Y, Z };

struct CylindricalView {
    std::vector<double> x_axial;
    std::vector<double> r;
    std::vector<double> theta; // (-pi, pi], measured from the first transverse axis
};

/// Per-vertex cylindrical coordinates about the given machine axis. For the
/// X axis, theta is the angle of (Y, Z) from +Y toward +Z. Other axes use the
/// cyclic permutation (Y: from +Z toward +X, Z: from +X toward +Y).
CylindricalView cylindrical_view(const Zone& z, Axis axis = Axis::X);

/// Velocity component names (axial, first transverse, second transverse)
/// for the given machine axis.
std::array<const char*, 3> velocity_fields(Axis axis);

} // namespace calib

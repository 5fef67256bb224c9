#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace calib {

enum class Side { Inlet, Outlet };
enum class RowKind { Igv, Rotor, Stator, Ogv };

const char* side_name(Side s);
const char* row_kind_name(RowKind k);

/// Blade-row ordering of the machine: [IGV] R1 S1 R2 S2 ... Rn Sn [OGV].
struct RowLayout {
    int num_stages = 1;
    bool has_igv = false;
    bool has_ogv = false;

    int total_rows() const { return 2 * num_stages + (has_igv ? 1 : 0) + (has_ogv ? 1 : 0); }

    bool operator==(const RowLayout&) const = default;
};

/// What occupies a given row. IGV rows report stage 0 and the OGV row
/// reports num_stages + 1.
struct RowIdentity {
    RowKind kind;
    int stage;

    bool operator==(const RowIdentity&) const = default;
};

/// 1-based machine-order row index of the rotor or stator of `stage`.
/// Throws StageOutOfRange; InvalidArgument for kind IGV/OGV.
int row_index_for(int stage, RowKind kind, const RowLayout& layout);
int igv_row(const RowLayout& layout);
int ogv_row(const RowLayout& layout);

/// Inverse of row_index_for over the whole row list. Throws StageOutOfRange
/// for rows outside 1..total_rows.
RowIdentity row_identity(int row_index, const RowLayout& layout);

/// Rotating rows are rotors; IGV, stators and OGV are stationary.
bool is_rotating(int row_index, const RowLayout& layout);

struct S2StageDesign {
    int stage_index = 0;
    double pressure_ratio = 1.0;
    double efficiency = 1.0;

    bool operator==(const S2StageDesign&) const = default;
};

struct SpanSample {
    double span = 0.0;
    double value = 0.0;

    bool operator==(const SpanSample&) const = default;
};

struct S2RadialProfile {
    int row_index = 0;
    Side side = Side::Inlet;
    std::string quantity;
    std::vector<SpanSample> samples;

    bool operator==(const S2RadialProfile&) const = default;
};

struct S2DesignCase {
    std::string machine_name;
    RowLayout layout;
    std::vector<S2StageDesign> stages;
    std::vector<S2RadialProfile> station_profiles;
    /// Non-fatal findings (e.g. efficiency above 1). Not serialized.
    std::vector<std::string> warnings;

    const S2StageDesign* find_stage(int stage) const;

    bool operator==(const S2DesignCase& o) const
    {
        return machine_name == o.machine_name && layout == o.layout && stages == o.stages &&
               station_profiles == o.station_profiles;
    }
};

S2DesignCase parse_s2_design(const std::string& text, const std::string& source = "<memory>");
S2DesignCase load_s2_design(const std::filesystem::path& path);
std::string serialize_s2_design(const S2DesignCase& c);
void save_s2_design(const S2DesignCase& c, const std::filesystem::path& path);

struct RotorStatorSplit {
    std::vector<S2RadialProfile> rotor;
    std::vector<S2RadialProfile> stator;
};

/// Partitions station profiles by the kind of row they belong to; IGV and
/// OGV rows count as stator-kind. Relative order is preserved.
RotorStatorSplit split_rotor_stator(const S2DesignCase& c);

} // namespace calib

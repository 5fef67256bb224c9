// Shared fixtures for the unit and acceptance suites.
#pragma once

#include "calib/comparison.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fixtures {

inline calib::AlignedPair three_node_pair()
{
    calib::AlignedPair p;
    p.station = "row_1_outlet";
    p.row_index = 1;
    p.side = calib::Side::Outlet;
    p.quantity = "PressureTotal";
    p.span = {0.05, 0.5, 0.95};
    p.s2 = {136000.0, 138900.0, 137500.0};
    p.cfd = {136800.0, 141200.0, 140900.0};
    return p;
}

// Stage rows 1, 4 and 8 of the eight-stage comparison table.
inline std::vector<calib::StageComparison> table1_stages()
{
    return {{1, 1.37, 0.9424, 1.349, 0.932}, {4, 1.30, 0.9388, 1.30, 0.9451}, {8, 1.16, 0.9140, 1.1544, 0.9022}};
}

inline calib::ReportData table1_report()
{
    calib::ReportData r;
    r.machine = "core8";
    r.stages = table1_stages();
    const calib::AlignedPair p = three_node_pair();
    r.stations.push_back({p.station, p.quantity, calib::deviation_metrics(p)});
    calib::AdviceInputs in;
    in.layout = calib::RowLayout{8, false, false};
    in.stages = r.stages;
    in.pairs = {p};
    r.advisories = calib::advise(in, calib::RuleConfig{});
    return r;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Golden file contents; CALIB_UPDATE_GOLDEN=1 rewrites the file from `actual`.
inline std::string golden(const std::string& name, const std::string& actual)
{
    const std::filesystem::path p = std::filesystem::path(CALIB_GOLDEN_DIR) / name;
    if (const char* u = std::getenv("CALIB_UPDATE_GOLDEN"); u && std::string(u) == "1") {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << actual;
    }
    return slurp(p);
}

} // namespace fixtures

#include "calib/s2_design.hpp"

#include "calib/error.hpp"
#include "calib/number_format.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace calib {

const char* side_name(Side s)
{
    return s == Side::Inlet ? "inlet" : "outlet";
}

const char* row_kind_name(RowKind k)
{
    switch (k) {
    case RowKind::Igv: return "igv";
    case RowKind::Rotor: return "rotor";
    case RowKind::Stator: return "stator";
    case RowKind::Ogv: return "ogv";
    }
    return "?";
}

int row_index_for(int stage, RowKind kind, const RowLayout& layout)
{
    if (stage < 1 || stage > layout.num_stages)
        throw Error(Errc::StageOutOfRange, "stage " + std::to_string(stage),
                    "machine has " + std::to_string(layout.num_stages) + " stages");
    const int shift = layout.has_igv ? 1 : 0;
    switch (kind) {
    case RowKind::Rotor: return 2 * stage - 1 + shift;
    case RowKind::Stator: return 2 * stage + shift;
    default: break;
    }
    throw Error(Errc::InvalidArgument, "stage " + std::to_string(stage), "IGV/OGV rows are not indexed by stage");
}

int igv_row(const RowLayout& layout)
{
    if (!layout.has_igv)
        throw Error(Errc::StageOutOfRange, "igv", "layout has no IGV");
    return 1;
}

int ogv_row(const RowLayout& layout)
{
    if (!layout.has_ogv)
        throw Error(Errc::StageOutOfRange, "ogv", "layout has no OGV");
    return 2 * layout.num_stages + (layout.has_igv ? 1 : 0) + 1;
}

RowIdentity row_identity(int row_index, const RowLayout& layout)
{
    if (row_index < 1 || row_index > layout.total_rows())
        throw Error(Errc::StageOutOfRange, "row " + std::to_string(row_index),
                    "machine has " + std::to_string(layout.total_rows()) + " rows");
    int r = row_index;
    if (layout.has_igv) {
        if (r == 1)
            return {RowKind::Igv, 0};
        --r;
    }
    if (r > 2 * layout.num_stages)
        return {RowKind::Ogv, layout.num_stages + 1};
    const int stage = (r + 1) / 2;
    return {r % 2 == 1 ? RowKind::Rotor : RowKind::Stator, stage};
}

bool is_rotating(int row_index, const RowLayout& layout)
{
    return row_identity(row_index, layout).kind == RowKind::Rotor;
}

const S2StageDesign* S2DesignCase::find_stage(int stage) const
{
    for (const auto& s : stages) {
        if (s.stage_index == stage)
            return &s;
    }
    return nullptr;
}

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(const std::string& text)
{
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos || raw[first] == '#')
            continue;
        Line l{number, {}};
        std::istringstream ls(raw);
        std::string tok;
        while (ls >> tok)
            l.tokens.push_back(tok);
        lines.push_back(std::move(l));
    }
    return lines;
}

bool is_section(const std::string& tok)
{
    return tok == "STAGES" || tok == "PROFILE" || tok == "END";
}

double number_or_throw(const std::string& tok, const std::string& path, const std::string& where)
{
    auto v = parse_double(tok);
    if (!v || !std::isfinite(*v))
        throw Error(Errc::MalformedRow, path, where + "expected a finite number, found '" + tok + "'");
    return *v;
}

int integer_or_throw(const std::string& tok, const std::string& path, const std::string& where)
{
    auto v = parse_integer(tok);
    if (!v)
        throw Error(Errc::MalformedRow, path, where + "expected an integer, found '" + tok + "'");
    return static_cast<int>(*v);
}

} // namespace

S2DesignCase parse_s2_design(const std::string& text, const std::string& source)
{
    const auto lines = tokenize(text);
    auto where = [&](const Line& l) { return source + ":" + std::to_string(l.number) + ": "; };

    if (lines.empty() || lines[0].tokens.size() != 2 || lines[0].tokens[0] != "S2D" || lines[0].tokens[1] != "1")
        throw Error(Errc::MalformedHeader, "/", source + ": first line must be 'S2D 1'");
    if (lines.size() < 2 || lines[1].tokens.size() != 5 || lines[1].tokens[0] != "MACHINE")
        throw Error(Errc::MalformedHeader, "/", source + ": expected 'MACHINE <name> <num_stages> <igv> <ogv>'");

    S2DesignCase c;
    {
        const Line& l = lines[1];
        c.machine_name = l.tokens[1];
        auto n = parse_integer(l.tokens[2]);
        auto igv = parse_integer(l.tokens[3]);
        auto ogv = parse_integer(l.tokens[4]);
        if (!n || *n < 1)
            throw Error(Errc::MalformedHeader, "/MACHINE", where(l) + "num_stages must be a positive integer");
        if (!igv || !ogv || (*igv != 0 && *igv != 1) || (*ogv != 0 && *ogv != 1))
            throw Error(Errc::MalformedHeader, "/MACHINE", where(l) + "igv/ogv flags must be 0 or 1");
        c.layout = RowLayout{static_cast<int>(*n), *igv == 1, *ogv == 1};
    }

    std::size_t i = 2;
    bool ended = false;
    bool stages_seen = false;
    std::set<std::tuple<int, int, std::string>> profile_keys;
    while (i < lines.size()) {
        const Line& l = lines[i];
        const std::string& kw = l.tokens[0];
        if (ended)
            throw Error(Errc::MalformedHeader, "/", where(l) + "content after END");
        if (kw == "END") {
            ended = true;
            ++i;
        } else if (kw == "STAGES") {
            if (stages_seen)
                throw Error(Errc::MalformedHeader, "/STAGES", where(l) + "STAGES section repeated");
            stages_seen = true;
            ++i;
            int last = 0;
            for (; i < lines.size() && !is_section(lines[i].tokens[0]); ++i) {
                const Line& row = lines[i];
                if (row.tokens.size() != 3)
                    throw Error(Errc::MalformedRow, "/STAGES", where(row) + "expected '<stage> <pi> <eta>'");
                S2StageDesign s;
                s.stage_index = integer_or_throw(row.tokens[0], "/STAGES", where(row));
                const std::string spath = "/STAGES/" + std::to_string(s.stage_index);
                s.pressure_ratio = number_or_throw(row.tokens[1], spath, where(row));
                s.efficiency = number_or_throw(row.tokens[2], spath, where(row));
                if (s.stage_index <= last || s.stage_index > c.layout.num_stages)
                    throw Error(Errc::StageIndexGap, spath,
                                where(row) + "stage indices must increase within 1.." +
                                    std::to_string(c.layout.num_stages));
                if (!(s.pressure_ratio > 0.0))
                    throw Error(Errc::MalformedRow, spath, where(row) + "pressure ratio must be positive");
                if (!(s.efficiency > 0.0))
                    throw Error(Errc::MalformedRow, spath, where(row) + "efficiency must be positive");
                if (s.efficiency > 1.0)
                    c.warnings.push_back(spath + ": efficiency " + format_shortest(s.efficiency) + " exceeds 1");
                last = s.stage_index;
                c.stages.push_back(s);
            }
        } else if (kw == "PROFILE") {
            if (l.tokens.size() != 4)
                throw Error(Errc::MalformedRow, "/PROFILE", where(l) + "expected 'PROFILE <row> <inlet|outlet> <field>'");
            S2RadialProfile p;
            p.row_index = integer_or_throw(l.tokens[1], "/PROFILE", where(l));
            if (l.tokens[2] == "inlet")
                p.side = Side::Inlet;
            else if (l.tokens[2] == "outlet")
                p.side = Side::Outlet;
            else
                throw Error(Errc::MalformedRow, "/PROFILE", where(l) + "side must be inlet or outlet");
            p.quantity = l.tokens[3];
            const std::string ppath =
                "/PROFILE/" + std::to_string(p.row_index) + "/" + side_name(p.side) + "/" + p.quantity;
            if (p.row_index < 1 || p.row_index > c.layout.total_rows())
                throw Error(Errc::MalformedRow, ppath,
                            where(l) + "row index outside 1.." + std::to_string(c.layout.total_rows()));
            if (!profile_keys.emplace(p.row_index, static_cast<int>(p.side), p.quantity).second)
                throw Error(Errc::DuplicateName, ppath, where(l) + "profile repeated");
            ++i;
            for (; i < lines.size() && !is_section(lines[i].tokens[0]); ++i) {
                const Line& row = lines[i];
                if (row.tokens.size() != 2)
                    throw Error(Errc::MalformedRow, ppath, where(row) + "expected '<span_fraction> <value>'");
                SpanSample s{number_or_throw(row.tokens[0], ppath, where(row)),
                             number_or_throw(row.tokens[1], ppath, where(row))};
                if (s.span < 0.0 || s.span > 1.0)
                    throw Error(Errc::MalformedRow, ppath, where(row) + "span fraction outside [0, 1]");
                if (!p.samples.empty() && !(s.span > p.samples.back().span))
                    throw Error(Errc::NonMonotoneSpan, ppath, where(row) + "span fractions must strictly increase");
                p.samples.push_back(s);
            }
            if (p.samples.empty())
                throw Error(Errc::MalformedRow, ppath, where(l) + "profile has no samples");
            c.station_profiles.push_back(std::move(p));
        } else {
            throw Error(Errc::MalformedRow, "/", where(l) + "unexpected token '" + kw + "'");
        }
    }
    if (!ended)
        throw Error(Errc::MalformedHeader, "/", source + ": missing END");
    return c;
}

S2DesignCase load_s2_design(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoFailure, path.string(), "cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_s2_design(buf.str(), path.string());
}

std::string serialize_s2_design(const S2DesignCase& c)
{
    std::ostringstream os;
    os << "S2D 1\n";
    os << "MACHINE " << c.machine_name << ' ' << c.layout.num_stages << ' ' << (c.layout.has_igv ? 1 : 0) << ' '
       << (c.layout.has_ogv ? 1 : 0) << '\n';
    if (!c.stages.empty()) {
        os << "STAGES\n";
        for (const auto& s : c.stages)
            os << s.stage_index << ' ' << format_shortest(s.pressure_ratio) << ' ' << format_shortest(s.efficiency)
               << '\n';
    }
    for (const auto& p : c.station_profiles) {
        os << "PROFILE " << p.row_index << ' ' << side_name(p.side) << ' ' << p.quantity << '\n';
        for (const auto& s : p.samples)
            os << format_shortest(s.span) << ' ' << format_shortest(s.value) << '\n';
    }
    os << "END\n";
    return os.str();
}

void save_s2_design(const S2DesignCase& c, const std::filesystem::path& path)
{
    const std::string text = serialize_s2_design(c);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::IoFailure, path.string(), "cannot open for writing");
    out << text;
    if (!out)
        throw Error(Errc::IoFailure, path.string(), "write failed");
}

RotorStatorSplit split_rotor_stator(const S2DesignCase& c)
{
    RotorStatorSplit out;
    for (const auto& p : c.station_profiles) {
        if (is_rotating(p.row_index, c.layout))
            out.rotor.push_back(p);
        else
            out.stator.push_back(p);
    }
    return out;
}

} // namespace calib

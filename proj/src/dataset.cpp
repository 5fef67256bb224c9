#include "calib/dataset.hpp"

#include "calib/error.hpp"
#include "calib/number_format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

namespace calib {

const std::vector<std::string>& canonical_fields()
{
    static const std::vector<std::string> names{
        field::density,        field::pressure_static,   field::temperature_static,
        field::velocity_x,     field::velocity_y,        field::velocity_z,
        field::pressure_total, field::temperature_total, field::mach_absolute,
        field::mach_relative,
    };
    return names;
}

const std::vector<double>& Zone::values(const std::string& n) const
{
    auto it = solutions.find(n);
    if (it == solutions.end())
        throw Error(Errc::MissingField, name + "/" + n, "field not present in zone");
    return it->second.values;
}

const Zone* Dataset::find_zone(const std::string& zone_name) const
{
    const Zone* found = nullptr;
    for (const auto& b : bases) {
        for (const auto& z : b.zones) {
            if (z.name != zone_name)
                continue;
            if (found)
                throw Error(Errc::DuplicateName, zone_name, "zone name is present in more than one base");
            found = &z;
        }
    }
    return found;
}

namespace {

constexpr std::size_t values_per_line = 6;

bool valid_identifier(const std::string& s)
{
    if (s.empty())
        return false;
    return std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) || c == '#'; });
}

void check_finite(const std::vector<double>& v, const std::string& path)
{
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (!std::isfinite(v[n]))
            throw Error(Errc::NonFiniteValue, path, "entry " + std::to_string(n) + " is not finite");
    }
}

void check_positive(const std::vector<double>& v, const std::string& path)
{
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (!(v[n] > 0.0))
            throw Error(Errc::NonPhysicalState, path, "entry " + std::to_string(n) + " must be positive");
    }
}

void validate_zone(const Zone& z, const std::string& base_path)
{
    const std::string zpath = base_path + "/" + z.name;
    if (!valid_identifier(z.name))
        throw Error(Errc::MalformedHeader, zpath, "invalid zone name");
    for (std::size_t a = 0; a < 3; ++a) {
        if (z.vertex_counts[a] == 0)
            throw Error(Errc::MalformedHeader, zpath, "vertex counts must be positive");
    }
    const std::size_t n = z.vertex_count();
    static const char* axis_names[3] = {"X", "Y", "Z"};
    for (std::size_t a = 0; a < 3; ++a) {
        const std::string cpath = zpath + "/GridCoordinates/" + axis_names[a];
        if (z.coords[a].size() != n)
            throw Error(Errc::ArrayLengthMismatch, cpath,
                        "expected " + std::to_string(n) + " entries, found " + std::to_string(z.coords[a].size()));
        check_finite(z.coords[a], cpath);
    }
    for (const auto& [key, f] : z.solutions) {
        const std::string fpath = zpath + "/" + key;
        if (key != f.name || !valid_identifier(f.name))
            throw Error(Errc::MalformedHeader, fpath, "field name mismatch");
        if (f.location != Location::Vertex)
            throw Error(Errc::UnsupportedLocation, fpath, "only vertex-centered solutions are supported");
        if (f.values.size() != n)
            throw Error(Errc::ArrayLengthMismatch, fpath,
                        "expected " + std::to_string(n) + " entries, found " + std::to_string(f.values.size()));
        check_finite(f.values, fpath);
        if (key == field::density || key == field::pressure_static || key == field::temperature_static)
            check_positive(f.values, fpath);
    }
}

} // namespace

void validate(const Dataset& d)
{
    if (d.bases.empty())
        throw Error(Errc::MalformedHeader, "/", "dataset has no BASE");
    std::set<std::string> base_names;
    for (const auto& b : d.bases) {
        const std::string bpath = "/" + b.name;
        if (!valid_identifier(b.name))
            throw Error(Errc::MalformedHeader, bpath, "invalid base name");
        if (!base_names.insert(b.name).second)
            throw Error(Errc::DuplicateName, bpath, "base name repeated");
        if (b.cell_dim != 3 || b.phys_dim != 3)
            throw Error(Errc::UnsupportedDimension, bpath,
                        "cell_dim and phys_dim must be 3, found " + std::to_string(b.cell_dim) + " " +
                            std::to_string(b.phys_dim));
        std::set<std::string> zone_names;
        for (const auto& z : b.zones) {
            if (!zone_names.insert(z.name).second)
                throw Error(Errc::DuplicateName, bpath + "/" + z.name, "zone name repeated");
            validate_zone(z, bpath);
        }
    }
}

// ---------------------------------------------------------------------------
// Reader
// ---------------------------------------------------------------------------

namespace {

struct Line {
    std::size_t number;
    std::string text;
    std::vector<std::string_view> tokens;
};

std::vector<Line> split_lines(const std::string& text)
{
    std::vector<Line> lines;
    std::size_t pos = 0, number = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        ++number;
        std::string raw = text.substr(pos, end - pos);
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        pos = end + 1;
        auto first = raw.find_first_not_of(" \t");
        if (first == std::string::npos || raw[first] == '#')
            continue;
        lines.push_back(Line{number, std::move(raw), {}});
    }
    for (auto& l : lines) {
        std::string_view sv(l.text);
        std::size_t p = 0;
        while (p < sv.size()) {
            while (p < sv.size() && std::isspace(static_cast<unsigned char>(sv[p])))
                ++p;
            std::size_t q = p;
            while (q < sv.size() && !std::isspace(static_cast<unsigned char>(sv[q])))
                ++q;
            if (q > p)
                l.tokens.push_back(sv.substr(p, q - p));
            p = q;
        }
    }
    return lines;
}

bool is_keyword(std::string_view tok)
{
    if (tok.empty() || !std::isalpha(static_cast<unsigned char>(tok.front())))
        return false;
    // nan / inf are numeric tokens, not keywords
    return !parse_double(tok).has_value();
}

class CtfReader {
public:
    CtfReader(const std::string& text, std::string source) : lines_(split_lines(text)), source_(std::move(source)) {}

    Dataset read()
    {
        Dataset d;
        if (lines_.empty() || lines_[0].tokens.size() != 2 || lines_[0].tokens[0] != "CTF" ||
            lines_[0].tokens[1] != "1")
            throw Error(Errc::MalformedHeader, "/", source_ + ": first line must be 'CTF 1'");
        line_ = 1;

        Base* base = nullptr;
        Zone* zone = nullptr;
        std::set<std::string> coords_seen;
        bool ended = false;

        while (line_ < lines_.size()) {
            const Line& l = lines_[line_];
            const std::string_view kw = l.tokens.front();
            if (ended)
                throw Error(Errc::MalformedHeader, "/", where(l) + "content after END");

            if (kw == "DATASET") {
                if (base || l.tokens.size() != 2)
                    throw Error(Errc::MalformedHeader, "/", where(l) + "DATASET must precede BASE and carry a name");
                d.name = std::string(l.tokens[1]);
                ++line_;
            } else if (kw == "BASE") {
                finish_zone(zone, base);
                if (l.tokens.size() != 4)
                    throw Error(Errc::MalformedHeader, "/", where(l) + "expected 'BASE <name> <cell_dim> <phys_dim>'");
                Base b;
                b.name = std::string(l.tokens[1]);
                auto cd = parse_integer(l.tokens[2]);
                auto pd = parse_integer(l.tokens[3]);
                if (!cd || !pd)
                    throw Error(Errc::MalformedHeader, "/" + b.name, where(l) + "dimensions must be integers");
                b.cell_dim = static_cast<int>(*cd);
                b.phys_dim = static_cast<int>(*pd);
                if (b.cell_dim != 3 || b.phys_dim != 3)
                    throw Error(Errc::UnsupportedDimension, "/" + b.name,
                                "cell_dim and phys_dim must be 3, found " + std::to_string(b.cell_dim) + " " +
                                    std::to_string(b.phys_dim));
                d.bases.push_back(std::move(b));
                base = &d.bases.back();
                zone = nullptr;
                ++line_;
            } else if (kw == "ZONE") {
                finish_zone(zone, base);
                if (!base)
                    throw Error(Errc::MalformedHeader, "/", where(l) + "ZONE outside of a BASE");
                if (l.tokens.size() != 5)
                    throw Error(Errc::MalformedHeader, "/" + base->name,
                                where(l) + "expected 'ZONE <name> <ni> <nj> <nk>'");
                Zone z;
                z.name = std::string(l.tokens[1]);
                for (std::size_t a = 0; a < 3; ++a) {
                    auto n = parse_integer(l.tokens[2 + a]);
                    if (!n || *n <= 0)
                        throw Error(Errc::MalformedHeader, "/" + base->name + "/" + z.name,
                                    where(l) + "vertex counts must be positive integers");
                    z.vertex_counts[a] = static_cast<std::size_t>(*n);
                }
                base->zones.push_back(std::move(z));
                zone = &base->zones.back();
                coords_seen.clear();
                ++line_;
            } else if (kw == "COORDS") {
                if (!zone)
                    throw Error(Errc::MalformedHeader, base_path(base), where(l) + "COORDS outside of a ZONE");
                if (l.tokens.size() != 1)
                    throw Error(Errc::MalformedHeader, zone_path(base, zone), where(l) + "COORDS takes no arguments");
                ++line_;
                static const char* axes[3] = {"X", "Y", "Z"};
                for (std::size_t a = 0; a < 3; ++a) {
                    const std::string cpath = zone_path(base, zone) + "/GridCoordinates/" + axes[a];
                    if (line_ >= lines_.size() || lines_[line_].tokens.size() != 1 ||
                        lines_[line_].tokens[0] != axes[a])
                        throw Error(Errc::MalformedHeader, cpath, "expected coordinate block '" +
                                                                      std::string(axes[a]) + "'");
                    ++line_;
                    zone->coords[a] = read_values(zone->vertex_count(), cpath);
                }
                coords_seen.insert("COORDS");
            } else if (kw == "FIELD") {
                if (!zone)
                    throw Error(Errc::MalformedHeader, base_path(base), where(l) + "FIELD outside of a ZONE");
                if (l.tokens.size() < 2 || l.tokens.size() > 3)
                    throw Error(Errc::MalformedHeader, zone_path(base, zone), where(l) + "expected 'FIELD <name>'");
                Field f;
                f.name = std::string(l.tokens[1]);
                const std::string fpath = zone_path(base, zone) + "/" + f.name;
                if (l.tokens.size() == 3) {
                    if (l.tokens[2] == "Vertex")
                        f.location = Location::Vertex;
                    else if (l.tokens[2] == "CellCenter")
                        throw Error(Errc::UnsupportedLocation, fpath, "only vertex-centered solutions are supported");
                    else
                        throw Error(Errc::MalformedHeader, fpath, where(l) + "unknown grid location");
                }
                if (zone->solutions.count(f.name))
                    throw Error(Errc::DuplicateName, fpath, "field repeated");
                ++line_;
                f.values = read_values(zone->vertex_count(), fpath);
                zone->solutions.emplace(f.name, std::move(f));
            } else if (kw == "END") {
                if (l.tokens.size() != 1)
                    throw Error(Errc::MalformedHeader, "/", where(l) + "END takes no arguments");
                finish_zone(zone, base);
                ended = true;
                ++line_;
            } else if (is_keyword(kw)) {
                Annotation a = read_annotation();
                if (zone)
                    zone->annotations.push_back(std::move(a));
                else if (base)
                    base->annotations.push_back(std::move(a));
                else
                    d.annotations.push_back(std::move(a));
            } else {
                const std::string path = zone ? zone_path(base, zone) : base_path(base);
                throw Error(Errc::MalformedHeader, path, where(l) + "unexpected token '" + std::string(kw) + "'");
            }
        }
        if (!ended)
            throw Error(Errc::MalformedHeader, "/", source_ + ": missing END");
        if (d.bases.empty())
            throw Error(Errc::MalformedHeader, "/", source_ + ": no BASE");
        return d;
    }

private:
    std::string where(const Line& l) const { return source_ + ":" + std::to_string(l.number) + ": "; }

    static std::string base_path(const Base* b) { return b ? "/" + b->name : "/"; }
    static std::string zone_path(const Base* b, const Zone* z) { return base_path(b) + "/" + z->name; }

    void finish_zone(const Zone* zone, const Base* base) const
    {
        if (zone && zone->coords[0].empty())
            throw Error(Errc::MalformedHeader, zone_path(base, zone), "zone has no COORDS block");
    }

    std::vector<double> read_values(std::size_t expected, const std::string& path)
    {
        std::vector<double> out;
        out.reserve(expected);
        while (out.size() < expected) {
            if (line_ >= lines_.size())
                throw Error(Errc::ArrayLengthMismatch, path,
                            "expected " + std::to_string(expected) + " entries, found " + std::to_string(out.size()));
            const Line& l = lines_[line_];
            if (is_keyword(l.tokens.front()))
                throw Error(Errc::ArrayLengthMismatch, path,
                            "expected " + std::to_string(expected) + " entries, found " + std::to_string(out.size()));
            if (out.size() + l.tokens.size() > expected)
                throw Error(Errc::ArrayLengthMismatch, path,
                            "expected " + std::to_string(expected) + " entries, found more");
            for (auto tok : l.tokens) {
                auto v = parse_double(tok);
                if (!v)
                    throw Error(Errc::MalformedHeader, path, where(l) + "bad numeric token '" + std::string(tok) + "'");
                if (!std::isfinite(*v))
                    throw Error(Errc::NonFiniteValue, path, "entry " + std::to_string(out.size()) + " is not finite");
                out.push_back(*v);
            }
            ++line_;
        }
        if (line_ < lines_.size() && !is_keyword(lines_[line_].tokens.front()))
            throw Error(Errc::ArrayLengthMismatch, path,
                        "expected " + std::to_string(expected) + " entries, found more");
        return out;
    }

    Annotation read_annotation()
    {
        Annotation a;
        a.header = lines_[line_].text;
        ++line_;
        // payload: indented lines and lines that do not open a node
        while (line_ < lines_.size() &&
               (std::isspace(static_cast<unsigned char>(lines_[line_].text.front())) ||
                !is_keyword(lines_[line_].tokens.front()))) {
            a.lines.push_back(lines_[line_].text);
            ++line_;
        }
        return a;
    }

    std::vector<Line> lines_;
    std::string source_;
    std::size_t line_ = 0;
};

void write_values(std::ostringstream& os, const std::vector<double>& v)
{
    for (std::size_t n = 0; n < v.size(); ++n) {
        os << format_g17(v[n]);
        os << ((n + 1) % values_per_line == 0 || n + 1 == v.size() ? '\n' : ' ');
    }
}

void write_annotations(std::ostringstream& os, const std::vector<Annotation>& as)
{
    for (const auto& a : as) {
        os << a.header << '\n';
        for (const auto& l : a.lines)
            os << l << '\n';
    }
}

} // namespace

Dataset parse_dataset(const std::string& text, const std::string& source)
{
    Dataset d = CtfReader(text, source).read();
    validate(d);
    return d;
}

std::string serialize_dataset(const Dataset& d)
{
    validate(d);
    std::ostringstream os;
    os << "CTF 1\n";
    if (!d.name.empty())
        os << "DATASET " << d.name << '\n';
    write_annotations(os, d.annotations);
    for (const auto& b : d.bases) {
        os << "BASE " << b.name << ' ' << b.cell_dim << ' ' << b.phys_dim << '\n';
        write_annotations(os, b.annotations);
        for (const auto& z : b.zones) {
            os << "ZONE " << z.name << ' ' << z.ni() << ' ' << z.nj() << ' ' << z.nk() << '\n';
            os << "COORDS\n";
            static const char* axes[3] = {"X", "Y", "Z"};
            for (std::size_t a = 0; a < 3; ++a) {
                os << axes[a] << '\n';
                write_values(os, z.coords[a]);
            }
            for (const auto& [name, f] : z.solutions) {
                os << "FIELD " << name << '\n';
                write_values(os, f.values);
            }
            write_annotations(os, z.annotations);
        }
    }
    os << "END\n";
    return os.str();
}

Dataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoFailure, path.string(), "cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    Dataset d = parse_dataset(buf.str(), path.string());
    if (d.name.empty())
        d.name = path.stem().string();
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path)
{
    const std::string text = serialize_dataset(d);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::IoFailure, path.string(), "cannot open for writing");
    out << text;
    out.flush();
    if (!out)
        throw Error(Errc::IoFailure, path.string(), "write failed");
}

std::array<const char*, 3> velocity_fields(Axis axis)
{
    switch (axis) {
    case Axis::Y: return {field::velocity_y, field::velocity_z, field::velocity_x};
    case Axis::Z: return {field::velocity_z, field::velocity_x, field::velocity_y};
    case Axis::X: break;
    }
    return {field::velocity_x, field::velocity_y, field::velocity_z};
}

CylindricalView cylindrical_view(const Zone& z, Axis axis)
{
    const std::size_t a = static_cast<std::size_t>(axis);
    const auto& ax = z.coords[a];
    const auto& t1 = z.coords[(a + 1) % 3];
    const auto& t2 = z.coords[(a + 2) % 3];
    const std::size_t n = ax.size();

    CylindricalView v;
    v.x_axial = ax;
    v.r.resize(n);
    v.theta.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        v.r[p] = std::hypot(t1[p], t2[p]);
        if (v.r[p] == 0.0) {
            v.theta[p] = 0.0;
            continue;
        }
        double th = std::atan2(t2[p], t1[p]);
        if (th <= -std::numbers::pi)
            th = std::numbers::pi;
        v.theta[p] = th;
    }
    return v;
}

} // namespace calib

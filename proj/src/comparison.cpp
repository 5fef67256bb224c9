#include "calib/comparison.hpp"

#include "calib/error.hpp"
#include "calib/number_format.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace calib {

double interpolate_linear(std::span<const double> x, std::span<const double> y, double at)
{
    if (x.size() != y.size() || x.empty())
        throw Error(Errc::InvalidArgument, "interpolate", "abscissa and ordinate sizes differ or are empty");
    if (at < x.front() || at > x.back())
        throw Error(Errc::InvalidArgument, "interpolate", "query " + format_shortest(at) + " outside the source range");
    auto it = std::lower_bound(x.begin(), x.end(), at);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    if (x[k] == at)
        return y[k];
    const double x0 = x[k - 1], x1 = x[k];
    const double y0 = y[k - 1], y1 = y[k];
    return y0 + (y1 - y0) * ((at - x0) / (x1 - x0));
}

AlignedPair align_profiles(const S2RadialProfile& s2, std::span<const double> cfd_span, std::span<const double> cfd_values)
{
    const std::string where = "row_" + std::to_string(s2.row_index) + "_" + side_name(s2.side) + "/" + s2.quantity;
    if (s2.samples.size() < 2 || cfd_span.size() < 2)
        throw Error(Errc::TooFewSamples, where, "both sources need at least two span samples");
    if (cfd_span.size() != cfd_values.size())
        throw Error(Errc::ArrayLengthMismatch, where, "CFD span and value arrays differ in length");
    for (std::size_t k = 1; k < cfd_span.size(); ++k) {
        if (!(cfd_span[k] > cfd_span[k - 1]))
            throw Error(Errc::NonMonotoneSpan, where, "CFD span fractions must strictly increase");
    }

    std::vector<double> s2_span, s2_val;
    for (const auto& s : s2.samples) {
        s2_span.push_back(s.span);
        s2_val.push_back(s.value);
    }

    const double lo = std::max(s2_span.front(), cfd_span.front());
    const double hi = std::min(s2_span.back(), cfd_span.back());
    if (!(lo < hi))
        throw Error(Errc::NoOverlap, where, "S2 and CFD span ranges do not overlap");

    std::vector<double> grid;
    grid.reserve(s2_span.size() + cfd_span.size());
    for (double f : s2_span)
        if (f >= lo && f <= hi)
            grid.push_back(f);
    for (double f : cfd_span)
        if (f >= lo && f <= hi)
            grid.push_back(f);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    AlignedPair pair;
    pair.station = "row_" + std::to_string(s2.row_index) + "_" + side_name(s2.side);
    pair.row_index = s2.row_index;
    pair.side = s2.side;
    pair.quantity = s2.quantity;
    pair.span = grid;
    for (double f : grid) {
        pair.s2.push_back(interpolate_linear(s2_span, s2_val, f));
        pair.cfd.push_back(interpolate_linear(cfd_span, cfd_values, f));
    }
    return pair;
}

AlignedPair align_profiles(const S2RadialProfile& s2, const StationProfile& cfd)
{
    auto it = cfd.quantities.find(s2.quantity);
    if (it == cfd.quantities.end())
        throw Error(Errc::MissingField, cfd.station.label() + "/" + s2.quantity, "quantity not extracted");
    AlignedPair pair = align_profiles(s2, cfd.span_fractions, it->second);
    pair.station = cfd.station.label();
    return pair;
}

std::vector<double> node_deviations(const AlignedPair& pair, Reference reference)
{
    const auto& ref = reference == Reference::S2 ? pair.s2 : pair.cfd;
    const auto& other = reference == Reference::S2 ? pair.cfd : pair.s2;
    std::vector<double> d(ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k)
        d[k] = ref[k] != 0.0 ? (other[k] - ref[k]) / std::abs(ref[k]) : other[k] - ref[k];
    return d;
}

DeviationMetrics deviation_metrics(const AlignedPair& pair, Reference reference)
{
    DeviationMetrics m;
    const auto d = node_deviations(pair, reference);
    if (d.empty())
        return m;
    const auto& ref = reference == Reference::S2 ? pair.s2 : pair.cfd;
    double sum = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (ref[k] == 0.0)
            ++m.absolute_nodes;
        sum += d[k];
        sq += d[k] * d[k];
        if (std::abs(d[k]) > m.max_rel) {
            m.max_rel = std::abs(d[k]);
            m.location_of_max = pair.span[k];
        }
    }
    if (m.max_rel == 0.0)
        m.location_of_max = pair.span.front();
    const double n = static_cast<double>(d.size());
    m.mean_rel = sum / n;
    m.rms_rel = std::sqrt(sq / n);
    return m;
}

const char* severity_name(Severity s)
{
    switch (s) {
    case Severity::Info: return "info";
    case Severity::Warn: return "warn";
    case Severity::Critical: return "critical";
    }
    return "?";
}

void RuleConfig::validate() const
{
    if (!(mach_tip_limit > 0.0) || !(tip_span_threshold > 0.0) || !(p0_rel_dev_threshold > 0.0) ||
        !(stage_pi_dev_threshold > 0.0))
        throw Error(Errc::InvalidArgument, "rules", "all thresholds must be positive");
}

std::optional<double> StageComparison::pi_rel_dev() const
{
    if (!cfd_pi)
        return std::nullopt;
    return std::abs(*cfd_pi - s2_pi) / s2_pi;
}

namespace {

constexpr const char* code_shock_tip = "SHOCK_TIP";
constexpr const char* code_p0_mismatch = "P0_MISMATCH";
constexpr const char* code_stage_pi = "STAGE_PI_DEV";

std::string percent(double fraction)
{
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), 100.0 * fraction, std::chars_format::fixed, 2);
    return std::string(buf.data(), res.ptr) + "%";
}

struct Keyed {
    int stage;
    int rank;
    int row;
    int side;
    Advisory advisory;
};

} // namespace

std::vector<Advisory> advise(const AdviceInputs& in, const RuleConfig& rules)
{
    rules.validate();
    std::vector<Keyed> out;

    // SHOCK_TIP
    std::set<std::string> stations_with_pair;
    auto shock = [&](int row, Side side, const std::string& station, std::vector<Evidence> ev) {
        if (ev.empty())
            return;
        const RowIdentity id = row_identity(row, in.layout);
        Advisory a;
        a.code = code_shock_tip;
        a.severity = Severity::Critical;
        a.stage = id.stage;
        a.row = row_kind_name(id.kind);
        a.station = station;
        a.message = "Rotor tip relative Mach number exceeds " + format_shortest(rules.mach_tip_limit) +
                    "; a passage shock is expected near the tip. Reduce tip loading or move toward a subsonic tip "
                    "design to cut shock loss.";
        a.evidence = std::move(ev);
        out.push_back({id.stage, 1, row, static_cast<int>(side), std::move(a)});
    };
    for (const auto& p : in.pairs) {
        if (p.quantity != field::mach_relative || !is_rotating(p.row_index, in.layout))
            continue;
        stations_with_pair.insert(p.station);
        std::vector<Evidence> ev;
        for (std::size_t k = 0; k < p.span.size(); ++k) {
            if (p.span[k] >= rules.tip_span_threshold && p.cfd[k] > rules.mach_tip_limit)
                ev.push_back({p.quantity, p.span[k], p.s2[k], p.cfd[k]});
        }
        shock(p.row_index, p.side, p.station, std::move(ev));
    }
    for (const auto& prof : in.cfd_profiles) {
        const std::string station = prof.station.label();
        if (stations_with_pair.count(station) || !is_rotating(prof.station.row_index, in.layout))
            continue;
        auto it = prof.quantities.find(field::mach_relative);
        if (it == prof.quantities.end())
            continue;
        std::vector<Evidence> ev;
        for (std::size_t k = 0; k < prof.span_fractions.size(); ++k) {
            if (prof.span_fractions[k] >= rules.tip_span_threshold && it->second[k] > rules.mach_tip_limit)
                ev.push_back({field::mach_relative, prof.span_fractions[k], std::nullopt, it->second[k]});
        }
        shock(prof.station.row_index, prof.station.side, station, std::move(ev));
    }

    // P0_MISMATCH
    for (const auto& p : in.pairs) {
        if (p.quantity != field::pressure_total || p.span.empty())
            continue;
        const auto dev = node_deviations(p, in.reference);
        std::vector<Evidence> ev;
        double worst = 0.0;
        bool tip = false, mid = false;
        for (std::size_t k = 0; k < p.span.size(); ++k) {
            if (p.span[k] >= rules.tip_span_threshold && std::abs(dev[k]) > rules.p0_rel_dev_threshold) {
                ev.push_back({p.quantity, p.span[k], p.s2[k], p.cfd[k]});
                worst = std::max(worst, std::abs(dev[k]));
                tip = true;
            }
        }
        if (p.span.front() <= 0.5 && p.span.back() >= 0.5) {
            const double s2 = interpolate_linear(p.span, p.s2, 0.5);
            const double cfd = interpolate_linear(p.span, p.cfd, 0.5);
            const double ref = in.reference == Reference::S2 ? s2 : cfd;
            const double other = in.reference == Reference::S2 ? cfd : s2;
            const double d = ref != 0.0 ? (other - ref) / std::abs(ref) : other - ref;
            if (std::abs(d) > rules.p0_rel_dev_threshold) {
                ev.push_back({p.quantity, 0.5, s2, cfd});
                worst = std::max(worst, std::abs(d));
                mid = true;
            }
        }
        if (ev.empty())
            continue;
        std::sort(ev.begin(), ev.end(), [](const Evidence& a, const Evidence& b) { return *a.span < *b.span; });
        const RowIdentity id = row_identity(p.row_index, in.layout);
        Advisory a;
        a.code = code_p0_mismatch;
        a.severity = Severity::Warn;
        a.stage = id.stage;
        a.row = row_kind_name(id.kind);
        a.station = p.station;
        a.message = "Total pressure departs from the S2 design by up to " + percent(worst) + " at " +
                    (tip && mid ? "tip and mid" : tip ? "tip" : "mid") +
                    " span: adjust the blade attack angle and bowed angle to rebalance the pressure rise.";
        a.evidence = std::move(ev);
        out.push_back({id.stage, 2, p.row_index, static_cast<int>(p.side), std::move(a)});
    }

    // STAGE_PI_DEV
    for (const auto& s : in.stages) {
        const auto dev = s.pi_rel_dev();
        if (!dev || !(*dev > rules.stage_pi_dev_threshold))
            continue;
        Advisory a;
        a.code = code_stage_pi;
        a.severity = Severity::Warn;
        a.stage = s.stage;
        a.row = "stage";
        a.message = "Stage pressure ratio deviates from the S2 design by " + percent(*dev) +
                    "; prioritise this stage in the next redesign iteration.";
        a.evidence.push_back({"PressureRatio", std::nullopt, s.s2_pi, *s.cfd_pi});
        out.push_back({s.stage, 3, 0, 0, std::move(a)});
    }

    std::stable_sort(out.begin(), out.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.stage, a.rank, a.row, a.side) < std::tie(b.stage, b.rank, b.row, b.side);
    });
    std::vector<Advisory> result;
    result.reserve(out.size());
    for (auto& k : out)
        result.push_back(std::move(k.advisory));
    return result;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

namespace {

void write_text(const std::string& text, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::IoFailure, path.string(), "cannot open for writing");
    out << text;
    out.flush();
    if (!out)
        throw Error(Errc::IoFailure, path.string(), "write failed");
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string number_or_null(const std::optional<double>& v)
{
    if (!v || !std::isfinite(*v))
        return "null";
    return format_shortest(*v);
}

} // namespace

std::string render_tecplot(const std::vector<AlignedPair>& pairs)
{
    if (pairs.empty())
        throw Error(Errc::InvalidArgument, "tecplot", "no profile pair to write");
    const std::string& q = pairs.front().quantity;
    for (const auto& p : pairs) {
        if (p.quantity != q)
            throw Error(Errc::InvalidArgument, "tecplot", "all pairs in one file must share a quantity");
        if (p.span.size() != p.s2.size() || p.span.size() != p.cfd.size() || p.span.empty())
            throw Error(Errc::ArrayLengthMismatch, p.station, "pair arrays differ in length or are empty");
    }
    std::ostringstream os;
    os << "TITLE = \"S2 vs 3D " << q << "\"\n";
    os << "VARIABLES = \"span_percent\",\"" << q << "_S2\",\"" << q << "_3D\"\n";
    for (const auto& p : pairs) {
        os << "ZONE T=\"" << p.station << "\" I=" << p.span.size() << " F=POINT\n";
        for (std::size_t k = 0; k < p.span.size(); ++k)
            os << format_g17(100.0 * p.span[k]) << ' ' << format_g17(p.s2[k]) << ' ' << format_g17(p.cfd[k]) << '\n';
    }
    return os.str();
}

void write_tecplot(const std::vector<AlignedPair>& pairs, const std::filesystem::path& path)
{
    write_text(render_tecplot(pairs), path);
}

std::string render_report(const ReportData& r)
{
    std::ostringstream os;
    os << "machine: " << r.machine << '\n';

    if (r.stages.empty())
        os << "stages: []\n";
    else
        os << "stages:\n";
    for (const auto& s : r.stages) {
        os << "  - stage: " << s.stage << '\n';
        os << "    s2_pi: " << format_shortest(s.s2_pi) << '\n';
        os << "    cfd_pi: " << number_or_null(s.cfd_pi) << '\n';
        os << "    s2_eta: " << format_shortest(s.s2_eta) << '\n';
        os << "    cfd_eta: " << number_or_null(s.cfd_eta) << '\n';
        os << "    pi_rel_dev: " << number_or_null(s.pi_rel_dev()) << '\n';
    }

    if (r.stations.empty())
        os << "stations: []\n";
    else
        os << "stations:\n";
    for (const auto& s : r.stations) {
        os << "  - station: " << s.station << '\n';
        os << "    quantity: " << s.quantity << '\n';
        os << "    max_rel: " << format_shortest(s.metrics.max_rel) << '\n';
        os << "    mean_rel: " << format_shortest(s.metrics.mean_rel) << '\n';
        os << "    rms_rel: " << format_shortest(s.metrics.rms_rel) << '\n';
        os << "    span_of_max: " << format_shortest(s.metrics.location_of_max) << '\n';
    }

    if (r.advisories.empty())
        os << "advisories: []\n";
    else
        os << "advisories:\n";
    for (const auto& a : r.advisories) {
        os << "  - code: " << a.code << '\n';
        os << "    severity: " << severity_name(a.severity) << '\n';
        os << "    stage: " << a.stage << '\n';
        os << "    row: " << a.row << '\n';
        if (!a.station.empty())
            os << "    station: " << a.station << '\n';
        os << "    message: " << quoted(a.message) << '\n';
        os << "    evidence:\n";
        for (const auto& e : a.evidence) {
            os << "      - quantity: " << e.quantity << '\n';
            os << "        span: " << number_or_null(e.span) << '\n';
            os << "        s2: " << number_or_null(e.s2) << '\n';
            os << "        cfd: " << format_shortest(e.cfd) << '\n';
        }
    }
    return os.str();
}

void write_report(const ReportData& report, const std::filesystem::path& path)
{
    write_text(render_report(report), path);
}

} // namespace calib

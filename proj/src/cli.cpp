#include "calib/cli.hpp"

#include "calib/error.hpp"
#include "calib/number_format.hpp"
#include "calib/performance.hpp"
#include "calib/synthetic.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace calib::cli {

namespace fs = std::filesystem;

fs::path RunConfig::resolve(const fs::path& p) const
{
    if (p.is_absolute() || base_dir.empty())
        return p;
    return base_dir / p;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& detail)
{
    throw Error(Errc::ConfigError, key, detail);
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!node.IsMap())
        config_error(path.empty() ? "<root>" : path, "expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            config_error(path.empty() ? key : path + "/" + key, "unknown key");
    }
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "/" + key;
}

double get_double(const YAML::Node& n, const std::string& key)
{
    const auto v = n.IsScalar() ? parse_double(n.Scalar()) : std::nullopt;
    if (!v || !std::isfinite(*v))
        config_error(key, "expected a finite number");
    return *v;
}

long long get_integer(const YAML::Node& n, const std::string& key)
{
    const auto v = n.IsScalar() ? parse_integer(n.Scalar()) : std::nullopt;
    if (!v)
        config_error(key, "expected an integer");
    return *v;
}

bool get_bool(const YAML::Node& n, const std::string& key)
{
    if (n.IsScalar() && (n.Scalar() == "true" || n.Scalar() == "false"))
        return n.Scalar() == "true";
    config_error(key, "expected true or false");
}

std::string get_string(const YAML::Node& n, const std::string& key)
{
    if (!n.IsScalar() || n.Scalar().empty())
        config_error(key, "expected a non-empty string");
    return n.Scalar();
}

template <class T>
T get_choice(const YAML::Node& n, const std::string& key, std::initializer_list<std::pair<const char*, T>> choices)
{
    const std::string s = get_string(n, key);
    for (const auto& [name, value] : choices)
        if (s == name)
            return value;
    std::string names;
    for (const auto& c : choices)
        names += (names.empty() ? "" : ", ") + std::string(c.first);
    config_error(key, "'" + s + "' is not one of " + names);
}

const std::initializer_list<std::pair<const char*, WeightingPolicy>> weighting_names{
    {"default", WeightingPolicy::Default}, {"area", WeightingPolicy::Area}, {"mass", WeightingPolicy::Mass}};
const std::initializer_list<std::pair<const char*, Reference>> reference_names{{"s2", Reference::S2},
                                                                              {"cfd", Reference::Cfd}};

const char* weighting_name(WeightingPolicy w)
{
    switch (w) {
    case WeightingPolicy::Area: return "area";
    case WeightingPolicy::Mass: return "mass";
    default: return "default";
    }
}

StationConfig parse_station(const YAML::Node& n, const std::string& path)
{
    check_keys(n, path,
               {"zone", "row", "side", "plane", "plane_direction", "axial_x", "axial_tolerance", "n_bands", "bands",
                "epsilon"});
    StationConfig sc;
    for (const char* req : {"zone", "row", "side"})
        if (!n[req])
            config_error(join(path, req), "required key missing");
    sc.spec.zone_name = get_string(n["zone"], join(path, "zone"));
    sc.spec.row_index = static_cast<int>(get_integer(n["row"], join(path, "row")));
    sc.spec.side = get_choice<Side>(n["side"], join(path, "side"), {{"inlet", Side::Inlet}, {"outlet", Side::Outlet}});

    const bool has_plane = static_cast<bool>(n["plane"]);
    const bool has_axial = static_cast<bool>(n["axial_x"]);
    if (has_plane == has_axial)
        config_error(path, "give exactly one of plane or axial_x");
    if (has_plane) {
        const long long idx = get_integer(n["plane"], join(path, "plane"));
        if (idx < 0)
            config_error(join(path, "plane"), "plane index must be >= 0");
        PlaneIndex pi{static_cast<std::size_t>(idx), PlaneDirection::I};
        if (n["plane_direction"])
            pi.direction = get_choice<PlaneDirection>(n["plane_direction"], join(path, "plane_direction"),
                                                      {{"i", PlaneDirection::I},
                                                       {"j", PlaneDirection::J},
                                                       {"k", PlaneDirection::K}});
        sc.spec.selector = pi;
    } else {
        if (n["plane_direction"])
            config_error(join(path, "plane_direction"), "only valid with plane");
        AxialWindow w{get_double(n["axial_x"], join(path, "axial_x")), 0.0};
        if (n["axial_tolerance"])
            w.tolerance = get_double(n["axial_tolerance"], join(path, "axial_tolerance"));
        sc.spec.selector = w;
    }
    if (has_plane && n["axial_tolerance"])
        config_error(join(path, "axial_tolerance"), "only valid with axial_x");

    if (n["n_bands"]) {
        sc.n_bands = static_cast<int>(get_integer(n["n_bands"], join(path, "n_bands")));
        if (sc.n_bands < 2)
            config_error(join(path, "n_bands"), "need at least 2 bands");
    }
    if (n["bands"]) {
        const auto& b = n["bands"];
        if (!b.IsSequence() || b.size() == 0)
            config_error(join(path, "bands"), "expected a non-empty list of span fractions");
        for (std::size_t k = 0; k < b.size(); ++k)
            sc.bands.push_back(get_double(b[k], join(path, "bands/" + std::to_string(k))));
    }
    if (n["epsilon"] && !(n["epsilon"].IsScalar() && n["epsilon"].Scalar() == "auto")) {
        const double e = get_double(n["epsilon"], join(path, "epsilon"));
        if (!(e > 0.0))
            config_error(join(path, "epsilon"), "band half width must be positive");
        sc.epsilon = e;
    }
    return sc;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir, const std::string& source)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ConfigError, source, e.what());
    }
    try {
        check_keys(root, "",
                   {"cfd_dataset", "s2_design", "outputs", "machine", "gas", "boundary", "weighting", "averaging",
                    "reference", "threads", "rules", "stations"});
        RunConfig cfg;
        cfg.base_dir = base_dir;
        for (const char* req : {"cfd_dataset", "s2_design", "outputs", "machine", "stations"})
            if (!root[req])
                config_error(req, "required key missing");
        cfg.cfd_dataset = get_string(root["cfd_dataset"], "cfd_dataset");
        cfg.s2_design = get_string(root["s2_design"], "s2_design");
        cfg.outputs = get_string(root["outputs"], "outputs");

        const auto& m = root["machine"];
        check_keys(m, "machine", {"num_stages", "has_igv", "has_ogv", "shaft_speed", "axis"});
        if (!m["num_stages"] || !m["shaft_speed"])
            config_error("machine", "num_stages and shaft_speed are required");
        cfg.layout.num_stages = static_cast<int>(get_integer(m["num_stages"], "machine/num_stages"));
        if (cfg.layout.num_stages < 1)
            config_error("machine/num_stages", "need at least one stage");
        if (m["has_igv"])
            cfg.layout.has_igv = get_bool(m["has_igv"], "machine/has_igv");
        if (m["has_ogv"])
            cfg.layout.has_ogv = get_bool(m["has_ogv"], "machine/has_ogv");
        cfg.shaft_speed = get_double(m["shaft_speed"], "machine/shaft_speed");
        if (m["axis"])
            cfg.axis = get_choice<Axis>(m["axis"], "machine/axis", {{"x", Axis::X}, {"y", Axis::Y}, {"z", Axis::Z}});

        if (const auto& g = root["gas"]) {
            check_keys(g, "gas", {"gamma", "r_gas"});
            if (g["gamma"])
                cfg.gas.gamma = get_double(g["gamma"], "gas/gamma");
            if (g["r_gas"])
                cfg.gas.r_gas = get_double(g["r_gas"], "gas/r_gas");
            try {
                cfg.gas.validate();
            } catch (const Error& e) {
                config_error("gas", e.what());
            }
        }
        if (const auto& b = root["boundary"]) {
            check_keys(b, "boundary", {"inlet_total_pressure", "inlet_total_temperature", "backpressure"});
            if (b["inlet_total_pressure"])
                cfg.boundary.inlet_total_pressure = get_double(b["inlet_total_pressure"], "boundary/inlet_total_pressure");
            if (b["inlet_total_temperature"])
                cfg.boundary.inlet_total_temperature =
                    get_double(b["inlet_total_temperature"], "boundary/inlet_total_temperature");
            if (b["backpressure"])
                cfg.boundary.backpressure = get_double(b["backpressure"], "boundary/backpressure");
        }
        if (root["weighting"])
            cfg.weighting = get_choice<WeightingPolicy>(root["weighting"], "weighting", weighting_names);
        if (root["averaging"])
            cfg.order = get_choice<DerivationOrder>(root["averaging"], "averaging",
                                                    {{"average_then_derive", DerivationOrder::AverageThenDerive},
                                                     {"derive_then_average", DerivationOrder::DeriveThenAverage}});
        if (root["reference"])
            cfg.reference = get_choice<Reference>(root["reference"], "reference", reference_names);
        if (root["threads"]) {
            cfg.threads = static_cast<int>(get_integer(root["threads"], "threads"));
            if (cfg.threads < 1)
                config_error("threads", "need at least one thread");
        }
        if (const auto& r = root["rules"]) {
            check_keys(r, "rules", {"mach_tip_limit", "tip_span_threshold", "p0_rel_dev_threshold", "stage_pi_dev_threshold"});
            if (r["mach_tip_limit"])
                cfg.rules.mach_tip_limit = get_double(r["mach_tip_limit"], "rules/mach_tip_limit");
            if (r["tip_span_threshold"])
                cfg.rules.tip_span_threshold = get_double(r["tip_span_threshold"], "rules/tip_span_threshold");
            if (r["p0_rel_dev_threshold"])
                cfg.rules.p0_rel_dev_threshold = get_double(r["p0_rel_dev_threshold"], "rules/p0_rel_dev_threshold");
            if (r["stage_pi_dev_threshold"])
                cfg.rules.stage_pi_dev_threshold =
                    get_double(r["stage_pi_dev_threshold"], "rules/stage_pi_dev_threshold");
            try {
                cfg.rules.validate();
            } catch (const Error& e) {
                config_error("rules", e.what());
            }
        }

        const auto& st = root["stations"];
        if (!st.IsSequence() || st.size() == 0)
            config_error("stations", "expected a non-empty list");
        for (std::size_t k = 0; k < st.size(); ++k)
            cfg.stations.push_back(parse_station(st[k], "stations/" + std::to_string(k)));
        return cfg;
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ConfigError, source, e.what());
    }
}

RunConfig load_run_config(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoFailure, path.string(), "cannot open configuration");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path(), path.string());
}

std::string render_run_config(const RunConfig& cfg)
{
    static const char* axes[] = {"x", "y", "z"};
    static const char* dirs[] = {"i", "j", "k"};
    std::ostringstream os;
    os << "cfd_dataset: " << cfg.cfd_dataset.generic_string() << '\n'
       << "s2_design: " << cfg.s2_design.generic_string() << '\n'
       << "outputs: " << cfg.outputs.generic_string() << '\n'
       << "machine:\n"
       << "  num_stages: " << cfg.layout.num_stages << '\n'
       << "  has_igv: " << (cfg.layout.has_igv ? "true" : "false") << '\n'
       << "  has_ogv: " << (cfg.layout.has_ogv ? "true" : "false") << '\n'
       << "  shaft_speed: " << format_shortest(cfg.shaft_speed) << '\n'
       << "  axis: " << axes[static_cast<int>(cfg.axis)] << '\n'
       << "gas:\n"
       << "  gamma: " << format_shortest(cfg.gas.gamma) << '\n'
       << "  r_gas: " << format_shortest(cfg.gas.r_gas) << '\n'
       << "boundary:\n"
       << "  inlet_total_pressure: " << format_shortest(cfg.boundary.inlet_total_pressure) << '\n'
       << "  inlet_total_temperature: " << format_shortest(cfg.boundary.inlet_total_temperature) << '\n'
       << "  backpressure: " << format_shortest(cfg.boundary.backpressure) << '\n'
       << "weighting: " << weighting_name(cfg.weighting) << '\n'
       << "averaging: "
       << (cfg.order == DerivationOrder::AverageThenDerive ? "average_then_derive" : "derive_then_average") << '\n'
       << "reference: " << (cfg.reference == Reference::S2 ? "s2" : "cfd") << '\n'
       << "threads: " << cfg.threads << '\n'
       << "rules:\n"
       << "  mach_tip_limit: " << format_shortest(cfg.rules.mach_tip_limit) << '\n'
       << "  tip_span_threshold: " << format_shortest(cfg.rules.tip_span_threshold) << '\n'
       << "  p0_rel_dev_threshold: " << format_shortest(cfg.rules.p0_rel_dev_threshold) << '\n'
       << "  stage_pi_dev_threshold: " << format_shortest(cfg.rules.stage_pi_dev_threshold) << '\n'
       << "stations:\n";
    for (const auto& s : cfg.stations) {
        os << "  - zone: " << s.spec.zone_name << '\n'
           << "    row: " << s.spec.row_index << '\n'
           << "    side: " << side_name(s.spec.side) << '\n';
        if (const auto* p = std::get_if<PlaneIndex>(&s.spec.selector)) {
            os << "    plane: " << p->index << '\n'
               << "    plane_direction: " << dirs[static_cast<int>(p->direction)] << '\n';
        } else {
            const auto& w = std::get<AxialWindow>(s.spec.selector);
            os << "    axial_x: " << format_shortest(w.x) << '\n'
               << "    axial_tolerance: " << format_shortest(w.tolerance) << '\n';
        }
        if (s.bands.empty()) {
            os << "    n_bands: " << s.n_bands << '\n';
        } else {
            os << "    bands: [";
            for (std::size_t k = 0; k < s.bands.size(); ++k)
                os << (k ? ", " : "") << format_shortest(s.bands[k]);
            os << "]\n";
        }
        os << "    epsilon: " << (s.epsilon ? format_shortest(*s.epsilon) : std::string("auto")) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

ValidationSummary validate_inputs(const RunConfig& cfg, const Dataset& ds, const S2DesignCase& design)
{
    validate(ds);
    if (!(design.layout == cfg.layout))
        throw Error(Errc::ConfigError, "machine",
                    "S2 design has " + std::to_string(design.layout.num_stages) + " stages (" +
                        std::to_string(design.layout.total_rows()) + " rows), configuration has " +
                        std::to_string(cfg.layout.num_stages) + " stages (" +
                        std::to_string(cfg.layout.total_rows()) + " rows)");
    if (!(cfg.shaft_speed >= 0.0))
        throw Error(Errc::ConfigError, "machine/shaft_speed", "shaft speed must be >= 0");

    ValidationSummary sum;
    sum.bases = ds.bases.size();
    for (const auto& b : ds.bases)
        sum.zones += b.zones.size();
    sum.rows = cfg.layout.total_rows();
    sum.stages = cfg.layout.num_stages;

    std::set<std::pair<int, Side>> seen;
    for (std::size_t k = 0; k < cfg.stations.size(); ++k) {
        const StationSpec& s = cfg.stations[k].spec;
        const std::string path = "stations/" + std::to_string(k) + "/" + s.label();
        if (s.row_index < 1 || s.row_index > cfg.layout.total_rows())
            throw Error(Errc::StageOutOfRange, path,
                        "row " + std::to_string(s.row_index) + " outside 1.." + std::to_string(cfg.layout.total_rows()));
        if (!seen.emplace(s.row_index, s.side).second)
            throw Error(Errc::DuplicateName, path, "station configured twice");
        const Zone* z = ds.find_zone(s.zone_name);
        if (!z)
            throw Error(Errc::MissingStation, path, "zone '" + s.zone_name + "' not found in the dataset");
        try {
            select_station_points(*z, s, cfg.axis);
        } catch (const Error& e) {
            throw Error(e.code(), path, e.what());
        }
        for (double f : cfg.stations[k].bands)
            if (!(f >= 0.0 && f <= 1.0))
                throw Error(Errc::ConfigError, path, "band span fraction outside [0, 1]");
        ++sum.stations;
    }
    for (const auto& p : design.station_profiles) {
        if (!seen.count({p.row_index, p.side}))
            sum.warnings.push_back("S2 profile row_" + std::to_string(p.row_index) + "_" + side_name(p.side) + " " +
                                   p.quantity + " has no configured station");
    }
    for (const auto& w : design.warnings)
        sum.warnings.push_back(w);
    return sum;
}

namespace {

int exit_code_for(const Error& e)
{
    return e.code() == Errc::IoFailure ? exit_io : exit_validation;
}

struct Inputs {
    Dataset ds;
    S2DesignCase design;
    ValidationSummary summary;
};

// Loads and validates; on failure reports and returns the exit code.
std::optional<Inputs> load_inputs(const RunConfig& cfg, std::ostream& err, int& code)
{
    try {
        Inputs in;
        in.ds = load_dataset(cfg.resolve(cfg.cfd_dataset));
        in.design = load_s2_design(cfg.resolve(cfg.s2_design));
        in.summary = validate_inputs(cfg, in.ds, in.design);
        return in;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        code = exit_code_for(e);
        return std::nullopt;
    }
}

} // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    int code = exit_ok;
    const auto in = load_inputs(cfg, err, code);
    if (!in)
        return code;
    for (const auto& w : in->summary.warnings)
        err << "warning: " << w << '\n';
    out << "bases: " << in->summary.bases << '\n'
        << "zones: " << in->summary.zones << '\n'
        << "rows: " << in->summary.rows << '\n'
        << "stages: " << in->summary.stages << '\n'
        << "stations: " << in->summary.stations << " resolved\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace {

struct StationResult {
    StationProfile profile;
    PlaneState state;
    std::string error;
};

StationResult process_station(const RunConfig& cfg, const Dataset& ds, const StationConfig& sc)
{
    StationResult res;
    try {
        const Zone& z = *ds.find_zone(sc.spec.zone_name);
        ExtractionOptions opts;
        opts.n_bands = sc.n_bands;
        opts.band_fractions = sc.bands;
        opts.epsilon = sc.epsilon;
        opts.weighting = cfg.weighting;
        opts.order = cfg.order;
        opts.omega = is_rotating(sc.spec.row_index, cfg.layout) ? cfg.shaft_speed : 0.0;
        opts.gas = cfg.gas;
        opts.axis = cfg.axis;
        res.profile = extract_profile(z, sc.spec, opts);
        res.state = mass_averaged_plane_state(z, sc.spec, cfg.gas, cfg.axis);
    } catch (const std::exception& e) {
        res.error = e.what();
    }
    return res;
}

std::vector<StationResult> process_stations(const RunConfig& cfg, const Dataset& ds)
{
    std::vector<StationResult> results(cfg.stations.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < results.size(); k = next++)
            results[k] = process_station(cfg, ds, cfg.stations[k]);
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.threads, 1)), results.size());
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n; ++t)
            pool.emplace_back(worker);
    }
    return results;
}

std::string dat_name(const AlignedPair& p)
{
    return "station_" + std::to_string(p.row_index) + "_" + side_name(p.side) + "_" + p.quantity + ".dat";
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush())
        throw Error(Errc::IoFailure, path.string(), "write failed");
}

} // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    int code = exit_ok;
    const auto in = load_inputs(cfg, err, code);
    if (!in)
        return code;
    for (const auto& w : in->summary.warnings)
        err << "warning: " << w << '\n';

    const std::vector<StationResult> results = process_stations(cfg, in->ds);

    // Everything below runs in configuration order or sorted order only.
    std::vector<std::string> failures;
    std::map<std::pair<int, Side>, const StationResult*> by_station;
    RowStates states;
    std::vector<StationProfile> cfd_profiles;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& spec = cfg.stations[k].spec;
        if (!results[k].error.empty()) {
            failures.push_back(spec.label() + ": " + results[k].error);
            continue;
        }
        by_station[{spec.row_index, spec.side}] = &results[k];
        states[{spec.row_index, spec.side}] = results[k].state;
        cfd_profiles.push_back(results[k].profile);
    }

    std::vector<AlignedPair> pairs;
    for (const auto& p : in->design.station_profiles) {
        auto it = by_station.find({p.row_index, p.side});
        if (it == by_station.end())
            continue;
        try {
            pairs.push_back(align_profiles(p, it->second->profile));
        } catch (const Error& e) {
            failures.push_back(it->second->profile.station.label() + "/" + p.quantity + ": " + e.what());
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const AlignedPair& a, const AlignedPair& b) {
        return std::tie(a.row_index, a.side, a.quantity) < std::tie(b.row_index, b.side, b.quantity);
    });

    ReportData report;
    report.machine = in->design.machine_name;
    for (const auto& s : in->design.stages) {
        StageComparison sc{s.stage_index, s.pressure_ratio, s.efficiency, std::nullopt, std::nullopt};
        try {
            const StageTable t = stage_table(states, cfg.layout, cfg.gas, {s.stage_index});
            sc.cfd_pi = t.stages.front().pi;
            sc.cfd_eta = t.stages.front().eta_ad;
        } catch (const Error& e) {
            if (e.code() != Errc::MissingStation)
                failures.push_back("stage " + std::to_string(s.stage_index) + ": " + e.what());
        }
        report.stages.push_back(sc);
    }
    for (const auto& p : pairs)
        report.stations.push_back({p.station, p.quantity, deviation_metrics(p, cfg.reference)});
    report.advisories = advise(AdviceInputs{cfg.layout, report.stages, pairs, cfd_profiles, cfg.reference}, cfg.rules);

    const fs::path outdir = cfg.resolve(cfg.outputs);
    try {
        fs::create_directories(outdir);
        for (const auto& p : pairs)
            write_tecplot({p}, outdir / dat_name(p));
        write_report(report, outdir / "report.txt");
        const fs::path manifest = outdir / "manifest.txt";
        if (failures.empty()) {
            fs::remove(manifest);
        } else {
            std::string text = "failed: " + std::to_string(failures.size()) + "\n";
            for (const auto& f : failures)
                text += "- " + f + "\n";
            write_file(manifest, text);
        }
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }

    out << "stations: " << results.size() - failures.size() << "/" << results.size() << " extracted\n"
        << "pairs: " << pairs.size() << '\n'
        << "advisories: " << report.advisories.size() << '\n';
    if (!failures.empty()) {
        for (const auto& f : failures)
            err << "error: " << f << '\n';
        err << "partial failure, see " << (outdir / "manifest.txt").string() << '\n';
        return exit_extraction;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

namespace {

struct SynthArgs {
    synth::MachineFixtureSpec spec;
    std::vector<std::string> inject;
    std::string outdir;
};

void apply_injection(synth::MachineFixtureSpec& spec, const std::string& item)
{
    const auto eq = item.find('=');
    if (eq == std::string::npos)
        throw Error(Errc::InvalidSpec, item, "expected key=value");
    const std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (key == "tip-mach") {
        const auto m = parse_double(value);
        if (!m)
            throw Error(Errc::InvalidSpec, item, "tip Mach must be a number");
        spec.tip_mach = *m;
        return;
    }
    if (key == "p0-offset") {
        synth::P0Offset off;
        const auto at = value.find('@');
        if (at != std::string::npos) {
            const std::string where = value.substr(at + 1);
            value.resize(at);
            if (where == "tip")
                off.region = synth::SpanRegion::Tip;
            else if (where == "mid")
                off.region = synth::SpanRegion::Mid;
            else if (where == "hub")
                off.region = synth::SpanRegion::Hub;
            else if (where == "all")
                off.region = synth::SpanRegion::All;
            else
                throw Error(Errc::InvalidSpec, item, "region must be tip, mid, hub or all");
        }
        const auto f = parse_double(value);
        if (!f)
            throw Error(Errc::InvalidSpec, item, "offset must be a number");
        off.fraction = *f;
        spec.p0_offset = off;
        return;
    }
    throw Error(Errc::InvalidSpec, item, "unknown injection '" + key + "'");
}

int cmd_synth(SynthArgs a, std::ostream& out, std::ostream& err)
{
    synth::MachineFixture fx;
    try {
        for (const auto& item : a.inject)
            apply_injection(a.spec, item);
        fx = synth::make_machine_fixture(a.spec);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }

    RunConfig cfg;
    cfg.cfd_dataset = "cfd.ctf";
    cfg.s2_design = "design.s2d";
    cfg.outputs = "out";
    cfg.layout = fx.design.layout;
    cfg.shaft_speed = fx.shaft_speed;
    cfg.gas = a.spec.gas;
    cfg.boundary.inlet_total_pressure = a.spec.inlet_p0;
    cfg.boundary.inlet_total_temperature = a.spec.inlet_t0;
    for (const auto& s : fx.stations) {
        StationConfig sc;
        sc.spec = StationSpec{s.zone, s.row, s.side, PlaneIndex{s.plane, PlaneDirection::I}};
        sc.n_bands = fx.n_bands;
        cfg.stations.push_back(sc);
    }

    const fs::path dir = a.outdir;
    try {
        fs::create_directories(dir);
        save_dataset(fx.cfd, dir / "cfd.ctf");
        save_s2_design(fx.design, dir / "design.s2d");
        write_file(dir / "calib.yaml", render_run_config(cfg));
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    out << "wrote " << (dir / "cfd.ctf").string() << ", " << (dir / "design.s2d").string() << ", "
        << (dir / "calib.yaml").string() << '\n'
        << "shaft_speed: " << format_shortest(fx.shaft_speed) << '\n';
    return exit_ok;
}

} // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"S2 design vs 3D CFD calibration"};
    app.require_subcommand(1);

    std::string config_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check configuration, dataset and design");
    validate_cmd->add_option("-c,--config", config_path, "Configuration file")->required();

    std::string reference, weighting;
    int threads = 0;
    auto* run_cmd = app.add_subcommand("run", "Extract, compare and write the report");
    run_cmd->add_option("-c,--config", config_path, "Configuration file")->required();
    run_cmd->add_option("--reference", reference, "Deviation reference")->check(CLI::IsMember({"s2", "cfd"}));
    run_cmd->add_option("--weighting", weighting, "Averaging weights")
        ->check(CLI::IsMember({"area", "mass", "default"}));
    run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic CFD dataset / S2 design pair");
    synth_cmd->add_option("-o,--output", sa.outdir, "Output directory")->required();
    synth_cmd->add_option("--name", sa.spec.name, "Machine name");
    synth_cmd->add_option("--pi", sa.spec.stage_pi, "Stage pressure ratios")->delimiter(',');
    synth_cmd->add_option("--eta", sa.spec.stage_eta, "Stage efficiencies")->delimiter(',');
    synth_cmd->add_option("--ni", sa.spec.ni, "Axial vertices per row");
    synth_cmd->add_option("--nj", sa.spec.nj, "Radial vertices");
    synth_cmd->add_option("--nk", sa.spec.nk, "Circumferential vertices");
    synth_cmd->add_option("--n-bands", sa.spec.n_bands, "Span bands");
    synth_cmd->add_option("--swirl", sa.spec.swirl, "Free-vortex constant, m^2/s");
    synth_cmd->add_option("--vx", sa.spec.vx, "Axial velocity, m/s");
    synth_cmd->add_option("--tip-mach", sa.spec.tip_mach, "Rotor-1 inlet tip relative Mach");
    synth_cmd->add_option("--inject", sa.inject, "tip-mach=M or p0-offset=F[@tip|mid|hub|all]");

    std::vector<const char*> argv;
    for (const auto& s : args)
        argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return exit_validation;
    }

    if (synth_cmd->parsed())
        return cmd_synth(std::move(sa), out, err);

    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    if (validate_cmd->parsed())
        return cmd_validate(cfg, out, err);

    if (!reference.empty())
        cfg.reference = reference == "s2" ? Reference::S2 : Reference::Cfd;
    if (!weighting.empty())
        cfg.weighting = weighting == "area" ? WeightingPolicy::Area
                        : weighting == "mass" ? WeightingPolicy::Mass
                                              : WeightingPolicy::Default;
    if (threads > 0)
        cfg.threads = threads;
    return cmd_run(cfg, out, err);
}

} // namespace calib::cli

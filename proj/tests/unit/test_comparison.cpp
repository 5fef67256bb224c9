#include <doctest.h>

#include "../common/fixtures.hpp"
#include "calib/comparison.hpp"
#include "calib/error.hpp"
#include "calib/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace calib;

namespace {

S2RadialProfile s2_profile(std::vector<double> span, std::vector<double> value, int row = 1,
                           const std::string& q = field::pressure_total)
{
    S2RadialProfile p{row, Side::Inlet, q, {}};
    for (std::size_t k = 0; k < span.size(); ++k)
        p.samples.push_back({span[k], value[k]});
    return p;
}

AlignedPair pair_of(std::vector<double> span, std::vector<double> s2, std::vector<double> cfd, int row = 1,
                    const std::string& q = field::pressure_total)
{
    AlignedPair p;
    p.station = "row_" + std::to_string(row) + "_inlet";
    p.row_index = row;
    p.quantity = q;
    p.span = std::move(span);
    p.s2 = std::move(s2);
    p.cfd = std::move(cfd);
    return p;
}

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

} // namespace

TEST_CASE("identical grids copy values verbatim")
{
    const std::vector<double> f{0.0, 0.3, 0.7, 1.0}, v{1.5, 2.25, -3.0, 8.0};
    const AlignedPair p = align_profiles(s2_profile(f, v), f, v);
    CHECK(p.span == f);
    CHECK(p.s2 == v);
    CHECK(p.cfd == v);
}

TEST_CASE("linear profiles are reproduced on the union grid")
{
    auto q = [](double f) { return 2.0 * f + 1.0; };
    const std::vector<double> cf{0.0, 0.25, 0.75, 1.0};
    std::vector<double> cv;
    for (double f : cf)
        cv.push_back(q(f));
    const AlignedPair p = align_profiles(s2_profile({0.0, 0.5, 1.0}, {q(0.0), q(0.5), q(1.0)}), cf, cv);
    CHECK(p.span == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    for (std::size_t k = 0; k < p.span.size(); ++k) {
        CHECK(p.s2[k] == q(p.span[k]));
        CHECK(p.cfd[k] == q(p.span[k]));
    }
}

TEST_CASE("alignment restricts to the overlap and never extrapolates")
{
    const AlignedPair p = align_profiles(s2_profile({0.0, 0.5, 1.0}, {1, 2, 3}), std::vector<double>{0.2, 0.6, 1.2},
                                         std::vector<double>{5, 6, 7});
    CHECK(p.span == std::vector<double>{0.2, 0.5, 0.6, 1.0});
    CHECK(code_of([] {
              align_profiles(s2_profile({0.0, 0.4}, {1, 2}), std::vector<double>{0.5, 1.0}, std::vector<double>{1, 2});
          }) == Errc::NoOverlap);
    CHECK(code_of([] {
              align_profiles(s2_profile({0.0}, {1}), std::vector<double>{0.5, 1.0}, std::vector<double>{1, 2});
          }) == Errc::TooFewSamples);
}

TEST_CASE("random piecewise-linear sources against the brute-force interpolant")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0), val(-1e5, 1e5);
    std::uniform_int_distribution<int> count(2, 30);
    for (int c = 0; c < 300; ++c) {
        auto grid = [&] {
            std::vector<double> g(static_cast<std::size_t>(count(rng)));
            for (auto& x : g)
                x = u(rng);
            std::sort(g.begin(), g.end());
            g.erase(std::unique(g.begin(), g.end()), g.end());
            if (g.size() < 2)
                g = {0.0, 1.0};
            return g;
        };
        const auto sx = grid(), cx = grid();
        std::vector<double> sy(sx.size()), cy(cx.size());
        for (auto& y : sy)
            y = val(rng);
        for (auto& y : cy)
            y = val(rng);
        AlignedPair p;
        try {
            p = align_profiles(s2_profile(sx, sy), cx, cy);
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::NoOverlap);
            continue;
        }
        for (std::size_t k = 0; k < p.span.size(); ++k) {
            REQUIRE(std::abs(p.s2[k] - synth::brute_force_interpolate(sx, sy, p.span[k])) <= 1e-14 * 1e5);
            REQUIRE(std::abs(p.cfd[k] - synth::brute_force_interpolate(cx, cy, p.span[k])) <= 1e-14 * 1e5);
        }
        for (std::size_t k = 0; k < sx.size(); ++k) {
            auto it = std::find(p.span.begin(), p.span.end(), sx[k]);
            if (it != p.span.end())
                REQUIRE(p.s2[static_cast<std::size_t>(it - p.span.begin())] == sy[k]);
        }
    }
}

TEST_CASE("deviation metrics")
{
    const DeviationMetrics zero = deviation_metrics(pair_of({0, 1}, {2, 3}, {2, 3}));
    CHECK(zero.max_rel == 0.0);
    CHECK(zero.mean_rel == 0.0);
    CHECK(zero.rms_rel == 0.0);

    const DeviationMetrics st8 = deviation_metrics(pair_of({0.5}, {1.16}, {1.1544}));
    CHECK(std::abs(st8.max_rel - 0.00483) < 1e-5);
    CHECK(st8.max_rel == doctest::Approx((1.16 - 1.1544) / 1.16).epsilon(1e-14));

    const DeviationMetrics off = deviation_metrics(pair_of({0, 0.5, 1}, {100, 200, 400}, {101, 202, 404}));
    CHECK(off.max_rel == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(off.mean_rel == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(off.rms_rel == doctest::Approx(0.01).epsilon(1e-12));

    const DeviationMetrics zref = deviation_metrics(pair_of({0, 1}, {0, 2}, {0.5, 2}));
    CHECK(zref.absolute_nodes == 1);
    CHECK(zref.max_rel == 0.5);
    CHECK(zref.location_of_max == 0.0);
}

TEST_CASE("flipping the reference negates node deviations up to renormalisation")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    for (int n = 0; n < 50; ++n) {
        const AlignedPair a = pair_of({0, 0.5, 1}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
        AlignedPair swapped = a;
        std::swap(swapped.s2, swapped.cfd);
        const auto da = node_deviations(a, Reference::S2);
        const auto dc = node_deviations(a, Reference::Cfd);
        const auto ds = node_deviations(swapped, Reference::S2);
        const auto both = node_deviations(swapped, Reference::Cfd);
        for (std::size_t k = 0; k < 3; ++k) {
            REQUIRE(dc[k] == doctest::Approx(-da[k] * a.s2[k] / a.cfd[k]).epsilon(1e-12));
            REQUIRE(ds[k] == dc[k]);
            REQUIRE(both[k] == da[k]);
        }
    }
}

TEST_CASE("shock at the rotor tip")
{
    const RowLayout layout{8, false, false};
    auto fire = [&](double tip, int row = 1) {
        AdviceInputs in;
        in.layout = layout;
        in.pairs = {pair_of({0.0, 0.5, 0.9, 1.0}, {0.9, 1.0, 1.1, 1.15}, {0.9, 1.0, 1.1, tip}, row, field::mach_relative)};
        return advise(in, RuleConfig{});
    };
    const auto hot = fire(1.35);
    REQUIRE(hot.size() == 1);
    CHECK(hot[0].code == "SHOCK_TIP");
    CHECK(hot[0].severity == Severity::Critical);
    CHECK(hot[0].stage == 1);
    CHECK(hot[0].row == "rotor");
    REQUIRE(hot[0].evidence.size() == 1);
    CHECK(*hot[0].evidence[0].span == 1.0);
    CHECK(fire(1.25).empty());
    CHECK(fire(1.30).empty());
    CHECK(fire(1.35, 2).empty()); // stator row
    CHECK(fire(std::nextafter(1.3, 2.0)).size() == 1);
}

TEST_CASE("shock rule reads CFD profiles without a design pair")
{
    AdviceInputs in;
    in.layout = RowLayout{2, false, false};
    StationProfile prof;
    prof.station = StationSpec{"row3", 3, Side::Inlet, PlaneIndex{}};
    prof.span_fractions = {0.0, 0.95, 1.0};
    prof.quantities[field::mach_relative] = {1.0, 1.31, 1.4};
    in.cfd_profiles = {prof};
    const auto a = advise(in, RuleConfig{});
    REQUIRE(a.size() == 1);
    CHECK(a[0].stage == 2);
    CHECK(a[0].evidence.size() == 2);
    CHECK_FALSE(a[0].evidence[0].s2);
}

TEST_CASE("total pressure mismatch at tip and mid span")
{
    AdviceInputs in;
    in.layout = RowLayout{2, false, false};
    in.pairs = {pair_of({0.0, 0.5, 0.9, 1.0}, {100, 100, 100, 100}, {100, 100, 102, 100.5})};
    auto a = advise(in, RuleConfig{});
    REQUIRE(a.size() == 1);
    CHECK(a[0].code == "P0_MISMATCH");
    CHECK(a[0].severity == Severity::Warn);
    CHECK(a[0].message.find("adjust the blade attack angle and bowed angle") != std::string::npos);
    CHECK(a[0].message.find("2.00%") != std::string::npos);
    REQUIRE(a[0].evidence.size() == 1);
    CHECK(*a[0].evidence[0].span == 0.9);

    in.pairs = {pair_of({0.0, 1.0}, {100, 100}, {97, 101})}; // mid value interpolates to 99, -1%
    CHECK(advise(in, RuleConfig{}).empty());
    in.pairs = {pair_of({0.0, 1.0}, {100, 100}, {96, 101})}; // mid 98.5
    a = advise(in, RuleConfig{});
    REQUIRE(a.size() == 1);
    CHECK(*a[0].evidence[0].span == 0.5);
    CHECK(a[0].message.find("at mid span") != std::string::npos);
}

TEST_CASE("stage pressure-ratio deviation on the comparison table")
{
    AdviceInputs in;
    in.layout = RowLayout{8, false, false};
    in.stages = fixtures::table1_stages();
    CHECK(std::abs(*in.stages[0].pi_rel_dev() - 0.0153) < 1e-4);
    CHECK(*in.stages[1].pi_rel_dev() == 0.0);
    CHECK(std::abs(*in.stages[2].pi_rel_dev() - 0.0048) < 1e-4);

    const auto a = advise(in, RuleConfig{});
    REQUIRE(a.size() == 1);
    CHECK(a[0].code == "STAGE_PI_DEV");
    CHECK(a[0].stage == 1);
    RuleConfig tight;
    tight.stage_pi_dev_threshold = 0.004;
    const auto b = advise(in, tight);
    REQUIRE(b.size() == 2);
    CHECK(b[0].stage == 1);
    CHECK(b[1].stage == 8);
}

TEST_CASE("identical inputs give no advisories")
{
    AdviceInputs in;
    in.layout = RowLayout{2, false, false};
    in.pairs = {pair_of({0, 0.9, 1}, {1e5, 1e5, 1e5}, {1e5, 1e5, 1e5}),
                pair_of({0, 0.9, 1}, {1.2, 1.25, 1.28}, {1.2, 1.25, 1.28}, 1, field::mach_relative)};
    in.stages = {{1, 1.3, 0.9, 1.3, 0.9}};
    CHECK(advise(in, RuleConfig{}).empty());
}

TEST_CASE("advisories are ordered by stage then rule")
{
    AdviceInputs in;
    in.layout = RowLayout{3, false, false};
    in.stages = {{3, 1.2, 0.9, 1.3, 0.9}, {1, 1.2, 0.9, 1.3, 0.9}};
    in.pairs = {pair_of({0, 1}, {1, 1}, {1, 1.4}, 5, field::mach_relative),
                pair_of({0, 1}, {100, 100}, {100, 110}, 1),
                pair_of({0, 1}, {1, 1}, {1, 1.4}, 1, field::mach_relative)};
    const auto a = advise(in, RuleConfig{});
    std::vector<std::pair<int, std::string>> got;
    for (const auto& x : a)
        got.emplace_back(x.stage, x.code);
    CHECK(got == std::vector<std::pair<int, std::string>>{{1, "SHOCK_TIP"},
                                                            {1, "P0_MISMATCH"},
                                                            {1, "STAGE_PI_DEV"},
                                                            {3, "SHOCK_TIP"},
                                                            {3, "STAGE_PI_DEV"}});
}

TEST_CASE("advise is monotone in triggers and thresholds")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> m(1.0, 1.6), bump(0.0, 0.2), th(1.1, 1.5);
    for (int n = 0; n < 200; ++n) {
        AdviceInputs in;
        in.layout = RowLayout{1, false, false};
        const double tip = m(rng);
        in.pairs = {pair_of({0, 0.95, 1}, {1, 1, 1}, {1, tip, m(rng)}, 1, field::mach_relative)};
        RuleConfig r;
        r.mach_tip_limit = th(rng);
        const auto before = advise(in, r).size();
        in.pairs[0].cfd[1] = tip + bump(rng);
        REQUIRE(advise(in, r).size() >= before);
        r.mach_tip_limit -= bump(rng);
        REQUIRE(advise(in, r).size() >= before);
    }
}

TEST_CASE("rule thresholds must be positive")
{
    RuleConfig r;
    r.p0_rel_dev_threshold = 0.0;
    CHECK_THROWS_AS(r.validate(), Error);
}

TEST_CASE("tecplot golden file")
{
    const std::string text = render_tecplot({fixtures::three_node_pair()});
    CHECK(text == fixtures::golden("tecplot_3node.dat", text));
    CHECK(text.rfind("TITLE = \"S2 vs 3D PressureTotal\"\n"
                     "VARIABLES = \"span_percent\",\"PressureTotal_S2\",\"PressureTotal_3D\"\n"
                     "ZONE T=\"row_1_outlet\" I=3 F=POINT\n",
                     0) == 0);

    const auto dir = std::filesystem::temp_directory_path() / "calib_test_tecplot";
    std::filesystem::create_directories(dir);
    write_tecplot({fixtures::three_node_pair()}, dir / "a.dat");
    write_tecplot({fixtures::three_node_pair()}, dir / "b.dat");
    CHECK(fixtures::slurp(dir / "a.dat") == text);
    CHECK(fixtures::slurp(dir / "b.dat") == text);

    CHECK_THROWS_AS(render_tecplot({}), Error);
    AlignedPair other = fixtures::three_node_pair();
    other.quantity = "MachAbsolute";
    CHECK_THROWS_AS(render_tecplot({fixtures::three_node_pair(), other}), Error);
    CHECK(code_of([&] { write_tecplot({other}, "/nonexistent/dir/x.dat"); }) == Errc::IoFailure);
}

TEST_CASE("report golden file")
{
    const std::string text = render_report(fixtures::table1_report());
    CHECK(text == fixtures::golden("report_table1.txt", text));
    CHECK(text.find("advisories:\n  - code: P0_MISMATCH") != std::string::npos);
    CHECK(text.find("  - code: STAGE_PI_DEV\n    severity: warn\n    stage: 1\n") != std::string::npos);
}

TEST_CASE("report writes explicit empty lists")
{
    ReportData r;
    r.machine = "m";
    const std::string text = render_report(r);
    CHECK(text == "machine: m\nstages: []\nstations: []\nadvisories: []\n");
    r.stages = {{1, 1.3, 0.9, std::nullopt, std::nullopt}};
    CHECK(render_report(r).find("    cfd_pi: null\n") != std::string::npos);
}

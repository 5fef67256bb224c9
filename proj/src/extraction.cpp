#include "calib/extraction.hpp"

#include "calib/error.hpp"
#include "calib/number_format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

namespace calib {

std::string StationSpec::label() const
{
    return "row_" + std::to_string(row_index) + "_" + side_name(side);
}

BandTable::BandTable(RadialBand band, std::vector<std::string> quantity_names) : band_(band)
{
    columns_ = {"x_axial", "r", "theta", "weight"};
    columns_.insert(columns_.end(), quantity_names.begin(), quantity_names.end());
}

std::vector<std::string> BandTable::quantity_names() const
{
    return {columns_.begin() + first_quantity, columns_.end()};
}

std::optional<std::size_t> BandTable::column(const std::string& name) const
{
    for (std::size_t c = first_quantity; c < columns_.size(); ++c) {
        if (columns_[c] == name)
            return c;
    }
    for (std::size_t c = 0; c < first_quantity; ++c) {
        if (columns_[c] == name)
            return c;
    }
    return std::nullopt;
}

void BandTable::add_row(std::size_t point_index, std::span<const double> values)
{
    if (values.size() != columns_.size())
        throw Error(Errc::ArrayLengthMismatch, "band table", "row width does not match column count");
    point_index_.push_back(point_index);
    data_.insert(data_.end(), values.begin(), values.end());
}

namespace {

std::array<std::size_t, 3> in_plane_axes(PlaneDirection normal)
{
    const auto n = static_cast<std::size_t>(normal);
    return {n, (n + 1) % 3, (n + 2) % 3};
}

double wrap_angle(double d)
{
    while (d > std::numbers::pi)
        d -= 2.0 * std::numbers::pi;
    while (d <= -std::numbers::pi)
        d += 2.0 * std::numbers::pi;
    return d;
}

std::string band_path(const std::string& station, const RadialBand& b)
{
    return station + "/band(R=" + format_shortest(b.center) + ",eps=" + format_shortest(b.epsilon) + ")";
}

bool is_static_quantity(const std::string& q)
{
    return q == field::density || q == field::pressure_static || q == field::temperature_static;
}

bool is_canonical(const std::string& q)
{
    const auto& c = canonical_fields();
    return std::find(c.begin(), c.end(), q) != c.end() || q == field::velocity_axial ||
           q == field::velocity_radial || q == field::velocity_tangential;
}

} // namespace

std::vector<std::size_t> select_station_points(const Zone& z, const StationSpec& spec, Axis axis)
{
    std::vector<std::size_t> out;
    if (const auto* plane = std::get_if<PlaneIndex>(&spec.selector)) {
        const auto axes = in_plane_axes(plane->direction);
        const std::size_t n_normal = z.vertex_counts[axes[0]];
        if (plane->index >= n_normal)
            throw Error(Errc::PlaneOutOfRange, spec.zone_name + "/" + spec.label(),
                        "plane " + std::to_string(plane->index) + " outside 0.." + std::to_string(n_normal - 1));
        for (std::size_t k = 0; k < z.nk(); ++k)
            for (std::size_t j = 0; j < z.nj(); ++j)
                for (std::size_t i = 0; i < z.ni(); ++i) {
                    const std::size_t c[3] = {i, j, k};
                    if (c[axes[0]] == plane->index)
                        out.push_back(z.index(i, j, k));
                }
    } else {
        const auto& win = std::get<AxialWindow>(spec.selector);
        if (!(win.tolerance >= 0.0))
            throw Error(Errc::InvalidArgument, spec.zone_name + "/" + spec.label(), "axial tolerance must be >= 0");
        const auto& xa = z.coords[static_cast<std::size_t>(axis)];
        for (std::size_t p = 0; p < xa.size(); ++p) {
            if (std::abs(xa[p] - win.x) <= win.tolerance)
                out.push_back(p);
        }
    }
    if (out.empty())
        throw Error(Errc::EmptySelection, spec.zone_name + "/" + spec.label(), "no grid point selected");
    return out;
}

std::vector<double> station_area_shares(const Zone& z, const CylindricalView& view,
                                        std::span<const std::size_t> indices, PlaneDirection normal)
{
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> slot(z.vertex_count(), npos);
    for (std::size_t s = 0; s < indices.size(); ++s)
        slot[indices[s]] = s;

    std::vector<double> share(indices.size(), 0.0);
    const auto axes = in_plane_axes(normal);
    const std::size_t n0 = z.vertex_counts[axes[0]];
    const std::size_t na = z.vertex_counts[axes[1]];
    const std::size_t nb = z.vertex_counts[axes[2]];
    auto lin = [&](std::size_t p, std::size_t a, std::size_t b) {
        std::size_t c[3];
        c[axes[0]] = p;
        c[axes[1]] = a;
        c[axes[2]] = b;
        return z.index(c[0], c[1], c[2]);
    };

    for (std::size_t p = 0; p < n0; ++p) {
        if (na > 1 && nb > 1) {
            for (std::size_t b = 0; b + 1 < nb; ++b)
                for (std::size_t a = 0; a + 1 < na; ++a) {
                    const std::size_t corner[4] = {lin(p, a, b), lin(p, a + 1, b), lin(p, a + 1, b + 1),
                                                   lin(p, a, b + 1)};
                    if (std::any_of(std::begin(corner), std::end(corner), [&](std::size_t c) { return slot[c] == npos; }))
                        continue;
                    double rr[4], tt[4];
                    for (int c = 0; c < 4; ++c) {
                        rr[c] = view.r[corner[c]];
                        tt[c] = view.theta[corner[0]] + wrap_angle(view.theta[corner[c]] - view.theta[corner[0]]);
                    }
                    double twice_area = 0.0;
                    for (int c = 0; c < 4; ++c) {
                        const int d = (c + 1) % 4;
                        twice_area += rr[c] * tt[d] - rr[d] * tt[c];
                    }
                    const double area = 0.5 * std::abs(twice_area);
                    for (int c = 0; c < 4; ++c)
                        share[slot[corner[c]]] += rr[c] * area * 0.25;
                }
        } else if (na > 1 || nb > 1) {
            // single grid line: axisymmetric slice, weight per radian
            const std::size_t n = std::max(na, nb);
            for (std::size_t a = 0; a + 1 < n; ++a) {
                const std::size_t c0 = na > 1 ? lin(p, a, 0) : lin(p, 0, a);
                const std::size_t c1 = na > 1 ? lin(p, a + 1, 0) : lin(p, 0, a + 1);
                if (slot[c0] == npos || slot[c1] == npos)
                    continue;
                const double len = std::abs(view.r[c1] - view.r[c0]);
                share[slot[c0]] += view.r[c0] * len * 0.5;
                share[slot[c1]] += view.r[c1] * len * 0.5;
            }
        } else {
            const std::size_t c0 = lin(p, 0, 0);
            if (slot[c0] != npos)
                share[slot[c0]] = 1.0;
        }
    }
    return share;
}

StationSample sample_station(const Zone& z, const StationSpec& spec, Axis axis)
{
    StationSample s;
    const CylindricalView view = cylindrical_view(z, axis);
    s.indices = select_station_points(z, spec, axis);
    const PlaneDirection normal = std::holds_alternative<PlaneIndex>(spec.selector)
                                      ? std::get<PlaneIndex>(spec.selector).direction
                                      : PlaneDirection::I;
    s.area = station_area_shares(z, view, s.indices, normal);

    const std::size_t n = s.indices.size();
    s.x_axial.resize(n);
    s.r.resize(n);
    s.theta.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        s.x_axial[p] = view.x_axial[s.indices[p]];
        s.r[p] = view.r[s.indices[p]];
        s.theta[p] = view.theta[s.indices[p]];
    }
    for (const auto& [name, f] : z.solutions) {
        std::vector<double> col(n);
        for (std::size_t p = 0; p < n; ++p)
            col[p] = f.values[s.indices[p]];
        s.quantities.emplace(name, std::move(col));
    }

    const auto vel = velocity_fields(axis);
    if (z.has_field(vel[0]) && z.has_field(vel[1]) && z.has_field(vel[2])) {
        const auto& va = s.quantities.at(vel[0]);
        const auto& v1 = s.quantities.at(vel[1]);
        const auto& v2 = s.quantities.at(vel[2]);
        std::vector<double> vr(n), vt(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double c = std::cos(s.theta[p]);
            const double sn = std::sin(s.theta[p]);
            vr[p] = v1[p] * c + v2[p] * sn;
            vt[p] = -v1[p] * sn + v2[p] * c;
        }
        s.quantities[field::velocity_axial] = va;
        s.quantities[field::velocity_radial] = std::move(vr);
        s.quantities[field::velocity_tangential] = std::move(vt);
    }
    return s;
}

BandTable filter_radial_band(const StationSample& s, const RadialBand& band, const std::vector<std::string>& quantities)
{
    if (!(band.epsilon > 0.0))
        throw Error(Errc::InvalidArgument, band_path("station", band), "band half width must be positive");

    std::vector<std::string> names = quantities;
    if (names.empty()) {
        for (const auto& [name, col] : s.quantities)
            names.push_back(name);
    }
    std::vector<const std::vector<double>*> cols;
    for (const auto& q : names) {
        auto it = s.quantities.find(q);
        if (it == s.quantities.end())
            throw Error(Errc::MissingField, q, "quantity not available at station");
        cols.push_back(&it->second);
    }

    BandTable t(band, names);
    std::vector<double> row(BandTable::first_quantity + names.size());
    for (std::size_t p = 0; p < s.size(); ++p) {
        if (!band.contains(s.r[p]))
            continue;
        row[BandTable::col_x] = s.x_axial[p];
        row[BandTable::col_r] = s.r[p];
        row[BandTable::col_theta] = s.theta[p];
        row[BandTable::col_weight] = s.area[p];
        for (std::size_t q = 0; q < cols.size(); ++q)
            row[BandTable::first_quantity + q] = (*cols[q])[p];
        t.add_row(s.indices[p], row);
    }
    if (t.rows() == 0)
        throw Error(Errc::EmptyBand, band_path("station", band), "no grid point inside the band; epsilon too small?");
    return t;
}

std::map<std::string, double> circumferential_average(const BandTable& t, Weighting weighting)
{
    if (t.rows() == 0)
        throw Error(Errc::EmptyBand, band_path("table", t.band()), "band table is empty");

    std::optional<std::size_t> rho, vax;
    if (weighting == Weighting::Mass) {
        rho = t.column(field::density);
        vax = t.column(field::velocity_axial);
        if (!rho || !vax)
            throw Error(Errc::MissingField, band_path("table", t.band()),
                        "mass weighting needs Density and VelocityAxial columns");
    }

    std::vector<std::size_t> order(t.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return t.point_index(a) < t.point_index(b); });

    const std::size_t nq = t.cols() - BandTable::first_quantity;
    std::vector<double> acc(nq, 0.0);
    double wsum = 0.0, wabs = 0.0;
    for (std::size_t row : order) {
        double w = t.at(row, BandTable::col_weight);
        if (weighting == Weighting::Mass)
            w *= t.at(row, *rho) * t.at(row, *vax);
        wsum += w;
        wabs += std::abs(w);
        for (std::size_t q = 0; q < nq; ++q)
            acc[q] += w * t.at(row, BandTable::first_quantity + q);
    }
    if (wsum == 0.0 || !std::isfinite(wsum) || std::abs(wsum) <= 1e-14 * wabs)
        throw Error(Errc::ZeroTotalWeight, band_path("table", t.band()), "weights sum to zero");

    std::map<std::string, double> out;
    for (std::size_t q = 0; q < nq; ++q)
        out[t.columns()[BandTable::first_quantity + q]] = acc[q] / wsum;
    return out;
}

double normalize_span(double r, double r_hub, double r_tip)
{
    if (!(r_tip - r_hub > 0.0))
        throw Error(Errc::HubTipDegenerate, "span", "tip radius must exceed hub radius");
    double f = (r - r_hub) / (r_tip - r_hub);
    if (f < 0.0 && f >= -1e-9)
        f = 0.0;
    if (f > 1.0 && f <= 1.0 + 1e-9)
        f = 1.0;
    return f;
}

Weighting weighting_for(const std::string& quantity, WeightingPolicy policy)
{
    switch (policy) {
    case WeightingPolicy::Area: return Weighting::Area;
    case WeightingPolicy::Mass: return Weighting::Mass;
    case WeightingPolicy::Default: break;
    }
    if (is_static_quantity(quantity) || !is_canonical(quantity))
        return Weighting::Area;
    return Weighting::Mass;
}

namespace {

// Distinct radial rings of the station, clustered with a relative tolerance.
std::vector<double> radial_rings(std::vector<double> r, double tol)
{
    std::sort(r.begin(), r.end());
    std::vector<double> rings;
    for (double v : r) {
        if (rings.empty() || v - rings.back() > tol)
            rings.push_back(v);
    }
    return rings;
}

double auto_epsilon(const std::vector<double>& rings, double radius, double tol)
{
    auto hi = std::lower_bound(rings.begin(), rings.end(), radius - tol);
    std::size_t j = static_cast<std::size_t>(hi - rings.begin());
    if (j < rings.size() && std::abs(rings[j] - radius) <= tol) {
        double gap = std::numeric_limits<double>::infinity();
        if (j > 0)
            gap = std::min(gap, rings[j] - rings[j - 1]);
        if (j + 1 < rings.size())
            gap = std::min(gap, rings[j + 1] - rings[j]);
        return 0.51 * gap;
    }
    if (j == 0)
        j = 1;
    if (j >= rings.size())
        j = rings.size() - 1;
    return 0.51 * (rings[j] - rings[j - 1]);
}

const std::vector<std::string>& primitive_fields()
{
    static const std::vector<std::string> p{field::density, field::pressure_static, field::temperature_static};
    return p;
}

const std::vector<std::string>& velocity_components()
{
    static const std::vector<std::string> v{field::velocity_axial, field::velocity_radial, field::velocity_tangential};
    return v;
}

const std::vector<std::string>& derived_fields()
{
    static const std::vector<std::string> d{field::pressure_total, field::temperature_total, field::mach_absolute,
                                            field::mach_relative};
    return d;
}

} // namespace

StationProfile extract_profile(const Zone& z, const StationSpec& spec, const ExtractionOptions& opts)
{
    const std::string where = spec.zone_name + "/" + spec.label();
    opts.gas.validate();

    std::vector<double> fractions = opts.band_fractions;
    if (fractions.empty()) {
        if (opts.n_bands < 2)
            throw Error(Errc::InvalidArgument, where, "n_bands must be at least 2");
        for (int b = 0; b < opts.n_bands; ++b)
            fractions.push_back(static_cast<double>(b) / static_cast<double>(opts.n_bands - 1));
    }
    for (std::size_t b = 0; b < fractions.size(); ++b) {
        if (!(fractions[b] >= 0.0 && fractions[b] <= 1.0))
            throw Error(Errc::InvalidArgument, where, "band span fractions must lie in [0, 1]");
        if (b > 0 && !(fractions[b] > fractions[b - 1]))
            throw Error(Errc::NonMonotoneSpan, where, "band span fractions must strictly increase");
    }
    if (opts.epsilon && !(*opts.epsilon > 0.0))
        throw Error(Errc::InvalidArgument, where, "epsilon must be positive");

    for (const char* f : {field::density, field::pressure_static, field::temperature_static})
        if (!z.has_field(f))
            throw Error(Errc::MissingField, where + "/" + f, "primitive field required for extraction");
    for (const char* f : velocity_fields(opts.axis))
        if (!z.has_field(f))
            throw Error(Errc::MissingField, where + "/" + f, "primitive field required for extraction");

    StationSample sample = sample_station(z, spec, opts.axis);
    const auto [rmin, rmax] = std::minmax_element(sample.r.begin(), sample.r.end());
    StationProfile prof;
    prof.station = spec;
    prof.weighting = opts.weighting;
    prof.r_hub = *rmin;
    prof.r_tip = *rmax;
    if (!(prof.r_tip - prof.r_hub > 0.0))
        throw Error(Errc::HubTipDegenerate, where, "station has no radial extent");
    const double height = prof.r_tip - prof.r_hub;
    const double ring_tol = 1e-9 * height;
    const auto rings = radial_rings(sample.r, ring_tol);

    const GasModel& gas = opts.gas;
    if (opts.order == DerivationOrder::DeriveThenAverage) {
        const std::size_t n = sample.size();
        const auto& p = sample.quantities.at(field::pressure_static);
        const auto& t = sample.quantities.at(field::temperature_static);
        const auto& va = sample.quantities.at(field::velocity_axial);
        const auto& vr = sample.quantities.at(field::velocity_radial);
        const auto& vt = sample.quantities.at(field::velocity_tangential);
        std::vector<double> p0(n), t0(n), ma(n), mr(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double speed = std::sqrt(va[k] * va[k] + vr[k] * vr[k] + vt[k] * vt[k]);
            const double wt = vt[k] - opts.omega * sample.r[k];
            const double wspeed = std::sqrt(va[k] * va[k] + vr[k] * vr[k] + wt * wt);
            const double a = gas.speed_of_sound(t[k]);
            t0[k] = gas.total_temperature(t[k], speed);
            p0[k] = gas.total_pressure(p[k], t[k], speed);
            ma[k] = speed / a;
            mr[k] = wspeed / a;
        }
        sample.quantities[field::pressure_total] = std::move(p0);
        sample.quantities[field::temperature_total] = std::move(t0);
        sample.quantities[field::mach_absolute] = std::move(ma);
        sample.quantities[field::mach_relative] = std::move(mr);
    }

    std::vector<std::string> columns = primitive_fields();
    columns.insert(columns.end(), velocity_components().begin(), velocity_components().end());
    if (opts.order == DerivationOrder::DeriveThenAverage)
        columns.insert(columns.end(), derived_fields().begin(), derived_fields().end());
    for (const auto& [name, col] : sample.quantities) {
        if (!is_canonical(name))
            columns.push_back(name);
    }

    bool need_mass = false;
    for (const auto& q : columns)
        need_mass = need_mass || weighting_for(q, opts.weighting) == Weighting::Mass;

    for (double f : fractions) {
        RadialBand band;
        band.center = prof.r_hub + f * height;
        band.epsilon = opts.epsilon ? *opts.epsilon : auto_epsilon(rings, band.center, ring_tol);

        BandTable table;
        try {
            table = filter_radial_band(sample, band, columns);
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyBand)
                throw;
            throw Error(Errc::EmptyBand, band_path(where, band) + "/span=" + format_shortest(f),
                        "no grid point inside the band; epsilon too small for the grid spacing");
        }

        std::map<std::string, double> area_avg = circumferential_average(table, Weighting::Area);
        std::map<std::string, double> mass_avg;
        if (need_mass) {
            try {
                mass_avg = circumferential_average(table, Weighting::Mass);
            } catch (const Error& e) {
                throw Error(e.code(), band_path(where, band), e.what());
            }
        }
        auto pick = [&](const std::string& q) {
            return weighting_for(q, opts.weighting) == Weighting::Mass ? mass_avg.at(q) : area_avg.at(q);
        };

        for (const auto& q : columns)
            prof.quantities[q].push_back(pick(q));

        if (opts.order == DerivationOrder::AverageThenDerive) {
            const double t = pick(field::temperature_static);
            const double p = pick(field::pressure_static);
            const double va = pick(field::velocity_axial);
            const double vr = pick(field::velocity_radial);
            const double vt = pick(field::velocity_tangential);
            const double speed = std::sqrt(va * va + vr * vr + vt * vt);
            const double wt = vt - opts.omega * band.center;
            const double wspeed = std::sqrt(va * va + vr * vr + wt * wt);
            const double a = gas.speed_of_sound(t);
            prof.quantities[field::pressure_total].push_back(gas.total_pressure(p, t, speed));
            prof.quantities[field::temperature_total].push_back(gas.total_temperature(t, speed));
            prof.quantities[field::mach_absolute].push_back(speed / a);
            prof.quantities[field::mach_relative].push_back(wspeed / a);
        }

        prof.span_fractions.push_back(f);
        prof.band_radii.push_back(band.center);
        prof.band_epsilons.push_back(band.epsilon);
        prof.band_point_counts.push_back(table.rows());
    }
    return prof;
}

} // namespace calib

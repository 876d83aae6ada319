#include "thickpoints/chaos.hpp"

#include "thickpoints/constants.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

namespace thickpoints::chaos {

bool ThickPointMeasure::contains(std::int32_t site) const {
    return std::binary_search(atoms.begin(), atoms.end(), site);
}

const char* to_string(ThickPointMeasure::Mode m) {
    switch (m) {
    case ThickPointMeasure::Mode::Single: return "single";
    case ThickPointMeasure::Mode::Conditioned: return "conditioned";
    case ThickPointMeasure::Mode::Multipoint: return "multipoint";
    }
    return "unknown";
}

void ThickPointMeasure::write_csv(std::ostream& os) const {
    os << "x,y,weight\n" << std::setprecision(17);
    for (std::int32_t i : atoms) {
        const Site& s = domain->site(i);
        os << s.x << "," << s.y << "," << weight << "\n";
    }
}

std::string ThickPointMeasure::json_header(std::uint64_t seed) const {
    nlohmann::ordered_json j;
    j["N"] = N;
    j["a"] = a;
    j["mode"] = to_string(mode);
    j["seed"] = seed;
    j["total_mass"] = total_mass();
    return j.dump();
}

namespace {

ThickPointMeasure empty_like(const LatticeDomain& ld, double a, ThickPointMeasure::Mode mode) {
    ThickPointMeasure m;
    m.domain = &ld;
    m.N = ld.scale();
    m.a = a;
    m.mode = mode;
    m.weight = thick_point_weight(m.N, a);
    return m;
}

void require_thickness(double a) {
    if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("thickness must lie in (0,2)");
}

} // namespace

ThickPointMeasure thick_point_measure(std::span<const WalkSample> samples, double a,
                                      std::span<const std::size_t> index_set) {
    require_thickness(a);
    if (index_set.empty()) throw std::invalid_argument("thick point measure needs a nonempty index set");
    for (std::size_t i : index_set)
        if (i >= samples.size()) throw std::out_of_range("index set refers to a missing sample");
    const LatticeDomain* ld = samples[index_set[0]].domain;
    for (std::size_t i : index_set)
        if (samples[i].domain != ld) throw std::invalid_argument("samples do not share a domain");

    auto mode = ThickPointMeasure::Mode::Single;
    if (index_set.size() > 1) mode = ThickPointMeasure::Mode::Multipoint;
    else if (samples[index_set[0]].conditioned) mode = ThickPointMeasure::Mode::Conditioned;
    auto m = empty_like(*ld, a, mode);
    m.index_set.assign(index_set.begin(), index_set.end());
    const double thr = thick_threshold(m.N, a);

    if (index_set.size() == 1) {
        for (const auto& v : samples[index_set[0]].visits)
            if (v.local_time >= thr) m.atoms.push_back(v.site);
        return m;
    }
    std::map<std::int32_t, std::pair<double, std::size_t>> acc;
    for (std::size_t i : index_set) {
        for (const auto& v : samples[i].visits) {
            if (!(v.local_time > 0.0)) continue;
            auto& [sum, hits] = acc[v.site];
            sum += v.local_time;
            ++hits;
        }
    }
    for (const auto& [site, sh] : acc)
        if (sh.second == index_set.size() && sh.first >= thr) m.atoms.push_back(site);
    return m;
}

ThickPointMeasure thick_point_measure(const WalkSample& ws, double a) {
    const std::size_t zero = 0;
    return thick_point_measure(std::span<const WalkSample>(&ws, 1), a, std::span<const std::size_t>(&zero, 1));
}

std::size_t thick_point_count(const WalkSample& ws, double a) {
    const double thr = thick_threshold(ws.domain->scale(), a);
    return static_cast<std::size_t>(
        std::count_if(ws.visits.begin(), ws.visits.end(), [thr](const auto& v) { return v.local_time >= thr; }));
}

MarkovDecomposition markov_decompose(const WalkSample& ws, const LatticeDomain& sub, double a) {
    require_thickness(a);
    const auto split = walk::split_at_first_exit(ws, sub);
    const LatticeDomain& ld = *ws.domain;
    MarkovDecomposition out;
    out.full = thick_point_measure(ws, a);
    out.first = empty_like(ld, a, out.full.mode);
    out.second = empty_like(ld, a, out.full.mode);
    out.cross = empty_like(ld, a, out.full.mode);
    out.split_site = split.split_site;
    const double thr = thick_threshold(ld.scale(), a);

    // Each part is computed from the two pieces alone.
    for (const auto& v : split.first.visits)
        if (v.local_time >= thr && !(split.second.local_time(v.site) > 0.0)) out.first.atoms.push_back(v.site);
    for (const auto& v : split.second.visits)
        if (v.local_time >= thr && !(split.first.local_time(v.site) > 0.0)) out.second.atoms.push_back(v.site);
    for (const auto& v : split.first.visits) {
        const double l1 = split.second.local_time(v.site);
        if (v.local_time > 0.0 && l1 > 0.0 && v.local_time + l1 >= thr) out.cross.atoms.push_back(v.site);
    }

    std::vector<std::int32_t> merged;
    merged.reserve(out.first.size() + out.second.size() + out.cross.size());
    merged.insert(merged.end(), out.first.atoms.begin(), out.first.atoms.end());
    merged.insert(merged.end(), out.second.atoms.begin(), out.second.atoms.end());
    merged.insert(merged.end(), out.cross.atoms.begin(), out.cross.atoms.end());
    std::sort(merged.begin(), merged.end());
    const bool disjoint = std::adjacent_find(merged.begin(), merged.end()) == merged.end();
    out.exact = disjoint && merged == out.full.atoms;
    return out;
}

std::vector<double> thickness_split(const WalkSample& ws, const LatticeDomain& sub, double a) {
    require_thickness(a);
    const auto split = walk::split_at_first_exit(ws, sub);
    const double thr = thick_threshold(ws.domain->scale(), a);
    std::vector<double> out;
    for (const auto& v : split.first.visits) {
        const double l1 = split.second.local_time(v.site);
        if (v.local_time > 0.0 && l1 > 0.0 && v.local_time + l1 >= thr) out.push_back(v.local_time / (v.local_time + l1));
    }
    return out;
}

ThickPointMeasure restrict(const ThickPointMeasure& m, const std::function<bool(continuum::Point)>& region) {
    ThickPointMeasure out = m;
    out.atoms.clear();
    for (std::int32_t i : m.atoms)
        if (region(m.domain->to_point(i))) out.atoms.push_back(i);
    return out;
}

LatticePsi::LatticePsi(std::shared_ptr<const LatticeDomain> domain, std::int32_t start, std::int32_t end,
                       lattice::GreenRowCache& cache)
    : domain_(std::move(domain)), start_(start), end_(end), cache_(&cache) {
    if (!domain_->is_boundary(end_)) throw std::invalid_argument("piece end must lie on the piece boundary");
    h_ = lattice::harmonic_measure_field(*domain_, end_);
    if (domain_->is_interior(start_)) start_row_ = cache_->row(*domain_, start_);
}

double LatticePsi::conformal_radius(std::int32_t s) const {
    const auto row = cache_->row(*domain_, s);
    const double N = domain_->scale();
    return std::exp(((*row)[s] - kGreenSlope * std::log(N) - kGreenOffset) / kGreenSlope);
}

continuum::PieceFactor LatticePsi::factor(const LatticeDomain& full, std::int32_t s) const {
    continuum::PieceFactor f;
    const std::int32_t i = domain_->index_of(full.site(s));
    if (!start_row_ || !domain_->is_interior(i) || !(h_[start_] > 0.0)) return f;
    f.covers = true;
    f.conformal_radius = conformal_radius(i);
    f.weight = (*start_row_)[i] / kGreenSlope * h_[i] / h_[start_];
    return f;
}

MartingaleField martingale_field(const LatticeDomain& ld, const WalkSample& ws, double a, int p, int r_max,
                                 int grid_side, lattice::GreenRowCache& cache) {
    if (grid_side < 2) throw std::invalid_argument("martingale grid needs at least two points per side");
    const auto pieces = walk::strip_decomposition(ld, ws, p);
    std::vector<LatticePsi> psi;
    psi.reserve(pieces.size());
    for (const auto& pc : pieces) {
        const auto& d = *pc.domain;
        psi.emplace_back(pc.domain, d.index_of(ld.site(pc.start)), d.index_of(ld.site(pc.end)), cache);
    }

    MartingaleField out;
    out.p = p;
    out.r_max = r_max;
    out.pieces = pieces.size();
    int xlo = ld.sites().front().x, xhi = ld.sites().back().x, ylo = xlo, yhi = xhi;
    for (const Site& s : ld.sites()) {
        ylo = std::min(ylo, s.y);
        yhi = std::max(yhi, s.y);
    }
    const double N = ld.scale();
    std::vector<continuum::PieceFactor> factors(psi.size());
    for (int gy = 0; gy < grid_side; ++gy) {
        for (int gx = 0; gx < grid_side; ++gx) {
            const continuum::Point x{(xlo + (xhi - xlo) * (gx + 0.5) / grid_side) / N,
                                     (ylo + (yhi - ylo) * (gy + 0.5) / grid_side) / N};
            MartingaleGridPoint pt;
            pt.x = x;
            const std::int32_t s = ld.index_of(lattice::floor_site(x, ld.scale()));
            if (s != LatticeDomain::kNone && ld.is_interior(s)) {
                for (std::size_t k = 0; k < psi.size(); ++k) factors[k] = psi[k].factor(ld, s);
                const auto md = continuum::martingale_density(factors, a, r_max);
                pt.density = md.density;
                pt.tail_bound = md.tail_bound;
                pt.covering = md.covering;
            }
            out.max_tail_bound = std::max(out.max_tail_bound, pt.tail_bound);
            out.grid.push_back(pt);
        }
    }
    return out;
}

CrossMassOracle cross_mass_expectation(const LatticeDomain& ld, const LatticeDomain& sub, std::int32_t target,
                                       double a, const lattice::SolverOptions& opts) {
    require_thickness(a);
    const std::int32_t x0 = ld.start_index();
    const std::int32_t x0_sub = sub.index_of(ld.site(x0));
    if (!sub.is_interior(x0_sub)) throw std::invalid_argument("walk start is not interior to the sub-domain");
    const auto hz = lattice::harmonic_measure_field(ld, target, opts);
    const auto g0 = lattice::discrete_green_row(sub, x0_sub, opts);
    const double thr = thick_threshold(ld.scale(), a);

    CrossMassOracle out;
    for (std::int32_t xs : sub.interior()) {
        const std::int32_t x = ld.index_of(sub.site(xs));
        const double m0 = lattice::discrete_green_row(sub, xs, opts)[xs];
        const double m1 = lattice::discrete_green_row(ld, x, opts)[x];
        // P(E0 + E1 >= thr) for independent exponentials with means m0 < m1.
        const double tail = (m1 - m0 > 1e-12 * m1)
                                ? (m1 * std::exp(-thr / m1) - m0 * std::exp(-thr / m0)) / (m1 - m0)
                                : (1.0 + thr / m1) * std::exp(-thr / m1);
        out.expected_atoms += g0[xs] / m0 * hz[x] / hz[x0] * (m1 - m0) / m1 * tail;
    }
    out.expected_mass = out.expected_atoms * thick_point_weight(ld.scale(), a);
    return out;
}

} // namespace thickpoints::chaos

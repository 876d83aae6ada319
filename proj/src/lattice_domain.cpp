#include "thickpoints/lattice_domain.hpp"

#include "thickpoints/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace thickpoints::lattice {

using continuum::Point;

Region Region::from_domain(const continuum::NiceDomain& d) { return Region(d, {}); }

Region Region::polygon(std::vector<Point> vertices) {
    if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least three vertices");
    return Region(continuum::NiceDomain::unit_disc(), std::move(vertices));
}

bool Region::contains(Point w) const {
    if (!is_polygon()) return domain_.contains(w);
    // Crossing number.
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = vertices_[i];
        const Point b = vertices_[j];
        if ((a.imag() > w.imag()) != (b.imag() > w.imag())) {
            const double t = (w.imag() - a.imag()) / (b.imag() - a.imag());
            if (w.real() < a.real() + t * (b.real() - a.real())) inside = !inside;
        }
    }
    return inside;
}

double Region::boundary_distance(Point w) const {
    if (!is_polygon()) return domain_.boundary_distance(w);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = vertices_[i];
        const Point b = vertices_[(i + 1) % n];
        const Point ab = b - a;
        const double len2 = std::norm(ab);
        double t = len2 > 0.0 ? ((w - a) * std::conj(ab)).real() / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::abs(w - (a + t * ab)));
    }
    return contains(w) ? best : -best;
}

std::array<double, 4> Region::bounding_box() const {
    if (!is_polygon()) {
        const Point c = domain_.center();
        const double r = domain_.radius();
        return {c.real() - r, c.imag() - r, c.real() + r, c.imag() + r};
    }
    std::array<double, 4> box = {vertices_[0].real(), vertices_[0].imag(), vertices_[0].real(), vertices_[0].imag()};
    for (const Point& v : vertices_) {
        box[0] = std::min(box[0], v.real());
        box[1] = std::min(box[1], v.imag());
        box[2] = std::max(box[2], v.real());
        box[3] = std::max(box[3], v.imag());
    }
    return box;
}

std::string Region::describe() const {
    if (!is_polygon()) return domain_.describe();
    std::ostringstream os;
    os.precision(17);
    os << "polygon(";
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        os << (i ? ";" : "") << vertices_[i].real() << "," << vertices_[i].imag();
    os << ")";
    return os.str();
}

Site floor_site(Point z, int N) {
    return {static_cast<int>(std::floor(N * z.real())), static_cast<int>(std::floor(N * z.imag()))};
}

LatticeDomain LatticeDomain::from_sites(int N, std::vector<Site> sites, Site start, std::string description) {
    if (N < 2) throw std::invalid_argument("lattice scale must be at least 2");
    LatticeDomain ld;
    ld.N_ = N;
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    ld.sites_ = std::move(sites);
    ld.description_ = std::move(description);
    ld.build(start);
    return ld;
}

void LatticeDomain::build(Site start) {
    if (sites_.empty()) throw DiscretizationError("lattice domain has no sites");
    int xmax = sites_.front().x, ymax = sites_.front().y;
    xmin_ = sites_.front().x;
    ymin_ = sites_.front().y;
    for (const Site& s : sites_) {
        xmin_ = std::min(xmin_, s.x);
        ymin_ = std::min(ymin_, s.y);
        xmax = std::max(xmax, s.x);
        ymax = std::max(ymax, s.y);
    }
    width_ = xmax - xmin_ + 1;
    height_ = ymax - ymin_ + 1;
    grid_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), kNone);
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        const auto gx = static_cast<std::size_t>(sites_[i].x - xmin_);
        const auto gy = static_cast<std::size_t>(sites_[i].y - ymin_);
        grid_[gx * static_cast<std::size_t>(height_) + gy] = static_cast<std::int32_t>(i);
    }

    const std::size_t n = sites_.size();
    nbr_.assign(n, {kNone, kNone, kNone, kNone});
    boundary_.assign(n, 0);
    ordinal_.assign(n, kNone);
    interior_.clear();
    boundary_list_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < 4; ++d) {
            const Site s{sites_[i].x + kSteps[d].x, sites_[i].y + kSteps[d].y};
            nbr_[i][static_cast<std::size_t>(d)] = index_of(s);
            if (nbr_[i][static_cast<std::size_t>(d)] == kNone) boundary_[i] = 1;
        }
        const auto idx = static_cast<std::int32_t>(i);
        if (boundary_[i]) {
            boundary_list_.push_back(idx);
        } else {
            ordinal_[i] = static_cast<std::int32_t>(interior_.size());
            interior_.push_back(idx);
        }
    }
    if (interior_.empty()) throw DiscretizationError("lattice domain has an empty interior");
    cell_state_.assign(grid_.size(), 0);
    for (std::size_t c = 0; c < grid_.size(); ++c)
        if (grid_[c] != kNone) cell_state_[c] = boundary_[static_cast<std::size_t>(grid_[c])] ? 2 : 1;

    start_ = index_of(start);
    if (start_ == kNone) throw DiscretizationError("start site is not in the lattice domain");

    // FNV-1a over (N, x, y, flag).
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    };
    mix(static_cast<std::uint64_t>(N_));
    for (std::size_t i = 0; i < n; ++i) {
        mix(static_cast<std::uint32_t>(sites_[i].x));
        mix(static_cast<std::uint32_t>(sites_[i].y));
        mix(boundary_[i]);
    }
    fingerprint_ = h;
}

std::int32_t LatticeDomain::index_of(Site s) const {
    const int gx = s.x - xmin_;
    const int gy = s.y - ymin_;
    if (gx < 0 || gy < 0 || gx >= width_ || gy >= height_) return kNone;
    return grid_[static_cast<std::size_t>(gx) * static_cast<std::size_t>(height_) + static_cast<std::size_t>(gy)];
}

std::int32_t LatticeDomain::cell_of(std::int32_t i) const {
    const Site& s = site(i);
    return (s.x - xmin_) * height_ + (s.y - ymin_);
}

Point LatticeDomain::to_point(std::int32_t i) const {
    const Site& s = site(i);
    return {static_cast<double>(s.x) / N_, static_cast<double>(s.y) / N_};
}

void LatticeDomain::write_site_list(std::ostream& os) const {
    const Site st = start_site();
    os << "# thickpoints-sites v1 N=" << N_ << " start=" << st.x << "," << st.y << " sites=" << sites_.size() << "\n";
    for (std::size_t i = 0; i < sites_.size(); ++i)
        os << sites_[i].x << " " << sites_[i].y << " " << (boundary_[i] ? "boundary" : "interior") << "\n";
}

LatticeDomain LatticeDomain::read_site_list(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# thickpoints-sites v1", 0) != 0)
        throw std::runtime_error("site list: missing or unsupported header");
    int N = 0;
    Site start;
    {
        const auto np = line.find("N=");
        const auto sp = line.find("start=");
        if (np == std::string::npos || sp == std::string::npos) throw std::runtime_error("site list: malformed header");
        N = std::stoi(line.substr(np + 2));
        const std::string st = line.substr(sp + 6);
        const auto comma = st.find(',');
        start = {std::stoi(st.substr(0, comma)), std::stoi(st.substr(comma + 1))};
    }
    std::vector<Site> sites;
    std::vector<std::pair<Site, bool>> flags;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Site s;
        std::string flag;
        if (!(ls >> s.x >> s.y >> flag) || (flag != "interior" && flag != "boundary"))
            throw std::runtime_error("site list: malformed line '" + line + "'");
        sites.push_back(s);
        flags.emplace_back(s, flag == "boundary");
    }
    LatticeDomain ld = from_sites(N, std::move(sites), start, "site-list");
    for (const auto& [s, b] : flags)
        if (ld.is_boundary(ld.index_of(s)) != b) throw std::runtime_error("site list: boundary flag inconsistent with site set");
    return ld;
}

namespace {

// Flood fill over an implicit site predicate, confined to a bounding box.
std::vector<Site> flood_fill(Site anchor, int xlo, int ylo, int xhi, int yhi, const std::function<bool(Site)>& ok) {
    const int w = xhi - xlo + 1;
    const int h = yhi - ylo + 1;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    auto slot = [&](Site s) { return static_cast<std::size_t>(s.x - xlo) * static_cast<std::size_t>(h) + static_cast<std::size_t>(s.y - ylo); };
    auto inside = [&](Site s) { return s.x >= xlo && s.x <= xhi && s.y >= ylo && s.y <= yhi; };
    std::vector<Site> out;
    std::deque<Site> queue{anchor};
    seen[slot(anchor)] = 1;
    while (!queue.empty()) {
        const Site s = queue.front();
        queue.pop_front();
        out.push_back(s);
        for (const Site& d : kSteps) {
            const Site t{s.x + d.x, s.y + d.y};
            if (!inside(t) || seen[slot(t)]) continue;
            seen[slot(t)] = 1;
            if (ok(t)) queue.push_back(t);
        }
    }
    return out;
}

bool candidate(const Region& region, int N, Site s) {
    const Point w{static_cast<double>(s.x) / N, static_cast<double>(s.y) / N};
    return region.contains(w) && N * region.boundary_distance(w) >= 1.0;
}

} // namespace

LatticeDomain discretize(const Region& region, int N, Point x0) {
    if (N < 2) throw std::invalid_argument("lattice scale must be at least 2");
    if (!region.contains(x0)) throw DomainError("reference point is not inside the region");
    const Site start = floor_site(x0, N);
    if (!candidate(region, N, start))
        throw DiscretizationError("floor(N x0) is within distance 1 of the scaled boundary");
    const auto box = region.bounding_box();
    const int xlo = static_cast<int>(std::floor(N * box[0])) - 1;
    const int ylo = static_cast<int>(std::floor(N * box[1])) - 1;
    const int xhi = static_cast<int>(std::ceil(N * box[2])) + 1;
    const int yhi = static_cast<int>(std::ceil(N * box[3])) + 1;
    auto sites = flood_fill(start, xlo, ylo, xhi, yhi, [&](Site s) { return candidate(region, N, s); });
    return LatticeDomain::from_sites(N, std::move(sites), start, region.describe());
}

LatticeDomain discretize(const continuum::NiceDomain& d, int N, Point x0) {
    return discretize(Region::from_domain(d), N, x0);
}

std::int32_t nearest_boundary_site(const LatticeDomain& ld, Point z) {
    const Point target = static_cast<double>(ld.scale()) * z;
    std::int32_t best = LatticeDomain::kNone;
    double best_d2 = std::numeric_limits<double>::infinity();
    // Boundary indices are increasing in (x, y), so the first minimiser is
    // the lexicographically smallest.
    for (std::int32_t i : ld.boundary()) {
        const Site& s = ld.site(i);
        const double dx = s.x - target.real();
        const double dy = s.y - target.imag();
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

LatticeDomain sub_domain(const LatticeDomain& ld, const std::function<bool(Site)>& keep, Site anchor,
                         std::string description) {
    if (!ld.contains(anchor) || !keep(anchor)) throw std::invalid_argument("anchor site is outside the sub-domain");
    const auto& s = ld.sites();
    int xlo = s.front().x, xhi = s.back().x, ylo = s.front().y, yhi = s.front().y;
    for (const Site& t : s) {
        ylo = std::min(ylo, t.y);
        yhi = std::max(yhi, t.y);
    }
    auto sites = flood_fill(anchor, xlo, ylo, xhi, yhi, [&](Site t) { return ld.contains(t) && keep(t); });
    return LatticeDomain::from_sites(ld.scale(), std::move(sites), anchor, std::move(description));
}

LatticeDomain strip_subdomain(const LatticeDomain& ld, double center_x, double half_width, Site anchor) {
    if (!(half_width > 0.0)) throw std::invalid_argument("strip half width must be positive");
    const double N = ld.scale();
    auto keep = [&](Site t) { return std::abs(t.x / N - center_x) < half_width; };
    if (!keep(anchor)) throw std::invalid_argument("anchor site is outside the strip");
    std::ostringstream os;
    os.precision(17);
    os << "strip(center=" << center_x << ";half_width=" << half_width << ") of " << ld.description();
    return sub_domain(ld, keep, anchor, os.str());
}

LatticeDomain region_subdomain(const LatticeDomain& ld, const Region& region, Site anchor) {
    const int N = ld.scale();
    return sub_domain(ld, [&](Site t) { return candidate(region, N, t); }, anchor,
                      region.describe() + " within " + ld.description());
}

} // namespace thickpoints::lattice

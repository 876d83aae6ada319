#pragma once

#include "thickpoints/continuum.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace thickpoints::lattice {

struct Site {
    int x = 0;
    int y = 0;
    auto operator<=>(const Site&) const = default;
};

/// Continuum region a lattice domain is cut from: an analytic disc (any
/// `NiceDomain`) or a simple polygon.
class Region {
public:
    static Region from_domain(const continuum::NiceDomain& d);
    /// Vertices in order, either orientation; at least three.
    static Region polygon(std::vector<continuum::Point> vertices);

    bool is_polygon() const { return !vertices_.empty(); }
    const continuum::NiceDomain& domain() const { return domain_; }
    const std::vector<continuum::Point>& vertices() const { return vertices_; }

    bool contains(continuum::Point w) const;
    /// Euclidean distance from an interior point to the boundary.
    double boundary_distance(continuum::Point w) const;
    /// Axis-aligned bounding box {xmin, ymin, xmax, ymax}.
    std::array<double, 4> bounding_box() const;
    std::string describe() const;

private:
    Region(continuum::NiceDomain d, std::vector<continuum::Point> v)
        : domain_(std::move(d)), vertices_(std::move(v)) {}

    continuum::NiceDomain domain_;
    std::vector<continuum::Point> vertices_;
};

/// U_N and its boundary. Sites are stored sorted (x, then y) and addressed
/// by dense index; "interior" means U_N minus the boundary, the set on which
/// the walk moves.
class LatticeDomain {
public:
    static constexpr std::int32_t kNone = -1;
    enum Direction { East = 0, West = 1, North = 2, South = 3 };

    /// Builds a domain from an explicit connected site set: boundary flags
    /// are recomputed from 4-neighbour membership.
    static LatticeDomain from_sites(int N, std::vector<Site> sites, Site start, std::string description);

    int scale() const { return N_; }
    std::size_t size() const { return sites_.size(); }
    const std::vector<Site>& sites() const { return sites_; }
    const Site& site(std::int32_t i) const { return sites_[static_cast<std::size_t>(i)]; }

    bool is_boundary(std::int32_t i) const { return boundary_[static_cast<std::size_t>(i)] != 0; }
    bool is_interior(std::int32_t i) const { return i >= 0 && boundary_[static_cast<std::size_t>(i)] == 0; }
    const std::vector<std::int32_t>& interior() const { return interior_; }
    const std::vector<std::int32_t>& boundary() const { return boundary_list_; }

    /// Rank of an interior site among interior sites; kNone for boundary.
    std::int32_t interior_ordinal(std::int32_t i) const { return ordinal_[static_cast<std::size_t>(i)]; }

    /// Neighbour in direction d, or kNone when outside U_N.
    std::int32_t neighbour(std::int32_t i, int d) const { return nbr_[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]; }
    const std::array<std::int32_t, 4>& neighbours(std::int32_t i) const { return nbr_[static_cast<std::size_t>(i)]; }

    /// Index of a site, or kNone when not in U_N.
    std::int32_t index_of(Site s) const;
    bool contains(Site s) const { return index_of(s) != kNone; }

    std::int32_t start_index() const { return start_; }
    Site start_site() const { return sites_[static_cast<std::size_t>(start_)]; }

    /// Dense bounding-box grid, x-major: cell = (x - xmin) * height + (y - ymin).
    /// Cell order agrees with site index order.
    std::int32_t grid_height() const { return height_; }
    std::size_t grid_cells() const { return grid_.size(); }
    std::int32_t cell_of(std::int32_t i) const;
    std::int32_t site_at_cell(std::int32_t cell) const { return grid_[static_cast<std::size_t>(cell)]; }
    /// Per cell: 0 outside U_N, 1 interior, 2 boundary.
    const std::vector<std::uint8_t>& cell_state() const { return cell_state_; }

    /// Site / N as a continuum point.
    continuum::Point to_point(std::int32_t i) const;

    /// 64-bit digest of N, the site set and the boundary flags.
    std::uint64_t fingerprint() const { return fingerprint_; }
    const std::string& description() const { return description_; }

    /// "x y interior|boundary" per line, preceded by a '#' header.
    void write_site_list(std::ostream& os) const;
    static LatticeDomain read_site_list(std::istream& is);

private:
    LatticeDomain() = default;
    void build(Site start);

    int N_ = 0;
    std::vector<Site> sites_;
    std::vector<std::uint8_t> boundary_;
    std::vector<std::int32_t> interior_;
    std::vector<std::int32_t> boundary_list_;
    std::vector<std::int32_t> ordinal_;
    std::vector<std::array<std::int32_t, 4>> nbr_;
    int xmin_ = 0, ymin_ = 0, width_ = 0, height_ = 0;
    std::vector<std::int32_t> grid_;
    std::vector<std::uint8_t> cell_state_;
    std::int32_t start_ = kNone;
    std::uint64_t fingerprint_ = 0;
    std::string description_;
};

inline constexpr std::array<Site, 4> kSteps = {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}};

/// floor(N z) componentwise.
Site floor_site(continuum::Point z, int N);

/// U_N: flood fill from floor(N x0) through sites of N*region at Euclidean
/// distance >= 1 from the scaled boundary.
LatticeDomain discretize(const Region& region, int N, continuum::Point x0);
LatticeDomain discretize(const continuum::NiceDomain& d, int N, continuum::Point x0);

/// Boundary site closest to N z; ties go to the lexicographically smaller site.
std::int32_t nearest_boundary_site(const LatticeDomain& ld, continuum::Point z);

/// Connected component containing `anchor` of the sites of U_N accepted by
/// `keep`, as a domain of its own (boundary recomputed, start = anchor).
LatticeDomain sub_domain(const LatticeDomain& ld, const std::function<bool(Site)>& keep, Site anchor,
                         std::string description);

/// Component containing `anchor` of U_N restricted to |x/N - center_x| < half_width.
LatticeDomain strip_subdomain(const LatticeDomain& ld, double center_x, double half_width, Site anchor);

/// Component containing `anchor` of the sites of U_N lying in N*region at
/// distance >= 1 from its scaled boundary.
LatticeDomain region_subdomain(const LatticeDomain& ld, const Region& region, Site anchor);

} // namespace thickpoints::lattice

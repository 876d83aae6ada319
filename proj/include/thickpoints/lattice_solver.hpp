#pragma once

#include "thickpoints/continuum.hpp"
#include "thickpoints/lattice_domain.hpp"

#include <cstdint>
#include <iosfwd>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

namespace thickpoints::lattice {

struct SolverOptions {
    double tolerance = 1e-10;     ///< relative residual ||b - Au|| / ||b||
    int max_iterations = 0;       ///< 0 means 50 * N (at least 1000)
    double omega = 0.0;           ///< SSOR relaxation; 0 picks 2 / (1 + pi / L)
};

/// Values of a discrete potential on every site of a domain (boundary values
/// included) together with how it was obtained.
struct PotentialField {
    enum class Source { PointSource, BoundaryIndicator, Dirichlet };

    const LatticeDomain* domain = nullptr;
    Source source = Source::Dirichlet;
    std::int32_t source_site = LatticeDomain::kNone;
    std::vector<double> values;
    double residual = 0.0; ///< relative residual of (I - P) u = f
    int iterations = 0;

    double operator[](std::int32_t i) const { return values[static_cast<std::size_t>(i)]; }
    double at(Site s) const;

    /// Max over the free sites, excluding `skip`, of |u - P u| (off-source harmonicity).
    double harmonic_defect(std::int32_t skip = LatticeDomain::kNone) const;

    /// "x,y,value" rows with a header.
    void write_csv(std::ostream& os) const;
};

/// Dirichlet data on a lattice domain: interior sites flagged `free` are
/// unknowns; all other sites hold `value`. Solves (I - P) u = source on the
/// free sites with P the simple random walk kernel.
struct DirichletProblem {
    std::vector<std::uint8_t> free;
    std::vector<double> value;
    std::vector<double> source;

    /// All interior sites free, zero boundary values, zero source.
    static DirichletProblem homogeneous(const LatticeDomain& ld);
};

PotentialField solve_dirichlet(const LatticeDomain& ld, const DirichletProblem& problem,
                               const SolverOptions& opts = {});

/// G(., y): expected local time at y of the rate-1 walk stopped on the
/// boundary. Boundary y gives the zero field.
PotentialField discrete_green_row(const LatticeDomain& ld, std::int32_t y, const SolverOptions& opts = {});

/// H(x, b) for every boundary site b, in the order of `ld.boundary()`.
std::vector<double> harmonic_measure(const LatticeDomain& ld, std::int32_t x, const SolverOptions& opts = {});

/// Harmonic measure as a function of the start: h(x) = H(x, target), with
/// h = 1 at target and 0 on the rest of the boundary.
PotentialField harmonic_measure_field(const LatticeDomain& ld, std::int32_t target, const SolverOptions& opts = {});

/// P_x(tau_y < tau_boundary) = G(x, y) / G(y, y).
double p_hit(const LatticeDomain& ld, std::int32_t x, std::int32_t y, const SolverOptions& opts = {});

/// P_z(tau_x < tau_y and tau_x < tau_boundary) from the hitting-probability identity.
double avoid_hit_prob(const LatticeDomain& ld, std::int32_t z, std::int32_t x, std::int32_t y,
                      const SolverOptions& opts = {});

/// Same probability from one Dirichlet solve with x absorbing at 1 and y at 0.
double avoid_hit_prob_direct(const LatticeDomain& ld, std::int32_t z, std::int32_t x, std::int32_t y,
                             const SolverOptions& opts = {});

struct GreenAsymptoticsRow {
    int N = 0;
    double green_diagonal = 0;  ///< G^{D_N}(floor(Nx), floor(Nx))
    double centred = 0;         ///< green_diagonal - g log N
    double target = 0;          ///< g log CR(x, D) + c0
    double deviation = 0;       ///< centred - target
    int iterations = 0;
    double residual = 0;
};

std::vector<GreenAsymptoticsRow> green_asymptotics_check(const continuum::NiceDomain& d, continuum::Point x,
                                                         std::span<const int> N_list, const SolverOptions& opts = {});

/// Thread-safe LRU cache of Green rows keyed by (domain fingerprint, site).
/// Equal fingerprints share rows, so cached fields carry no domain pointer
/// and are read by site index only.
class GreenRowCache {
public:
    explicit GreenRowCache(std::size_t byte_budget = std::size_t{256} << 20) : budget_(byte_budget) {}

    std::shared_ptr<const PotentialField> row(const LatticeDomain& ld, std::int32_t y, const SolverOptions& opts = {});

    std::size_t hits() const;
    std::size_t misses() const;
    std::size_t bytes() const;
    void clear();

private:
    struct Key {
        std::uint64_t fingerprint;
        std::int32_t site;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return static_cast<std::size_t>(k.fingerprint ^ (static_cast<std::uint64_t>(k.site) * 0x9E3779B97F4A7C15ull));
        }
    };
    using Entry = std::pair<Key, std::shared_ptr<const PotentialField>>;

    std::size_t budget_;
    std::size_t bytes_ = 0;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
    std::list<Entry> lru_;
    std::unordered_map<Key, std::list<Entry>::iterator, KeyHash> index_;
    mutable std::mutex mutex_;
};

} // namespace thickpoints::lattice

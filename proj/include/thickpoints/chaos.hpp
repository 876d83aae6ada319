#pragma once

#include "thickpoints/continuum.hpp"
#include "thickpoints/lattice_solver.hpp"
#include "thickpoints/walk.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace thickpoints::chaos {

using lattice::LatticeDomain;
using lattice::Site;
using walk::WalkSample;

/// Atomic measure on thick points with the common weight log N / N^{2-a}.
struct ThickPointMeasure {
    enum class Mode { Single, Conditioned, Multipoint };

    const LatticeDomain* domain = nullptr;
    std::vector<std::int32_t> atoms; ///< sorted site indices
    int N = 0;
    double a = 0.0;
    Mode mode = Mode::Single;
    std::vector<std::size_t> index_set;
    double weight = 0.0;

    double total_mass() const { return static_cast<double>(atoms.size()) * weight; }
    std::size_t size() const { return atoms.size(); }
    bool contains(std::int32_t site) const;

    /// "x,y,weight" rows with a header.
    void write_csv(std::ostream& os) const;
    /// {N, a, mode, seed, total_mass}.
    std::string json_header(std::uint64_t seed) const;
};

const char* to_string(ThickPointMeasure::Mode m);

/// Atoms at sites x with sum_{i in I} l_x^(i) >= g a log^2 N and l_x^(i) > 0
/// for every i in I.
ThickPointMeasure thick_point_measure(std::span<const WalkSample> samples, double a,
                                      std::span<const std::size_t> index_set);
ThickPointMeasure thick_point_measure(const WalkSample& ws, double a);

std::size_t thick_point_count(const WalkSample& ws, double a);

struct MarkovDecomposition {
    ThickPointMeasure full;
    ThickPointMeasure first;  ///< thick for the first piece, untouched by the second
    ThickPointMeasure second; ///< thick for the second piece, untouched by the first
    ThickPointMeasure cross;  ///< visited by both pieces, thick in total
    std::int32_t split_site = LatticeDomain::kNone;
    bool exact = false;       ///< the three parts partition `full`
};

MarkovDecomposition markov_decompose(const WalkSample& ws, const LatticeDomain& sub, double a);

/// l0 / (l0 + l1) at each cross atom, in site order.
std::vector<double> thickness_split(const WalkSample& ws, const LatticeDomain& sub, double a);

/// Atoms whose continuum position site / N satisfies `region`.
ThickPointMeasure restrict(const ThickPointMeasure& m, const std::function<bool(continuum::Point)>& region);

/// Lattice estimate of the psi factors of one lattice triple (D, x_i, x_{i+1}):
/// G^D(x_i, s) / g, CR(s, D) from the diagonal Green asymptotic, and the
/// harmonic measure ratio h(s) / h(x_i).
class LatticePsi {
public:
    LatticePsi(std::shared_ptr<const LatticeDomain> domain, std::int32_t start, std::int32_t end,
               lattice::GreenRowCache& cache);

    const LatticeDomain& domain() const { return *domain_; }

    /// CR, weight and coverage at site index `s` of the full domain `full`.
    continuum::PieceFactor factor(const LatticeDomain& full, std::int32_t s) const;

    /// Continuum CR(s/N, D) from the diagonal Green asymptotic; s indexes domain().
    double conformal_radius(std::int32_t s) const;

private:
    std::shared_ptr<const LatticeDomain> domain_;
    std::int32_t start_;       // in domain_
    std::int32_t end_;         // in domain_
    lattice::GreenRowCache* cache_;
    std::shared_ptr<const lattice::PotentialField> start_row_;
    lattice::PotentialField h_;
};

struct MartingaleGridPoint {
    continuum::Point x;
    double density = 0.0;
    double tail_bound = 0.0;
    std::size_t covering = 0;
};

struct MartingaleField {
    int p = 0;
    int r_max = 0;
    std::size_t pieces = 0;
    std::vector<MartingaleGridPoint> grid;
    double max_tail_bound = 0.0;
};

/// Density of the martingale approximation on a regular grid of
/// `grid_side` x `grid_side` points covering the bounding box of the domain,
/// for a walk sample with stored path. Strip pieces come from
/// `strip_decomposition(ld, ws, p)`.
MartingaleField martingale_field(const LatticeDomain& ld, const WalkSample& ws, double a, int p, int r_max,
                                 int grid_side, lattice::GreenRowCache& cache);

/// Exact finite-N expectation of the cross mass of the Markov decomposition
/// for the walk from the start of `ld` conditioned to exit at `target`,
/// split at its first exit from `sub`.
struct CrossMassOracle {
    double expected_mass = 0.0;
    double expected_atoms = 0.0;
};

CrossMassOracle cross_mass_expectation(const LatticeDomain& ld, const LatticeDomain& sub, std::int32_t target,
                                       double a, const lattice::SolverOptions& opts = {});

} // namespace thickpoints::chaos

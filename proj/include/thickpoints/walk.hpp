#pragma once

#include "thickpoints/lattice_domain.hpp"
#include "thickpoints/lattice_solver.hpp"
#include "thickpoints/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace thickpoints::walk {

using lattice::LatticeDomain;
using lattice::Site;

struct VisitRecord {
    std::int32_t site = LatticeDomain::kNone;
    std::uint32_t visits = 0;
    double local_time = 0.0;
};

/// One trajectory of the rate-1 walk from `start` until it first hits the
/// boundary of `domain` at `exit`.
///
/// `visits` is sorted by site index and lists every site with a positive
/// visit count. The exit site is not listed: the walk is stopped there and
/// accumulates no local time. When stored, `path[0..T]` runs from start to
/// exit and `holding[i]` is the holding time spent at `path[i]`, i < T.
struct WalkSample {
    const LatticeDomain* domain = nullptr;
    std::int32_t start = LatticeDomain::kNone;
    std::int32_t exit = LatticeDomain::kNone;
    std::vector<VisitRecord> visits;
    std::optional<std::vector<std::int32_t>> path;
    std::optional<std::vector<double>> holding;
    std::uint64_t stream = 0;
    bool conditioned = false;

    std::uint64_t steps() const;
    const VisitRecord* find(std::int32_t site) const;
    double local_time(std::int32_t site) const;
    std::uint32_t visit_count(std::int32_t site) const;
    double total_time() const;
};

struct WalkOptions {
    bool store_path = false;
    /// Draw one Exp(1) holding time per step instead of Gamma(visits, 1)
    /// per site. Holding times are rounded to odd multiples of 2^-33 so that
    /// every partial sum is exact and per-site local times split additively.
    bool explicit_holding = false;
    std::uint64_t max_steps = 1'000'000'000;
};

/// Reusable per-worker buffers; sized lazily to the domain.
class WalkScratch {
public:
    std::vector<std::uint32_t> counts;
    std::vector<double> time;
    std::vector<std::int32_t> touched;
    std::vector<std::int32_t> path;
    std::vector<double> holding;

    void prepare(std::size_t n_sites);
};

WalkSample sample_walk(const LatticeDomain& ld, std::int32_t start, Rng& rng, const WalkOptions& opts = {},
                       WalkScratch* scratch = nullptr);

/// Doob transform by h = H(., exit_target): from x step to neighbour y with
/// probability h(y) / sum of h over the neighbours of x.
WalkSample sample_conditioned_walk(const LatticeDomain& ld, std::int32_t start, std::int32_t exit_target,
                                   const lattice::PotentialField& h_field, Rng& rng, const WalkOptions& opts = {},
                                   WalkScratch* scratch = nullptr);

/// Whether an excursion still running when the walk exits counts.
enum class TruncatedExcursion { Count, Drop };

struct ExcursionStats {
    Site center;
    int radius = 0;
    std::uint32_t count = 0;
    std::vector<double> local_times; ///< local time at the centre, per excursion
    double q = 0.0;                  ///< log(N/R) / log N
};

/// Excursions from x to C_R(x) = {s : |s - x|_inf = R} along the stored
/// path. Requires path and explicit holding times.
ExcursionStats count_excursions(const WalkSample& ws, Site x, int R,
                                TruncatedExcursion convention = TruncatedExcursion::Count);

/// Count only; needs the path but not holding times.
std::uint32_t excursion_count(std::span<const std::int32_t> path, const LatticeDomain& ld, Site x, int R,
                              TruncatedExcursion convention = TruncatedExcursion::Count);

double excursion_q(int N, int R);

/// Streaming excursion counter for repeated walks: runs the walk without
/// storing it and records, per excursion from x to C_R(x), the number of
/// visits to x. Steps consume the generator exactly as `sample_walk` does, so
/// counts agree with `excursion_count` on the path of a `sample_walk` call
/// with the same generator state. The local time of an excursion with k
/// visits is then drawn as Gamma(k, 1).
class ExcursionSampler {
public:
    ExcursionSampler(const LatticeDomain& ld, Site x, int R,
                     TruncatedExcursion convention = TruncatedExcursion::Count);

    ExcursionStats sample(std::int32_t start, Rng& rng, std::uint64_t max_steps = 1'000'000'000) const;

private:
    const LatticeDomain* ld_;
    Site x_;
    int R_;
    TruncatedExcursion convention_;
    std::int32_t x_cell_ = -1;
    std::vector<std::uint8_t> contour_; // per grid cell
};

struct GoodEventScale {
    int R = 0;
    std::uint32_t count = 0;
    double threshold = 0.0;
    bool ok = true;
};

struct GoodEventResult {
    bool good = true;
    bool vacuous = false; ///< no dyadic R in [N^{1/2 - a/4}, eps N]
    std::vector<GoodEventScale> scales;
};

/// Dyadic radii R in [N^{1/2 - a/4}, eps N].
std::vector<int> good_event_radii(int N, double a, double eps);

/// (b/2) (1 + q_R) / (1 - q_R) log(N / R).
double good_event_threshold(int N, int R, double b);

GoodEventResult good_event(const WalkSample& ws, Site x, double a, double b, double eps, int N);

struct SplitResult {
    WalkSample first;
    WalkSample second;
    std::int32_t split_site = LatticeDomain::kNone; ///< Y, index in the full domain
    std::uint64_t split_step = 0;
};

/// Splits a stored path at its first visit to a site that is not interior to
/// `sub`. Local times of the pieces are sums of the stored holding times.
SplitResult split_at_first_exit(const WalkSample& ws, const LatticeDomain& sub);

/// One piece of a strip decomposition: the walk from `start` until it first
/// leaves the interior of `domain` at `end` (indices in the full domain).
struct StripPiece {
    double center = 0.0;
    std::shared_ptr<const LatticeDomain> domain;
    std::int32_t start = LatticeDomain::kNone;
    std::int32_t end = LatticeDomain::kNone;
    std::uint64_t begin_step = 0;
    std::uint64_t end_step = 0;
};

/// Cuts the stored path into pieces living in vertical strips of half-width
/// 2^-p centred on the grid 2^-p Z. The first strip is centred at
/// 2^-p floor(2^p x0); on leaving a strip through a side the next strip is
/// centred one grid step over; the last piece ends at the domain exit.
std::vector<StripPiece> strip_decomposition(const LatticeDomain& ld, const WalkSample& ws, int p);

/// Versioned varint-delta encoding of a stored path.
void write_path(std::ostream& os, const WalkSample& ws);
std::vector<Site> read_path(std::istream& is);

} // namespace thickpoints::walk

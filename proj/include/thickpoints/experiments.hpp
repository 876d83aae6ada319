#pragma once

#include "thickpoints/continuum.hpp"
#include "thickpoints/lattice_domain.hpp"
#include "thickpoints/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thickpoints::experiments {

using continuum::Point;
using report::json;

/// Outcome of one named assertion. Informational checks are reported but do
/// not decide the exit status.
struct Check {
    std::string name;
    bool passed = true;
    bool informational = false;
    std::string detail;
};

/// Everything one experiment produces: a report document ("report-v1"),
/// CSV tables, checks and a few human-readable summary lines.
struct ExperimentResult {
    std::string command;
    json report;
    std::vector<std::pair<std::string, report::CsvTable>> tables;
    std::vector<Check> checks;
    std::vector<std::string> summary;
    double wall_time = 0.0;

    /// All non-informational checks passed.
    bool passed() const;
    const Check* find_check(const std::string& name) const;
};

/// Writes `<command>.json` and the CSV tables into `out`.
void emit(const ExperimentResult& r, report::OutputSet& out, const std::string& prefix = "");

/// Seed and parallelism shared by every experiment. The worker count never
/// changes results and is kept out of reports.
struct RunOptions {
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
};

/// "unit_disc" | "disc" | "disc:cx,cy,r".
continuum::NiceDomain parse_domain(const std::string& spec);

/// Disc region A given as "cx,cy,r".
struct DiscRegion {
    Point center{0.0, 0.0};
    double radius = 0.5;

    static DiscRegion parse(const std::string& spec);
    bool contains(Point w) const { return std::abs(w - center) < radius; }
    std::string describe() const;
};

ExperimentResult constants_check();

struct GreenCheckParams {
    std::string domain = "unit_disc";
    Point x{0.0, 0.0};
    Point y{0.0, 0.5};
    std::vector<int> Ns{128, 256, 512, 1024};
    double diagonal_tol = 0.05;
    double off_diagonal_tol = 0.02;
};
/// Diagonal asymptotic G(x,x) - g log N -> g log CR(x) + c0 and the
/// off-diagonal limit G(x,y) -> g G^D(x,y), one solve per N.
ExperimentResult green_check(const GreenCheckParams& p);

struct HittingCheckParams {
    std::string domain = "unit_disc";
    int N = 128;
    int triples = 50;
    double tol = 1e-8;
    double spread = 0.8; ///< sites drawn uniformly from |x| < spread
};
ExperimentResult hitting_check(const HittingCheckParams& p, const RunOptions& o);

struct LocalTimeParams {
    std::string domain = "unit_disc";
    int N = 128;
    Point x{0.0, 0.0};
    std::size_t samples = 10000;
    int arcs = 4;
};
/// Under P_x: l_x ~ Exp(G(x,x)) (KS) and l_x independent of the exit arc (chi^2).
ExperimentResult local_time_law(const LocalTimeParams& p, const RunOptions& o);

struct ExcursionLawParams {
    std::string domain = "unit_disc";
    int N = 256;
    Point x0{0.0, 0.0};
    Point x{0.25, 0.0};
    int R = 16;
    std::size_t samples = 100000;
    int kmax = 3;
    double band = 5.0;     ///< ratio band q_R (1 +- band / log N)
    double mean_tol = 0.05;
    bool drop_truncated = false;
};
ExperimentResult excursion_law(const ExcursionLawParams& p, const RunOptions& o);

struct FirstMomentParams {
    std::string domain = "unit_disc";
    Point x0{0.0, 0.0};
    int N = 256;
    double a = 0.5;
    std::size_t samples = 20000;
    DiscRegion region{};
    std::optional<Point> exit_target; ///< condition on exiting here
    double rel_tol = 0.15;
};
/// (log N / N^{2-a}) E[#thick points in A] against e^{c0 a/g} int_A CR^a G
/// (or the psi density when conditioned).
ExperimentResult first_moment(const FirstMomentParams& p, const RunOptions& o);

struct ThickScalingParams {
    std::string domain = "unit_disc";
    Point x0{0.0, 0.0};
    std::vector<int> Ns{64, 128, 256};
    double a = 0.5;
    std::size_t samples = 40000;
};
ExperimentResult thick_scaling(const ThickScalingParams& p, const RunOptions& o);

struct MarkovCheckParams {
    std::string domain = "unit_disc";
    Point x0{0.0, 0.0};
    int N = 64;
    double a = 0.5;
    std::size_t samples = 10000;
    DiscRegion sub{{0.0, 0.0}, 0.5};
    std::optional<Point> exit_target = Point{1.0, 0.0};
    bool oracle = true; ///< compare the cross mass with its exact expectation
};
ExperimentResult markov_check(const MarkovCheckParams& p, const RunOptions& o);

struct SplitUniformityParams {
    std::string domain = "unit_disc";
    Point x0{0.0, 0.0};
    std::vector<int> Ns{64, 256};
    double a = 0.5;
    std::size_t samples = 2000;
    DiscRegion sub{{0.0, 0.0}, 0.5};
};
ExperimentResult split_uniformity(const SplitUniformityParams& p, const RunOptions& o);

struct SimplexEvalParams {
    double a = 1.0;
    std::vector<double> coefficients; ///< evaluated when non-empty
    int random_sets = 0;              ///< closed form / brute force comparisons
    double r2_tol = 1e-8;
    double r3_tol = 1e-6;
};
ExperimentResult simplex_eval(const SimplexEvalParams& p, const RunOptions& o);

struct MartingaleParams {
    std::string domain = "unit_disc";
    Point x0{0.0, 0.0};
    int N = 64;
    double a = 0.5;
    int p = 3;
    int r_max = 2;
    int grid = 32;
    Point exit_target{1.0, 0.0};
    std::size_t sample_index = 0;
};
ExperimentResult martingale_approx(const MartingaleParams& p, const RunOptions& o);

struct ConditionedCheckParams {
    std::string domain = "unit_disc";
    Point x0{0.0, 0.0};
    int N = 64;
    std::size_t samples = 10000;
    Point exit_target{1.0, 0.0};
    std::vector<Point> probes = default_probes();

    static std::vector<Point> default_probes();
};
/// h-transform walks: exit equals the target always; E[l_x] against
/// G(x0,x) H(x,z) / H(x0,z) at the probe sites.
ExperimentResult conditioned_check(const ConditionedCheckParams& p, const RunOptions& o);

enum class Profile { Quick, Full };

/// Every experiment with profile-sized parameters, each in its own
/// subdirectory of `out`, plus battery.json. Returns the per-experiment results.
std::vector<ExperimentResult> run_battery(Profile profile, const RunOptions& o, report::OutputSet& out);

} // namespace thickpoints::experiments

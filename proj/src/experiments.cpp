#include "thickpoints/experiments.hpp"

#include "thickpoints/chaos.hpp"
#include "thickpoints/constants.hpp"
#include "thickpoints/errors.hpp"
#include "thickpoints/harness.hpp"
#include "thickpoints/lattice_solver.hpp"
#include "thickpoints/walk.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace thickpoints::experiments {

namespace {

using lattice::LatticeDomain;
using lattice::Site;
using report::CsvTable;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

json pt(Point p) { return json::array({p.real(), p.imag()}); }

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

ExperimentResult start(const std::string& command, json config) {
    ExperimentResult r;
    r.command = command;
    r.report["schema"] = report::kReportSchema;
    r.report["command"] = command;
    r.report["config"] = std::move(config);
    return r;
}

void check(ExperimentResult& r, std::string name, bool ok, std::string detail, bool informational = false) {
    r.checks.push_back({std::move(name), ok, informational, std::move(detail)});
}

void finish(ExperimentResult& r, const Stopwatch& sw) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"informational", c.informational},
                          {"detail", c.detail}});
    r.report["checks"] = checks;
    r.report["passed"] = r.passed();
    r.wall_time = sw.seconds();
}

mc::RunConfig run_config(const RunOptions& o, const std::string& estimator, std::size_t n, int N, double a = 0.5) {
    mc::RunConfig c;
    c.master_seed = o.seed;
    c.estimator = estimator;
    c.sample_count = n;
    c.Ns = {N};
    c.a = a;
    c.b = std::max(c.b, a + 0.1);
    c.workers = o.workers;
    return c;
}

std::uint64_t tag_for(const std::string& name) { return mc::experiment_tag(name); }

/// Replication i of experiment `name` draws from this generator.
Rng replication_rng(const RunOptions& o, const std::string& name, std::size_t i) {
    return Rng(o.seed, stream_id(tag_for(name), i));
}

std::int32_t site_index(const LatticeDomain& ld, Point z, const char* what) {
    const auto i = ld.index_of(lattice::floor_site(z, ld.scale()));
    if (!ld.is_interior(i)) throw DomainError(std::string(what) + " is not an interior lattice site");
    return i;
}

/// Lattice exit target for a continuum boundary point of the analytic domain.
std::int32_t lattice_target(const continuum::NiceDomain& d, const LatticeDomain& ld, Point z) {
    if (!d.on_boundary(z, 1e-9)) throw DomainError("conditioning target is not a boundary point of the domain");
    return lattice::nearest_boundary_site(ld, z);
}

walk::WalkScratch& scratch() {
    thread_local walk::WalkScratch s;
    return s;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.passed; });
}

const Check* ExperimentResult::find_check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

void emit(const ExperimentResult& r, report::OutputSet& out, const std::string& prefix) {
    out.write_json(prefix + r.command + ".json", r.report);
    for (const auto& [name, table] : r.tables) out.write_csv(prefix + name + ".csv", table);
}

continuum::NiceDomain parse_domain(const std::string& spec) {
    if (spec == "unit_disc" || spec == "disc") return continuum::NiceDomain::unit_disc();
    if (spec.rfind("disc:", 0) == 0) {
        double cx = 0, cy = 0, r = 0;
        char tail = 0;
        if (std::sscanf(spec.c_str() + 5, "%lf,%lf,%lf%c", &cx, &cy, &r, &tail) == 3 && r > 0)
            return continuum::NiceDomain::disc({cx, cy}, r);
    }
    throw std::invalid_argument("unknown domain '" + spec + "' (expected unit_disc, disc or disc:cx,cy,r)");
}

DiscRegion DiscRegion::parse(const std::string& spec) {
    double cx = 0, cy = 0, r = 0;
    char tail = 0;
    if (std::sscanf(spec.c_str(), "%lf,%lf,%lf%c", &cx, &cy, &r, &tail) != 3 || !(r > 0))
        throw std::invalid_argument("region must be cx,cy,r with r > 0");
    return {{cx, cy}, r};
}

std::string DiscRegion::describe() const {
    return fmt("disc(%.17g,%.17g;%.17g)", center.real(), center.imag(), radius);
}

// ---------------------------------------------------------------------------

ExperimentResult constants_check() {
    Stopwatch sw;
    auto r = start("constants", json::object());
    // Independent arithmetic from decimal expansions.
    const double pi = 3.14159265358979323846264338327950288;
    const double euler = 0.57721566490153286060651209008240243;
    const double g_ref = 2.0 / pi;
    const double c0_ref = g_ref * (euler + 0.5 * std::log(8.0));
    r.report["g"] = kGreenSlope;
    r.report["c0"] = kGreenOffset;
    r.report["g_reference"] = g_ref;
    r.report["c0_reference"] = c0_ref;
    check(r, "g", std::abs(kGreenSlope - g_ref) <= 1e-12 && std::abs(kGreenSlope - 0.63661977) < 5e-9,
          fmt("g = %.15f, reference %.15f", kGreenSlope, g_ref));
    check(r, "c0", std::abs(kGreenOffset - c0_ref) <= 1e-12 && std::abs(kGreenOffset - 1.02937) < 5e-6,
          fmt("c0 = %.15f, reference %.15f", kGreenOffset, c0_ref));
    r.summary.push_back(fmt("g  = %.15f", kGreenSlope));
    r.summary.push_back(fmt("c0 = %.15f", kGreenOffset));
    finish(r, sw);
    return r;
}

ExperimentResult green_check(const GreenCheckParams& p) {
    Stopwatch sw;
    if (p.Ns.empty()) throw std::invalid_argument("green-check needs at least one N");
    const auto d = parse_domain(p.domain);
    auto r = start("green-check", {{"domain", p.domain},
                                   {"x", pt(p.x)},
                                   {"y", pt(p.y)},
                                   {"N", p.Ns},
                                   {"diagonal_tol", p.diagonal_tol},
                                   {"off_diagonal_tol", p.off_diagonal_tol}});
    const double diag_target = kGreenSlope * std::log(continuum::conformal_radius(d, p.x)) + kGreenOffset;
    const double off_target = kGreenSlope * continuum::green_function(d, p.x, p.y);
    CsvTable table({"N", "sites", "iterations", "residual", "green_diagonal", "centred", "target", "deviation",
                    "green_off_diagonal", "off_target", "off_deviation"});
    json rows = json::array();
    std::vector<double> devs;
    double last_off = 0.0;
    for (int N : p.Ns) {
        const auto ld = lattice::discretize(d, N, p.x);
        const auto xi = site_index(ld, p.x, "x");
        const auto yi = site_index(ld, p.y, "y");
        const auto row = lattice::discrete_green_row(ld, xi);
        const double diag = row[xi];
        const double centred = diag - kGreenSlope * std::log(static_cast<double>(N));
        const double dev = centred - diag_target;
        const double off = row[yi];
        last_off = off - off_target;
        devs.push_back(dev);
        table.add_row({N, ld.size(), row.iterations, row.residual, diag, centred, diag_target, dev, off, off_target,
                       last_off});
        rows.push_back({{"N", N},
                        {"sites", ld.size()},
                        {"iterations", row.iterations},
                        {"residual", row.residual},
                        {"green_diagonal", diag},
                        {"centred", centred},
                        {"target", diag_target},
                        {"deviation", dev},
                        {"green_off_diagonal", off},
                        {"off_target", off_target},
                        {"off_deviation", last_off}});
        r.summary.push_back(fmt("N=%5d  G(x,x)-g log N = %.6f  target %.6f  dev %+.2e  G(x,y) = %.6f  target %.6f", N,
                                centred, diag_target, dev, off, off_target));
    }
    r.report["rows"] = rows;
    r.tables.emplace_back("green-check", std::move(table));
    const int Nmax = p.Ns.back();
    check(r, "diagonal deviation", std::abs(devs.back()) <= p.diagonal_tol,
          fmt("|dev| = %.3e at N=%d, tol %.3g", std::abs(devs.back()), Nmax, p.diagonal_tol));
    bool mono = true;
    for (std::size_t i = 1; i < devs.size(); ++i) mono = mono && std::abs(devs[i]) < std::abs(devs[i - 1]);
    check(r, "diagonal monotone", mono, "|dev| strictly decreasing along the N list");
    check(r, "off-diagonal deviation", std::abs(last_off) <= p.off_diagonal_tol,
          fmt("|G(x,y) - g G^D(x,y)| = %.3e at N=%d, tol %.3g", std::abs(last_off), Nmax, p.off_diagonal_tol));
    finish(r, sw);
    return r;
}

ExperimentResult hitting_check(const HittingCheckParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("hitting-check", {{"domain", p.domain},
                                     {"N", p.N},
                                     {"triples", p.triples},
                                     {"tol", p.tol},
                                     {"spread", p.spread},
                                     {"seed", o.seed}});
    const auto ld = lattice::discretize(d, p.N, d.center());
    lattice::SolverOptions sopts;
    sopts.tolerance = 1e-13;
    const std::string name = "hitting-check@N=" + std::to_string(p.N);
    struct Row {
        Site z, x, y;
        double formula = 0, direct = 0;
    };
    auto rows = mc::parallel_map<Row>(static_cast<std::size_t>(p.triples), o.workers, [&](std::size_t i) {
        Rng rng = replication_rng(o, name, i);
        auto draw = [&] {
            for (;;) {
                const Point w = d.center() + d.radius() * p.spread * Point(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
                if (std::abs(w - d.center()) >= d.radius() * p.spread) continue;
                const auto s = ld.index_of(lattice::floor_site(w, p.N));
                if (ld.is_interior(s)) return s;
            }
        };
        std::int32_t z = draw(), x = draw(), y = draw();
        while (x == z) x = draw();
        while (y == z || y == x) y = draw();
        Row row{ld.site(z), ld.site(x), ld.site(y)};
        row.formula = lattice::avoid_hit_prob(ld, z, x, y, sopts);
        row.direct = lattice::avoid_hit_prob_direct(ld, z, x, y, sopts);
        return row;
    });
    CsvTable table({"z_x", "z_y", "x_x", "x_y", "y_x", "y_y", "formula", "direct", "abs_diff"});
    double worst = 0.0;
    for (const auto& row : rows) {
        const double diff = std::abs(row.formula - row.direct);
        worst = std::max(worst, diff);
        table.add_row({row.z.x, row.z.y, row.x.x, row.x.y, row.y.x, row.y.y, row.formula, row.direct, diff});
    }
    r.report["max_abs_diff"] = worst;
    r.tables.emplace_back("hitting-check", std::move(table));
    check(r, "identity", worst <= p.tol, fmt("max |formula - direct| = %.3e over %d triples, tol %.1e", worst, p.triples, p.tol));
    r.summary.push_back(r.checks.back().detail);
    finish(r, sw);
    return r;
}

ExperimentResult local_time_law(const LocalTimeParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("local-time-law", {{"domain", p.domain},
                                      {"N", p.N},
                                      {"x", pt(p.x)},
                                      {"samples", p.samples},
                                      {"arcs", p.arcs},
                                      {"seed", o.seed}});
    if (p.arcs < 2) throw std::invalid_argument("local-time-law needs at least two arcs");
    const auto ld = lattice::discretize(d, p.N, p.x);
    const auto xi = ld.start_index();
    const double G = lattice::discrete_green_row(ld, xi)[xi];
    const Site xs = ld.site(xi);
    const std::string name = "local-time-law@N=" + std::to_string(p.N);
    struct Obs {
        double ell = 0;
        int arc = 0;
    };
    auto obs = mc::parallel_map<Obs>(p.samples, o.workers, [&](std::size_t i) {
        Rng rng = replication_rng(o, name, i);
        const auto ws = walk::sample_walk(ld, xi, rng, {}, &scratch());
        const Site e = ld.site(ws.exit);
        double theta = std::atan2(static_cast<double>(e.y - xs.y), static_cast<double>(e.x - xs.x));
        if (theta < 0) theta += 2 * std::numbers::pi;
        const int arc = std::min(p.arcs - 1, static_cast<int>(theta / (2 * std::numbers::pi) * p.arcs));
        return Obs{ws.local_time(xi), arc};
    });
    std::vector<double> ell(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) ell[i] = obs[i].ell;

    const auto mean = mc::summarize("mean local time", ell, G);
    const auto ks = mc::ks_test(ell, [G](double t) { return 1.0 - std::exp(-t / G); });

    std::vector<double> sorted = ell;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double cuts[3] = {sorted[n / 4], sorted[n / 2], sorted[3 * n / 4]};
    std::vector<std::vector<double>> tab(4, std::vector<double>(static_cast<std::size_t>(p.arcs), 0.0));
    for (const auto& ob : obs) {
        const std::size_t q = static_cast<std::size_t>(std::upper_bound(cuts, cuts + 3, ob.ell) - cuts);
        tab[q][static_cast<std::size_t>(ob.arc)] += 1.0;
    }
    const auto chi = mc::chi2_independence_test(tab);

    r.report["green_diagonal"] = G;
    r.report["mean"] = report::to_json(mean);
    r.report["ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"n", ks.n}};
    r.report["chi2"] = {{"statistic", chi.statistic}, {"p_value", chi.p_value}, {"dof", chi.dof}};
    CsvTable table({"quartile", "arc", "count"});
    for (std::size_t q = 0; q < 4; ++q)
        for (int a = 0; a < p.arcs; ++a) table.add_row({q + 1, a, tab[q][static_cast<std::size_t>(a)]});
    r.tables.emplace_back("local-time-law-contingency", std::move(table));

    check(r, "exponential law", ks.p_value > 1e-3,
          fmt("KS against Exp(mean %.6f): D = %.4f, p = %.4f", G, ks.statistic, ks.p_value));
    check(r, "independence of exit arc", chi.p_value > 1e-3,
          fmt("chi2 = %.3f on %d dof, p = %.4f", chi.statistic, chi.dof, chi.p_value));
    check(r, "mean local time", mean.verdict == mc::Verdict::Pass,
          fmt("mean %.5f +- %.5f, G(x,x) = %.5f", mean.estimate, mean.stderr_, G));
    for (const auto& c : r.checks) r.summary.push_back(c.name + ": " + c.detail);
    finish(r, sw);
    return r;
}

ExperimentResult excursion_law(const ExcursionLawParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("excursion-law", {{"domain", p.domain},
                                     {"N", p.N},
                                     {"x0", pt(p.x0)},
                                     {"x", pt(p.x)},
                                     {"R", p.R},
                                     {"samples", p.samples},
                                     {"kmax", p.kmax},
                                     {"band", p.band},
                                     {"mean_tol", p.mean_tol},
                                     {"truncated_excursions", p.drop_truncated ? "drop" : "count"},
                                     {"seed", o.seed}});
    if (p.R < 1 || (p.R & (p.R - 1)) != 0) throw std::invalid_argument("R must be a power of two");
    const auto ld = lattice::discretize(d, p.N, p.x0);
    const auto xi = site_index(ld, p.x, "x");
    const Site xs = ld.site(xi);
    const auto conv = p.drop_truncated ? walk::TruncatedExcursion::Drop : walk::TruncatedExcursion::Count;
    const walk::ExcursionSampler sampler(ld, xs, p.R, conv);
    const std::string name = "excursion-law@N=" + std::to_string(p.N);
    auto stats = mc::parallel_map<walk::ExcursionStats>(p.samples, o.workers, [&](std::size_t i) {
        Rng rng = replication_rng(o, name, i);
        return sampler.sample(ld.start_index(), rng);
    });

    // Exact finite-N quantities from the box B = {|s - x|_inf <= R} and U_N.
    const auto box = lattice::sub_domain(
        ld, [&](Site s) { return std::max(std::abs(s.x - xs.x), std::abs(s.y - xs.y)) <= p.R; }, xs, "box");
    const auto bi = box.index_of(xs);
    const double g_box = lattice::discrete_green_row(box, bi)[bi];
    const auto row_x = lattice::discrete_green_row(ld, xi);
    const double g_full = row_x[xi];
    const double exact_ratio = 1.0 - g_box / g_full;
    const double exact_reach = row_x[ld.start_index()] / g_full;
    bool box_inside = true;
    for (auto b : box.boundary()) box_inside = box_inside && ld.is_interior(ld.index_of(box.site(b)));

    const double q = walk::excursion_q(p.N, p.R);
    const double logN = std::log(static_cast<double>(p.N));
    const double lo = q * (1.0 - p.band / logN), hi = q * (1.0 + p.band / logN);
    std::map<std::uint32_t, std::size_t> hist;
    std::vector<double> per_excursion;
    for (const auto& s : stats) {
        ++hist[s.count];
        per_excursion.insert(per_excursion.end(), s.local_times.begin(), s.local_times.end());
    }
    auto at_least = [&](std::uint32_t k) {
        std::size_t c = 0;
        for (const auto& [a, n] : hist)
            if (a >= k) c += n;
        return c;
    };

    CsvTable ratios({"k", "count_at_least_k", "count_at_least_k_plus_1", "ratio", "stderr", "q_R", "band_lo", "band_hi",
                     "exact_ratio"});
    json jr = json::array();
    for (int k = 1; k <= p.kmax; ++k) {
        const double nk = static_cast<double>(at_least(static_cast<std::uint32_t>(k)));
        const double nk1 = static_cast<double>(at_least(static_cast<std::uint32_t>(k + 1)));
        const double ratio = nk > 0 ? nk1 / nk : 0.0;
        const double se = nk > 0 ? std::sqrt(ratio * (1 - ratio) / nk) : 0.0;
        ratios.add_row({k, nk, nk1, ratio, se, q, lo, hi, exact_ratio});
        jr.push_back({{"k", k}, {"ratio", ratio}, {"stderr", se}, {"exact_ratio", exact_ratio}});
        const double gap = std::max({0.0, lo - ratio, ratio - hi});
        check(r, fmt("ratio k=%d in band", k), nk > 0 && gap <= 3 * se,
              fmt("P(A>=%d)/P(A>=%d) = %.4f +- %.4f, band [%.4f, %.4f]", k + 1, k, ratio, se, lo, hi));
        check(r, fmt("ratio k=%d exact", k), nk > 0 && std::abs(ratio - exact_ratio) <= 3 * se,
              fmt("%.4f +- %.4f vs 1 - G_box/G = %.4f", ratio, se, exact_ratio), true);
    }
    const double reach = static_cast<double>(at_least(1)) / static_cast<double>(stats.size());
    const double reach_se = std::sqrt(reach * (1 - reach) / static_cast<double>(stats.size()));
    check(r, "reach probability exact", std::abs(reach - exact_reach) <= 3 * reach_se,
          fmt("P(A>=1) = %.4f +- %.4f vs G(x0,x)/G(x,x) = %.4f", reach, reach_se, exact_reach), true);

    const double target = kGreenSlope * std::log(static_cast<double>(p.R));
    const auto mean = mc::summarize("per-excursion local time", per_excursion, target, p.mean_tol * target);
    check(r, "per-excursion mean", mean.verdict == mc::Verdict::Pass && !per_excursion.empty(),
          fmt("mean %.4f +- %.4f vs g log R = %.4f (tol %.0f%%)", mean.estimate, mean.stderr_, target,
              100 * p.mean_tol));
    check(r, "per-excursion mean exact", std::abs(mean.estimate - g_box) <= 3 * mean.stderr_,
          fmt("mean %.4f +- %.4f vs G_box(x,x) = %.4f", mean.estimate, mean.stderr_, g_box), true);

    CsvTable h({"A", "frequency"});
    for (const auto& [a, n] : hist) h.add_row({a, n});
    r.report["q_R"] = q;
    r.report["band"] = {lo, hi};
    r.report["ratios"] = jr;
    r.report["reach_probability"] = {{"estimate", reach}, {"stderr", reach_se}, {"exact", exact_reach}};
    r.report["per_excursion_mean"] = report::to_json(mean);
    r.report["green_box"] = g_box;
    r.report["green_full"] = g_full;
    r.report["box_inside_domain"] = box_inside;
    r.tables.emplace_back("excursion-law-ratios", std::move(ratios));
    r.tables.emplace_back("excursion-law-counts", std::move(h));
    for (const auto& c : r.checks) r.summary.push_back(c.name + ": " + c.detail);
    finish(r, sw);
    return r;
}

namespace {

/// Semi-discrete first moment: sum over sites of A of P(l_x >= thr) with the
/// solver's G(x0, x) and the asymptotic diagonal g log N + c0 + g log CR.
double finite_n_prediction(const continuum::NiceDomain& d, const LatticeDomain& ld, const DiscRegion& region,
                           double a, const lattice::PotentialField& g0, const lattice::PotentialField* h,
                           std::int32_t x0) {
    const int N = ld.scale();
    const double thr = thick_threshold(N, a);
    double atoms = 0.0;
    for (auto x : ld.interior()) {
        const Point w = ld.to_point(x);
        if (!region.contains(w) || x == x0) continue;
        const double gxx =
            kGreenSlope * std::log(static_cast<double>(N)) + kGreenOffset + kGreenSlope * std::log(continuum::conformal_radius(d, w));
        double p = g0[x] / gxx * std::exp(-thr / gxx);
        if (h) p *= (*h)[x] / (*h)[x0];
        atoms += p;
    }
    return atoms * thick_point_weight(N, a);
}

} // namespace

ExperimentResult first_moment(const FirstMomentParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    json cfg = {{"domain", p.domain},
                {"x0", pt(p.x0)},
                {"N", p.N},
                {"a", p.a},
                {"samples", p.samples},
                {"region", p.region.describe()},
                {"exit_target", p.exit_target ? pt(*p.exit_target) : json(nullptr)},
                {"rel_tol", p.rel_tol},
                {"seed", o.seed}};
    auto r = start("first-moment", cfg);
    const auto ld = lattice::discretize(d, p.N, p.x0);
    const auto x0 = ld.start_index();
    std::optional<lattice::PotentialField> h;
    std::int32_t target = LatticeDomain::kNone;
    std::optional<continuum::TripleDXZ> triple;
    if (p.exit_target) {
        triple = continuum::TripleDXZ::make(d, p.x0, *p.exit_target);
        target = lattice_target(d, ld, *p.exit_target);
        h = lattice::harmonic_measure_field(ld, target);
    }
    const std::string name = std::string(p.exit_target ? "first-moment-conditioned" : "first-moment") + "@N=" +
                             std::to_string(p.N);
    const auto region = p.region;
    auto cfgr = run_config(o, name, p.samples, p.N, p.a);
    const auto rep = mc::run_replications(cfgr, [&](std::size_t, Rng& rng) {
        const auto ws = p.exit_target ? walk::sample_conditioned_walk(ld, x0, target, *h, rng, {}, &scratch())
                                      : walk::sample_walk(ld, x0, rng, {}, &scratch());
        const auto m = chaos::thick_point_measure(ws, p.a);
        return chaos::restrict(m, [&](Point w) { return region.contains(w); }).total_mass();
    });

    auto density = [&](Point x) -> double {
        if (!d.contains(x)) return 0.0;
        if (triple) return continuum::psi_density(*triple, p.a, x);
        return std::pow(continuum::conformal_radius(d, x), p.a) * continuum::green_function(d, p.x0, x);
    };
    const double target_value =
        chaos_normalisation(p.a) * continuum::disc_integral(region.center, region.radius, p.x0, density);
    auto summary = rep;
    summary.target = target_value;
    const double tol = std::max(p.rel_tol * std::abs(target_value), 3 * rep.stderr_);
    const double diff = std::abs(rep.estimate - target_value);
    summary.verdict = diff <= tol ? mc::Verdict::Pass : mc::Verdict::Fail;

    const auto g0 = lattice::discrete_green_row(ld, x0);
    const double finite = finite_n_prediction(d, ld, region, p.a, g0, h ? &*h : nullptr, x0);

    r.report["estimate"] = report::to_json(summary);
    r.report["target"] = target_value;
    r.report["relative_error"] = target_value != 0 ? (rep.estimate - target_value) / target_value : 0.0;
    r.report["finite_n_prediction"] = finite;
    CsvTable t({"N", "a", "samples", "estimate", "stderr", "target", "relative_error", "finite_n_prediction"});
    t.add_row({p.N, p.a, p.samples, rep.estimate, rep.stderr_, target_value,
               target_value != 0 ? (rep.estimate - target_value) / target_value : 0.0, finite});
    r.tables.emplace_back("first-moment", std::move(t));
    check(r, "limit", summary.verdict == mc::Verdict::Pass,
          fmt("estimate %.5f +- %.5f vs target %.5f (rel. err %+.1f%%, tol %.5f)", rep.estimate, rep.stderr_,
              target_value, target_value != 0 ? 100 * (rep.estimate - target_value) / target_value : 0.0, tol));
    check(r, "finite-N prediction", std::abs(rep.estimate - finite) <= 3 * rep.stderr_ + 0.01 * finite,
          fmt("estimate %.5f +- %.5f vs semi-discrete prediction %.5f", rep.estimate, rep.stderr_, finite), true);
    for (const auto& c : r.checks) r.summary.push_back(c.name + ": " + c.detail);
    finish(r, sw);
    return r;
}

ExperimentResult thick_scaling(const ThickScalingParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("thick-scaling", {{"domain", p.domain},
                                     {"x0", pt(p.x0)},
                                     {"N", p.Ns},
                                     {"a", p.a},
                                     {"samples", p.samples},
                                     {"seed", o.seed}});
    std::map<int, LatticeDomain> domains;
    for (int N : p.Ns) domains.emplace(N, lattice::discretize(d, N, p.x0));
    mc::RunConfig cfg = run_config(o, "thick-scaling", p.samples, p.Ns.front(), p.a);
    cfg.Ns = p.Ns;
    auto density = [&](Point x) -> double {
        if (!d.contains(x)) return 0.0;
        return std::pow(continuum::conformal_radius(d, x), p.a) * continuum::green_function(d, p.x0, x);
    };
    const double limit = chaos_normalisation(p.a) * continuum::disc_integral(d.center(), d.radius(), p.x0, density);
    const auto table = mc::convergence_table(
        cfg,
        [&](int N, std::size_t, Rng& rng) {
            const auto& ld = domains.at(N);
            return static_cast<double>(
                chaos::thick_point_count(walk::sample_walk(ld, ld.start_index(), rng, {}, &scratch()), p.a));
        },
        [&](int N) { return thick_point_weight(N, p.a); }, limit);
    CsvTable t({"N", "samples", "estimate", "stderr", "ci_lo", "ci_hi", "drift", "limit"});
    json rows = json::array();
    std::vector<double> drifts;
    for (const auto& row : table.rows) {
        t.add_row({row.N, row.report.n, row.report.estimate, row.report.stderr_, row.report.ci_lo, row.report.ci_hi,
                   row.drift ? *row.drift : std::nan(""), limit});
        json jrow = report::to_json(row.report);
        jrow["N"] = row.N;
        jrow["drift"] = row.drift ? json(*row.drift) : json(nullptr);
        rows.push_back(jrow);
        if (row.drift) drifts.push_back(*row.drift);
        r.summary.push_back(fmt("N=%4d  normalised mean %.5f +- %.5f  drift %s", row.N, row.report.estimate,
                                row.report.stderr_, row.drift ? fmt("%.5f", *row.drift).c_str() : "-"));
    }
    r.report["rows"] = rows;
    r.report["limit"] = limit;
    r.tables.emplace_back("thick-scaling", std::move(t));
    bool decreasing = !drifts.empty();
    for (std::size_t i = 1; i < drifts.size(); ++i) decreasing = decreasing && drifts[i] < drifts[i - 1];
    std::string detail = "drifts";
    for (double v : drifts) detail += fmt(" %.5f", v);
    check(r, "drift decreasing", decreasing, detail, true);
    r.summary.push_back(fmt("limit e^{c0 a/g} int CR^a G = %.5f", limit));
    finish(r, sw);
    return r;
}

ExperimentResult markov_check(const MarkovCheckParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("markov-check", {{"domain", p.domain},
                                    {"x0", pt(p.x0)},
                                    {"N", p.N},
                                    {"a", p.a},
                                    {"samples", p.samples},
                                    {"sub", p.sub.describe()},
                                    {"exit_target", p.exit_target ? pt(*p.exit_target) : json(nullptr)},
                                    {"oracle", p.oracle},
                                    {"seed", o.seed}});
    const auto ld = lattice::discretize(d, p.N, p.x0);
    const auto x0 = ld.start_index();
    const auto sub = lattice::region_subdomain(
        ld, lattice::Region::from_domain(continuum::NiceDomain::disc(p.sub.center, p.sub.radius)), ld.site(x0));
    std::optional<lattice::PotentialField> h;
    std::int32_t target = LatticeDomain::kNone;
    if (p.exit_target) {
        target = lattice_target(d, ld, *p.exit_target);
        h = lattice::harmonic_measure_field(ld, target);
    }
    struct Obs {
        bool exact = false;
        double full = 0, first = 0, second = 0, cross = 0;
    };
    const std::string name = "markov-check@N=" + std::to_string(p.N);
    walk::WalkOptions wo;
    wo.store_path = true;
    wo.explicit_holding = true;
    auto obs = mc::parallel_map<Obs>(p.samples, o.workers, [&](std::size_t i) {
        Rng rng = replication_rng(o, name, i);
        const auto ws = p.exit_target ? walk::sample_conditioned_walk(ld, x0, target, *h, rng, wo, &scratch())
                                      : walk::sample_walk(ld, x0, rng, wo, &scratch());
        const auto md = chaos::markov_decompose(ws, sub, p.a);
        return Obs{md.exact, md.full.total_mass(), md.first.total_mass(), md.second.total_mass(), md.cross.total_mass()};
    });
    std::size_t exact = 0;
    std::vector<double> full, first, second, cross;
    for (const auto& ob : obs) {
        exact += ob.exact ? 1 : 0;
        full.push_back(ob.full);
        first.push_back(ob.first);
        second.push_back(ob.second);
        cross.push_back(ob.cross);
    }
    CsvTable t({"part", "mean_mass", "stderr"});
    json parts = json::object();
    const std::pair<const char*, const std::vector<double>*> named[] = {
        {"full", &full}, {"first", &first}, {"second", &second}, {"cross", &cross}};
    for (const auto& [label, v] : named) {
        const auto s = mc::summarize(label, *v);
        t.add_row({label, s.estimate, s.stderr_});
        parts[label] = report::to_json(s);
    }
    r.report["exact"] = exact;
    r.report["samples"] = p.samples;
    r.report["parts"] = parts;
    r.tables.emplace_back("markov-check", std::move(t));
    r.summary.push_back(fmt("exact: %zu/%zu", exact, p.samples));
    check(r, "exact partition", exact == p.samples, fmt("exact: %zu/%zu", exact, p.samples));
    if (p.oracle && p.exit_target) {
        const auto oracle = chaos::cross_mass_expectation(ld, sub, target, p.a);
        const auto s = mc::summarize("cross mass", cross, oracle.expected_mass);
        r.report["cross_mass_oracle"] = {{"expected_mass", oracle.expected_mass},
                                         {"expected_atoms", oracle.expected_atoms},
                                         {"estimate", report::to_json(s)}};
        check(r, "cross mass expectation", s.verdict == mc::Verdict::Pass,
              fmt("mean cross mass %.6f +- %.6f vs exact %.6f", s.estimate, s.stderr_, oracle.expected_mass));
        r.summary.push_back(r.checks.back().name + ": " + r.checks.back().detail);
    }
    finish(r, sw);
    return r;
}

ExperimentResult split_uniformity(const SplitUniformityParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("split-uniformity", {{"domain", p.domain},
                                        {"x0", pt(p.x0)},
                                        {"N", p.Ns},
                                        {"a", p.a},
                                        {"samples", p.samples},
                                        {"sub", p.sub.describe()},
                                        {"seed", o.seed}});
    walk::WalkOptions wo;
    wo.store_path = true;
    wo.explicit_holding = true;
    CsvTable t({"N", "ratios", "ks_statistic", "p_value", "mean_ratio"});
    CsvTable values({"N", "ratio"});
    json rows = json::array();
    std::vector<double> dists;
    for (int N : p.Ns) {
        const auto ld = lattice::discretize(d, N, p.x0);
        const auto x0 = ld.start_index();
        const auto sub = lattice::region_subdomain(
            ld, lattice::Region::from_domain(continuum::NiceDomain::disc(p.sub.center, p.sub.radius)), ld.site(x0));
        const std::string name = "split-uniformity@N=" + std::to_string(N);
        const auto per = mc::parallel_map<std::vector<double>>(p.samples, o.workers, [&](std::size_t i) {
            Rng rng = replication_rng(o, name, i);
            return chaos::thickness_split(walk::sample_walk(ld, x0, rng, wo, &scratch()), sub, p.a);
        });
        std::vector<double> pooled;
        for (const auto& v : per) pooled.insert(pooled.end(), v.begin(), v.end());
        for (double v : pooled) values.add_row({N, v});
        mc::KsResult ks{std::nan(""), std::nan(""), pooled.size()};
        if (pooled.size() >= 5) ks = mc::ks_uniform_test(pooled);
        dists.push_back(ks.statistic);
        t.add_row({N, pooled.size(), ks.statistic, ks.p_value, mean_of(pooled)});
        rows.push_back({{"N", N}, {"ratios", pooled.size()}, {"ks_statistic", ks.statistic}, {"p_value", ks.p_value},
                        {"mean_ratio", mean_of(pooled)}});
        r.summary.push_back(fmt("N=%4d  %zu cross atoms  KS distance %.4f  p %.3g  mean ratio %.4f", N, pooled.size(),
                                ks.statistic, ks.p_value, mean_of(pooled)));
    }
    r.report["rows"] = rows;
    r.tables.emplace_back("split-uniformity", std::move(t));
    r.tables.emplace_back("split-uniformity-ratios", std::move(values));
    bool decreasing = dists.size() >= 2;
    for (std::size_t i = 1; i < dists.size(); ++i) decreasing = decreasing && dists[i] < dists[i - 1];
    std::string detail = "KS distances";
    for (double v : dists) detail += fmt(" %.4f", v);
    check(r, "KS distance decreasing", decreasing, detail, true);
    finish(r, sw);
    return r;
}

ExperimentResult simplex_eval(const SimplexEvalParams& p, const RunOptions& o) {
    Stopwatch sw;
    auto r = start("simplex-eval", {{"a", p.a},
                                    {"coefficients", p.coefficients},
                                    {"random_sets", p.random_sets},
                                    {"seed", o.seed}});
    if (!p.coefficients.empty()) {
        const double v = continuum::simplex_product_integral({p.a, p.coefficients});
        r.report["value"] = v;
        r.summary.push_back(fmt("%.6f", v));
    }
    if (p.random_sets > 0) {
        using boost::math::quadrature::gauss;
        CsvTable t({"set", "r", "a", "c1", "c2", "c3", "value", "reference", "abs_diff"});
        double worst2 = 0.0, worst3 = 0.0;
        for (int i = 0; i < p.random_sets; ++i) {
            Rng rng = replication_rng(o, "simplex-eval", static_cast<std::size_t>(i));
            const double a = 0.05 + 1.9 * rng.uniform();
            double c[3];
            for (double& ci : c) ci = std::exp(std::log(0.1) + std::log(100.0) * rng.uniform());
            // r = 2: the closed form against one-dimensional Gauss-Legendre.
            const double v2 = continuum::simplex_product_integral({a, {c[0], c[1]}});
            const double q2 = gauss<double, 30>::integrate(
                [&](double t) { return std::pow(c[0], t) * std::pow(c[1], a - t); }, 0.0, a);
            // r = 3: the recursive evaluation against a nested product rule.
            const double v3 = continuum::simplex_product_integral({a, {c[0], c[1], c[2]}});
            const double q3 = gauss<double, 30>::integrate(
                [&](double t1) {
                    return gauss<double, 30>::integrate(
                        [&](double t2) { return std::pow(c[0], t1) * std::pow(c[1], t2) * std::pow(c[2], a - t1 - t2); },
                        0.0, a - t1);
                },
                0.0, a);
            worst2 = std::max(worst2, std::abs(v2 - q2));
            worst3 = std::max(worst3, std::abs(v3 - q3));
            t.add_row({i, 2, a, c[0], c[1], std::nan(""), v2, q2, std::abs(v2 - q2)});
            t.add_row({i, 3, a, c[0], c[1], c[2], v3, q3, std::abs(v3 - q3)});
        }
        r.tables.emplace_back("simplex-eval", std::move(t));
        r.report["max_abs_diff_r2"] = worst2;
        r.report["max_abs_diff_r3"] = worst3;
        check(r, "r=2 closed form", worst2 <= p.r2_tol,
              fmt("max |closed form - quadrature| = %.3e over %d sets", worst2, p.random_sets));
        check(r, "r=3 recursion", worst3 <= p.r3_tol,
              fmt("max |recursive - 2D quadrature| = %.3e over %d sets", worst3, p.random_sets));
        for (const auto& c : r.checks) r.summary.push_back(c.name + ": " + c.detail);
    }
    finish(r, sw);
    return r;
}

ExperimentResult martingale_approx(const MartingaleParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    auto r = start("martingale-approx", {{"domain", p.domain},
                                         {"x0", pt(p.x0)},
                                         {"N", p.N},
                                         {"a", p.a},
                                         {"p", p.p},
                                         {"r_max", p.r_max},
                                         {"grid", p.grid},
                                         {"exit_target", pt(p.exit_target)},
                                         {"sample_index", p.sample_index},
                                         {"seed", o.seed}});
    const auto ld = lattice::discretize(d, p.N, p.x0);
    const auto target = lattice_target(d, ld, p.exit_target);
    const auto h = lattice::harmonic_measure_field(ld, target);
    Rng rng = replication_rng(o, "martingale-approx@N=" + std::to_string(p.N), p.sample_index);
    walk::WalkOptions wo;
    wo.store_path = true;
    const auto ws = walk::sample_conditioned_walk(ld, ld.start_index(), target, h, rng, wo);
    lattice::GreenRowCache cache;
    const auto field = chaos::martingale_field(ld, ws, p.a, p.p, p.r_max, p.grid, cache);
    CsvTable t({"x", "y", "density", "tail_bound", "covering"});
    bool finite = true;
    double total = 0.0;
    for (const auto& g : field.grid) {
        t.add_row({g.x.real(), g.x.imag(), g.density, g.tail_bound, g.covering});
        finite = finite && std::isfinite(g.density) && g.density >= 0 && std::isfinite(g.tail_bound);
        total += g.density;
    }
    r.report["pieces"] = field.pieces;
    r.report["steps"] = ws.steps();
    r.report["max_tail_bound"] = field.max_tail_bound;
    r.report["grid_points"] = field.grid.size();
    r.report["density_sum"] = total;
    r.tables.emplace_back("martingale-approx", std::move(t));
    check(r, "finite density", finite, fmt("%zu grid points, %zu strip pieces", field.grid.size(), field.pieces));
    r.summary.push_back(fmt("%zu strip pieces, %dx%d grid, max truncation bound %.3e", field.pieces, p.grid, p.grid,
                            field.max_tail_bound));
    finish(r, sw);
    return r;
}

std::vector<Point> ConditionedCheckParams::default_probes() {
    return {{0.3, 0.0},  {-0.3, 0.0}, {0.0, 0.3},   {0.0, -0.3}, {0.5, 0.2},
            {-0.5, -0.2}, {0.2, -0.5}, {-0.2, 0.5}, {0.6, -0.3}, {0.75, 0.1}};
}

ExperimentResult conditioned_check(const ConditionedCheckParams& p, const RunOptions& o) {
    Stopwatch sw;
    const auto d = parse_domain(p.domain);
    json probes = json::array();
    for (auto q : p.probes) probes.push_back(pt(q));
    auto r = start("conditioned-check", {{"domain", p.domain},
                                         {"x0", pt(p.x0)},
                                         {"N", p.N},
                                         {"samples", p.samples},
                                         {"exit_target", pt(p.exit_target)},
                                         {"probes", probes},
                                         {"seed", o.seed}});
    const auto ld = lattice::discretize(d, p.N, p.x0);
    const auto x0 = ld.start_index();
    const auto target = lattice_target(d, ld, p.exit_target);
    const auto h = lattice::harmonic_measure_field(ld, target);
    const auto g0 = lattice::discrete_green_row(ld, x0);
    std::vector<std::int32_t> sites;
    for (auto q : p.probes) sites.push_back(site_index(ld, q, "probe"));
    const std::string name = "conditioned-check@N=" + std::to_string(p.N);
    struct Obs {
        bool hit = false;
        std::vector<double> ell;
    };
    auto obs = mc::parallel_map<Obs>(p.samples, o.workers, [&](std::size_t i) {
        Rng rng = replication_rng(o, name, i);
        const auto ws = walk::sample_conditioned_walk(ld, x0, target, h, rng, {}, &scratch());
        Obs ob{ws.exit == target, {}};
        for (auto s : sites) ob.ell.push_back(ws.local_time(s));
        return ob;
    });
    std::size_t hits = 0;
    for (const auto& ob : obs) hits += ob.hit ? 1 : 0;
    check(r, "exit at target", hits == p.samples, fmt("%zu/%zu walks exit at the target", hits, p.samples));
    r.report["samples"] = p.samples;
    r.report["exits_at_target"] = hits;
    CsvTable t({"probe", "x", "y", "estimate", "stderr", "target", "verdict"});
    json rows = json::array();
    std::size_t ok = 0;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        std::vector<double> v(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) v[i] = obs[i].ell[k];
        const double expected = g0[sites[k]] * h[sites[k]] / h[x0];
        const auto s = mc::summarize(fmt("E[l_x] at probe %zu", k), v, expected);
        const Site st = ld.site(sites[k]);
        t.add_row({k, st.x, st.y, s.estimate, s.stderr_, expected, mc::to_string(s.verdict)});
        json jr = report::to_json(s);
        jr["site"] = {st.x, st.y};
        rows.push_back(jr);
        ok += s.verdict == mc::Verdict::Pass ? 1 : 0;
        r.summary.push_back(fmt("probe (%4d,%4d)  E[l] %.4f +- %.4f  target %.4f  %s", st.x, st.y, s.estimate,
                                s.stderr_, expected, mc::to_string(s.verdict)));
    }
    r.report["probes"] = rows;
    r.tables.emplace_back("conditioned-check", std::move(t));
    check(r, "conditioned local times", ok == sites.size(),
          fmt("%zu/%zu probes within 3 stderr of G(x0,x) H(x,z) / H(x0,z)", ok, sites.size()));
    r.summary.insert(r.summary.begin(), r.checks.front().detail);
    finish(r, sw);
    return r;
}

// ---------------------------------------------------------------------------

std::vector<ExperimentResult> run_battery(Profile profile, const RunOptions& o, report::OutputSet& out) {
    const bool full = profile == Profile::Full;
    std::vector<ExperimentResult> results;
    auto add = [&](ExperimentResult r) {
        emit(r, out, r.command + "/");
        results.push_back(std::move(r));
    };

    add(constants_check());

    GreenCheckParams green;
    if (!full) green.Ns = {32, 64, 128};
    add(green_check(green));

    HittingCheckParams hit;
    if (!full) {
        hit.N = 32;
        hit.triples = 10;
    }
    add(hitting_check(hit, o));

    LocalTimeParams lt;
    if (!full) {
        lt.N = 32;
        lt.samples = 2000;
    }
    add(local_time_law(lt, o));

    ExcursionLawParams ex;
    if (!full) {
        ex.N = 64;
        ex.R = 4;
        ex.samples = 5000;
    }
    add(excursion_law(ex, o));

    FirstMomentParams fm;
    if (!full) {
        fm.N = 32;
        fm.samples = 1000;
    }
    add(first_moment(fm, o));

    ThickScalingParams ts;
    if (!full) {
        ts.Ns = {16, 32, 64};
        ts.samples = 1000;
    }
    add(thick_scaling(ts, o));

    MarkovCheckParams mk;
    if (!full) {
        mk.N = 16;
        mk.samples = 1000;
    }
    add(markov_check(mk, o));

    SplitUniformityParams su;
    if (!full) {
        su.Ns = {16, 32};
        su.samples = 300;
    }
    add(split_uniformity(su, o));

    SimplexEvalParams se;
    se.random_sets = full ? 100 : 10;
    add(simplex_eval(se, o));

    ConditionedCheckParams cc;
    if (!full) {
        cc.N = 32;
        cc.samples = 2000;
    }
    add(conditioned_check(cc, o));

    MartingaleParams mg;
    if (!full) {
        mg.N = 32;
        mg.grid = 16;
    }
    add(martingale_approx(mg, o));

    json summary;
    summary["schema"] = report::kReportSchema;
    summary["command"] = "battery";
    summary["profile"] = full ? "full" : "quick";
    summary["seed"] = o.seed;
    json list = json::array();
    bool all = true;
    for (const auto& r : results) {
        list.push_back({{"command", r.command}, {"passed", r.passed()}, {"checks", r.report["checks"]}});
        all = all && r.passed();
    }
    summary["experiments"] = list;
    summary["passed"] = all;
    out.write_json("battery.json", summary);
    return results;
}

} // namespace thickpoints::experiments

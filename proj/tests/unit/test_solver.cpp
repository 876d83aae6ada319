#include "thickpoints/lattice_solver.hpp"
#include "thickpoints/constants.hpp"
#include "thickpoints/walk.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace thickpoints;
using namespace thickpoints::lattice;
using continuum::NiceDomain;

TEST_CASE("one interior site") {
    const auto ld = discretize(NiceDomain::unit_disc(), 2, 0.0);
    const auto c = ld.index_of({0, 0});
    const auto row = discrete_green_row(ld, c);
    CHECK(row[c] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::int32_t b : ld.boundary()) CHECK(row[b] == 0.0);
    const auto h = harmonic_measure(ld, c);
    for (double v : h) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("green rows are symmetric and harmonic off the source") {
    const auto ld = discretize(NiceDomain::unit_disc(), 16, 0.0);
    const auto x = ld.index_of({3, -2}), y = ld.index_of({-5, 4});
    const auto gx = discrete_green_row(ld, x), gy = discrete_green_row(ld, y);
    CHECK(gx[y] == doctest::Approx(gy[x]).epsilon(1e-9));
    CHECK(gx.residual <= 1e-10);
    CHECK(gx.harmonic_defect(x) < 1e-8);
    // at the source (I - P) G = 1
    double avg = 0.0;
    for (std::int32_t n : ld.neighbours(x)) avg += gx[n] / 4.0;
    CHECK(gx[x] - avg == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(gx.at({3, -2}) == gx[x]);
    const auto zero = discrete_green_row(ld, ld.boundary().front());
    for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("harmonic measure") {
    const auto ld = discretize(NiceDomain::unit_disc(), 32, 0.0);
    const auto x = ld.index_of({4, 7});
    const auto h = harmonic_measure(ld, x);
    CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : h) CHECK(v >= 0.0);

    // the discretized centred disc is symmetric under x -> -x
    const auto hc = harmonic_measure(ld, ld.index_of({0, 0}));
    for (std::size_t k = 0; k < ld.boundary().size(); ++k) {
        const Site s = ld.site(ld.boundary()[k]);
        const auto m = ld.index_of({-s.x, s.y});
        const auto it = std::find(ld.boundary().begin(), ld.boundary().end(), m);
        REQUIRE(it != ld.boundary().end());
        CHECK(hc[k] == doctest::Approx(hc[std::size_t(it - ld.boundary().begin())]).epsilon(1e-8));
    }

    // field form agrees with the row form
    const std::int32_t target = ld.boundary()[10];
    const auto field = harmonic_measure_field(ld, target);
    CHECK(field[x] == doctest::Approx(h[10]).epsilon(1e-8));
    CHECK(field[target] == 1.0);
}

TEST_CASE("hitting probabilities") {
    const auto ld = discretize(NiceDomain::unit_disc(), 24, 0.0);
    const auto x = ld.index_of({0, 0}), y = ld.index_of({6, 3}), z = ld.index_of({-4, 9});
    CHECK(p_hit(ld, x, x) == doctest::Approx(1.0));
    const double pxy = p_hit(ld, x, y);
    CHECK(pxy > 0.0);
    CHECK(pxy < 1.0);
    const SolverOptions tight{1e-13};
    CHECK(std::abs(avoid_hit_prob(ld, z, x, y, tight) - avoid_hit_prob_direct(ld, z, x, y, tight)) < 1e-8);
    CHECK(avoid_hit_prob(ld, z, x, y) <= p_hit(ld, z, x) + 1e-12);
    CHECK_THROWS_AS(avoid_hit_prob(ld, x, x, y), std::invalid_argument);
}

TEST_CASE("hit probability against simulation") {
    const auto ld = discretize(NiceDomain::unit_disc(), 32, 0.0);
    const auto x = ld.start_index(), y = ld.index_of({16, 0});
    const double p = p_hit(ld, x, y);
    const int n = 20000;
    int hits = 0;
    walk::WalkScratch scratch;
    for (int i = 0; i < n; ++i) {
        Rng rng(99, std::uint64_t(i));
        hits += walk::sample_walk(ld, x, rng, {}, &scratch).visit_count(y) > 0;
    }
    const double est = double(hits) / n, se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(est - p) < 3.0 * se);
}

TEST_CASE("diagonal asymptotic moves toward c0") {
    const std::vector<int> Ns{32, 64, 128};
    const auto rows = green_asymptotics_check(NiceDomain::unit_disc(), 0.0, Ns);
    REQUIRE(rows.size() == 3u);
    for (const auto& r : rows) {
        CHECK(r.centred == doctest::Approx(r.green_diagonal - kGreenSlope * std::log(r.N)));
        CHECK(r.target == doctest::Approx(kGreenOffset));
    }
    CHECK(std::abs(rows[2].deviation) < std::abs(rows[0].deviation));
    CHECK(std::abs(rows[2].deviation) < 0.1);
}

TEST_CASE("green row cache") {
    const auto ld = discretize(NiceDomain::unit_disc(), 16, 0.0);
    GreenRowCache cache;
    const auto a = cache.row(ld, ld.start_index());
    const auto b = cache.row(ld, ld.start_index());
    CHECK(a.get() == b.get());
    CHECK(cache.hits() == 1u);
    CHECK(cache.misses() == 1u);
    CHECK(cache.bytes() > 0u);
    // a tiny budget keeps at most the latest row
    GreenRowCache small(1);
    small.row(ld, ld.start_index());
    small.row(ld, ld.interior()[3]);
    small.row(ld, ld.start_index());
    CHECK(small.misses() == 3u);
    cache.clear();
    CHECK(cache.bytes() == 0u);
}

TEST_CASE("dirichlet data validation and csv") {
    const auto ld = discretize(NiceDomain::unit_disc(), 8, 0.0);
    auto prob = DirichletProblem::homogeneous(ld);
    prob.free[std::size_t(ld.boundary().front())] = 1;
    CHECK_THROWS_AS(solve_dirichlet(ld, prob), std::invalid_argument);
    const auto row = discrete_green_row(ld, ld.start_index());
    std::ostringstream os;
    row.write_csv(os);
    const auto text = os.str();
    CHECK(text.rfind("x,y,value\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == std::ptrdiff_t(ld.size() + 1));
}

TEST_CASE("harmonic measure from the centre is balanced across sectors") {
    // Per-site masses vary with the local boundary shape; equal-angle sectors
    // carry equal mass up to lattice effects.
    const auto ld = discretize(NiceDomain::unit_disc(), 128, 0.0);
    const auto h = harmonic_measure(ld, ld.start_index());
    std::vector<double> sector(8, 0.0);
    for (std::size_t k = 0; k < h.size(); ++k) {
        const Site s = ld.site(ld.boundary()[k]);
        const double t = std::atan2(double(s.y), double(s.x)) + std::numbers::pi;
        sector[std::min<std::size_t>(7, std::size_t(t / (2 * std::numbers::pi) * 8))] += h[k];
    }
    const auto [lo, hi] = std::minmax_element(sector.begin(), sector.end());
    CHECK(*hi / *lo < 1.05);
}

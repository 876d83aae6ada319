#include "thickpoints/chaos.hpp"
#include "thickpoints/constants.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace thickpoints;
using namespace thickpoints::chaos;
using continuum::NiceDomain;
using lattice::discretize;

namespace {

walk::WalkSample stored_walk(const LatticeDomain& ld, std::uint64_t stream) {
    Rng rng(77, stream);
    walk::WalkOptions o;
    o.store_path = true;
    o.explicit_holding = true;
    return walk::sample_walk(ld, ld.start_index(), rng, o);
}

} // namespace

TEST_CASE("weight and threshold") {
    CHECK(thick_point_weight(64, 0.5) == doctest::Approx(std::log(64.0) / std::pow(64.0, 1.5)));
    CHECK(thick_threshold(64, 0.5) == doctest::Approx(2.0 / std::numbers::pi * 0.5 * std::log(64.0) * std::log(64.0)));
    CHECK(chaos_normalisation(0.0) == 1.0);
}

TEST_CASE("thick point measure of one walk") {
    const auto ld = discretize(NiceDomain::unit_disc(), 32, 0.0);
    const auto ws = stored_walk(ld, 1);
    const auto m = thick_point_measure(ws, 0.3);
    CHECK(m.size() == thick_point_count(ws, 0.3));
    CHECK(m.total_mass() == doctest::Approx(double(m.size()) * thick_point_weight(32, 0.3)));
    CHECK(m.mode == ThickPointMeasure::Mode::Single);
    const double thr = thick_threshold(32, 0.3);
    for (const auto& v : ws.visits) CHECK(m.contains(v.site) == (v.local_time >= thr));
    // counts are nonincreasing in a
    std::size_t prev = thick_point_count(ws, 0.05);
    for (double a = 0.1; a < 2.0; a += 0.1) {
        const auto c = thick_point_count(ws, a);
        CHECK(c <= prev);
        prev = c;
    }
    // threshold above the whole duration: nothing is thick
    const double a_big = ws.total_time() * std::numbers::pi / (2.0 * std::log(32.0) * std::log(32.0));
    if (a_big < 2.0) CHECK(thick_point_count(ws, a_big * 1.0001) == 0u);
    CHECK_THROWS(thick_point_measure(ws, 0.0));
    CHECK_THROWS(thick_point_measure(ws, 2.0));
}

TEST_CASE("multipoint measure needs every trajectory") {
    const auto ld = discretize(NiceDomain::unit_disc(), 16, 0.0);
    std::vector<walk::WalkSample> ws(2);
    for (auto& w : ws) w.domain = &ld;
    // disjoint supports with huge local times
    ws[0].visits.push_back({ld.index_of({1, 0}), 5, 1e6});
    ws[1].visits.push_back({ld.index_of({-1, 0}), 5, 1e6});
    const std::vector<std::size_t> both{0, 1};
    CHECK(thick_point_measure(ws, 0.5, both).size() == 0u);
    // shared site, each below the threshold but thick in total
    const double thr = thick_threshold(16, 0.5);
    ws[0].visits.push_back({ld.index_of({2, 0}), 1, 0.6 * thr});
    ws[1].visits.insert(ws[1].visits.begin(), {ld.index_of({2, 0}), 1, 0.6 * thr});
    const auto m = thick_point_measure(ws, 0.5, both);
    CHECK(m.mode == ThickPointMeasure::Mode::Multipoint);
    REQUIRE(m.size() == 1u);
    CHECK(m.atoms[0] == ld.index_of({2, 0}));
    CHECK_THROWS(thick_point_measure(ws, 0.5, std::vector<std::size_t>{}));
    CHECK_THROWS(thick_point_measure(ws, 0.5, std::vector<std::size_t>{0, 2}));
}

TEST_CASE("markov decomposition partitions the atoms") {
    const auto ld = discretize(NiceDomain::unit_disc(), 32, 0.0);
    const auto sub = lattice::region_subdomain(ld, lattice::Region::from_domain(NiceDomain::disc(0.0, 0.5)), {0, 0});
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto ws = stored_walk(ld, k);
        const auto d = markov_decompose(ws, sub, 0.3);
        CHECK(d.exact);
        CHECK(d.first.size() + d.second.size() + d.cross.size() == d.full.size());
        const auto ratios = thickness_split(ws, sub, 0.3);
        CHECK(ratios.size() == d.cross.size());
        for (double r : ratios) {
            CHECK(r > 0.0);
            CHECK(r < 1.0);
        }
    }
    const auto ws = stored_walk(ld, 3);
    const auto whole = markov_decompose(ws, ld, 0.3);
    CHECK(whole.second.size() == 0u);
    CHECK(whole.cross.size() == 0u);
    CHECK(whole.first.atoms == whole.full.atoms);
    CHECK(thickness_split(ws, ld, 0.3).empty());
}

TEST_CASE("restrict") {
    const auto ld = discretize(NiceDomain::unit_disc(), 32, 0.0);
    const auto m = thick_point_measure(stored_walk(ld, 2), 0.2);
    REQUIRE(m.size() > 0u);
    CHECK(restrict(m, [](continuum::Point) { return true; }).atoms == m.atoms);
    CHECK(restrict(m, [](continuum::Point) { return false; }).size() == 0u);
    const auto right = restrict(m, [](continuum::Point w) { return w.real() > 0.0; });
    for (auto i : right.atoms) CHECK(ld.site(i).x > 0);
}

TEST_CASE("measure serialisation") {
    const auto ld = discretize(NiceDomain::unit_disc(), 16, 0.0);
    const auto m = thick_point_measure(stored_walk(ld, 5), 0.2);
    std::ostringstream os;
    m.write_csv(os);
    CHECK(os.str().rfind("x,y,weight\n", 0) == 0);
    const auto header = m.json_header(42);
    CHECK(header.find("\"N\"") != std::string::npos);
    CHECK(header.find("42") != std::string::npos);
    CHECK(std::string(to_string(ThickPointMeasure::Mode::Conditioned)).size() > 0);
}

TEST_CASE("cross mass against its exact expectation") {
    const auto ld = discretize(NiceDomain::unit_disc(), 16, 0.0);
    const auto sub = lattice::region_subdomain(ld, lattice::Region::from_domain(NiceDomain::disc(0.0, 0.5)), {0, 0});
    const auto target = lattice::nearest_boundary_site(ld, 1.0);
    const auto h = lattice::harmonic_measure_field(ld, target);
    const double a = 0.3;
    const auto oracle = cross_mass_expectation(ld, sub, target, a);
    const int n = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng(31, std::uint64_t(i));
        walk::WalkOptions o;
        o.store_path = true;
        o.explicit_holding = true;
        const auto ws = walk::sample_conditioned_walk(ld, ld.start_index(), target, h, rng, o);
        const double c = double(markov_decompose(ws, sub, a).cross.size());
        s += c;
        s2 += c * c;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(oracle.expected_atoms > 0.0);
    CHECK(std::abs(mean - oracle.expected_atoms) < 4.0 * se);
    CHECK(oracle.expected_mass == doctest::Approx(oracle.expected_atoms * thick_point_weight(16, a)));
}

TEST_CASE("martingale field on a conditioned sample") {
    const auto ld = discretize(NiceDomain::unit_disc(), 32, 0.0);
    const auto target = lattice::nearest_boundary_site(ld, 1.0);
    const auto h = lattice::harmonic_measure_field(ld, target);
    Rng rng(4, 4);
    walk::WalkOptions o;
    o.store_path = true;
    o.explicit_holding = true;
    const auto ws = walk::sample_conditioned_walk(ld, ld.start_index(), target, h, rng, o);
    lattice::GreenRowCache cache;
    const auto f = martingale_field(ld, ws, 0.5, 2, 2, 8, cache);
    CHECK(f.grid.size() == 64u);
    CHECK(f.pieces == walk::strip_decomposition(ld, ws, 2).size());
    for (const auto& g : f.grid) {
        CHECK(std::isfinite(g.density));
        CHECK(g.density >= 0.0);
        if (g.covering == 0) CHECK(g.density == 0.0);
        if (g.covering <= 2) CHECK(g.tail_bound == 0.0);
        CHECK(g.tail_bound <= f.max_tail_bound);
    }
}

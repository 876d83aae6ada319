#include "thickpoints/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace thickpoints;
using namespace thickpoints::experiments;

TEST_CASE("constants") {
    const auto r = constants_check();
    CHECK(r.passed());
    CHECK(r.report["schema"] == report::kReportSchema);
}

TEST_CASE("simplex evaluation prints six decimals") {
    SimplexEvalParams p;
    p.coefficients = {1.0, std::exp(1.0)};
    const auto r = simplex_eval(p, {});
    REQUIRE_FALSE(r.summary.empty());
    CHECK(r.summary.front() == "1.718282");
    p.coefficients.clear();
    p.random_sets = 5;
    CHECK(simplex_eval(p, {}).passed());
}

TEST_CASE("first moment: region outside the domain") {
    FirstMomentParams p;
    p.N = 16;
    p.samples = 50;
    p.region = {{3.0, 3.0}, 0.5};
    const auto r = first_moment(p, {});
    CHECK(r.report["target"] == 0.0);
    CHECK(r.report["estimate"]["estimate"] == 0.0);
}

TEST_CASE("first moment: small a recovers the integral of G") {
    FirstMomentParams p;
    p.N = 16;
    p.samples = 10;
    p.a = 1e-9;
    const auto r = first_moment(p, {});
    // integral of log(1/|x|) over |x| < 1/2
    const double expected = 2 * std::numbers::pi * (0.125 * std::log(2.0) + 0.0625);
    CHECK(r.report["target"].get<double>() == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("excursion law matches the exact finite-N values") {
    ExcursionLawParams p;
    p.N = 64;
    p.R = 4;
    p.x = {0.125, 0.0};
    p.samples = 4000;
    const auto r = excursion_law(p, {});
    for (const char* name : {"ratio k=1 exact", "reach probability exact", "per-excursion mean exact"}) {
        const auto* c = r.find_check(name);
        REQUIRE(c != nullptr);
        CHECK_MESSAGE(c->passed, name, ": ", c->detail);
    }
    p.R = 3;
    CHECK_THROWS(excursion_law(p, {}));
}

TEST_CASE("markov check line") {
    MarkovCheckParams p;
    p.N = 16;
    p.samples = 100;
    const auto r = markov_check(p, {});
    CHECK(std::find(r.summary.begin(), r.summary.end(), "exact: 100/100") != r.summary.end());
}

TEST_CASE("results are independent of the worker count") {
    ConditionedCheckParams p;
    p.N = 16;
    p.samples = 300;
    p.probes = {{0.25, 0.0}, {-0.25, 0.0}};
    const auto a = conditioned_check(p, {7, 1});
    const auto b = conditioned_check(p, {7, 3});
    CHECK(a.report.dump() == b.report.dump());
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(a.tables[i].second.str() == b.tables[i].second.str());
}

TEST_CASE("emit writes the report and tables") {
    const auto dir = std::filesystem::temp_directory_path() / "thickpoints-emit-test";
    std::filesystem::remove_all(dir);
    report::OutputSet out(dir);
    HittingCheckParams p;
    p.N = 16;
    p.triples = 3;
    const auto r = hitting_check(p, {});
    CHECK(r.passed());
    emit(r, out, "x/");
    CHECK(std::filesystem::exists(dir / "x/hitting-check.json"));
    CHECK(out.files().size() == 1 + r.tables.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("argument parsing") {
    CHECK(parse_domain("unit_disc").kind() == continuum::NiceDomain::Kind::UnitDisc);
    CHECK(parse_domain("disc:1,2,3").radius() == 3.0);
    CHECK_THROWS(parse_domain("square"));
    const auto d = DiscRegion::parse("0.1,0.2,0.3");
    CHECK(d.contains({0.1, 0.2}));
    CHECK_FALSE(d.contains({0.5, 0.2}));
    CHECK_THROWS(DiscRegion::parse("1,2,-3"));
    CHECK_THROWS(DiscRegion::parse("1,2"));
}

#include "thickpoints/constants.hpp"
#include "thickpoints/continuum.hpp"
#include "thickpoints/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace thickpoints;
using namespace thickpoints::continuum;
using boost::math::quadrature::gauss_kronrod;

namespace {

const double kPi = std::numbers::pi;

double gk(const auto& f, double lo, double hi) { return gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13); }

} // namespace

TEST_CASE("constants against literal arithmetic") {
    // pi and the Euler-Mascheroni constant typed out, not taken from <numbers>
    const double pi = 3.14159265358979323846;
    const double gamma = 0.57721566490153286061;
    CHECK(std::abs(kGreenSlope - 2.0 / pi) < 1e-15);
    CHECK(std::abs(kGreenOffset - (2.0 / pi) * (gamma + 0.5 * std::log(8.0))) < 1e-14);
    CHECK(kGreenSlope == doctest::Approx(0.63661977).epsilon(1e-8));
    CHECK(kGreenOffset == doctest::Approx(1.02937).epsilon(1e-5));
}

TEST_CASE("conformal radius") {
    const auto D = NiceDomain::unit_disc();
    CHECK(conformal_radius(D, 0.0) == doctest::Approx(1.0));
    CHECK(conformal_radius(D, 0.5) == doctest::Approx(0.75));
    CHECK(conformal_radius(NiceDomain::disc(0.0, 2.0), 0.0) == doctest::Approx(2.0));
    CHECK(conformal_radius(NiceDomain::disc({1.0, -2.0}, 3.0), {1.0, -2.0}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(conformal_radius(D, 1.0), DomainError);
    CHECK_THROWS_AS(conformal_radius(D, {2.0, 0.0}), DomainError);
}

TEST_CASE("automorphisms leave conformal quantities unchanged") {
    const auto D = NiceDomain::unit_disc();
    const auto M = D.mobius({0.3, -0.2}, 1.1);
    const Point x{0.2, 0.4}, y{-0.5, 0.1}, z{0.0, 1.0};
    CHECK(conformal_radius(M, x) == doctest::Approx(conformal_radius(D, x)).epsilon(1e-12));
    CHECK(green_function(M, x, y) == doctest::Approx(green_function(D, x, y)).epsilon(1e-12));
    CHECK(poisson_kernel(M, x, z) == doctest::Approx(poisson_kernel(D, x, z)).epsilon(1e-12));
}

TEST_CASE("green function") {
    const auto D = NiceDomain::unit_disc();
    CHECK(green_function(D, 0.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const Point x{0.1, 0.3}, y{-0.4, 0.2};
    CHECK(green_function(D, x, y) == doctest::Approx(green_function(D, y, x)).epsilon(1e-14));
    CHECK(std::abs(green_function(D, x, std::polar(1.0 - 1e-9, 0.7))) < 1e-6);
    CHECK_THROWS_AS(green_function(D, x, x), SingularityError);
    // scaled disc: G_{rD}(r x, r y) = G_D(x, y)
    const auto D3 = NiceDomain::disc(0.0, 3.0);
    CHECK(green_function(D3, 3.0 * x, 3.0 * y) == doctest::Approx(green_function(D, x, y)).epsilon(1e-13));
}

TEST_CASE("poisson kernel") {
    const auto D = NiceDomain::unit_disc();
    CHECK(poisson_kernel(D, 0.0, std::polar(1.0, 2.0)) == doctest::Approx(1.0 / (2.0 * kPi)));
    CHECK(poisson_kernel(D, 0.5, 1.0) == doctest::Approx(3.0 / (2.0 * kPi)).epsilon(1e-12));
    CHECK_THROWS_AS(poisson_kernel(D, 1.5, 1.0), DomainError);
    // total mass one over the boundary, also on a shifted disc
    const auto E = NiceDomain::disc({0.5, 0.5}, 2.0);
    const Point x{1.2, -0.3};
    const double mass = gk([&](double t) { return 2.0 * poisson_kernel(E, x, Point{0.5, 0.5} + std::polar(2.0, t)); },
                           0.0, 2.0 * kPi);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("psi density") {
    const auto D = NiceDomain::unit_disc();
    const auto t = TripleDXZ::make(D, 0.0, 1.0);
    CHECK(psi_density(t, 1.0, 0.5) == doctest::Approx(0.75 * std::log(2.0) * 3.0).epsilon(1e-12));
    CHECK(psi_density(t, 1.0, 0.5) == doctest::Approx(1.55958).epsilon(1e-5));
    CHECK(psi_density(t, 0.0, 0.5) == doctest::Approx(std::log(2.0) * 3.0).epsilon(1e-12));
    CHECK(psi_density(t, 1.0, {1.5, 0.0}) == 0.0);
    CHECK_THROWS_AS(psi_density(t, 1.0, 0.0), SingularityError);
    CHECK_THROWS_AS(TripleDXZ::make(D, 0.0, 0.9), DomainError);
    CHECK_THROWS_AS(TripleDXZ::make(D, 1.0, 1.0), DomainError);
}

TEST_CASE("simplex integral, r = 1 and r = 2") {
    CHECK(simplex_product_integral({1.0, {0.75}}) == doctest::Approx(0.75));
    CHECK(simplex_product_integral({0.5, {0.75}}) == doctest::Approx(std::pow(0.75, 0.5)));
    CHECK(simplex_product_integral({1.0, {1.0, std::exp(1.0)}}) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
    for (double c : {0.3, 1.0, 2.5})
        for (double a : {0.2, 1.0, 1.7})
            CHECK(simplex_product_integral({a, {c, c}}) == doctest::Approx(a * std::pow(c, a)).epsilon(1e-12));
    // nearly equal coefficients stay close to the degenerate limit
    CHECK(simplex_product_integral({1.0, {2.0, 2.0 * (1 + 1e-9)}}) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK_THROWS(simplex_product_integral({1.0, {}}));
    CHECK_THROWS(simplex_product_integral({2.5, {1.0}}));
    CHECK_THROWS(simplex_product_integral({1.0, {-1.0, 2.0}}));
}

TEST_CASE("simplex integral, r = 3 against 2D quadrature") {
    auto brute = [](double a, double c1, double c2, double c3) {
        return gk(
            [&](double a1) {
                return gk([&](double a2) { return std::pow(c1, a1) * std::pow(c2, a2) * std::pow(c3, a - a1 - a2); }, 0.0,
                          a - a1);
            },
            0.0, a);
    };
    CHECK(simplex_product_integral({1.0, {0.5, 0.6, 0.7}}) == doctest::Approx(brute(1.0, 0.5, 0.6, 0.7)).epsilon(1e-10));
    CHECK(simplex_product_integral({1.3, {4.0, 0.2, 4.0}}) == doctest::Approx(brute(1.3, 4.0, 0.2, 4.0)).epsilon(1e-10));
    CHECK(simplex_product_integral({0.4, {1.0, 1.0, 1.0}}) == doctest::Approx(0.4 * 0.4 / 2.0).epsilon(1e-12));
}

TEST_CASE("multipoint density") {
    const auto D = NiceDomain::unit_disc();
    const auto t = TripleDXZ::make(D, 0.0, 1.0);
    const std::vector<TripleDXZ> one{t};
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const Point x{-0.95 + 0.21 * i, -0.93 + 0.205 * j};
            if (x == t.start) continue;
            CHECK(std::abs(multipoint_first_moment_density(one, 0.7, x) - psi_density(t, 0.7, x)) < 1e-10);
        }

    const std::vector<TripleDXZ> disjoint{TripleDXZ::make(NiceDomain::disc({-2.0, 0.0}, 1.0), {-2.0, 0.0}, {-1.0, 0.0}),
                                          TripleDXZ::make(NiceDomain::disc({2.0, 0.0}, 1.0), {2.0, 0.0}, {3.0, 0.0})};
    for (double x = -3.0; x <= 3.0; x += 0.25) CHECK(multipoint_first_moment_density(disjoint, 1.0, {x, 0.1}) == 0.0);

    const auto t2 = TripleDXZ::make(D, 0.0, -1.0);
    const std::vector<TripleDXZ> two{t, t2};
    const Point x{0.0, 0.5};
    const double oracle = gk([&](double a1) { return psi_density(t, a1, x) * psi_density(t2, 1.0 - a1, x); }, 0.0, 1.0);
    CHECK(multipoint_first_moment_density(two, 1.0, x) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("martingale density") {
    const auto D = NiceDomain::unit_disc();
    const auto t = TripleDXZ::make(D, 0.0, 1.0);
    const Point x{0.3, 0.2};
    auto factor = [&](const TripleDXZ& tr) {
        PieceFactor f;
        f.covers = tr.domain.contains(x);
        f.conformal_radius = conformal_radius(tr.domain, x);
        f.weight = psi_density(tr, 0.0, x);
        return f;
    };
    const std::vector<PieceFactor> none{PieceFactor{}};
    CHECK(martingale_density(none, 0.5, 2).density == 0.0);
    CHECK(martingale_density(none, 0.5, 2).covering == 0u);

    const std::vector<PieceFactor> single{factor(t)};
    CHECK(martingale_density(single, 0.5, 1).density == doctest::Approx(psi_density(t, 0.5, x)).epsilon(1e-13));

    const auto t2 = TripleDXZ::make(NiceDomain::disc({0.2, 0.0}, 0.8), {0.4, -0.1}, {1.0, 0.0});
    const std::vector<PieceFactor> both{factor(t), factor(t2)};
    const auto r1 = martingale_density(both, 0.5, 1);
    const auto r2 = martingale_density(both, 0.5, 2);
    const double c1 = both[0].conformal_radius, c2 = both[1].conformal_radius;
    const double cross = both[0].weight * both[1].weight * (std::pow(c1, 0.5) - std::pow(c2, 0.5)) / std::log(c1 / c2);
    CHECK(r2.density - r1.density == doctest::Approx(cross).epsilon(1e-12));
    CHECK(r1.tail_bound >= cross);
    CHECK(r2.tail_bound == 0.0);
    CHECK_THROWS(martingale_density(both, 0.5, 0));
}

TEST_CASE("disc integral") {
    CHECK(disc_integral(0.0, 1.0, 0.0, [](Point) { return 1.0; }) == doctest::Approx(kPi).epsilon(1e-10));
    CHECK(disc_integral({0.3, 0.1}, 0.5, {2.0, 2.0}, [](Point) { return 1.0; }) ==
          doctest::Approx(0.25 * kPi).epsilon(1e-10));
    // integral of log(1/|x|) over the unit disc is pi/2
    CHECK(disc_integral(0.0, 1.0, 0.0, [](Point w) { return -std::log(std::abs(w)); }) ==
          doctest::Approx(kPi / 2).epsilon(1e-9));
    // second moment of |w|^2 over a disc of radius 2 centred at 1: pi r^2 (r^2 / 2 + 1)
    CHECK(disc_integral(1.0, 2.0, 0.5, [](Point w) { return std::norm(w); }) ==
          doctest::Approx(4.0 * kPi * 3.0).epsilon(1e-10));
}

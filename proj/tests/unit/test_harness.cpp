#include "thickpoints/harness.hpp"
#include "thickpoints/lattice_solver.hpp"
#include "thickpoints/walk.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>

using namespace thickpoints;
using namespace thickpoints::mc;

TEST_CASE("constant statistic") {
    RunConfig cfg;
    cfg.sample_count = 100;
    cfg.estimator = "constant";
    const auto r = run_replications(cfg, [](std::size_t, Rng&) { return 1.0; }, 1.0);
    CHECK(r.estimate == 1.0);
    CHECK(r.stderr_ == 0.0);
    CHECK(r.n == 100u);
    CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("summaries and verdicts") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto r = summarize("s", v, 3.0);
    CHECK(r.estimate == doctest::Approx(3.0));
    CHECK(r.stderr_ == doctest::Approx(std::sqrt(2.5 / 5)));
    CHECK(r.ci_lo < 3.0);
    CHECK(r.ci_hi > 3.0);
    CHECK(summarize("s", v, 10.0).verdict == Verdict::Fail);
    CHECK(summarize("s", v, 10.0, 7.5).verdict == Verdict::Pass);
    CHECK(summarize("s", v).verdict == Verdict::Informational);
    CHECK(summarize("s", v, 10.0, 0.0, 3.0, true).verdict == Verdict::Informational);
}

TEST_CASE("results do not depend on the worker count") {
    RunConfig cfg;
    cfg.sample_count = 400;
    cfg.estimator = "determinism";
    auto stat = [](std::size_t, Rng& rng) { return rng.exponential() + rng.gamma(3); };
    cfg.workers = 1;
    const auto one = run_replications(cfg, stat);
    cfg.workers = 4;
    const auto four = run_replications(cfg, stat);
    CHECK(one.estimate == four.estimate);
    CHECK(one.stderr_ == four.stderr_);
    cfg.master_seed += 1;
    CHECK(run_replications(cfg, stat).estimate != one.estimate);
}

TEST_CASE("failing replications are collected") {
    RunConfig cfg;
    cfg.sample_count = 10;
    cfg.workers = 3;
    cfg.estimator = "failing";
    try {
        run_replications(cfg, [](std::size_t i, Rng&) -> double {
            if (i == 3 || i == 7) throw std::runtime_error("boom");
            return 0.0;
        });
        FAIL("expected a ReplicationError");
    } catch (const ReplicationError& e) {
        CHECK(e.indices() == std::vector<std::size_t>{3, 7});
    }
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.a = 2.5;
    CHECK_THROWS(cfg.validate());
    cfg = RunConfig{};
    cfg.b = 0.4;
    CHECK_THROWS(cfg.validate());
    cfg = RunConfig{};
    cfg.Ns = {4};
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("exit indicator against harmonic measure") {
    const auto ld = lattice::discretize(continuum::NiceDomain::unit_disc(), 16, 0.0);
    const auto h = lattice::harmonic_measure(ld, ld.start_index());
    double arc = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k)
        if (ld.site(ld.boundary()[k]).x > 3) arc += h[k];
    RunConfig cfg;
    cfg.Ns = {16};
    cfg.sample_count = 20000;
    cfg.estimator = "exit-arc";
    const auto r = run_replications(
        cfg, [&](std::size_t, Rng& rng) { return ld.site(walk::sample_walk(ld, ld.start_index(), rng).exit).x > 3 ? 1.0 : 0.0; },
        arc);
    CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("kolmogorov-smirnov") {
    std::vector<double> eq;
    for (int i = 1; i <= 9; ++i) eq.push_back(0.1 * i);
    CHECK(ks_uniform_test(eq).statistic <= 0.1 + 1e-12);
    CHECK(ks_uniform_test(std::vector<double>(10, 0.5)).statistic == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_uniform_test(std::vector<double>{0.1, 0.2}), InsufficientDataError);

    Rng rng(1, 1);
    std::vector<double> u(10000);
    for (auto& x : u) x = rng.uniform();
    CHECK(ks_uniform_test(u).p_value > 0.001);
    std::vector<double> sq(u);
    for (auto& x : sq) x = x * x;
    CHECK(ks_uniform_test(sq).p_value < 1e-6);
    CHECK(ks_test(sq, [](double t) { return std::sqrt(std::clamp(t, 0.0, 1.0)); }).p_value > 0.001);

    std::vector<double> v(5000);
    for (auto& x : v) x = rng.uniform();
    CHECK(ks_two_sample(u, v).p_value > 0.001);
    CHECK(ks_two_sample(u, sq).p_value < 1e-6);

    CHECK(kolmogorov_q(0.0) == 1.0);
    // tabulated: P(K > 1.358) = 0.05
    CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    // the two series agree where they switch
    CHECK(kolmogorov_q(1.1799) == doctest::Approx(kolmogorov_q(1.1801)).epsilon(1e-3));
}

TEST_CASE("gamma tail") {
    CHECK(gamma_tail(1, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(gamma_tail(2, 0.0) == 1.0);
    // density t^49 e^{-t} / 49! integrated numerically
    const double quad = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double t) { return std::exp(49.0 * std::log(t) - t - std::lgamma(50.0)); }, 50.0, 400.0, 20, 1e-14);
    CHECK(std::abs(gamma_tail(50, 50.0) - quad) < 1e-10);
    CHECK(gamma_tail(1000, 2000.0) < 1e-80);
    CHECK_THROWS(gamma_tail(0, 1.0));
}

TEST_CASE("chi-square tests") {
    const std::vector<std::vector<double>> product{{10, 20, 30}, {20, 40, 60}, {30, 60, 90}};
    const auto p = chi2_independence_test(product);
    CHECK(p.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.dof == 4);
    CHECK(p.p_value == doctest::Approx(1.0));

    const std::vector<std::vector<double>> diagonal{{100, 0, 0}, {0, 100, 0}, {0, 0, 100}};
    CHECK(chi2_independence_test(diagonal).p_value < 1e-6);

    const std::vector<std::vector<double>> sparse{{1, 2}, {3, 4}};
    CHECK_THROWS_AS(chi2_independence_test(sparse), InsufficientDataError);

    const std::vector<double> obs{25, 25, 50}, probs{0.25, 0.25, 0.5};
    const auto g = chi2_gof_test(obs, probs);
    CHECK(g.statistic == doctest::Approx(0.0));
    CHECK(g.dof == 2);
    // Pearson statistic by hand: (40-50)^2/50 + (60-50)^2/50 = 4, survival of chi2(1)
    const std::vector<double> obs2{40, 60}, half{0.5, 0.5};
    const auto g2 = chi2_gof_test(obs2, half);
    CHECK(g2.statistic == doctest::Approx(4.0));
    CHECK(g2.p_value == doctest::Approx(std::erfc(std::sqrt(2.0))).epsilon(1e-10));
}

TEST_CASE("convergence table") {
    RunConfig cfg;
    cfg.Ns = {16, 32, 64};
    cfg.sample_count = 20;
    cfg.estimator = "flat";
    const auto t = convergence_table(cfg, [](int, std::size_t, Rng&) { return 2.0; }, [](int) { return 0.5; }, 1.0);
    REQUIRE(t.rows.size() == 3u);
    CHECK_FALSE(t.rows[0].drift.has_value());
    for (std::size_t k = 1; k < 3; ++k) CHECK(*t.rows[k].drift == 0.0);
    CHECK(t.rows[2].report.estimate == 1.0);
    cfg.Ns = {16};
    CHECK_THROWS(convergence_table(cfg, [](int, std::size_t, Rng&) { return 0.0; }, [](int) { return 1.0; }));
}

TEST_CASE("experiment tags") {
    CHECK(experiment_tag("a") != experiment_tag("b"));
    CHECK(experiment_tag("first-moment@N=256") < (1u << 24));
}

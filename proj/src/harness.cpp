#include "thickpoints/harness.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace thickpoints::mc {

void RunConfig::validate() const {
    if (sample_count < 1) throw std::invalid_argument("sample_count must be at least 1");
    if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("a must lie in (0,2)");
    if (Ns.empty()) throw std::invalid_argument("at least one N is required");
    for (int N : Ns)
        if (N < 8) throw std::invalid_argument("N must be at least 8");
    if (!(b > a)) throw std::invalid_argument("b must exceed a");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Informational: return "informational";
    }
    return "unknown";
}

EstimateReport summarize(std::string estimator, std::span<const double> values, std::optional<double> target,
                         double abs_tol, double z, bool informational) {
    EstimateReport r;
    r.estimator = std::move(estimator);
    r.n = values.size();
    r.target = target;
    r.abs_tol = abs_tol;
    r.z = z;
    // Welford, in index order.
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double v : values) {
        ++k;
        const double d = v - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (v - mean);
    }
    r.estimate = mean;
    r.stderr_ = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
    r.ci_lo = mean - 1.959963984540054 * r.stderr_;
    r.ci_hi = mean + 1.959963984540054 * r.stderr_;
    if (target && !informational)
        r.verdict = std::abs(mean - *target) <= std::max(abs_tol, z * r.stderr_) ? Verdict::Pass : Verdict::Fail;
    return r;
}

unsigned default_workers() {
    if (const char* env = std::getenv("THICKPOINTS_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::uint32_t experiment_tag(const std::string& name) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : name) {
        h ^= c;
        h *= 16777619u;
    }
    return h & 0xFFFFFFu;
}

EstimateReport run_replications(const RunConfig& cfg, const std::function<double(std::size_t, Rng&)>& statistic,
                                std::optional<double> target, bool informational) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint32_t tag = experiment_tag(cfg.estimator);
    const auto values = parallel_map<double>(cfg.sample_count, cfg.workers, [&](std::size_t i) {
        Rng rng(cfg.master_seed, stream_id(tag, i));
        return statistic(i, rng);
    });
    auto r = summarize(cfg.estimator, values, target, cfg.abs_tol, cfg.z, informational);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Theta-function form, fast for small lambda.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi2 / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

double ks_p_value(double d, double n_eff) {
    const double sn = std::sqrt(n_eff);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

} // namespace

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.size() < 5) throw InsufficientDataError("Kolmogorov-Smirnov test needs at least 5 samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_p_value(d, n), s.size()};
}

KsResult ks_uniform_test(std::span<const double> samples) {
    return ks_test(samples, [](double x) { return std::clamp(x, 0.0, 1.0); });
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 5 || b.size() < 5) throw InsufficientDataError("two-sample KS test needs at least 5 samples each");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return {d, ks_p_value(d, n * m / (n + m)), x.size() + y.size()};
}

double gamma_tail(std::uint64_t k, double t) {
    if (k < 1) throw std::invalid_argument("gamma_tail needs k >= 1");
    if (t < 0.0) throw std::invalid_argument("gamma_tail needs t >= 0");
    if (t == 0.0) return 1.0;
    const double lt = std::log(t);
    double mx = -INFINITY;
    std::vector<double> terms(k);
    for (std::uint64_t i = 0; i < k; ++i) {
        terms[i] = static_cast<double>(i) * lt - std::lgamma(static_cast<double>(i) + 1.0);
        mx = std::max(mx, terms[i]);
    }
    double s = 0.0;
    for (double v : terms) s += std::exp(v - mx);
    return std::clamp(std::exp(mx + std::log(s) - t), 0.0, 1.0);
}

Chi2Result chi2_independence_test(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    if (rows < 2) throw std::invalid_argument("contingency table needs at least two rows");
    const std::size_t cols = table[0].size();
    if (cols < 2) throw std::invalid_argument("contingency table needs at least two columns");
    std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (table[i].size() != cols) throw std::invalid_argument("ragged contingency table");
        for (std::size_t j = 0; j < cols; ++j) {
            if (table[i][j] < 0.0) throw std::invalid_argument("negative contingency count");
            rs[i] += table[i][j];
            cs[j] += table[i][j];
            total += table[i][j];
        }
    }
    Chi2Result r;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double e = rs[i] * cs[j] / total;
            if (!(e >= 5.0)) throw InsufficientDataError("expected contingency count below 5");
            const double d = table[i][j] - e;
            r.statistic += d * d / e;
        }
    }
    r.dof = static_cast<int>((rows - 1) * (cols - 1));
    r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    return r;
}

Chi2Result chi2_gof_test(std::span<const double> observed, std::span<const double> probabilities) {
    if (observed.size() != probabilities.size() || observed.size() < 2)
        throw std::invalid_argument("goodness-of-fit needs matching cells, at least two");
    double n = 0.0, psum = 0.0;
    for (double o : observed) n += o;
    for (double p : probabilities) psum += p;
    Chi2Result r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = n * probabilities[i] / psum;
        if (!(e >= 5.0)) throw InsufficientDataError("expected cell count below 5");
        const double d = observed[i] - e;
        r.statistic += d * d / e;
    }
    r.dof = static_cast<int>(observed.size()) - 1;
    r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    return r;
}

ConvergenceTable convergence_table(const RunConfig& cfg,
                                   const std::function<double(int, std::size_t, Rng&)>& statistic,
                                   const std::function<double(int)>& normalization, std::optional<double> limit) {
    cfg.validate();
    if (cfg.Ns.size() < 2) throw std::invalid_argument("convergence table needs at least two values of N");
    ConvergenceTable t;
    t.limit = limit;
    for (std::size_t k = 0; k < cfg.Ns.size(); ++k) {
        const int N = cfg.Ns[k];
        RunConfig c = cfg;
        c.estimator = cfg.estimator + "@N=" + std::to_string(N);
        const double norm = normalization(N);
        ConvergenceRow row;
        row.N = N;
        row.report = run_replications(c, [&](std::size_t i, Rng& rng) { return norm * statistic(N, i, rng); }, limit, true);
        if (k > 0) row.drift = std::abs(row.report.estimate - t.rows.back().report.estimate);
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace thickpoints::mc

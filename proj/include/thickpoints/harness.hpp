#pragma once

#include "thickpoints/errors.hpp"
#include "thickpoints/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace thickpoints::mc {

struct RunConfig {
    std::uint64_t master_seed = 20240601;
    std::string domain = "unit_disc";
    std::vector<int> Ns{128};
    double a = 0.5;
    std::size_t sample_count = 1000;
    std::string estimator = "unnamed";
    double b = 0.6;
    double eps = 0.125;
    double abs_tol = 0.0;
    double z = 3.0;
    unsigned workers = 1;

    void validate() const;
};

enum class Verdict { Pass, Fail, Informational };
const char* to_string(Verdict v);

struct EstimateReport {
    std::string estimator;
    std::size_t n = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::optional<double> target;
    Verdict verdict = Verdict::Informational;
    double abs_tol = 0.0;
    double z = 3.0;
    double wall_time = 0.0; ///< seconds; never serialised into reports
};

/// Mean, stderr = sd / sqrt(n), 95% interval, and a verdict: pass iff
/// |estimate - target| <= max(abs_tol, z * stderr). Without a target, or when
/// `informational`, the verdict is informational.
EstimateReport summarize(std::string estimator, std::span<const double> values, std::optional<double> target = {},
                         double abs_tol = 0.0, double z = 3.0, bool informational = false);

/// THICKPOINTS_WORKERS when set to a positive integer, else hardware concurrency.
unsigned default_workers();

/// 24-bit tag derived from an experiment name, for `stream_id`.
std::uint32_t experiment_tag(const std::string& name);

/// Runs f(i) for i in [0, n) on up to `workers` threads. Failures are
/// collected and rethrown as one ReplicationError listing the indices.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
    std::vector<std::size_t> failed;
    std::string first_message;
    std::mutex mutex;
    auto guarded = [&](std::size_t i) {
        try {
            f(i);
        } catch (const std::exception& e) {
            std::lock_guard lock(mutex);
            if (failed.empty()) first_message = e.what();
            failed.push_back(i);
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (unsigned t = 0; t < w; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) guarded(i);
            });
        for (auto& th : pool) th.join();
    }
    if (!failed.empty()) {
        std::sort(failed.begin(), failed.end());
        throw ReplicationError(std::to_string(failed.size()) + " replication(s) failed; first: " + first_message,
                               std::move(failed));
    }
}

/// Ordered results of f(i), i in [0, n).
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned workers, F&& f) {
    std::vector<T> out(n);
    parallel_for(n, workers, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

/// Replication i draws from Rng(master_seed, stream_id(tag(estimator), i)).
/// The result does not depend on the worker count.
EstimateReport run_replications(const RunConfig& cfg, const std::function<double(std::size_t, Rng&)>& statistic,
                                std::optional<double> target = {}, bool informational = false);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_uniform_test(std::span<const double> samples);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(Gamma(k, 1) > t) = e^{-t} sum_{i<k} t^i / i!, accumulated in log space.
double gamma_tail(std::uint64_t k, double t);

struct Chi2Result {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// Pearson independence test; throws InsufficientDataError when an expected
/// cell count is below 5.
Chi2Result chi2_independence_test(const std::vector<std::vector<double>>& table);

/// Goodness of fit of counts against cell probabilities (renormalised).
Chi2Result chi2_gof_test(std::span<const double> observed, std::span<const double> probabilities);

struct ConvergenceRow {
    int N = 0;
    EstimateReport report;
    std::optional<double> drift; ///< |est(N_i) - est(N_{i-1})|
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<double> limit;
};

/// normalization(N) * statistic, replicated per N in cfg.Ns.
ConvergenceTable convergence_table(const RunConfig& cfg,
                                   const std::function<double(int, std::size_t, Rng&)>& statistic,
                                   const std::function<double(int)>& normalization,
                                   std::optional<double> limit = {});

} // namespace thickpoints::mc

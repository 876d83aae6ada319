#include "thickpoints/errors.hpp"
#include "thickpoints/experiments.hpp"
#include "thickpoints/harness.hpp"
#include "thickpoints/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <fstream>
#include <map>
#include <optional>
#include <numbers>
#include <string>
#include <vector>

namespace ex = thickpoints::experiments;
using thickpoints::continuum::Point;
using thickpoints::report::json;

namespace {

/// Flat `key = value` files: keys that are not options of the main program
/// belong to the subcommand being run.
class FlatConfig : public CLI::ConfigINI {
public:
    explicit FlatConfig(const CLI::App* app) : app_(app) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& is) const override {
        auto items = CLI::ConfigINI::from_config(is);
        const auto subs = app_->get_subcommands();
        for (auto& item : items) {
            if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default")) continue;
            if (subs.empty() || app_->get_option_no_throw("--" + item.name)) continue;
            item.parents = {subs.front()->get_name()};
        }
        return items;
    }

private:
    const CLI::App* app_;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Point parse_point(const std::string& s, const char* flag) {
    double x = 0, y = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf%c", &x, &y, &tail) != 2) throw UsageError(std::string(flag) + " expects x,y");
    return {x, y};
}

double parse_coefficient(const std::string& s) {
    if (s == "e") return std::numbers::e;
    if (s == "pi") return std::numbers::pi;
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !(v > 0)) throw UsageError("coefficient '" + s + "' is not a positive number, e or pi");
    return v;
}

void validate_domain(const std::string& spec) {
    try {
        ex::parse_domain(spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

ex::DiscRegion parse_region(const std::string& s, const char* flag) {
    try {
        return ex::DiscRegion::parse(s);
    } catch (const std::invalid_argument&) {
        throw UsageError(std::string(flag) + " expects cx,cy,r");
    }
}

std::optional<Point> parse_target(const std::string& s, const std::string& domain, const char* flag) {
    if (s.empty() || s == "none") return std::nullopt;
    const Point z = parse_point(s, flag);
    if (!ex::parse_domain(domain).on_boundary(z, 1e-9))
        throw UsageError(std::string(flag) + " is not a boundary point of the domain");
    return z;
}

void print_result(const ex::ExperimentResult& r) {
    for (const auto& line : r.summary) std::cout << line << '\n';
    for (const auto& c : r.checks)
        std::cout << (c.informational ? "[info] " : c.passed ? "[pass] " : "[FAIL] ") << r.command << ": " << c.name
                  << " (" << c.detail << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thick points of planar random walk: lattice experiments and verification battery"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app.config_formatter(std::make_shared<FlatConfig>(&app));
    app.allow_config_extras(CLI::config_extras_mode::error);

    std::uint64_t seed = 20240601;
    unsigned workers = thickpoints::mc::default_workers();
    std::string out_dir = "results";
    std::string json_path;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads (default THICKPOINTS_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "directory for CSV, JSON and the manifest");
    app.add_option("--json", json_path, "also write the report to this file");

    // Each subcommand owns its flag values; they become parameter structs after parsing.
    struct Flags {
        std::string domain = "unit_disc", x0 = "0,0", x, y = "0,0.5", region = "0,0,0.5", sub = "0,0,0.5", exit_target;
        std::string profile = "quick";
        std::vector<int> Ns;
        int N = 0, R = 16, kmax = 3, triples = 50, arcs = 4, p_level = 3, r_max = 2, grid = 32, random_sets = 0,
            r_count = 0;
        double a = 0.5, diag_tol = 0.05, off_tol = 0.02, rel_tol = 0.15, tol = 1e-8;
        std::size_t samples = 0, sample_index = 0;
        std::vector<std::string> coefficients;
        bool drop_truncated = false, no_oracle = false;
    };
    std::map<std::string, Flags> flags;
    std::map<std::string, std::function<ex::ExperimentResult(const ex::RunOptions&)>> runners;

    auto add_domain = [](CLI::App* s, Flags& f) {
        s->add_option("--domain", f.domain, "unit_disc | disc | disc:cx,cy,r")->capture_default_str();
    };
    auto add_x0 = [](CLI::App* s, Flags& f) { s->add_option("--x0", f.x0, "start point x,y")->capture_default_str(); };
    auto add_samples = [](CLI::App* s, Flags& f, std::size_t def) {
        f.samples = def;
        s->add_option("--samples", f.samples, "number of walks")->capture_default_str()->check(CLI::PositiveNumber);
    };
    auto add_N = [](CLI::App* s, Flags& f, int def) {
        f.N = def;
        s->add_option("--N", f.N, "lattice scale")->capture_default_str()->check(CLI::Range(8, 1 << 14));
    };
    auto add_Ns = [](CLI::App* s, Flags& f, std::vector<int> def) {
        f.Ns = std::move(def);
        auto* o = s->add_option("--N", f.Ns, "comma-separated list of N")->delimiter(',');
        if (f.Ns.empty())
            o->required();
        else
            o->capture_default_str();
    };
    auto add_a = [](CLI::App* s, Flags& f, double def) {
        f.a = def;
        s->add_option("--a", f.a, "thickness level")->capture_default_str();
    };
    auto add_exit = [](CLI::App* s, Flags& f, std::string def, const char* help) {
        f.exit_target = std::move(def);
        s->add_option("--exit", f.exit_target, help)->capture_default_str();
    };

    {
        auto& f = flags["green-check"];
        auto* s = app.add_subcommand("green-check", "diagonal and off-diagonal Green function asymptotics");
        add_domain(s, f);
        add_Ns(s, f, {});
        s->add_option("--x", f.x, "diagonal point x,y (default 0,0)");
        s->add_option("--y", f.y, "off-diagonal partner x,y")->capture_default_str();
        s->add_option("--diag-tol", f.diag_tol)->capture_default_str();
        s->add_option("--off-tol", f.off_tol)->capture_default_str();
        runners["green-check"] = [&f](const ex::RunOptions&) {
            ex::GreenCheckParams p;
            p.domain = f.domain;
            p.Ns = f.Ns;
            if (!f.x.empty()) p.x = parse_point(f.x, "--x");
            p.y = parse_point(f.y, "--y");
            p.diagonal_tol = f.diag_tol;
            p.off_diagonal_tol = f.off_tol;
            return ex::green_check(p);
        };
    }
    {
        auto& f = flags["first-moment"];
        auto* s = app.add_subcommand("first-moment", "first moment of the thick-point measure on a disc A");
        add_domain(s, f);
        add_x0(s, f);
        add_N(s, f, 256);
        add_a(s, f, 0.5);
        add_samples(s, f, 20000);
        s->add_option("--region", f.region, "A as cx,cy,r")->capture_default_str();
        add_exit(s, f, "", "condition on exiting at this boundary point x,y");
        s->add_option("--rel-tol", f.rel_tol)->capture_default_str();
        runners["first-moment"] = [&f](const ex::RunOptions& o) {
            ex::FirstMomentParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            p.N = f.N;
            p.a = f.a;
            p.samples = f.samples;
            p.region = parse_region(f.region, "--region");
            p.exit_target = parse_target(f.exit_target, f.domain, "--exit");
            p.rel_tol = f.rel_tol;
            return ex::first_moment(p, o);
        };
    }
    {
        auto& f = flags["markov-check"];
        auto* s = app.add_subcommand("markov-check", "sample-exact Markov decomposition of the thick-point measure");
        add_domain(s, f);
        add_x0(s, f);
        add_N(s, f, 64);
        add_a(s, f, 0.5);
        add_samples(s, f, 10000);
        s->add_option("--sub", f.sub, "sub-domain disc cx,cy,r")->capture_default_str();
        add_exit(s, f, "1,0", "boundary target x,y, or none for unconditioned walks");
        s->add_flag("--no-oracle", f.no_oracle, "skip the exact cross-mass expectation");
        runners["markov-check"] = [&f](const ex::RunOptions& o) {
            ex::MarkovCheckParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            p.N = f.N;
            p.a = f.a;
            p.samples = f.samples;
            p.sub = parse_region(f.sub, "--sub");
            p.exit_target = parse_target(f.exit_target, f.domain, "--exit");
            p.oracle = !f.no_oracle;
            return ex::markov_check(p, o);
        };
    }
    {
        auto& f = flags["split-uniformity"];
        auto* s = app.add_subcommand("split-uniformity", "thickness split of cross atoms against Uniform(0,1)");
        add_domain(s, f);
        add_x0(s, f);
        add_Ns(s, f, {64, 256});
        add_a(s, f, 0.5);
        add_samples(s, f, 2000);
        s->add_option("--sub", f.sub, "sub-domain disc cx,cy,r")->capture_default_str();
        runners["split-uniformity"] = [&f](const ex::RunOptions& o) {
            ex::SplitUniformityParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            p.Ns = f.Ns;
            p.a = f.a;
            p.samples = f.samples;
            p.sub = parse_region(f.sub, "--sub");
            return ex::split_uniformity(p, o);
        };
    }
    {
        auto& f = flags["excursion-law"];
        auto* s = app.add_subcommand("excursion-law", "excursion counts from x to the contour C_R(x)");
        add_domain(s, f);
        add_x0(s, f);
        s->add_option("--x", f.x, "centre point x,y (default 0.25,0)");
        add_N(s, f, 256);
        s->add_option("--R", f.R, "contour radius, a power of two")->capture_default_str();
        add_samples(s, f, 100000);
        s->add_option("--kmax", f.kmax)->capture_default_str();
        s->add_flag("--drop-truncated", f.drop_truncated, "do not count an excursion cut short by the exit");
        runners["excursion-law"] = [&f](const ex::RunOptions& o) {
            ex::ExcursionLawParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            if (!f.x.empty()) p.x = parse_point(f.x, "--x");
            p.N = f.N;
            p.R = f.R;
            p.samples = f.samples;
            p.kmax = f.kmax;
            p.drop_truncated = f.drop_truncated;
            return ex::excursion_law(p, o);
        };
    }
    {
        auto& f = flags["thick-scaling"];
        auto* s = app.add_subcommand("thick-scaling", "normalised thick-point counts across N");
        add_domain(s, f);
        add_x0(s, f);
        add_Ns(s, f, {64, 128, 256});
        add_a(s, f, 0.5);
        add_samples(s, f, 40000);
        runners["thick-scaling"] = [&f](const ex::RunOptions& o) {
            ex::ThickScalingParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            p.Ns = f.Ns;
            p.a = f.a;
            p.samples = f.samples;
            return ex::thick_scaling(p, o);
        };
    }
    {
        auto& f = flags["simplex-eval"];
        auto* s = app.add_subcommand("simplex-eval", "simplex product integral");
        s->add_option("--r", f.r_count, "number of coefficients (checked against --c)");
        s->add_option("--c", f.coefficients, "coefficients, comma-separated; 'e' and 'pi' accepted")->delimiter(',');
        add_a(s, f, 1.0);
        s->add_option("--random", f.random_sets, "compare with quadrature on this many random sets");
        runners["simplex-eval"] = [&f](const ex::RunOptions& o) {
            ex::SimplexEvalParams p;
            p.a = f.a;
            for (const auto& c : f.coefficients) p.coefficients.push_back(parse_coefficient(c));
            if (f.r_count && static_cast<std::size_t>(f.r_count) != p.coefficients.size())
                throw UsageError("--r does not match the number of --c values");
            if (p.coefficients.empty() && f.random_sets == 0) throw UsageError("give --c or --random");
            p.random_sets = f.random_sets;
            return ex::simplex_eval(p, o);
        };
    }
    {
        auto& f = flags["martingale-approx"];
        auto* s = app.add_subcommand("martingale-approx", "martingale approximation density on a grid");
        add_domain(s, f);
        add_x0(s, f);
        add_N(s, f, 64);
        add_a(s, f, 0.5);
        s->add_option("--p", f.p_level, "strip level: half-width 2^-p")->capture_default_str();
        s->add_option("--r-max,--r_max", f.r_max, "largest subset size kept")->capture_default_str();
        s->add_option("--grid", f.grid, "grid side")->capture_default_str();
        add_exit(s, f, "1,0", "boundary target x,y");
        s->add_option("--sample", f.sample_index, "replication index of the walk")->capture_default_str();
        runners["martingale-approx"] = [&f](const ex::RunOptions& o) {
            ex::MartingaleParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            p.N = f.N;
            p.a = f.a;
            p.p = f.p_level;
            p.r_max = f.r_max;
            p.grid = f.grid;
            const auto z = parse_target(f.exit_target, f.domain, "--exit");
            if (!z) throw UsageError("martingale-approx needs an exit target");
            p.exit_target = *z;
            p.sample_index = f.sample_index;
            return ex::martingale_approx(p, o);
        };
    }
    {
        flags["constants"];
        app.add_subcommand("constants", "print g and c0");
        runners["constants"] = [](const ex::RunOptions&) { return ex::constants_check(); };
    }
    {
        auto& f = flags["hitting-check"];
        auto* s = app.add_subcommand("hitting-check", "two-site hitting identity against a direct solve");
        add_domain(s, f);
        add_N(s, f, 128);
        s->add_option("--triples", f.triples)->capture_default_str();
        s->add_option("--tol", f.tol)->capture_default_str();
        runners["hitting-check"] = [&f](const ex::RunOptions& o) {
            ex::HittingCheckParams p;
            p.domain = f.domain;
            p.N = f.N;
            p.triples = f.triples;
            p.tol = f.tol;
            return ex::hitting_check(p, o);
        };
    }
    {
        auto& f = flags["local-time-law"];
        auto* s = app.add_subcommand("local-time-law", "law of the local time at the start site");
        add_domain(s, f);
        add_N(s, f, 128);
        s->add_option("--x", f.x, "start point x,y (default 0,0)");
        add_samples(s, f, 10000);
        s->add_option("--arcs", f.arcs)->capture_default_str();
        runners["local-time-law"] = [&f](const ex::RunOptions& o) {
            ex::LocalTimeParams p;
            p.domain = f.domain;
            p.N = f.N;
            if (!f.x.empty()) p.x = parse_point(f.x, "--x");
            p.samples = f.samples;
            p.arcs = f.arcs;
            return ex::local_time_law(p, o);
        };
    }
    {
        auto& f = flags["conditioned-check"];
        auto* s = app.add_subcommand("conditioned-check", "h-transform walk: exit site and conditioned local times");
        add_domain(s, f);
        add_x0(s, f);
        add_N(s, f, 64);
        add_samples(s, f, 10000);
        add_exit(s, f, "1,0", "boundary target x,y");
        runners["conditioned-check"] = [&f](const ex::RunOptions& o) {
            ex::ConditionedCheckParams p;
            p.domain = f.domain;
            p.x0 = parse_point(f.x0, "--x0");
            p.N = f.N;
            p.samples = f.samples;
            const auto z = parse_target(f.exit_target, f.domain, "--exit");
            if (!z) throw UsageError("conditioned-check needs an exit target");
            p.exit_target = *z;
            return ex::conditioned_check(p, o);
        };
    }
    {
        auto& f = flags["battery"];
        auto* s = app.add_subcommand("battery", "run every experiment");
        s->add_option("--profile", f.profile, "quick | full")->capture_default_str()->check(CLI::IsMember({"quick", "full"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const ex::RunOptions opts{seed, workers};
    try {
        const auto& f = flags.at(command);
        validate_domain(f.domain);
        thickpoints::report::OutputSet out(out_dir);
        json config = {{"command", command}, {"seed", seed}, {"workers", workers}};
        json timing = json::object();
        bool passed = true;
        if (command == "battery") {
            const auto results =
                ex::run_battery(f.profile == "full" ? ex::Profile::Full : ex::Profile::Quick, opts, out);
            for (const auto& r : results) {
                print_result(r);
                timing[r.command] = r.wall_time;
                passed = passed && r.passed();
            }
            config["profile"] = f.profile;
        } else {
            const auto r = runners.at(command)(opts);
            print_result(r);
            ex::emit(r, out);
            if (!json_path.empty()) {
                std::ofstream os(json_path, std::ios::binary);
                os << r.report.dump(2) << '\n';
                if (!os) throw std::runtime_error("cannot write " + json_path);
            }
            config["parameters"] = r.report["config"];
            timing["wall_time"] = r.wall_time;
            passed = r.passed();
        }
        out.write_manifest(config, seed, timing);
        return passed ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

#include "thickpoints/lattice_solver.hpp"

#include "thickpoints/constants.hpp"
#include "thickpoints/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace thickpoints::lattice {

double PotentialField::at(Site s) const {
    const auto i = domain->index_of(s);
    if (i == LatticeDomain::kNone) throw std::out_of_range("site is not in the field's domain");
    return (*this)[i];
}

double PotentialField::harmonic_defect(std::int32_t skip) const {
    double worst = 0.0;
    for (std::int32_t i : domain->interior()) {
        if (i == skip) continue;
        double avg = 0.0;
        for (std::int32_t j : domain->neighbours(i)) avg += values[static_cast<std::size_t>(j)];
        worst = std::max(worst, std::abs(values[static_cast<std::size_t>(i)] - 0.25 * avg));
    }
    return worst;
}

void PotentialField::write_csv(std::ostream& os) const {
    os << "x,y,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Site& s = domain->sites()[i];
        os << s.x << "," << s.y << "," << values[i] << "\n";
    }
}

DirichletProblem DirichletProblem::homogeneous(const LatticeDomain& ld) {
    DirichletProblem p;
    p.free.assign(ld.size(), 0);
    for (std::int32_t i : ld.interior()) p.free[static_cast<std::size_t>(i)] = 1;
    p.value.assign(ld.size(), 0.0);
    p.source.assign(ld.size(), 0.0);
    return p;
}

namespace {

// Restriction of I - P to the free sites, with the free-to-free couplings
// stored as ordinals (-1 for a fixed neighbour).
struct Operator {
    std::vector<std::int32_t> sites;                   // ordinal -> site index
    std::vector<std::array<std::int32_t, 4>> coupled;  // ordinal -> neighbour ordinals

    std::size_t size() const { return sites.size(); }

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        const std::size_t n = size();
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::int32_t j : coupled[k])
                if (j >= 0) s += u[static_cast<std::size_t>(j)];
            out[k] = u[k] - 0.25 * s;
        }
    }

    // z = M^{-1} r for the SSOR preconditioner with unit diagonal.
    void ssor(const std::vector<double>& r, std::vector<double>& z, double omega) const {
        const std::size_t n = size();
        // Forward sweep: (I + omega L) y = omega r; neighbours with smaller ordinal form L.
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::int32_t j : coupled[k])
                if (j >= 0 && static_cast<std::size_t>(j) < k) s += z[static_cast<std::size_t>(j)];
            z[k] = omega * r[k] + omega * 0.25 * s;
        }
        const double scale = (2.0 - omega) / omega;
        for (std::size_t k = 0; k < n; ++k) z[k] *= scale;
        // Backward sweep: (I + omega U) z = y.
        for (std::size_t k = n; k-- > 0;) {
            double s = 0.0;
            for (std::int32_t j : coupled[k])
                if (j >= 0 && static_cast<std::size_t>(j) > k) s += z[static_cast<std::size_t>(j)];
            z[k] = omega * (z[k] + 0.25 * s);
        }
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Preconditioned CG from the initial guess in x. Returns (iterations, relative residual).
std::pair<int, double> pcg(const Operator& op, const std::vector<double>& b, std::vector<double>& x, double tol,
                           int max_iter, double omega) {
    const std::size_t n = op.size();
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {0, 0.0};
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    op.apply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    op.ssor(r, z, omega);
    p = z;
    double rz = dot(r, z);
    int it = 0;
    double rel = std::sqrt(dot(r, r)) / bnorm;
    while (rel > tol && it < max_iter) {
        op.apply(p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        ++it;
        rel = std::sqrt(dot(r, r)) / bnorm;
        if (rel <= tol) break;
        op.ssor(r, z, omega);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // Recurrence drift: report the true residual.
    op.apply(x, q);
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) rr += (b[i] - q[i]) * (b[i] - q[i]);
    return {it, std::sqrt(rr) / bnorm};
}

} // namespace

PotentialField solve_dirichlet(const LatticeDomain& ld, const DirichletProblem& problem, const SolverOptions& opts) {
    const std::size_t n_sites = ld.size();
    if (problem.free.size() != n_sites || problem.value.size() != n_sites || problem.source.size() != n_sites)
        throw std::invalid_argument("Dirichlet data size does not match the domain");

    Operator op;
    std::vector<std::int32_t> ordinal(n_sites, -1);
    for (std::int32_t i : ld.interior()) {
        if (!problem.free[static_cast<std::size_t>(i)]) continue;
        ordinal[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(op.sites.size());
        op.sites.push_back(i);
    }
    for (std::size_t i = 0; i < n_sites; ++i)
        if (problem.free[i] && ld.is_boundary(static_cast<std::int32_t>(i)))
            throw std::invalid_argument("boundary sites cannot be free in a Dirichlet problem");

    const std::size_t n = op.size();
    op.coupled.resize(n);
    std::vector<double> b(n), x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::int32_t i = op.sites[k];
        double rhs = problem.source[static_cast<std::size_t>(i)];
        for (int d = 0; d < 4; ++d) {
            const std::int32_t j = ld.neighbour(i, d);
            const std::int32_t o = ordinal[static_cast<std::size_t>(j)];
            op.coupled[k][static_cast<std::size_t>(d)] = o;
            if (o < 0) rhs += 0.25 * problem.value[static_cast<std::size_t>(j)];
        }
        b[k] = rhs;
        x[k] = problem.value[static_cast<std::size_t>(i)];
    }

    PotentialField field;
    field.domain = &ld;
    field.values = problem.value;
    if (n > 0) {
        const int N = ld.scale();
        const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : std::max(1000, 50 * N);
        double omega = opts.omega;
        if (omega <= 0.0) {
            const double L = std::sqrt(static_cast<double>(n));
            omega = 2.0 / (1.0 + std::numbers::pi / std::max(L, 1.0));
            omega = std::clamp(omega, 1.0, 1.99);
        }
        auto [it, res] = pcg(op, b, x, opts.tolerance, max_iter, omega);
        if (res > opts.tolerance) {
            // Restart from the current iterate with symmetric Gauss-Seidel.
            auto [it2, res2] = pcg(op, b, x, opts.tolerance, max_iter, 1.0);
            it += it2;
            res = res2;
        }
        if (!(res <= opts.tolerance))
            throw SolverError("conjugate gradient did not reach the residual tolerance", res);
        field.iterations = it;
        field.residual = res;
        for (std::size_t k = 0; k < n; ++k) field.values[static_cast<std::size_t>(op.sites[k])] = x[k];
    }
    return field;
}

PotentialField discrete_green_row(const LatticeDomain& ld, std::int32_t y, const SolverOptions& opts) {
    if (y < 0 || static_cast<std::size_t>(y) >= ld.size()) throw std::out_of_range("site index out of range");
    PotentialField field;
    if (ld.is_boundary(y)) {
        field.domain = &ld;
        field.values.assign(ld.size(), 0.0);
    } else {
        auto problem = DirichletProblem::homogeneous(ld);
        problem.source[static_cast<std::size_t>(y)] = 1.0;
        field = solve_dirichlet(ld, problem, opts);
    }
    field.source = PotentialField::Source::PointSource;
    field.source_site = y;
    return field;
}

std::vector<double> harmonic_measure(const LatticeDomain& ld, std::int32_t x, const SolverOptions& opts) {
    if (!ld.is_interior(x)) throw std::invalid_argument("harmonic measure needs an interior start");
    const auto g = discrete_green_row(ld, x, opts);
    std::vector<double> h;
    h.reserve(ld.boundary().size());
    for (std::int32_t b : ld.boundary()) {
        double s = 0.0;
        for (std::int32_t j : ld.neighbours(b))
            if (j >= 0 && ld.is_interior(j)) s += g[j];
        h.push_back(0.25 * s);
    }
    return h;
}

PotentialField harmonic_measure_field(const LatticeDomain& ld, std::int32_t target, const SolverOptions& opts) {
    if (target < 0 || !ld.is_boundary(target)) throw std::invalid_argument("harmonic measure target must be a boundary site");
    auto problem = DirichletProblem::homogeneous(ld);
    problem.value[static_cast<std::size_t>(target)] = 1.0;
    auto field = solve_dirichlet(ld, problem, opts);
    field.source = PotentialField::Source::BoundaryIndicator;
    field.source_site = target;
    return field;
}

double p_hit(const LatticeDomain& ld, std::int32_t x, std::int32_t y, const SolverOptions& opts) {
    if (!ld.is_interior(x) || !ld.is_interior(y)) throw std::invalid_argument("p_hit needs interior sites");
    if (x == y) return 1.0;
    const auto g = discrete_green_row(ld, y, opts);
    return g[x] / g[y];
}

double avoid_hit_prob(const LatticeDomain& ld, std::int32_t z, std::int32_t x, std::int32_t y,
                      const SolverOptions& opts) {
    if (!ld.is_interior(z) || !ld.is_interior(x) || !ld.is_interior(y))
        throw std::invalid_argument("avoid_hit_prob needs interior sites");
    if (z == x || z == y || x == y) throw std::invalid_argument("avoid_hit_prob needs pairwise distinct sites");
    const auto gx = discrete_green_row(ld, x, opts);
    const auto gy = discrete_green_row(ld, y, opts);
    const double p_zx = gx[z] / gx[x];
    const double p_zy = gy[z] / gy[y];
    const double p_yx = gx[y] / gx[x];
    const double p_xy = gy[x] / gy[y];
    const double den = 1.0 - p_xy * p_yx;
    if (den < 1e-14) throw std::domain_error("hitting identity denominator is numerically zero");
    return (p_zx - p_zy * p_yx) / den;
}

double avoid_hit_prob_direct(const LatticeDomain& ld, std::int32_t z, std::int32_t x, std::int32_t y,
                             const SolverOptions& opts) {
    if (!ld.is_interior(z) || !ld.is_interior(x) || !ld.is_interior(y))
        throw std::invalid_argument("avoid_hit_prob needs interior sites");
    auto problem = DirichletProblem::homogeneous(ld);
    problem.free[static_cast<std::size_t>(x)] = 0;
    problem.free[static_cast<std::size_t>(y)] = 0;
    problem.value[static_cast<std::size_t>(x)] = 1.0;
    return solve_dirichlet(ld, problem, opts)[z];
}

std::vector<GreenAsymptoticsRow> green_asymptotics_check(const continuum::NiceDomain& d, continuum::Point x,
                                                         std::span<const int> N_list, const SolverOptions& opts) {
    const double target = kGreenSlope * std::log(continuum::conformal_radius(d, x)) + kGreenOffset;
    std::vector<GreenAsymptoticsRow> rows;
    for (int N : N_list) {
        const auto ld = discretize(d, N, x);
        const auto y = ld.index_of(floor_site(x, N));
        const auto g = discrete_green_row(ld, y, opts);
        GreenAsymptoticsRow row;
        row.N = N;
        row.green_diagonal = g[y];
        row.centred = g[y] - kGreenSlope * std::log(static_cast<double>(N));
        row.target = target;
        row.deviation = row.centred - target;
        row.iterations = g.iterations;
        row.residual = g.residual;
        rows.push_back(row);
    }
    return rows;
}

std::shared_ptr<const PotentialField> GreenRowCache::row(const LatticeDomain& ld, std::int32_t y,
                                                         const SolverOptions& opts) {
    const Key key{ld.fingerprint(), y};
    {
        std::lock_guard lock(mutex_);
        if (auto it = index_.find(key); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            ++hits_;
            return it->second->second;
        }
        ++misses_;
    }
    auto solved = discrete_green_row(ld, y, opts);
    solved.domain = nullptr;
    auto field = std::make_shared<const PotentialField>(std::move(solved));
    const std::size_t cost = field->values.size() * sizeof(double);
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) return it->second->second;
    lru_.emplace_front(key, field);
    index_.emplace(key, lru_.begin());
    bytes_ += cost;
    while (bytes_ > budget_ && lru_.size() > 1) {
        const auto& victim = lru_.back();
        bytes_ -= victim.second->values.size() * sizeof(double);
        index_.erase(victim.first);
        lru_.pop_back();
    }
    return field;
}

std::size_t GreenRowCache::hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t GreenRowCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

std::size_t GreenRowCache::bytes() const {
    std::lock_guard lock(mutex_);
    return bytes_;
}

void GreenRowCache::clear() {
    std::lock_guard lock(mutex_);
    lru_.clear();
    index_.clear();
    bytes_ = 0;
}

} // namespace thickpoints::lattice

#include "thickpoints/continuum.hpp"

#include "thickpoints/errors.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace thickpoints::continuum {

NiceDomain::NiceDomain(Kind kind, Point center, double radius, Point alpha, Point rotation)
    : kind_(kind), center_(center), radius_(radius), alpha_(alpha), rotation_(rotation) {}

NiceDomain NiceDomain::unit_disc() { return {Kind::UnitDisc, 0.0, 1.0, 0.0, 1.0}; }

NiceDomain NiceDomain::disc(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("disc radius must be positive and finite");
    return {Kind::Disc, center, radius, 0.0, 1.0};
}

NiceDomain NiceDomain::mobius(Point alpha, double rotation) const {
    if (!(std::abs(alpha) < 1.0)) throw std::invalid_argument("automorphism needs |alpha| < 1");
    // Compose: new map = phi_{alpha, rot} o f. Fold into a single automorphism
    // only when the current one is trivial; otherwise compose numerically.
    if (alpha_ != Point(0.0) || rotation_ != Point(1.0)) {
        // phi2(phi1(u)) is again an automorphism: its zero is phi1^{-1}(alpha)
        // and its rotation is fixed by the value at u = 0.
        const Point zero = (alpha / rotation_ + alpha_) / (1.0 + std::conj(alpha_) * alpha / rotation_);
        const Point rot2 = std::polar(1.0, rotation);
        auto compose = [&](Point u) {
            const Point v = rotation_ * (u - alpha_) / (1.0 - std::conj(alpha_) * u);
            return rot2 * (v - alpha) / (1.0 - std::conj(alpha) * v);
        };
        // phi(0) = rot * (-zero)
        const Point rot = (std::abs(zero) > 0.0) ? compose(0.0) / (-zero) : compose(0.5) / 0.5;
        return {Kind::MobiusImage, center_, radius_, zero, rot / std::abs(rot)};
    }
    return {Kind::MobiusImage, center_, radius_, alpha, std::polar(1.0, rotation)};
}

Point NiceDomain::map(Point w) const {
    const Point u = (w - center_) / radius_;
    return rotation_ * (u - alpha_) / (1.0 - std::conj(alpha_) * u);
}

Point NiceDomain::map_derivative(Point w) const {
    const Point u = (w - center_) / radius_;
    const Point den = 1.0 - std::conj(alpha_) * u;
    return rotation_ * (1.0 - std::norm(alpha_)) / (den * den) / radius_;
}

bool NiceDomain::contains(Point w) const { return std::abs(w - center_) < radius_; }

bool NiceDomain::on_boundary(Point z, double tol) const {
    return std::abs(std::abs(map(z)) - 1.0) <= tol;
}

double NiceDomain::boundary_distance(Point w) const { return radius_ - std::abs(w - center_); }

std::string NiceDomain::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case Kind::UnitDisc: os << "unit_disc"; break;
    case Kind::Disc: os << "disc(center=" << center_.real() << "," << center_.imag() << ";radius=" << radius_ << ")"; break;
    case Kind::MobiusImage:
        os << "mobius(center=" << center_.real() << "," << center_.imag() << ";radius=" << radius_
           << ";alpha=" << alpha_.real() << "," << alpha_.imag() << ";rotation=" << std::arg(rotation_) << ")";
        break;
    }
    return os.str();
}

TripleDXZ TripleDXZ::make(const NiceDomain& domain, Point start, Point exit) {
    if (!(std::abs(domain.map(start)) < 1.0 - 1e-8))
        throw DomainError("triple start point is not strictly interior");
    if (!domain.on_boundary(exit)) throw DomainError("triple exit point is not on the boundary");
    return {domain, start, exit};
}

void SimplexSpec::validate() const {
    if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("thickness must lie in (0,2)");
    if (coefficients.empty()) throw std::invalid_argument("simplex needs r >= 1 coefficients");
    for (double c : coefficients)
        if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("simplex coefficients must be positive");
}

namespace {

void require_interior(const NiceDomain& d, Point x, const char* what) {
    if (!(std::abs(d.map(x)) < 1.0)) throw DomainError(std::string(what) + " is not interior to the domain");
}

// sinh(t) / t
double sinhc(double t) {
    if (std::abs(t) < 1e-3) {
        const double t2 = t * t;
        return 1.0 + t2 / 6.0 + t2 * t2 / 120.0;
    }
    return std::sinh(t) / t;
}

// Integral over the simplex of total `a` of exp(sum a_k u_k), u sorted.
double simplex_exp_integral(double a, std::span<const double> u) {
    const std::size_t r = u.size();
    if (a <= 0.0) return r == 1 ? 1.0 : 0.0;
    if (r == 1) return std::exp(a * u[0]);
    if (r == 2) {
        // (e^{a u1} - e^{a u2}) / (u1 - u2), written without cancellation.
        return a * std::exp(0.5 * a * (u[0] + u[1])) * sinhc(0.5 * a * (u[0] - u[1]));
    }
    const double last = u[r - 1];
    const auto head = u.first(r - 1);
    auto integrand = [&](double s) { return std::exp(s * last) * simplex_exp_integral(a - s, head); };
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, a, 12, 1e-12, &error);
}

} // namespace

double conformal_radius(const NiceDomain& d, Point x) {
    require_interior(d, x, "conformal radius point");
    return (1.0 - std::norm(d.map(x))) / std::abs(d.map_derivative(x));
}

double green_function(const NiceDomain& d, Point x, Point y) {
    const Point fx = d.map(x);
    const Point fy = d.map(y);
    if (std::abs(fx) > 1.0 + 1e-12 || std::abs(fy) > 1.0 + 1e-12)
        throw DomainError("green function argument outside the closed domain");
    if (x == y || fx == fy) throw SingularityError("green function evaluated on the diagonal");
    return std::max(0.0, std::log(std::abs(1.0 - fx * std::conj(fy)) / std::abs(fy - fx)));
}

double poisson_kernel(const NiceDomain& d, Point x, Point z) {
    require_interior(d, x, "poisson kernel start");
    if (!d.on_boundary(z)) throw DomainError("poisson kernel target is not a boundary point");
    const Point fx = d.map(x);
    const Point fz = d.map(z);
    return std::abs(d.map_derivative(z)) * (1.0 - std::norm(fx)) /
           (2.0 * std::numbers::pi * std::norm(fx - fz));
}

double psi_density(const TripleDXZ& t, double a, Point x) {
    if (!t.domain.contains(x)) return 0.0;
    if (x == t.start) throw SingularityError("psi density evaluated at its start point");
    const double cr = conformal_radius(t.domain, x);
    const double ratio = poisson_kernel(t.domain, x, t.exit) / poisson_kernel(t.domain, t.start, t.exit);
    return std::pow(cr, a) * green_function(t.domain, t.start, x) * ratio;
}

double simplex_product_integral(const SimplexSpec& s) {
    s.validate();
    std::vector<double> u(s.coefficients.size());
    std::transform(s.coefficients.begin(), s.coefficients.end(), u.begin(), [](double c) { return std::log(c); });
    std::sort(u.begin(), u.end());
    return simplex_exp_integral(s.a, u);
}

double multipoint_first_moment_density(std::span<const TripleDXZ> triples, double a, Point x) {
    if (triples.empty()) throw std::invalid_argument("multipoint density needs at least one triple");
    for (const auto& t : triples)
        if (!t.domain.contains(x)) return 0.0;
    SimplexSpec spec{a, {}};
    double product = 1.0;
    for (const auto& t : triples) {
        if (x == t.start) throw SingularityError("multipoint density evaluated at a start point");
        spec.coefficients.push_back(conformal_radius(t.domain, x));
        product *= green_function(t.domain, t.start, x) * poisson_kernel(t.domain, x, t.exit) /
                   poisson_kernel(t.domain, t.start, t.exit);
    }
    if (product == 0.0) return 0.0;
    return product * simplex_product_integral(spec);
}

MartingaleDensity martingale_density(std::span<const PieceFactor> pieces, double a, int r_max) {
    if (r_max < 1) throw std::invalid_argument("r_max must be at least 1");
    if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("thickness must lie in (0,2)");

    std::vector<const PieceFactor*> cover;
    for (const auto& p : pieces)
        if (p.covers && p.weight > 0.0) cover.push_back(&p);

    MartingaleDensity out;
    out.covering = cover.size();
    const std::size_t m = cover.size();
    if (m == 0) return out;

    const std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(r_max), m);
    std::vector<std::size_t> pick;
    SimplexSpec spec{a, {}};
    // Lexicographic enumeration of subsets of size 1..depth.
    auto recurse = [&](auto&& self, std::size_t from, double weight) -> void {
        for (std::size_t i = from; i < m; ++i) {
            pick.push_back(i);
            const double w = weight * cover[i]->weight;
            spec.coefficients.clear();
            for (std::size_t k : pick) spec.coefficients.push_back(cover[k]->conformal_radius);
            out.density += w * simplex_product_integral(spec);
            ++out.terms;
            if (pick.size() < depth) self(self, i + 1, w);
            pick.pop_back();
        }
    };
    recurse(recurse, 0, 1.0);

    if (depth < m) {
        // Elementary symmetric polynomials of the weights; prod c_k^{a_k} is
        // at most cmax^a and the simplex has volume a^{r-1}/(r-1)!.
        std::vector<double> e(m + 1, 0.0);
        e[0] = 1.0;
        double cmax = 0.0;
        for (const auto* p : cover) {
            for (std::size_t r = m; r >= 1; --r) e[r] += e[r - 1] * p->weight;
            cmax = std::max(cmax, p->conformal_radius);
        }
        double vol = 1.0; // a^{r-1}/(r-1)! at r = 1
        for (std::size_t r = 1; r <= m; ++r) {
            if (r > 1) vol *= a / static_cast<double>(r - 1);
            if (r > depth) out.tail_bound += vol * e[r];
        }
        out.tail_bound *= std::pow(cmax, a);
    }
    return out;
}

double disc_integral(Point center, double radius, Point pole, const std::function<double(Point)>& f,
                     double rel_tol) {
    if (!(radius > 0.0)) throw std::invalid_argument("disc_integral needs a positive radius");
    using boost::math::quadrature::gauss_kronrod;
    const Point d = pole - center;
    const double c = std::norm(d) - radius * radius; // < 0 iff the pole is inside
    // Ray pole + rho e^{i theta} meets the circle where rho^2 + 2 b rho + c = 0.
    auto ray = [&](double theta) {
        const Point e = std::polar(1.0, theta);
        const double b = d.real() * e.real() + d.imag() * e.imag();
        const double disc = b * b - c;
        if (disc <= 0.0) return 0.0;
        const double s = std::sqrt(disc);
        const double lo = std::max(0.0, -b - s);
        const double hi = -b + s;
        if (hi <= lo) return 0.0;
        auto radial = [&](double rho) { return rho * f(pole + rho * e); };
        return gauss_kronrod<double, 31>::integrate(radial, lo, hi, 10, rel_tol);
    };
    if (c < 0.0) return gauss_kronrod<double, 31>::integrate(ray, 0.0, 2.0 * std::numbers::pi, 10, rel_tol);
    // Pole outside: only the cone of directions that meet the disc.
    const double phi = std::arg(-d);
    const double half = std::asin(std::min(1.0, radius / std::abs(d)));
    // theta = phi + half sin(t) smooths the square-root edges of the cone.
    auto smoothed = [&](double t) { return ray(phi + half * std::sin(t)) * half * std::cos(t); };
    return gauss_kronrod<double, 31>::integrate(smoothed, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, 10,
                                                rel_tol);
}

} // namespace thickpoints::continuum

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace thickpoints::continuum {

using Point = std::complex<double>;

/// Simply connected domain with an explicit conformal map onto the unit disc.
///
/// Every supported domain is a disc; `mobius` composes the map with a disc
/// automorphism u -> e^{i theta} (u - alpha) / (1 - conj(alpha) u), which moves
/// the preimage of the origin without changing the geometry. The conformal
/// quantities are invariant under that composition.
class NiceDomain {
public:
    enum class Kind { UnitDisc, Disc, MobiusImage };

    static NiceDomain unit_disc();
    static NiceDomain disc(Point center, double radius);

    /// Same geometric domain, map post-composed with a disc automorphism.
    NiceDomain mobius(Point alpha, double rotation) const;

    Kind kind() const { return kind_; }
    Point center() const { return center_; }
    double radius() const { return radius_; }
    Point automorphism_alpha() const { return alpha_; }
    double automorphism_rotation() const { return std::arg(rotation_); }

    /// f_D(w), onto the unit disc.
    Point map(Point w) const;
    /// f_D'(w).
    Point map_derivative(Point w) const;

    /// Strictly inside.
    bool contains(Point w) const;
    /// |f(z)| = 1 within `tol`.
    bool on_boundary(Point z, double tol = 1e-10) const;
    /// Euclidean distance to the boundary circle (negative outside).
    double boundary_distance(Point w) const;

    std::string describe() const;

private:
    NiceDomain(Kind kind, Point center, double radius, Point alpha, Point rotation);

    Kind kind_;
    Point center_;
    double radius_;
    Point alpha_;
    Point rotation_; // unit complex
};

/// (D, x0, z): domain, interior start, boundary exit.
struct TripleDXZ {
    NiceDomain domain;
    Point start;
    Point exit;

    /// Validates |f(x0)| < 1 - 1e-8 and z on the boundary.
    static TripleDXZ make(const NiceDomain& domain, Point start, Point exit);
};

struct SimplexSpec {
    double a;
    std::vector<double> coefficients;

    void validate() const;
};

double conformal_radius(const NiceDomain& d, Point x);

/// Zero-boundary Green function normalised as -log|x - y| near the diagonal.
double green_function(const NiceDomain& d, Point x, Point y);

/// Density of the exit position of Brownian motion from x w.r.t. arc length.
double poisson_kernel(const NiceDomain& d, Point x, Point z);

/// CR(x)^a G(x0, x) H(x, z) / H(x0, z); zero off the domain.
double psi_density(const TripleDXZ& t, double a, Point x);

/// Integral over the simplex {a_1 + ... + a_r = a, a_k > 0} of prod c_k^{a_k}
/// against da_1 ... da_{r-1}. For r = 1 the simplex is the point {a}.
double simplex_product_integral(const SimplexSpec& s);

/// First-moment density of the multipoint measure of the given triples:
/// prod_k G^{D_k}(x_k, x) H^{D_k}(x, z_k) / H^{D_k}(x_k, z_k) times the simplex
/// integral with coefficients CR(x, D_k). Zero unless x lies in every D_k.
double multipoint_first_moment_density(std::span<const TripleDXZ> triples, double a, Point x);

/// Per-piece data the martingale density needs at one evaluation point.
struct PieceFactor {
    bool covers = false;          ///< evaluation point lies in the piece's domain
    double conformal_radius = 0;  ///< CR(x, D_i)
    double weight = 0;            ///< G^{D_i}(x_i, x) H^{D_i}(x, x_{i+1}) / H^{D_i}(x_i, x_{i+1})
};

struct MartingaleDensity {
    double density = 0;       ///< truncated subset sum, r <= r_max
    double tail_bound = 0;    ///< upper bound on the dropped r > r_max terms
    std::size_t covering = 0; ///< number of pieces covering the point
    std::size_t terms = 0;    ///< subsets evaluated
};

/// Density at one point of the conditional-expectation approximation built
/// from a strip decomposition: sum over subsets of covering pieces with
/// size r <= r_max of (prod weights) x simplex integral of the pieces' CRs.
MartingaleDensity martingale_density(std::span<const PieceFactor> pieces, double a, int r_max);

/// Integral of f over the disc |w - center| < radius, in polar coordinates
/// around `pole` so that a logarithmic singularity there is integrable.
double disc_integral(Point center, double radius, Point pole, const std::function<double(Point)>& f,
                     double rel_tol = 1e-9);

} // namespace thickpoints::continuum

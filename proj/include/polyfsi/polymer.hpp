#pragma once

#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/errors.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

enum class SpringKind { hookean, tanner, fene };

/// Physical constants of the solvent/solute system.
struct PhysicalParams {
    double mu;      // solvent viscosity
    double eps;     // center-of-mass diffusion coefficient
    double lambda;  // relaxation time
    double kpoly;   // polymer stress scale
    double dh;      // quadratic number-density stress coefficient
    Mat rouse;      // symmetric positive definite chain coupling matrix
    double a0;      // least eigenvalue of rouse

    static PhysicalParams from_config(const RunConfig& cfg);
};

/// Elastic spring law of one bead pair; potentials are functions of s = |q|^2/2.
struct SpringLaw {
    SpringKind kind = SpringKind::fene;
    double b = 10.0;     // extensibility parameter (fene)
    double slock = 5.0;  // locking value of s (tanner)
    int chains = 1;
    int dim = 2;

    /// Radius of the configuration domain B (one spring).
    double radius() const;

    /// True if B is bounded and the equilibrium weight vanishes on its boundary.
    bool weight_vanishes_on_boundary() const { return kind == SpringKind::fene; }

    double U(double s) const;
    double Uprime(double s) const;

    /// F(q) = U'(|q|^2/2) q; throws OutOfDomain outside B.
    Vec2 force(const Vec2& q) const;

    /// Unnormalized equilibrium weight exp(-U) as a function of r = |q|.
    double weight_unnorm(double r) const;

    /// d/dr of the unnormalized weight.
    double weight_unnorm_dr(double r) const;

    /// Partition function over B (analytic where available, else quadrature).
    double partition() const;

    static SpringLaw from_config(const RunConfig& cfg);
};

/// Quadrature over the configuration domain B (plain dq weights, area element included).
///
/// For the finitely extensible spring the radial rule integrates in u = r^2/b,
/// which concentrates nodes near the domain rim and makes all weight-times-polynomial
/// moments exact for even b.
struct QuadB {
    int nr = 0, nth = 0, n = 0;
    std::vector<double> r, th;     // polar coordinates per node (node index = i*nth + j)
    std::vector<double> q1, q2;    // Cartesian coordinates per node
    std::vector<double> w;         // plain dq weight per node
    std::vector<double> ru;        // radial abscissae (size nr)
    std::vector<double> rw;        // radial weights including area element (size nr)

    static QuadB build(const SpringLaw& law, int nr, int nth);
};

/// Tabulated equilibrium weight on a QuadB rule.
struct MaxwellianTable {
    double Z = 1.0;        // partition function
    double mass = 1.0;     // quadrature mass of M (should be 1 within 1e-8)
    double m_floor = 1e5;  // m in the floored weight
    Vec M;                 // normalized weight per node
    Vec Mm;                // floored weight max(M,0) + 1/m per node
    Vec M_dr;              // radial derivative of M per node

    static MaxwellianTable build(const SpringLaw& law, const QuadB& quad, double m_floor);
};

/// Smooth plateau cutoff: 1 on [-1,1], supported in (-2,2), C^2, even.
double cutoff_gamma(double s);
double cutoff_gamma_d(double s);

/// Gamma_ell(s) = Gamma(s/ell).
inline double cutoff_gamma_ell(double s, double ell) { return cutoff_gamma(s / ell); }

/// T_ell(s) = int_0^s Gamma_ell, odd, equals s on [-ell,ell], saturates at 1.5*ell.
double cutoff_T(double s, double ell);

/// Lambda_ell(s) = s * Gamma_ell(s).
inline double cutoff_Lambda(double s, double ell) { return s * cutoff_gamma_ell(s, ell); }

/// T_{delta,ell}(s) = int_0^s r Gamma_ell(r) / (r+delta) dr for s >= 0.
/// Closed form on the plateau, adaptive quadrature across the transition zone.
double cutoff_T_delta(double s, double ell, double delta);

/// Entropy integrand F(s) = s log s + 1/e (F(0) taken by limit).
double entropy_F(double s);

/// Shifted entropy F_delta(s) = (s+delta) log(s+delta) + 1/e.
double entropy_F_delta(double s, double delta);

}  // namespace polyfsi

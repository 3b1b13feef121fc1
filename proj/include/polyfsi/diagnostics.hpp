#pragma once

#include <functional>

#include "polyfsi/fluid.hpp"
#include "polyfsi/fokker_planck.hpp"
#include "polyfsi/shell.hpp"

namespace polyfsi {

/// All terms of the coupled energy functional plus the running dissipation and
/// forcing-work integrals. The instantaneous terms are filled by the assemblers
/// below; the accumulators belong to the trajectory owner and must never decrease.
struct EnergyBreakdown {
    double kinetic_fluid = 0.0;   // (1/2) int |u|^2 J
    double shell_kinetic = 0.0;   // (1/2) mean etadot^2
    double koiter = 0.0;          // K(eta)
    double regularizer = 0.0;     // varrho * L(eta)
    double xi_sup_sq = 0.0;       // sup|Xi|^2 over quadrature nodes
    double rel_entropy = 0.0;     // k int int M F(psi-hat) J

    double diss_viscous = 0.0;    // int mu |grad u|^2
    double diss_xi = 0.0;         // int eps |grad Xi|^2
    double fisher_x = 0.0;        // int int M |grad_x sqrt(psi)|^2 J
    double fisher_q = 0.0;        // int int M |grad_q sqrt(psi)|^2 J
    double work_f = 0.0;          // body-force work
    double work_g = 0.0;          // shell-force work

    /// Instantaneous energy: the sum of the six state terms (definitional).
    double total() const {
        return kinetic_fluid + shell_kinetic + koiter + regularizer + xi_sup_sq + rel_entropy;
    }
    bool finite() const;
};

/// Evaluate the instantaneous terms through the owning modules' quadratures.
/// Null module pointers leave their terms at zero. The shell line is taken from
/// the fluid state when the solver runs in coupled mode.
EnergyBreakdown assemble_breakdown(const FluidSolver& fluid, const FluidState& fs,
                                   const DomainMap* map, const KoiterShell* koiter, double varrho,
                                   const FPSolver* fp, const ConfigDensity* psi, double kpoly,
                                   const Vec* xi);

/// Independently coded slow path of the same terms: direct summation loops and a
/// naive discrete Fourier transform instead of the module linear algebra.
EnergyBreakdown assemble_breakdown_slow(const FluidSolver& fluid, const FluidState& fs,
                                        const DomainMap* map, const KoiterShell* koiter,
                                        double varrho, const FPSolver* fp,
                                        const ConfigDensity* psi, double kpoly, const Vec* xi);

/// Discrete sup-norm of a node-sampled scalar field.
double sup_abs_nodes(const Vec& values);

/// One-step transport-theorem bookkeeping: volume rate of int v over the moving
/// slab, the bulk time-derivative term, and the top-boundary flux term, with the
/// residual rate - bulk - boundary. Fields are functions of physical (x, z, t).
struct ReynoldsParts {
    double rate = 0.0;
    double bulk = 0.0;
    double boundary = 0.0;
    double residual = 0.0;
};

ReynoldsParts reynolds_parts(const std::function<double(double, double, double)>& v,
                             const std::function<double(double, double, double)>& vt,
                             const DomainMap* map_a, const DomainMap* map_b, double ta, double tb,
                             int nqx, int nqz);

double reynolds_residual(const std::function<double(double, double, double)>& v,
                         const std::function<double(double, double, double)>& vt,
                         const DomainMap* map_a, const DomainMap* map_b, double ta, double tb,
                         int nqx, int nqz);

}  // namespace polyfsi

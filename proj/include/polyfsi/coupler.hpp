#pragma once

#include <functional>
#include <string>
#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/diagnostics.hpp"
#include "polyfsi/fluid.hpp"
#include "polyfsi/fokker_planck.hpp"
#include "polyfsi/number_density.hpp"
#include "polyfsi/shell.hpp"
#include "polyfsi/stress.hpp"

namespace polyfsi {

/// Compactly supported bump mollifier family used by the coupling regularizers.
/// All widths scale with sqrt(varrho); discrete taps are normalized to unit mass
/// on the grid, so constants are reproduced exactly away from support boundaries.
struct RegularizationKernel {
    double varrho = 1e-2;
    double width_time = 0.0;
    double width_space = 0.0;
    double width_shell = 0.0;

    static RegularizationKernel from_config(const RunConfig& cfg);

    /// Symmetric discrete taps for grid spacing h: entry j is the weight at offset
    /// +-j, j = 0..m with m = floor(width/h); weights (1 - (j/(m+1))^2)^3, normalized
    /// so that taps[0] + 2 sum_{j>=1} taps[j] = 1. Width below h gives the identity.
    static std::vector<double> taps(double width, double h);
};

/// Cell-centered Cartesian velocity samples of one time node.
struct CenterField {
    Mat vx, vz;
};

/// Temporal mollification of a node history with even reflection at both ends.
std::vector<Vec> mollify_time(const std::vector<Vec>& hist, const std::vector<double>& taps);

/// Circular (periodic) mollification of a line.
Vec mollify_circular(const Vec& line, const std::vector<double>& taps);

/// Slab mollification of a center field: circular in x, extension by zero in z.
Mat mollify_slab(const Mat& f, const std::vector<double>& taps_x,
                 const std::vector<double>& taps_z);

/// R^varrho: spatial slab mollification composed with temporal mollification.
std::vector<CenterField> regularize_velocity(const std::vector<CenterField>& v,
                                             const RegularizationKernel& kernel, double dt);

/// r^varrho: periodic line mollification composed with temporal mollification.
std::vector<Vec> regularize_shell(const std::vector<Vec>& xi, const RegularizationKernel& kernel,
                                  double dt);

struct FixedPointConfig {
    double theta = 0.5;   // damping factor in (0, 1]
    double tol = 1e-7;    // discrete L2(I; L2) convergence tolerance on (xi, v) - (eta, u)
    int max_iter = 200;
    double margin = 1e-3;  // admissibility corridor (fraction of the collar bound)
    int halvings_max = 6;  // window halvings before NoConvergence

    static FixedPointConfig from_config(const RunConfig& cfg);
};

/// Non-owning wiring of the inner solvers plus the forcing samplers (physical
/// coordinates; null std::function = no forcing).
struct CoupledModules {
    FPSolver* fp = nullptr;
    XiSolver* xi = nullptr;
    FluidSolver* fluid = nullptr;
    KoiterShell* koiter = nullptr;
    StressEvaluator* stress = nullptr;
    const ReferenceShell* ref = nullptr;
    const RunConfig* cfg = nullptr;
    std::function<Vec2(double, double, double)> fbody;  // (x, z, t)
    std::function<double(double, double)> gshell;       // (x, t)
};

/// Committed coupled trajectory with per-node diagnostics. The dissipation
/// accumulators inside `energy` hold the raw integrals; the inequality weights
/// are applied by energy_ledger.
struct CoupledTrajectory {
    double dt = 0.0;
    std::vector<double> time;
    std::vector<FluidState> fluid;
    std::vector<ConfigDensity> psi;
    std::vector<Vec> xi;
    std::vector<FluidStepReport> reports;  // one per committed step
    std::vector<EnergyBreakdown> energy;   // one per node
    std::vector<double> production;        // accumulated drag production at nodes
    std::vector<double> young;             // accumulated forcing Young bound at nodes
    std::vector<double> fp_residuals;      // every Picard residual, all windows
    std::vector<double> windows;           // realized window lengths
    int iterations_total = 0;
    bool guard_tripped = false;
    double guard_sup_eta = 0.0;
    std::string guard_message;
};

/// Damped Picard fixed point over adaptive time windows. On an admissibility
/// guard trip the partial trajectory is returned with guard_tripped set (the
/// caller maps it to the admissibility exit path). Throws NoConvergence when
/// window halving is exhausted.
CoupledTrajectory fixed_point_solve(const CoupledModules& m, const FixedPointConfig& fpc,
                                    const RegularizationKernel& kernel, const FluidState& f0,
                                    const ConfigDensity& p0, const Vec& xi0, double t_end,
                                    double dt);

struct LedgerReport {
    bool ok = true;
    double max_slack = 0.0;   // max over nodes of (LHS - RHS)/max(1, |RHS|)
    int worst_node = 0;
    double lhs_worst = 0.0;
    double rhs_worst = 0.0;
    double max_energy_increase = 0.0;  // max per-step increase of the instantaneous energy
    std::string breakdown;             // per-term text at the worst node
};

/// Global inequality check: instantaneous energy plus weighted dissipation
/// accumulators against the initial energy plus the Young-split forcing bound.
LedgerReport energy_ledger(const CoupledTrajectory& traj, const PhysicalParams& params,
                           double tol_ineq, bool throw_on_violation);

struct RhoStudyReport {
    std::vector<double> rhos;
    std::vector<CoupledTrajectory> trajectories;
    std::vector<double> cauchy_u, cauchy_eta, cauchy_xi;  // consecutive-level distances
    std::vector<double> sup_reg;                          // sup_t varrho L(eta) per level
    bool cauchy_monotone = false;
    bool reg_drops = false;
};

/// Runs the supplied single-level runner for each varrho and reports the
/// consecutive Cauchy differences and the regularizer decay.
RhoStudyReport rho_refinement_study(const std::function<CoupledTrajectory(double)>& runner,
                                    const std::vector<double>& rhos);

}  // namespace polyfsi

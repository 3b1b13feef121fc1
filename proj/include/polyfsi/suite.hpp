#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/coupler.hpp"
#include "polyfsi/fokker_planck.hpp"
#include "polyfsi/geometry.hpp"
#include "polyfsi/number_density.hpp"
#include "polyfsi/shell.hpp"
#include "polyfsi/stress.hpp"

namespace polyfsi {

/// Fully wired solver set built from one configuration; owns all pieces.
struct SolverStack {
    RunConfig cfg;
    ReferenceShell ref;
    SpringLaw law;
    PhysicalParams params;
    QuadB quad;
    MaxwellianTable max;
    ConfigBasis cbasis;
    SpatialBasis sbasis;
    std::unique_ptr<FPSolver> fp;
    std::unique_ptr<XiSolver> xi;
    std::unique_ptr<FluidSolver> fluid;
    std::unique_ptr<KoiterShell> koiter;
    std::unique_ptr<StressEvaluator> stress;

    /// Non-owning wiring plus the forcing samplers selected by the config.
    CoupledModules modules() const;

    FluidState initial_fluid() const;
    ConfigDensity initial_psi() const;
    Vec initial_xi(const ConfigDensity& psi0) const;
};

std::unique_ptr<SolverStack> build_stack(const RunConfig& cfg);

struct CoupledRunResult {
    CoupledTrajectory traj;
    LedgerReport ledger;
    std::string out_dir;
};

/// Full coupled run: fixed point, ledger, and (optionally) the output files.
CoupledRunResult run_coupled(const RunConfig& cfg, bool write_outputs);

/// Prescribed-shear fixed-domain polymer run: configuration density and number
/// density under v = (rate * z, 0), solvent and shell frozen.
struct FpkRunResult {
    std::vector<double> time;
    std::vector<double> entropy;      // weighted k * int int M F(psi) per node
    std::vector<double> fisher_x_acc; // raw accumulators at nodes
    std::vector<double> fisher_q_acc;
    std::vector<double> production_acc;
    std::vector<double> min_psi, mass;
    std::vector<double> xi_sup, xi_norm2, xi_diss_acc;
    std::vector<Vec> xi_history;
    std::vector<ConfigDensity> psi_history;  // filled only when keep_states
    double entropy_slack = 0.0;              // worst relative ledger slack
    double mass_drift = 0.0;                 // worst |mass - mass0| per step
    double min_psi_all = 0.0;
    double xi_sup_growth = 0.0;              // max sup|Xi_n| / sup|Xi_0| - 1
    double xi_identity_gap = 0.0;            // fixed-domain norm/dissipation balance
    std::string out_dir;
};
FpkRunResult run_fpk(const RunConfig& cfg, bool write_outputs, bool keep_states = false);

struct ShellRunResult {
    std::vector<double> time, kinetic, elastic, regularizer, total;
    double max_increase = 0.0;  // largest per-step growth of the total energy
    ShellState final_state;
    std::string out_dir;
};
ShellRunResult run_shell(const RunConfig& cfg, bool write_outputs);

struct SweepResult {
    RhoStudyReport report;
    std::string out_dir;
};
/// Regularization-refinement study at the given strengths (default 1e-1, 1e-2, 1e-3).
SweepResult run_sweep_rho(const RunConfig& cfg, bool write_outputs,
                          std::vector<double> rhos = {1e-1, 1e-2, 1e-3});

/// Validation suite shared by the CLI and CI; prints one line per case.
bool run_validation(bool full, std::ostream& os);

/// `simulate` dispatch on run.scenario; writes outputs; returns the exit code.
int run_scenario(const RunConfig& cfg, std::ostream& os);

}  // namespace polyfsi

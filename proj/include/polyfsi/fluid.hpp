#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "polyfsi/geometry.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Staggered-grid state of the solvent on the reference slab, plus the shell
/// displacement/velocity line carried by the coupled stepper.
struct FluidState {
    Mat u1;       // nx x nz, horizontal velocity at vertical faces (i*h1, (j+1/2)*h2)
    Mat u2;       // nx x (nz+1), vertical velocity at horizontal faces ((i+1/2)*h1, j*h2)
    Vec p;        // nx*nz cell-centered pressure (time-staggered)
    Vec eta;      // shell displacement line (coupled mode), size n_shell
    Vec etadot;   // shell velocity line (coupled mode)
    double t = 0.0;
};

/// Per-step data of the linearized momentum/shell system. All spatial samples are
/// midpoint-in-time values; maps may be null for the static slab.
struct FluidStepData {
    const DomainMap* map_n = nullptr;
    const DomainMap* map_np1 = nullptr;
    std::vector<Vec2> conv_v;    // convective (transport) velocity at cell centers; empty = none
    std::vector<Mat2> stress;    // polymer stress tensor at cell centers; empty = none
    std::vector<Vec2> fbody;     // body force at cell centers; empty = none
    Vec kprime;                  // explicit elastic gradient at shell nodes (coupled)
    Vec shell_stab;              // 1/2 d/dt(regularized shell) stabilization coefficient
    Vec gshell;                  // shell forcing at shell nodes
    double varrho = 0.0;         // regularizer weight (coupled)
};

/// Energy bookkeeping of one step, all terms evaluated at the midpoint velocity.
struct FluidStepReport {
    double kinetic_new = 0.0;       // (1/2) int |u|^2 J at the new time
    double viscous = 0.0;           // mu * |gradient of u_mid|^2 form value
    double skew_defect = 0.0;       // convection pairing against u_mid (exactly skew)
    double pressure_defect = 0.0;   // p-row pairing against u_mid (0 on static domains)
    double mass_defect = 0.0;       // moving-mass midpoint defect
    double stress_power = 0.0;      // stress load against u_mid
    double body_power = 0.0;        // body-force load against u_mid
    double shell_kinetic_new = 0.0; // (1/2) mean etadot^2 at the new time
    double shell_reg_power = 0.0;   // varrho regularizer pairing (exact energy rate)
    double shell_elastic_power = 0.0;  // explicit elastic gradient against etadot_mid
    double shell_stab_power = 0.0;  // stabilization pairing
    double shell_force_power = 0.0; // shell forcing against etadot_mid
    double body_l2sq = 0.0;         // |f|^2 with the midpoint mass weights (Young bound)
    double umid_l2sq = 0.0;         // |u_mid|^2 with the midpoint mass weights
    double shell_force_l2sq = 0.0;  // mean g^2 on the shell line
    double etadot_mid_l2sq = 0.0;   // mean etadot_mid^2
};

/// Incompressible solvent on the moving slab: implicit midpoint saddle solve with
/// flux-exact divergence at the new time, skew-symmetrized transport, and either
/// closed rigid walls (standalone mode) or a top boundary carried by the shell
/// velocity line (coupled mode; the shell momentum rows are solved monolithically).
class FluidSolver {
   public:
    /// n_shell = 0 selects the standalone closed-box mode.
    FluidSolver(int nx, int nz, double mu, int n_shell);

    int nx() const { return nx_; }
    int nz() const { return nz_; }
    int cells() const { return nx_ * nz_; }
    int n_shell() const { return nsh_; }
    double xc(int i) const { return (i + 0.5) * h1_; }
    double zc(int j) const { return (j + 0.5) * h2_; }

    FluidState make_state() const;

    void step(FluidState& s, const FluidStepData& data, double dt);
    const FluidStepReport& last_report() const { return report_; }

    /// Flux divergence per cell under the given metric (null = static).
    Vec divergence(const FluidState& s, const DomainMap* map) const;

    /// Largest violation of the kinematic top condition u2_top = interp(etadot).
    double trace_gap(const FluidState& s) const;

    /// (1/2) int |u|^2 J with the lumped staggered measure.
    double kinetic_energy(const FluidState& s, const DomainMap* map) const;

    /// Static-slab projection onto the discrete flux-divergence-free space, keeping
    /// the boundary rows of u2 fixed; pressure potential has zero mean.
    void project_divergence_free(Mat& u1, Mat& u2) const;

    /// Load exerted on the shell nodes by a pressure field alone (flat static metric
    /// check: constant p yields the constant line p * area factor).
    Vec shell_pressure_force(const Vec& p, const DomainMap* map) const;

    /// Spectral interpolation matrix from the shell line to the top-face x-positions.
    const Mat& top_interp() const { return binterp_; }

   private:
    struct Metric;      // samples of (J, a, c, 1/c, a/c, mesh velocity) on all families
    struct Operators;   // one step's sparse difference/interp operator set

    Metric sample_metric(const DomainMap* m1, const DomainMap* m2) const;
    Operators build_operators(const Metric& met) const;
    Eigen::SparseMatrix<double> build_theta(const Metric& met) const;
    Vec flatten(const FluidState& s) const;
    void unflatten(const Vec& u, FluidState& s) const;
    Vec mass_diag(const Metric& met) const;
    const Eigen::SparseMatrix<double>& dhat() const;
    Vec dhat_transpose_times(const Vec& cellvals) const;

    int u1_id(int i, int j) const { return i * nz_ + j; }
    int u2_id(int i, int j) const { return nx_ * nz_ + i * (nz_ + 1) + j; }
    int cid(int i, int j) const { return i * nz_ + j; }
    int kid(int i, int j) const { return i * (nz_ + 1) + j; }

    int nx_, nz_, nsh_;
    double h1_, h2_, mu_;
    int nv_;                     // full staggered dof count
    Mat binterp_;                // nx x n_shell spectral interpolation (coupled)
    Mat lmat_;                   // n_shell x n_shell regularizer gradient matrix
    Eigen::SparseMatrix<double> embed_;  // full dofs from [interior; shell-line] unknowns
    int n_int_ = 0;              // interior velocity unknowns
    mutable Eigen::SparseMatrix<double> dhat_;  // cell flux-divergence stencil (lazy)
    FluidStepReport report_;
};

/// Regularizer energy of a periodic line: sum over modes of |2 pi k|^10 |hat eta_k|^2.
double line_regularizer_energy(const Vec& eta);

/// Gradient matrix of line_regularizer_energy w.r.t. the mean inner product
/// (1/n) sum_i a_i b_i: symbol 2 |2 pi k|^10.
Mat line_regularizer_gradient_matrix(int n);

}  // namespace polyfsi
